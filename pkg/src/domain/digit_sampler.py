"""Random digit sequences under the Gauss measure, gamma_a, and baselines.

Modes:
    exact    big-integer cylinder chain; the digit law is exactly gamma
    gamma_a  Brodén-Borel-Lévy chain started at s = a (exact gamma_a law)
    mixture  a ~ gamma, then the gamma_a chain; exactly gamma again
    float    x ~ gamma in mpmath, digits by iterating the Gauss map
    luroth   i.i.d. digits with P(k) = 1/(k(k+1))

Every trajectory owns a numpy Generator derived from (seed, index), so
results do not depend on how trajectories are spread over workers.
"""

from __future__ import annotations

import math
import struct
import sys
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from src.config import SamplerConfig
from src.domain.cf_core import digits_of_real, push_digit
from src.domain.errors import DomainError, PrecisionHorizonError
from src.domain.gauss_measure import cylinder_of_state
from src.domain.models import DIGIT_CAP, ConvergentState, CylinderSpec

LOG2 = math.log(2.0)

# Above this size of q_n the log1p correction is below double precision
_CORRECTION_BITS = 32


def _log(msg: str):
    print(msg, file=sys.stderr)


class SamplerMode(str, Enum):
    EXACT = "exact"
    GAMMA_A = "gamma_a"
    MIXTURE = "mixture"
    FLOAT = "float"
    LUROTH = "luroth"


VECTOR_MODES = (SamplerMode.GAMMA_A, SamplerMode.MIXTURE, SamplerMode.LUROTH)


@dataclass(frozen=True)
class SeedSpec:
    """(master seed, trajectory index) -> independent reproducible stream."""

    seed: int
    index: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.index < 0:
            raise DomainError(f"trajectory index must be >= 0, got {self.index}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.index,)))
        )


def seed_bank(seed: int, trials: int, start: int = 0) -> List[SeedSpec]:
    return [SeedSpec(seed, i) for i in range(start, start + trials)]


def _uniform_open0(rng: np.random.Generator) -> float:
    """Uniform on (0, 1]."""
    return 1.0 - rng.random()


# ── Gauss-distributed points ────────────────────────────────


def gauss_inverse_cdf(u: float) -> float:
    """2^u - 1."""
    return math.expm1(u * LOG2)


def sample_x_gauss(rng: np.random.Generator) -> float:
    """A gamma-distributed point of the open interval (0, 1)."""
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return gauss_inverse_cdf(u)


# ── Exact cylinder chain ────────────────────────────────────


@dataclass(frozen=True)
class ChainState:
    """Convergents of the digits emitted so far plus the trajectory's RNG."""

    convergents: ConvergentState
    rng: Optional[np.random.Generator] = None

    @classmethod
    def start(cls, rng: Optional[np.random.Generator] = None) -> "ChainState":
        return cls(convergents=ConvergentState.seed(), rng=rng)

    @property
    def n(self) -> int:
        return self.convergents.n

    @property
    def cylinder(self) -> CylinderSpec:
        return cylinder_of_state(self.convergents)


class _Tail:
    """P(a_{n+1} >= K | a_1..a_n) for one convergent state.

    With s = q_{n-1}/q_n and delta_K = (-1)^n / (q_n (p_n + q_n) (K + s)):

        T(K) = (1 + s)/(K + s) * g(delta_K)/g(delta_1),  g(d) = log1p(d)/d
    """

    __slots__ = ("s", "base", "g1", "corrected")

    def __init__(self, st: ConvergentState):
        self.s = st.q_prev / st.q_cur
        self.corrected = st.q_cur.bit_length() < _CORRECTION_BITS
        if self.corrected:
            sign = 1 if st.n % 2 == 0 else -1
            self.base = sign / (st.q_cur * (st.p_cur + st.q_cur))
            self.g1 = self._g(self.base / (1 + self.s))
        else:
            self.base = 0.0
            self.g1 = 1.0

    @staticmethod
    def _g(d: float) -> float:
        return 1.0 if d == 0 else math.log1p(d) / d

    def __call__(self, k: int) -> float:
        head = (1 + self.s) / (k + self.s)
        if not self.corrected:
            return head
        return head * self._g(self.base / (k + self.s)) / self.g1

    def invert(self, u: float) -> int:
        """Largest K with T(K) >= u, for u in (0, 1]."""
        s = self.s
        k = max(1, math.floor((1 + s) / u - s))
        if not self.corrected:
            return k
        if self(k) >= u:
            lo, step = k, 1
            while self(lo + step) >= u:
                lo += step
                step *= 2
            hi = lo + step
        else:
            hi, step = k, 1
            while hi - step > 1 and self(hi - step) < u:
                hi -= step
                step *= 2
            lo = max(1, hi - step)
        # T(lo) >= u > T(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self(mid) >= u:
                lo = mid
            else:
                hi = mid
        return lo


def tail_probability(state: ChainState, k: int) -> float:
    """P(a_{n+1} >= k | emitted prefix)."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return _Tail(state.convergents)(k)


def conditional_digit_prob(state: ChainState, k: int) -> float:
    """P(a_{n+1} = k | emitted prefix)."""
    tail = _Tail(state.convergents)
    return tail(k) - tail(k + 1)


def next_digit_exact(state: ChainState) -> Tuple[int, ChainState]:
    """Draw a_{n+1} from its exact conditional law under gamma."""
    if state.rng is None:
        raise DomainError("ChainState has no random generator")
    tail = _Tail(state.convergents)
    while True:
        k = tail.invert(_uniform_open0(state.rng))
        if k <= DIGIT_CAP:
            break
        _log(f"digit {k} above cap at n={state.n + 1}; redrawing")
    return k, replace(state, convergents=push_digit(state.convergents, k))


def _exact_digits(rng: np.random.Generator, n: int) -> List[int]:
    state = ChainState.start(rng)
    out = []
    for _ in range(n):
        k, state = next_digit_exact(state)
        out.append(k)
    return out


# ── gamma_a chain ───────────────────────────────────────────


def gamma_a_digit(s: float, u: float) -> Tuple[int, float]:
    """Invert P(a >= k | s) = (s+1)/(s+k) at u in (0, 1]; return (k, 1/(s+k))."""
    k = max(1, math.floor((s + 1) / u - s))
    return k, 1.0 / (s + k)


def next_digit_gamma_a(s: float, rng: np.random.Generator) -> Tuple[int, float]:
    if not 0 <= s <= 1:
        raise DomainError(f"s must lie in [0, 1], got {s}")
    return gamma_a_digit(s, _uniform_open0(rng))


def _gamma_a_block(s0: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Vectorized gamma_a chain; row i starts at s0[i] and consumes uniforms[i]."""
    s = s0.astype(float).copy()
    out = np.empty(uniforms.shape, dtype=np.int64)
    for j in range(uniforms.shape[1]):
        u = uniforms[:, j]
        k = np.maximum(1.0, np.floor((s + 1.0) / u - s))
        out[:, j] = k.astype(np.int64)
        s = 1.0 / (s + k)
    return out


# ── float mode ──────────────────────────────────────────────


def _random_mp_uniform(rng: np.random.Generator, nbytes: int, prior: int = 0, prior_bytes: int = 0):
    """Extend a random integer by nbytes of fresh low-order bytes."""
    fresh = int.from_bytes(rng.bytes(nbytes), "little")
    return (prior << (8 * nbytes)) | fresh, prior_bytes + nbytes


def _float_digits(rng: np.random.Generator, n: int, cfg: SamplerConfig, max_extensions: int = 3) -> List[int]:
    bits = cfg.float_precision(n)
    value, nbytes = _random_mp_uniform(rng, (bits + 7) // 8)
    for attempt in range(max_extensions + 1):
        prec = 8 * nbytes
        with mpmath.workprec(prec + 16):
            u = (mpmath.mpf(value) + mpmath.mpf(0.5)) / mpmath.mpf(2) ** prec
            x = mpmath.expm1(u * mpmath.log(2))
        exp = digits_of_real(x, n, precision_bits=prec)
        if exp.horizon >= n:
            return exp.digits[:n]
        if attempt < max_extensions:
            value, nbytes = _random_mp_uniform(rng, (bits + 7) // 8, value, nbytes)
    raise PrecisionHorizonError(requested=n, horizon=exp.horizon)


# ── Lüroth baseline ─────────────────────────────────────────


def luroth_digit(u: float) -> int:
    """floor(1/u) for u in (0, 1]: P(k) = 1/(k(k+1))."""
    return math.floor(1.0 / u)


def luroth_baseline(seed: SeedSpec, n: int) -> List[int]:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = seed.generator()
    u = 1.0 - rng.random(n)
    return [int(k) for k in np.floor(1.0 / u).astype(np.int64)]


# ── trajectories ────────────────────────────────────────────


def _check_request(n: int, mode: SamplerMode, cfg: SamplerConfig):
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if mode is SamplerMode.EXACT and n > cfg.exact_cap:
        raise DomainError(
            f"exact mode is capped at {cfg.exact_cap} digits (CF_LAB_EXACT_CAP); "
            f"use mixture mode for n={n}"
        )


def _check_a(a: Optional[float]) -> float:
    if a is None:
        raise DomainError("gamma_a mode needs the parameter a")
    if not 0 <= a <= 1:
        raise DomainError(f"a must lie in [0, 1], got {a}")
    return float(a)


def sample_trajectory(
    seed: SeedSpec,
    n: int,
    mode: str = SamplerMode.EXACT,
    a: Optional[float] = None,
    burn_in: int = 0,
    config: Optional[SamplerConfig] = None,
) -> List[int]:
    """n digits of one trajectory; identical inputs give identical output.

    burn_in digits are generated and discarded first (gamma_a mode only).
    """
    mode = SamplerMode(mode)
    cfg = config or SamplerConfig()
    _check_request(n, mode, cfg)
    if mode in VECTOR_MODES:
        return [int(k) for k in sample_block([seed], n, mode, a=a, burn_in=burn_in)[0]]
    rng = seed.generator()
    if mode is SamplerMode.EXACT:
        return _exact_digits(rng, n)
    return _float_digits(rng, n, cfg)


def _row_uniforms(seed: SeedSpec, count: int, lead: bool) -> Tuple[float, np.ndarray]:
    rng = seed.generator()
    first = rng.random() if lead else 0.0
    return first, 1.0 - rng.random(count)


def sample_block(
    seeds: Sequence[SeedSpec],
    n: int,
    mode: str = SamplerMode.MIXTURE,
    a: Optional[float] = None,
    burn_in: int = 0,
    config: Optional[SamplerConfig] = None,
) -> np.ndarray:
    """Digits for many trajectories as an int64 array of shape (len(seeds), n).

    gamma_a, mixture and luroth rows are computed column-wise across all
    trajectories; other modes fall back to one trajectory at a time.
    """
    mode = SamplerMode(mode)
    cfg = config or SamplerConfig()
    _check_request(n, mode, cfg)
    if burn_in < 0:
        raise DomainError(f"burn_in must be >= 0, got {burn_in}")
    if mode not in VECTOR_MODES:
        return np.array([sample_trajectory(sd, n, mode, config=cfg) for sd in seeds], dtype=np.int64)

    skip = burn_in if mode is SamplerMode.GAMMA_A else 0
    rows = [_row_uniforms(sd, n + skip, lead=mode is SamplerMode.MIXTURE) for sd in seeds]
    uniforms = np.array([r[1] for r in rows], dtype=float).reshape(len(seeds), n + skip)
    if mode is SamplerMode.LUROTH:
        return np.floor(1.0 / uniforms).astype(np.int64)
    if mode is SamplerMode.GAMMA_A:
        s0 = np.full(len(seeds), _check_a(a))
    else:
        s0 = np.expm1(np.array([r[0] for r in rows], dtype=float) * LOG2)
    return _gamma_a_block(s0, uniforms)[:, skip:]


# ── stream formats ──────────────────────────────────────────


def write_stream(digits: Sequence[int], fmt: str = "text") -> bytes:
    """Newline-delimited integers, or u64 LE count followed by u64 LE digits."""
    if fmt == "text":
        return "".join(f"{int(d)}\n" for d in digits).encode("ascii")
    if fmt == "binary":
        arr = np.asarray(digits, dtype="<u8")
        return struct.pack("<Q", len(arr)) + arr.tobytes()
    raise DomainError(f"unknown stream format {fmt!r}")


def read_stream(data: bytes, fmt: str = "text") -> List[int]:
    if fmt == "text":
        return [int(line) for line in data.decode("ascii").split()]
    if fmt == "binary":
        if len(data) < 8:
            raise DomainError("binary stream shorter than its count header")
        (count,) = struct.unpack_from("<Q", data)
        if len(data) != 8 + 8 * count:
            raise DomainError(f"binary stream declares {count} digits but holds {(len(data) - 8) // 8}")
        return [int(d) for d in np.frombuffer(data, dtype="<u8", offset=8)]
    raise DomainError(f"unknown stream format {fmt!r}")
