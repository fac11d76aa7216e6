"""0-1 laws for digit events: governing series, verdicts, empirical limsup.

For each event family the probability that A_n happens infinitely often
is 0 or 1 according as a governing series converges or diverges:

    threshold   a_n >= b_n                 sum 1/b_n
    equal       a_n = d_n                  sum 1/d_n^2
    closed band d_n <= a_n <= d_n + d_n/c_n   max(sum 1/(c_n d_n), sum 1/d_n^2)
    open band   d_n < a_n <= d_n + d_n/c_n    sum over {c_n <= d_n} of 1/(c_n d_n)

Convergence of an arbitrary expression cannot be decided, so verdicts are
certified only for constant families and for families matching a
registered preset whose terms have been checked against a power-log
comparison series. Everything else is INCONCLUSIVE with partial sums.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import SamplerConfig
from src.domain.digit_sampler import SamplerMode, sample_block, seed_bank
from src.domain.errors import DomainError
from src.domain.events import EventFamily, EventKind, closed_band, equal, open_band, threshold
from src.domain.gauss_measure import event_measures
from src.domain.mixing_lab import MIXING_CONSTANTS, phi_bound, psi_bound
from src.ports.outbound import TrajectoryRunnerPort

# Partial-sum level the comparison series must pass for a divergence witness
DIVERGENCE_THRESHOLD = 50.0

_REL_TOL = 1e-12


def _log(msg: str):
    print(msg, file=sys.stderr)


class VerdictKind(str, Enum):
    AS_INFINITELY_OFTEN = "AS_INFINITELY_OFTEN"
    AS_FINITELY_OFTEN = "AS_FINITELY_OFTEN"
    INCONCLUSIVE = "INCONCLUSIVE"


class SeriesMethod(str, Enum):
    PARTIAL_SUM = "partial_sum"
    INTEGRAL_TEST = "integral_test"


# ── Governing series ────────────────────────────────────────


@dataclass
class CriterionSeries:
    """Term function of the series that decides the 0-1 law for a family."""

    family: EventFamily
    clt_variant: bool = False

    @property
    def description(self) -> str:
        kind = self.family.kind
        if kind is EventKind.THRESHOLD:
            base = "sum 1/b_n"
            return base + " over {n : b_n > 1}" if self.clt_variant else base
        if kind is EventKind.EQUAL:
            return "sum 1/d_n^2"
        if kind is EventKind.CLOSED_BAND:
            return "max(sum 1/(c_n d_n), sum 1/d_n^2)"
        return "sum 1/(c_n d_n) over {n : c_n <= d_n}"

    @property
    def restriction(self) -> Optional[str]:
        if self.family.kind is EventKind.OPEN_BAND:
            return "c_n <= d_n"
        if self.family.kind is EventKind.THRESHOLD and self.clt_variant:
            return "b_n > 1"
        return None

    def term(self, n: int) -> float:
        """n-th term; 0 below n0 and outside the index restriction.

        The closed band uses 1/(c d) + 1/d^2, which converges exactly when
        the larger of the two series does.
        """
        fam = self.family
        if n < fam.n0:
            return 0.0
        if fam.kind is EventKind.THRESHOLD:
            b = fam.b.positive(n)
            if self.clt_variant and not b > 1:
                return 0.0
            return 1.0 / b
        d = fam.integer_term("d", n)
        if fam.kind is EventKind.EQUAL:
            return 1.0 / (d * d)
        c = fam.c.positive(n)
        if fam.kind is EventKind.CLOSED_BAND:
            return 1.0 / (c * d) + 1.0 / (d * d)
        return 1.0 / (c * d) if c <= d else 0.0

    def terms(self, horizon: int) -> np.ndarray:
        """Terms for n = 1..horizon (array index n-1)."""
        return np.array([self.term(n) for n in range(1, horizon + 1)], dtype=float)


def criterion_series(family: EventFamily, clt_variant: bool = False) -> CriterionSeries:
    return CriterionSeries(family=family, clt_variant=clt_variant)


# ── Comparison series ───────────────────────────────────────


@dataclass(frozen=True)
class PowerLogSeries:
    """coef / (n^p (log n)^q) for n >= n1, as a lower or upper bound on terms."""

    p: float
    q: float
    coef: float = 1.0
    n1: int = 2
    role: str = "lower"

    @property
    def diverges(self) -> bool:
        return self.p < 1 or (self.p == 1 and self.q <= 1)

    def bound(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        out = self.coef / n**self.p
        if self.q:
            out = out / np.log(n) ** self.q
        return out

    def tail_bound(self, N: int) -> float:
        """Upper bound on sum_{n > N} of the comparison terms (convergent case)."""
        if self.diverges:
            return math.inf
        if self.p == 1:
            return self.coef * math.log(N) ** (1 - self.q) / (self.q - 1)
        return self.coef * N ** (1 - self.p) / ((self.p - 1) * math.log(N) ** max(self.q, 0))

    def log10_threshold_index(self, level: float) -> Optional[float]:
        """log10 of the index where the comparison integral from n1 passes `level`."""
        if self.p != 1 or self.q > 1:
            return None
        ln_n1 = math.log(self.n1)
        if self.q == 0:
            return (level / self.coef + ln_n1) / math.log(10)
        return ln_n1 * math.exp(level / self.coef) / math.log(10)

    def verify(self, terms: np.ndarray, start: int, horizon: int) -> Tuple[bool, Optional[int]]:
        """Check the bound term by term on [max(n1, start), horizon].

        Returns (ok, first failing index).
        """
        lo = max(self.n1, start)
        if lo > horizon:
            return True, None
        n = np.arange(lo, horizon + 1)
        t = terms[lo - 1 : horizon]
        b = self.bound(n)
        if self.role == "lower":
            bad = t < b * (1 - _REL_TOL)
        else:
            bad = t > b * (1 + _REL_TOL)
        if bad.any():
            return False, int(n[np.argmax(bad)])
        return True, None


# ── Presets ─────────────────────────────────────────────────


@dataclass(frozen=True)
class ZeroOnePreset:
    name: str
    kind: str
    sequences: Dict[str, str]
    n0: int
    comparison: Optional[PowerLogSeries]
    expected: VerdictKind
    note: str = ""

    def family(self) -> EventFamily:
        factory = {
            "threshold": threshold,
            "equal": equal,
            "closed_band": closed_band,
            "open_band": open_band,
        }[self.kind]
        return factory(**self.sequences, n0=self.n0, name=self.name)


_SQRT_NLOGN = "floor(sqrt(n*log(n)))"

ZERO_ONE_PRESETS: Dict[str, ZeroOnePreset] = {
    p.name: p
    for p in [
        ZeroOnePreset(
            "sqrt-nlogn-equal", "equal", {"d": _SQRT_NLOGN}, 2,
            PowerLogSeries(1, 1, 1.0, 2, "lower"), VerdictKind.AS_INFINITELY_OFTEN,
            "d_n^2 <= n log n, so 1/d_n^2 >= 1/(n log n)",
        ),
        ZeroOnePreset(
            "sqrtn-logn-equal", "equal", {"d": "floor(sqrt(n)*log(n))"}, 3,
            PowerLogSeries(1, 2, 4.0, 3, "upper"), VerdictKind.AS_FINITELY_OFTEN,
            "floor(x) >= x/2 for x >= 1, so 1/d_n^2 <= 4/(n log^2 n)",
        ),
        ZeroOnePreset(
            "threshold-n", "threshold", {"b": "n"}, 1,
            PowerLogSeries(1, 0, 1.0, 2, "lower"), VerdictKind.AS_INFINITELY_OFTEN,
            "harmonic series",
        ),
        ZeroOnePreset(
            "threshold-nlogn", "threshold", {"b": "n*log(n)"}, 2,
            PowerLogSeries(1, 1, 1.0, 2, "lower"), VerdictKind.AS_INFINITELY_OFTEN,
            "sum 1/(n log n) diverges",
        ),
        ZeroOnePreset(
            "threshold-nlog2n", "threshold", {"b": "n*log(n)^2"}, 2,
            PowerLogSeries(1, 2, 1.0, 2, "upper"), VerdictKind.AS_FINITELY_OFTEN,
            "sum 1/(n log^2 n) converges",
        ),
        ZeroOnePreset(
            "threshold-2", "threshold", {"b": "2"}, 1,
            None, VerdictKind.AS_INFINITELY_OFTEN, "constant terms",
        ),
        ZeroOnePreset(
            "closed-band-2d", "closed_band", {"c": "2*" + _SQRT_NLOGN, "d": _SQRT_NLOGN}, 2,
            PowerLogSeries(1, 1, 1.5, 2, "lower"), VerdictKind.AS_INFINITELY_OFTEN,
            "c_n = 2 d_n reduces the band to a_n = d_n",
        ),
        ZeroOnePreset(
            "open-band-logn-n", "open_band", {"c": "log(n)", "d": "n"}, 3,
            PowerLogSeries(1, 1, 1.0, 3, "lower"), VerdictKind.AS_INFINITELY_OFTEN,
            "c_n <= d_n always; terms 1/(n log n)",
        ),
        ZeroOnePreset(
            "open-band-sqrtn-n", "open_band", {"c": "floor(sqrt(n))", "d": "n"}, 1,
            PowerLogSeries(1.5, 0, 2.0, 1, "upper"), VerdictKind.AS_FINITELY_OFTEN,
            "floor(sqrt n) >= sqrt(n)/2, terms <= 2 n^(-3/2)",
        ),
    ]
}


def preset_family(name: str) -> EventFamily:
    try:
        return ZERO_ONE_PRESETS[name].family()
    except KeyError:
        known = ", ".join(sorted(ZERO_ONE_PRESETS))
        raise DomainError(f"unknown preset {name!r}; known presets: {known}") from None


def _signature(family: EventFamily) -> Tuple[str, Tuple[Tuple[str, str], ...]]:
    seqs = tuple(sorted((k, v.replace(" ", "")) for k, v in family.sequences().items()))
    return family.kind.value, seqs


def lookup_preset(family: EventFamily) -> Optional[ZeroOnePreset]:
    sig = _signature(family)
    for preset in ZERO_ONE_PRESETS.values():
        if _signature(preset.family()) == sig:
            return preset
    return None


# ── Verdicts ────────────────────────────────────────────────


@dataclass
class Verdict:
    kind: VerdictKind
    test: str
    series: str
    horizon: int
    partial_sums: Dict[int, float] = field(default_factory=dict)
    comparison: Optional[str] = None
    tail_bound: Optional[float] = None
    log10_divergence_index: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.kind.value,
            "test": self.test,
            "series": self.series,
            "horizon": self.horizon,
            "partial_sums": {str(k): v for k, v in self.partial_sums.items()},
            "comparison": self.comparison,
            "tail_bound": self.tail_bound,
            "log10_divergence_index": self.log10_divergence_index,
            "notes": list(self.notes),
        }


def horizon_ladder(horizon: int) -> List[int]:
    """Powers of ten up to horizon, plus horizon itself."""
    ladder = []
    t = 10
    while t < horizon:
        ladder.append(t)
        t *= 10
    ladder.append(horizon)
    return ladder


def _is_constant(family: EventFamily) -> bool:
    return all(getattr(family, k).is_constant for k in family.sequences())


def series_verdict(
    family: EventFamily,
    horizon: int = 10_000,
    method: str = SeriesMethod.INTEGRAL_TEST,
    clt_variant: bool = False,
    terms: Optional[np.ndarray] = None,
) -> Verdict:
    """Classify the governing series of `family`.

    partial_sum can certify divergence only; integral_test also certifies
    convergence with an explicit tail bound. `terms` may be supplied to
    replace the governing series (e.g. gamma(B_n) for the CLT check).
    """
    method = SeriesMethod(method)
    if horizon < 1000:
        raise DomainError(f"horizon must be >= 1000, got {horizon}")
    series = criterion_series(family, clt_variant)
    description = series.description if terms is None else "sum of supplied terms"
    if terms is None:
        terms = series.terms(horizon)
    cumulative = np.cumsum(terms)
    partial = {t: float(cumulative[t - 1]) for t in horizon_ladder(horizon)}
    verdict = Verdict(
        kind=VerdictKind.INCONCLUSIVE,
        test=method.value,
        series=description,
        horizon=horizon,
        partial_sums=partial,
    )

    if _is_constant(family):
        tail = terms[family.n0 - 1 :]
        if not tail.any():
            verdict.kind = VerdictKind.AS_FINITELY_OFTEN
            verdict.test = "empty"
            verdict.tail_bound = 0.0
            verdict.notes.append("every term vanishes: the series is zero")
        elif np.allclose(tail, tail[0]):
            verdict.kind = VerdictKind.AS_INFINITELY_OFTEN
            verdict.test = "constant"
            verdict.notes.append(f"constant positive terms {tail[0]:.6g}")
        return verdict

    preset = lookup_preset(family)
    if preset is None or preset.comparison is None:
        verdict.notes.append("no registered comparison series; partial sums only")
        return verdict

    cmp = preset.comparison
    verdict.comparison = (
        f"{cmp.role} bound {cmp.coef:g}/(n^{cmp.p:g} log(n)^{cmp.q:g}) for n >= {cmp.n1} "
        f"({preset.note})"
    )
    ok, bad_n = cmp.verify(terms, family.n0, horizon)
    if not ok:
        verdict.notes.append(f"comparison bound fails at n={bad_n}")
        return verdict

    if cmp.role == "lower" and cmp.diverges:
        verdict.kind = VerdictKind.AS_INFINITELY_OFTEN
        verdict.log10_divergence_index = cmp.log10_threshold_index(DIVERGENCE_THRESHOLD)
        verdict.notes.append(
            f"comparison series diverges; its sum passes {DIVERGENCE_THRESHOLD:g} "
            f"beyond 10^{verdict.log10_divergence_index:.4g}"
        )
    elif cmp.role == "upper" and not cmp.diverges:
        if method is SeriesMethod.PARTIAL_SUM:
            verdict.notes.append("partial sums cannot certify convergence")
            return verdict
        verdict.kind = VerdictKind.AS_FINITELY_OFTEN
        verdict.tail_bound = float(cumulative[-1]) + cmp.tail_bound(horizon)
        verdict.notes.append("integral test: total sum bounded by partial sum + tail bound")
    else:
        verdict.notes.append("comparison points the wrong way for a certificate")
    return verdict


# ── Empirical side ──────────────────────────────────────────


@dataclass
class HitReport:
    hit_times: List[int]
    counts: Dict[int, int]


def _hit_mask(digits: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """digits has shape (..., T); lo/hi are range tables with index 0 unused."""
    T = digits.shape[-1]
    return (digits >= lo[1 : T + 1]) & (digits <= hi[1 : T + 1])


def empirical_hits(
    digits: Sequence[int],
    family: EventFamily,
    horizon: int,
    ladder: Optional[Sequence[int]] = None,
) -> HitReport:
    """Hit times n <= horizon with a_n in A_n, and N(T) along a ladder of T."""
    if len(digits) < horizon:
        raise DomainError(f"stream has {len(digits)} digits, horizon is {horizon}")
    lo, hi = family.range_table(horizon)
    arr = np.asarray(list(digits[:horizon]), dtype=np.int64)
    mask = _hit_mask(arr, lo, hi)
    times = (np.flatnonzero(mask) + 1).tolist()
    cumulative = np.cumsum(mask)
    ladder = list(ladder) if ladder is not None else horizon_ladder(horizon)
    return HitReport(hit_times=times, counts={t: int(cumulative[t - 1]) for t in ladder if t <= horizon})


@dataclass
class LimsupRow:
    horizon: int
    mean: float
    median: float
    minimum: int
    maximum: int
    stalled_fraction: float
    standard_error: float
    exact_mean: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class LimsupStudy:
    family: str
    trials: int
    mode: str
    rows: List[LimsupRow]
    counts: np.ndarray  # (trials, len(horizons))

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "trials": self.trials,
            "mode": self.mode,
            "rows": [r.to_dict() for r in self.rows],
        }


def _count_job(
    job: Tuple,
    lo: np.ndarray,
    hi: np.ndarray,
    horizons: Tuple[int, ...],
    mode: str,
    config: Optional[SamplerConfig] = None,
) -> np.ndarray:
    seeds, = job
    digits = sample_block(seeds, horizons[-1], mode, config=config)
    cumulative = np.cumsum(_hit_mask(digits, lo, hi), axis=1)
    return cumulative[:, [t - 1 for t in horizons]]


def limsup_study(
    family: EventFamily,
    horizons: Sequence[int],
    trials: int,
    seed: int,
    mode: str = SamplerMode.MIXTURE,
    runner: Optional[TrajectoryRunnerPort] = None,
    chunk: int = 25,
    config: Optional[SamplerConfig] = None,
) -> LimsupStudy:
    """Distribution of N(T) across trajectories for each T in `horizons`."""
    if trials < 30:
        raise DomainError(f"trials must be >= 30, got {trials}")
    horizons = tuple(sorted(set(int(t) for t in horizons)))
    if not horizons or horizons[0] < 1:
        raise DomainError("horizons must be positive integers")
    mode = SamplerMode(mode).value
    top = horizons[-1]
    lo, hi = family.range_table(top)
    seeds = seed_bank(seed, trials)
    jobs = [(seeds[i : i + chunk],) for i in range(0, trials, chunk)]
    job = partial(_count_job, lo=lo, hi=hi, horizons=horizons, mode=mode, config=config)
    parts = runner.map(job, jobs) if runner is not None else [job(j) for j in jobs]
    counts = np.vstack(parts)

    exact = np.cumsum(event_measures(family, top))
    rows = []
    prev = np.zeros(trials, dtype=counts.dtype)
    for col, t in enumerate(horizons):
        c = counts[:, col]
        rows.append(
            LimsupRow(
                horizon=t,
                mean=float(c.mean()),
                median=float(np.median(c)),
                minimum=int(c.min()),
                maximum=int(c.max()),
                stalled_fraction=float(np.mean(c == prev)),
                standard_error=float(c.std(ddof=1) / math.sqrt(trials)),
                exact_mean=float(exact[t - 1]),
            )
        )
        prev = c
    return LimsupStudy(family=family.describe(), trials=trials, mode=mode, rows=rows, counts=counts)


# ── Chandra-type certificate ────────────────────────────────


@dataclass
class ChandraCertificate:
    mixing: str
    weights: List[float]
    total: float
    monotone_from_2: bool
    certified: bool
    family: str
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def chandra_certificate(family: EventFamily, mixing: str = "psi", terms: int = 50) -> ChandraCertificate:
    """Summable weights q(m) bounding the correlations of the events A_n.

    Every family here has A_n in sigma(a_n), so the pairwise correlation
    of events i < j is controlled by the mixing coefficient at lag j - i.
    """
    if mixing not in ("psi", "phi"):
        raise DomainError(f"mixing must be 'psi' or 'phi', got {mixing!r}")
    if terms < 2:
        raise DomainError(f"terms must be >= 2, got {terms}")
    bound = psi_bound if mixing == "psi" else phi_bound
    weights = [bound(m) for m in range(1, terms + 1)]
    c = MIXING_CONSTANTS
    geometric = c.rho_prime / (1 - c.theta)
    if mixing == "psi":
        total = c.psi1 + geometric
    else:
        total = c.eta + geometric / 2
    monotone = all(b <= a for a, b in zip(weights[1:], weights[2:]))
    return ChandraCertificate(
        mixing=mixing,
        weights=weights,
        total=total,
        monotone_from_2=monotone,
        certified=math.isfinite(total) and monotone,
        family=family.describe(),
        notes=[f"events depend on a single digit; {mixing}-mixing weights are summable"],
    )
