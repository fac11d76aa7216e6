"""Dependence coefficients of the continued-fraction digits under gamma.

f(a, x) = gamma_a([0,x]) - gamma([0,x]) drives everything here. The
extreme value of gamma_a(B) - gamma(B) over Borel sets B is reached on
the set where df/dx > 0, whose boundary points are the zeros of

    a^2 x^2 + (2a - (a+1) log 2) x + (1 - (a+1) log 2) = 0.

Sign convention: ETA_SIGNED = (1 - log 2 + log log 2)/log 2 is negative;
eta (phi(1)) is its magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.domain.digit_sampler import SamplerMode, sample_block, seed_bank
from src.domain.errors import DomainError
from src.domain.gauss_measure import prob_digit_eq, prob_digit_geq

LOG2 = math.log(2.0)

ETA_SIGNED = (1.0 - LOG2 + math.log(LOG2)) / LOG2
ETA = abs(ETA_SIGNED)
PSI1 = 2.0 * LOG2 - 1.0
THETA = 0.30367
RHO_PRIME = math.pi**2 * LOG2 / 6.0 - 1.0

# Regime boundaries in a
A_LOW = 2.0 * LOG2 - 1.0  # x_{a,1} enters [0,1]
A_HIGH = 1.0 / LOG2 - 1.0  # x_{a,2} leaves [0,1]

_SMALL_A = 1e-6
MIN_GRID = 1000
# x_{a,2} ~ X2_AT_0 - X2_SLOPE * a near a = 0
X2_AT_0 = 1.0 / LOG2 - 1.0
X2_SLOPE = 1.0 + (1.0 - LOG2) * (LOG2 - 2.0) / LOG2**2


@dataclass(frozen=True)
class MixingConstants:
    eta: float
    eta_signed: float
    psi1: float
    theta: float
    rho_prime: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


MIXING_CONSTANTS = MixingConstants(
    eta=ETA, eta_signed=ETA_SIGNED, psi1=PSI1, theta=THETA, rho_prime=RHO_PRIME
)


def _unit(name: str, v: float):
    if not 0 <= v <= 1:
        raise DomainError(f"{name} must lie in [0, 1], got {v}")


def f_discrepancy(a, x):
    """(a+1)x/(ax+1) - log(1+x)/log 2; works elementwise on arrays."""
    if np.isscalar(a) and np.isscalar(x):
        _unit("a", a)
        _unit("x", x)
        return (a + 1) * x / (a * x + 1) - math.log1p(x) / LOG2
    return (a + 1) * x / (a * x + 1) - np.log1p(x) / LOG2


def f_dx(a, x):
    """df/dx = (a+1)/(ax+1)^2 - 1/((x+1) log 2)."""
    return (a + 1) / (a * x + 1) ** 2 - 1 / ((x + 1) * LOG2)


def f_da(a, x):
    """df/da = x(1-x)/(ax+1)^2 >= 0."""
    return x * (1 - x) / (a * x + 1) ** 2


def f_zeros(a: float) -> Tuple[Optional[float], Optional[float]]:
    """Zeros (x_{a,1}, x_{a,2}) of df/dx lying in [0, 1]; None outside."""
    _unit("a", a)
    x1 = x2 = None
    n_term = 1.0 - (a + 1) * LOG2
    half_b = ((a + 1) * LOG2 - 2 * a) / 2
    root = math.sqrt(max(half_b * half_b - a * a * n_term, 0.0))
    if a <= A_HIGH:
        if a < _SMALL_A:
            x2 = X2_AT_0 - X2_SLOPE * a
        else:
            # conjugate form of A - sqrt(A^2 - C); no division by a^2
            x2 = n_term / (half_b + root)
        x2 = min(max(x2, 0.0), 1.0)
    if a >= A_LOW:
        x1 = min(max((half_b + root) / (a * a), 0.0), 1.0)
    return x1, x2


@dataclass
class DiscrepancyProfile:
    """Extreme of gamma_a(B) - gamma(B) for one a.

    minimum is the signed min over B (<= 0); the max equals -minimum and
    is attained on positive_set, the set where df/dx > 0.
    """

    a: float
    x1: Optional[float]
    x2: Optional[float]
    regime: str
    positive_set: List[Tuple[float, float]] = field(default_factory=list)
    minimum: float = 0.0

    @property
    def magnitude(self) -> float:
        return abs(self.minimum)

    @property
    def negative_set(self) -> List[Tuple[float, float]]:
        cuts = [0.0]
        for lo, hi in self.positive_set:
            cuts.extend([lo, hi])
        cuts.append(1.0)
        pairs = [(cuts[i], cuts[i + 1]) for i in range(0, len(cuts), 2)]
        return [(lo, hi) for lo, hi in pairs if hi > lo]

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "x1": self.x1,
            "x2": self.x2,
            "regime": self.regime,
            "positive_set": [list(p) for p in self.positive_set],
            "minimum": self.minimum,
            "magnitude": self.magnitude,
        }


def extremal_discrepancy(a: float) -> DiscrepancyProfile:
    """Regime analysis of f(a, .):

    (a) a < 2 log 2 - 1:              df/dx > 0 on (x2, 1]
    (b) 2 log 2 - 1 <= a <= 1/log2 - 1: df/dx > 0 on (x2, x1)
    (c) a > 1/log 2 - 1:              df/dx > 0 on [0, x1)
    """
    x1, x2 = f_zeros(a)
    if a < A_LOW:
        return DiscrepancyProfile(a, None, x2, "a", [(x2, 1.0)], f_discrepancy(a, x2))
    if a <= A_HIGH:
        minimum = f_discrepancy(a, x2) - f_discrepancy(a, x1)
        return DiscrepancyProfile(a, x1, x2, "b", [(x2, x1)], minimum)
    return DiscrepancyProfile(a, x1, None, "c", [(0.0, x1)], -f_discrepancy(a, x1))


def eta_exact() -> float:
    """phi(1) = |1 - log 2 + log log 2| / log 2."""
    return ETA


def interior_regime_bound() -> float:
    """2 f(2 log 2 - 1, x_{2 log 2 - 1, 2}); bounds regime (b) from below."""
    _, x2 = f_zeros(A_LOW)
    return 2.0 * f_discrepancy(A_LOW, x2)


def eta_numeric(grid_a: int = 2001, grid_x: int = 2001, block: int = 256) -> Tuple[float, float]:
    """Brute-force sup over a of the positive mass of df/dx.

    Each x-cell contributes f(a, x_{i+1}) - f(a, x_i) when df/dx is
    positive at its midpoint. Returns (eta estimate, maximizing a).
    """
    if grid_a < MIN_GRID or grid_x < MIN_GRID:
        raise DomainError(f"grids need at least {MIN_GRID} points, got {grid_a}x{grid_x}")
    a_grid = np.linspace(0.0, 1.0, grid_a)
    x = np.linspace(0.0, 1.0, grid_x)
    mid = 0.5 * (x[1:] + x[:-1])
    best, best_a = -np.inf, 0.0
    for start in range(0, grid_a, block):
        a = a_grid[start : start + block, None]
        f = f_discrepancy(a, x[None, :])
        gain = np.where(f_dx(a, mid[None, :]) > 0, np.diff(f, axis=1), 0.0).sum(axis=1)
        i = int(np.argmax(gain))
        if gain[i] > best:
            best, best_a = float(gain[i]), float(a_grid[start + i])
    return best, best_a


def psi_bound(n: int) -> float:
    """psi(1) = 2 log 2 - 1; psi(n) <= rho' theta^(n-2) for n >= 2."""
    if n < 1:
        raise DomainError(f"lag must be >= 1, got {n}")
    if n == 1:
        return PSI1
    return RHO_PRIME * THETA ** (n - 2)


def phi_bound(n: int) -> float:
    """phi(1) = eta; phi(n) <= psi(n)/2 for n >= 2."""
    if n < 1:
        raise DomainError(f"lag must be >= 1, got {n}")
    if n == 1:
        return ETA
    return psi_bound(n) / 2.0


# ── Empirical estimators (lower bounds on the sup) ──────────


def _digit_event_tables(K: int):
    """Single-digit measures and first-two-digit joints for i, j <= K.

    Row/column layout: 0 -> {a = i}, 1 -> {a >= i}.
    """
    k = np.arange(1, K + 1, dtype=float)
    single = np.vstack([np.log1p(1.0 / (k * (k + 2))), np.log1p(1.0 / k)]) / LOG2
    i = k[:, None]
    j = k[None, :]
    ij = i * j
    joint = np.empty((2, 2, K, K))
    joint[0, 0] = np.log1p(1.0 / ((ij + i + 1) * (ij + j + 1))) / LOG2
    joint[0, 1] = np.log1p(1.0 / (i * (ij + j + 1))) / LOG2
    joint[1, 0] = np.log1p(1.0 / (j * (ij + i + 1))) / LOG2
    joint[1, 1] = np.log1p(1.0 / ij) / LOG2
    return single, joint


def empirical_psi1(K: int) -> float:
    """max |P(C and D) / (P(C) P(D)) - 1| over C in sigma(a_1), D in sigma(a_2).

    C and D range over {a = i} and {a >= i}, i <= K, with exact joints.
    A lower bound for psi(1).
    """
    if K < 2:
        raise DomainError(f"K must be >= 2, got {K}")
    single, joint = _digit_event_tables(K)
    ratio = joint / (single[:, None, :, None] * single[None, :, None, :])
    return float(np.abs(ratio - 1.0).max())


@dataclass
class PhiEstimate:
    lag: int
    value: float
    standard_error: float
    exact: bool
    argmax: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def empirical_phi(
    n: int,
    K: int = 5,
    trials: int = 100_000,
    seed: int = 0,
    min_count: int = 100,
) -> PhiEstimate:
    """max |P(D | C) - P(D)| with C = {a_1 (=|>=) i}, D = {a_{1+n} (=|>=) j}, i,j <= K.

    n = 1 is exact from cylinder joints; n >= 2 is a Monte Carlo estimate
    over `trials` trajectories, skipping conditioning cells seen fewer
    than min_count times. A lower bound for phi(n).
    """
    if n < 1:
        raise DomainError(f"lag must be >= 1, got {n}")
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    kinds = ("=", ">=")
    if n == 1:
        if K < 2:
            K = 2
        single, joint = _digit_event_tables(K)
        gap = np.abs(joint / single[:, None, :, None] - single[None, :, None, :])
        idx = np.unravel_index(int(np.argmax(gap)), gap.shape)
        c, d, i, j = (int(v) for v in idx)
        return PhiEstimate(
            lag=1,
            value=float(gap[idx]),
            standard_error=0.0,
            exact=True,
            argmax=f"C={{a_1 {kinds[c]} {i + 1}}}, D={{a_2 {kinds[d]} {j + 1}}}",
        )

    digits = sample_block(seed_bank(seed, trials), n + 1, SamplerMode.MIXTURE)
    first, later = digits[:, 0], digits[:, n]
    best = PhiEstimate(lag=n, value=0.0, standard_error=0.0, exact=False, argmax="")
    for c in (0, 1):
        for i in range(1, K + 1):
            cond = first == i if c == 0 else first >= i
            count = int(cond.sum())
            if count < min_count:
                continue
            for d in (0, 1):
                for j in range(1, K + 1):
                    target = prob_digit_eq(j) if d == 0 else prob_digit_geq(j)
                    hit = later[cond] == j if d == 0 else later[cond] >= j
                    p_hat = float(hit.mean())
                    gap = abs(p_hat - target)
                    if gap > best.value:
                        best = PhiEstimate(
                            lag=n,
                            value=gap,
                            standard_error=math.sqrt(target * (1 - target) / count),
                            exact=False,
                            argmax=f"C={{a_1 {kinds[c]} {i}}}, D={{a_{1 + n} {kinds[d]} {j}}}",
                        )
    return best


def phi1_rectangle_scan(grid: int = 200) -> Tuple[float, float, float]:
    """sup |gamma-bar([0,x]x[0,y]) / gamma([0,x]) - gamma([0,y])| on a grid.

    Future and past coordinates of the natural extension sit one step
    apart, so this is a lower bound for phi(1). Returns (value, x, y).
    """
    if grid < 2:
        raise DomainError(f"grid must be >= 2, got {grid}")
    x = np.linspace(1.0 / grid, 1.0, grid)[:, None]
    y = np.linspace(0.0, 1.0, grid + 1)[None, :]
    gap = np.abs(np.log1p(x * y) / np.log1p(x) - np.log1p(y) / LOG2)
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return float(gap[i, j]), float(x[i, 0]), float(y[0, j])


def regime_table(grid_a: int = 101) -> List[DiscrepancyProfile]:
    if grid_a < 2:
        raise DomainError(f"grid_a must be >= 2, got {grid_a}")
    return [extremal_discrepancy(float(a)) for a in np.linspace(0.0, 1.0, grid_a)]
