"""Counting process S_n = #{k <= n : a_k in A_k} and its normal limit.

S_n is asymptotically normal when
  * only finitely many n have rho - eps < gamma(A_n) < 1, and
  * B_n (A_n when gamma(A_n) < 1, else empty) happens infinitely often,
with rho = 1 - eta_signed - 2 rho' / (1 - theta) ~ 0.683443.

A finite horizon can refute the first condition, never prove it; reports
say so.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import special, stats

from src.config import SamplerConfig
from src.domain.digit_sampler import SamplerMode, sample_block, seed_bank
from src.domain.errors import DomainError, PreconditionRefused
from src.domain.events import EventFamily
from src.domain.gauss_measure import prob_digit_gt, range_measure
from src.domain.mixing_lab import MIXING_CONSTANTS
from src.domain.zero_one import VerdictKind, ZERO_ONE_PRESETS, series_verdict
from src.infrastructure.parallel import CountMoments, merge_all
from src.ports.outbound import TrajectoryRunnerPort

MIN_TRIALS = 1000
FINITE_HORIZON_CAVEAT = (
    "a finite horizon can only falsify 'finitely many n'; "
    "no violation in the second half of the horizon is reported as threshold_ok"
)


def _log(msg: str):
    print(msg, file=sys.stderr)


@dataclass(frozen=True)
class CltConstants:
    eta: float
    eta_signed: float
    rho: float
    theta: float
    rho_prime: float
    psi1: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def clt_constants() -> CltConstants:
    c = MIXING_CONSTANTS
    rho = 1.0 - c.eta_signed - 2.0 * c.rho_prime / (1.0 - c.theta)
    return CltConstants(
        eta=c.eta,
        eta_signed=c.eta_signed,
        rho=rho,
        theta=c.theta,
        rho_prime=c.rho_prime,
        psi1=c.psi1,
    )


def normal_cdf(z: float) -> float:
    """Phi(z) = erfc(-z/sqrt 2)/2; scipy's erfc keeps the error near 1e-16."""
    return float(0.5 * special.erfc(-z / math.sqrt(2.0)))


# ── Conditions ──────────────────────────────────────────────


@dataclass
class CltConditionReport:
    family: str
    horizon: int
    epsilon: float
    rho: float
    threshold_ok: bool
    violations: int
    last_violation: Optional[int]
    bn_empty_count: int
    bn_empty_first: List[int]
    sum_gamma_b: float
    divergence_ok: bool
    divergence_verdict: dict
    remark_shortcut: bool
    caveat: str = FINITE_HORIZON_CAVEAT

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _b_measures(family: EventFamily, horizon: int) -> Tuple[np.ndarray, np.ndarray]:
    """(gamma(A_n), is A_n everything) for n = 1..horizon."""
    gamma = np.empty(horizon)
    full = np.zeros(horizon, dtype=bool)
    for n in range(1, horizon + 1):
        r = family.digit_range(n)
        full[n - 1] = r.is_everything
        gamma[n - 1] = 1.0 if r.is_everything else range_measure(r)
    return gamma, full


def check_clt_conditions(family: EventFamily, horizon: int, epsilon: float = 0.01) -> CltConditionReport:
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    rho = clt_constants().rho
    gamma, full = _b_measures(family, horizon)
    bad = (gamma > rho - epsilon) & ~full
    bad_idx = np.flatnonzero(bad) + 1
    last = int(bad_idx[-1]) if bad_idx.size else None
    threshold_ok = last is None or last <= horizon // 2

    verdict = series_verdict(family, max(horizon, 1000), clt_variant=True)
    divergence_ok = verdict.kind is VerdictKind.AS_INFINITELY_OFTEN

    tail = range(max(horizon // 2, 1), horizon + 1)
    # eventually A_n sits inside {a_n > 1}, so gamma(A_n) <= remark_bound()
    shortcut = remark_bound() < rho - epsilon and all(
        (r.is_empty or r.lo >= 2) for r in (family.digit_range(n) for n in tail)
    )
    empty_idx = (np.flatnonzero(full) + 1).tolist()
    return CltConditionReport(
        family=family.describe(),
        horizon=horizon,
        epsilon=epsilon,
        rho=rho,
        threshold_ok=threshold_ok,
        violations=int(bad_idx.size),
        last_violation=last,
        bn_empty_count=len(empty_idx),
        bn_empty_first=empty_idx[:20],
        sum_gamma_b=float(math.fsum(gamma[~full])),
        divergence_ok=divergence_ok,
        divergence_verdict=verdict.to_dict(),
        remark_shortcut=shortcut,
    )


# ── Moments ─────────────────────────────────────────────────


def exact_mean(family: EventFamily, n: int) -> float:
    """E(S_n) = sum of gamma(A_k), k <= n."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return math.fsum(range_measure(family.digit_range(k)) for k in range(1, n + 1))


@dataclass
class VarianceBound:
    value: float
    sum_gamma_b: float
    epsilon: float
    certificate: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def variance_bound_from_measures(gamma_b, epsilon: float) -> VarianceBound:
    """eps * sum gamma(B_i), with the per-term certificate

        (1 - rho + eps) - eta_signed - 2 rho' / (1 - theta)  (= eps)
    """
    c = clt_constants()
    certificate = (1.0 - c.rho + epsilon) - c.eta_signed - 2.0 * c.rho_prime / (1.0 - c.theta)
    total = math.fsum(float(g) for g in gamma_b)
    return VarianceBound(value=epsilon * total, sum_gamma_b=total, epsilon=epsilon, certificate=certificate)


def variance_lower_bound(family: EventFamily, n: int, epsilon: float = 0.01) -> VarianceBound:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    gamma, full = _b_measures(family, n)
    return variance_bound_from_measures(gamma[~full], epsilon)


# ── Monte Carlo experiment ──────────────────────────────────


@dataclass
class CltResult:
    constants: dict
    conditions: dict
    n: int
    trials: int
    mode: str
    seed: int
    exact_mean: float
    mc_mean: float
    mc_standard_error: float
    mc_variance: float
    variance_lower_bound: float
    ks_distance: float
    ks_pvalue: float
    chi2_statistic: float
    chi2_pvalue: float
    ecdf: List[List[float]]
    histogram: Dict[str, list]
    standardized: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "standardized"}
        return out


def _count_job(
    job, lo: np.ndarray, hi: np.ndarray, n: int, mode: str, config: Optional[SamplerConfig] = None
) -> np.ndarray:
    seeds, = job
    digits = sample_block(seeds, n, mode, config=config)
    return ((digits >= lo[1 : n + 1]) & (digits <= hi[1 : n + 1])).sum(axis=1)


def _count_parts(
    family: EventFamily,
    n: int,
    trials: int,
    seed: int,
    mode: str = SamplerMode.EXACT,
    runner: Optional[TrajectoryRunnerPort] = None,
    chunk: int = 50,
    config: Optional[SamplerConfig] = None,
) -> List[np.ndarray]:
    lo, hi = family.range_table(n)
    seeds = seed_bank(seed, trials)
    jobs = [(seeds[i : i + chunk],) for i in range(0, trials, chunk)]
    job = partial(_count_job, lo=lo, hi=hi, n=n, mode=SamplerMode(mode).value, config=config)
    parts = runner.map(job, jobs) if runner is not None else [job(j) for j in jobs]
    return [np.asarray(p, dtype=np.int64) for p in parts]


def simulate_counts(
    family: EventFamily,
    n: int,
    trials: int,
    seed: int,
    mode: str = SamplerMode.EXACT,
    runner: Optional[TrajectoryRunnerPort] = None,
    chunk: int = 50,
    config: Optional[SamplerConfig] = None,
) -> np.ndarray:
    """S_n for trajectories 0..trials-1, in trajectory order."""
    return np.concatenate(_count_parts(family, n, trials, seed, mode, runner, chunk, config))


def ecdf_points(z: np.ndarray) -> List[List[float]]:
    values, counts = np.unique(z, return_counts=True)
    cdf = np.cumsum(counts) / z.size
    return [[float(v), float(c)] for v, c in zip(values, cdf)]


def histogram_test(z: np.ndarray, bins: int = 40, span: float = 4.0, min_expected: float = 5.0):
    """Histogram of z on [-span, span] plus a chi-square test against N(0,1).

    Outer cells absorb the tails; adjacent cells are merged until every
    expected count reaches min_expected.
    """
    edges = np.linspace(-span, span, bins + 1)
    counts, _ = np.histogram(z, bins=edges)
    full_edges = np.concatenate([[-np.inf], edges, [np.inf]])
    # np.histogram closes its last bin, so the upper tail is strict
    observed = np.concatenate([[np.sum(z < -span)], counts, [np.sum(z > span)]]).astype(float)
    probs = np.diff(special.ndtr(full_edges))
    expected = probs * z.size

    obs_m, exp_m = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_m.append(acc_o)
            exp_m.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and exp_m:
        obs_m[-1] += acc_o
        exp_m[-1] += acc_e
    exp_arr = np.array(exp_m)
    exp_arr *= np.sum(obs_m) / exp_arr.sum()
    chi = stats.chisquare(np.array(obs_m), exp_arr)
    hist = {"edges": edges.tolist(), "counts": counts.astype(int).tolist()}
    return hist, float(chi.statistic), float(chi.pvalue)


def clt_experiment(
    family: EventFamily,
    n: int,
    trials: int,
    seed: int,
    mode: str = SamplerMode.EXACT,
    epsilon: float = 0.01,
    runner: Optional[TrajectoryRunnerPort] = None,
    bins: int = 40,
    config: Optional[SamplerConfig] = None,
) -> CltResult:
    """Standardize S_n by its exact mean and Monte Carlo variance; test normality.

    Kolmogorov-Smirnov against N(0,1) is the primary statistic, the
    histogram chi-square the secondary one.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if trials < MIN_TRIALS:
        raise DomainError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    conditions = check_clt_conditions(family, n, epsilon)
    if not conditions.divergence_ok:
        raise PreconditionRefused(
            f"{family.describe()}: sum of gamma(B_n) is not certified divergent "
            f"({conditions.divergence_verdict['verdict']}); B_n is empty for "
            f"{conditions.bn_empty_count} of {n} indices"
        )
    if not conditions.threshold_ok:
        _log(
            f"warning: rho - eps < gamma(A_n) < 1 at n={conditions.last_violation}; "
            f"the normal limit is not guaranteed"
        )

    parts = _count_parts(family, n, trials, seed, mode, runner, config=config)
    moments = merge_all(CountMoments.of(p) for p in parts)
    counts = np.concatenate(parts)
    if not moments.variance > 0:
        raise PreconditionRefused(f"{family.describe()}: S_{n} has zero sample variance")
    mu = exact_mean(family, n)
    z = (counts - mu) / math.sqrt(moments.variance)
    ks = stats.kstest(z, "norm")
    hist, chi_stat, chi_p = histogram_test(z, bins=bins)
    bound = variance_lower_bound(family, n, epsilon)
    return CltResult(
        constants=clt_constants().to_dict(),
        conditions=conditions.to_dict(),
        n=n,
        trials=trials,
        mode=SamplerMode(mode).value,
        seed=seed,
        exact_mean=mu,
        mc_mean=moments.mean,
        mc_standard_error=moments.standard_error,
        mc_variance=moments.variance,
        variance_lower_bound=bound.value,
        ks_distance=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        chi2_statistic=chi_stat,
        chi2_pvalue=chi_p,
        ecdf=ecdf_points(z),
        histogram=hist,
        standardized=z,
    )


def corollary_cases() -> Dict[str, EventFamily]:
    """One admissible family per form: threshold, equality, closed and open band."""
    names = {
        "A": "threshold-n",
        "B": "sqrt-nlogn-equal",
        "C": "closed-band-2d",
        "D": "open-band-logn-n",
    }
    return {case: ZERO_ONE_PRESETS[name].family() for case, name in names.items()}


def remark_bound() -> float:
    """gamma(a_n > 1), the ceiling on gamma(A_n) once A_n sits inside {a_n > 1}."""
    return prob_digit_gt(1)
