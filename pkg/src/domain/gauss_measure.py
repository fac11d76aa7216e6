"""Gauss measure and its relatives: gamma, gamma_a, extended gamma-bar.

All interval measures go through exact rational endpoints and are turned
into floats only at the last step, in log1p form:

    gamma([lo, hi]) = log1p((hi - lo) / (1 + lo)) / log 2

Note gamma itself is not a member of the gamma_a family (gamma_0 is the
uniform distribution).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from src.domain.cf_core import convergents
from src.domain.errors import DomainError
from src.domain.events import DigitRange, EventFamily
from src.domain.models import ConvergentState, CylinderSpec, MeasureValue, check_digit

LOG2 = math.log(2.0)

Number = Union[int, float, Fraction]


def _unit(name: str, v: Number) -> None:
    if not 0 <= v <= 1:
        raise DomainError(f"{name} must lie in [0, 1], got {v}")


# ── Gauss measure gamma ─────────────────────────────────────


def gauss_cdf(x: Number) -> MeasureValue:
    """gamma([0, x]) = log(1 + x) / log 2."""
    _unit("x", x)
    return math.log1p(float(x)) / LOG2


def gauss_interval_measure(lo: Number, hi: Number) -> MeasureValue:
    """gamma([lo, hi]) for 0 <= lo <= hi <= 1, exact until the final log1p."""
    _unit("lo", lo)
    _unit("hi", hi)
    if hi < lo:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    lo_f, hi_f = Fraction(lo), Fraction(hi)
    return math.log1p(float((hi_f - lo_f) / (1 + lo_f))) / LOG2


def prob_digit_geq(z: float) -> MeasureValue:
    """gamma(a_n >= z) = log(1 + 1/ceil(z)) / log 2."""
    if not z > 0:
        raise DomainError(f"z must be positive, got {z}")
    return math.log1p(1.0 / math.ceil(z)) / LOG2


def prob_digit_gt(z: float) -> MeasureValue:
    """gamma(a_n > z) = log(1 + 1/(floor(z) + 1)) / log 2."""
    if not z > 0:
        raise DomainError(f"z must be positive, got {z}")
    return math.log1p(1.0 / (math.floor(z) + 1)) / LOG2


def prob_digit_eq(k: int) -> MeasureValue:
    """gamma(a_n = k) = log(1 + 1/(k(k+2))) / log 2."""
    check_digit(k)
    return math.log1p(1.0 / (k * (k + 2))) / LOG2


def prob_digit_range(lo: int, hi: Optional[int]) -> MeasureValue:
    """gamma(lo <= a_n <= hi); hi=None is unbounded, hi < lo is empty."""
    lo = max(int(lo), 1)
    if hi is None:
        return math.log1p(1.0 / lo) / LOG2
    if hi < lo:
        return 0.0
    # (1 + 1/lo) / (1 + 1/(hi+1)) - 1 = (hi - lo + 1) / (lo (hi + 2))
    return math.log1p((hi - lo + 1) / (lo * (hi + 2))) / LOG2


def range_measure(r: DigitRange) -> MeasureValue:
    if r.is_empty:
        return 0.0
    return prob_digit_range(r.lo, r.hi)


def prob_event(family: EventFamily, n: int) -> MeasureValue:
    """gamma(A_n) for a digit event family; 0 for empty bands."""
    if n < 1:
        raise DomainError(f"index n must be >= 1, got {n}")
    return range_measure(family.digit_range(n))


def event_measures(family: EventFamily, horizon: int) -> np.ndarray:
    """gamma(A_n) for n = 1..horizon as a float array (index 0 is n=1)."""
    return np.array([prob_event(family, n) for n in range(1, horizon + 1)], dtype=float)


# ── gamma_a and the conditional law ─────────────────────────


def gamma_a_cdf(a: float, x: float) -> MeasureValue:
    """gamma_a([0, x]) = (a+1) x / (a x + 1)."""
    _unit("a", a)
    _unit("x", x)
    return (a + 1) * x / (a * x + 1)


def bbl_step(s: Number, a: int) -> Number:
    """s -> 1/(s + a)."""
    _unit("s", s)
    check_digit(a)
    if isinstance(s, Fraction):
        return 1 / (s + a)
    return 1.0 / (s + a)


def bbl_conditional_cdf(s: float, x: float) -> MeasureValue:
    """P(tau^n < x | a_1..a_n) = (s+1) x / (s x + 1) with s = s_n."""
    _unit("s", s)
    _unit("x", x)
    return (s + 1) * x / (s * x + 1)


def bbl_parameter(a: Number, digits: Iterable[int]) -> Number:
    """Run s_0 = a through bbl_step over the digit prefix."""
    s = a
    for d in digits:
        s = bbl_step(s, d)
    return s


def conditional_gamma_a(a: float, digits: Sequence[int], lo: float, hi: float) -> MeasureValue:
    """gamma_a(tau^n in [lo, hi] | a_1..a_n) = gamma_{s_n}([lo, hi])."""
    _unit("lo", lo)
    _unit("hi", hi)
    if hi < lo:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    s = float(bbl_parameter(a, digits))
    return bbl_conditional_cdf(s, hi) - bbl_conditional_cdf(s, lo)


# ── Extended measure gamma-bar ──────────────────────────────


def extended_rect_measure(x: float, y: float) -> MeasureValue:
    """gamma-bar([0,x] x [0,y]) = log(1 + x y) / log 2."""
    _unit("x", x)
    _unit("y", y)
    return math.log1p(x * y) / LOG2


def extended_rect_measure_quad(x: float, y: float) -> float:
    """Same rectangle by numeric double integration of 1/((uv+1)^2 log 2)."""
    _unit("x", x)
    _unit("y", y)
    value, _ = integrate.dblquad(
        lambda v, u: 1.0 / (u * v + 1.0) ** 2, 0.0, x, 0.0, y, epsabs=1e-13, epsrel=1e-12
    )
    return value / LOG2


# ── Cylinders ───────────────────────────────────────────────


def cylinder(digits: Sequence[int]) -> CylinderSpec:
    """Interval of x whose first digits are `digits`.

    Endpoints are p_n/q_n and (p_n + p_{n-1})/(q_n + q_{n-1}); for odd n
    the convergent is the right end.
    """
    if not digits:
        raise DomainError("cylinder needs at least one digit")
    return cylinder_of_state(convergents(digits)[-1], tuple(digits))


def cylinder_of_state(state: ConvergentState, digits: Tuple[int, ...] = ()) -> CylinderSpec:
    near = Fraction(state.p_cur, state.q_cur)
    far = Fraction(state.p_cur + state.p_prev, state.q_cur + state.q_prev)
    if state.n % 2 == 0:
        return CylinderSpec(digits=digits, lo=near, hi=far, parity=1)
    return CylinderSpec(digits=digits, lo=far, hi=near, parity=-1)


def cylinder_measure(spec: CylinderSpec) -> MeasureValue:
    return gauss_interval_measure(spec.lo, spec.hi)


def joint_first_two(kind_c: str, i: int, kind_d: str, j: int) -> MeasureValue:
    """gamma(a_1 (= or >=) i, a_2 (= or >=) j) in closed form.

    kind_c / kind_d are "eq" or "geq".
    """
    check_digit(i)
    check_digit(j)
    kinds = (kind_c, kind_d)
    for k in kinds:
        if k not in ("eq", "geq"):
            raise DomainError(f"event kind must be 'eq' or 'geq', got {k!r}")
    if kinds == ("eq", "eq"):
        return cylinder_measure(cylinder([i, j]))
    if kinds == ("eq", "geq"):
        return math.log1p(1.0 / (i * (i * j + j + 1))) / LOG2
    if kinds == ("geq", "eq"):
        return math.log1p(1.0 / (j * (i * j + i + 1))) / LOG2
    return math.log1p(1.0 / (i * j)) / LOG2


def single_digit_measure(kind: str, i: int) -> MeasureValue:
    """gamma(a_n = i) or gamma(a_n >= i)."""
    if kind == "eq":
        return prob_digit_eq(i)
    if kind == "geq":
        return prob_digit_geq(i)
    raise DomainError(f"event kind must be 'eq' or 'geq', got {kind!r}")
