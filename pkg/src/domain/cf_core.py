"""Continued-fraction primitives: Gauss map, digits, convergents, r_n/y_n/u_n.

Convergents are kept as Python ints, so the determinant identity
q_n p_{n-1} - p_n q_{n-1} = (-1)^n holds exactly at any depth.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Union

import mpmath

from src.domain.errors import DomainError
from src.domain.models import (
    ConvergentState,
    DerivedSequence,
    DerivedVars,
    RationalExpansion,
    RealExpansion,
    check_digit,
)

Real = Union[float, Fraction, "mpmath.mpf"]

# Digits stay reliable while q_n^2 * eps <= RELIABILITY_TOL
RELIABILITY_TOL = 1e-3
FLOAT_EPS = 2.0**-52


def gauss_map(x: Real) -> Real:
    """tau(x) = 1/x - floor(1/x), with tau(0) = 0."""
    if x < 0 or x >= 1:
        raise DomainError(f"gauss_map expects 0 <= x < 1, got {x}")
    if x == 0:
        return x * 0
    r = 1 / x
    if isinstance(r, mpmath.mpf):
        return r - mpmath.floor(r)
    return r - math.floor(r)


def push_digit(state: ConvergentState, a: int) -> ConvergentState:
    """Apply p_n = a p_{n-1} + p_{n-2} and q_n = a q_{n-1} + q_{n-2}."""
    check_digit(a)
    return ConvergentState(
        p_prev=state.p_cur,
        q_prev=state.q_cur,
        p_cur=a * state.p_cur + state.p_prev,
        q_cur=a * state.q_cur + state.q_prev,
        n=state.n + 1,
    )


def convergents(digits: Iterable[int]) -> List[ConvergentState]:
    """States 0..n; entry 0 is the seed."""
    states = [ConvergentState.seed()]
    for a in digits:
        states.append(push_digit(states[-1], a))
    return states


def evaluate_digits(digits: Sequence[int]) -> Fraction:
    """Exact value of [0; a_1, ..., a_n]."""
    return convergents(digits)[-1].value


def digits_of_rational(num: int, den: int, max_n: int = 10_000) -> RationalExpansion:
    """Euclidean algorithm on num/den in (0,1)."""
    if num <= 0 or den <= num:
        raise DomainError(f"digits_of_rational expects 0 < num < den, got {num}/{den}")
    g = math.gcd(num, den)
    num, den = num // g, den // g
    digits: List[int] = []
    while num and len(digits) < max_n:
        a, rem = divmod(den, num)
        digits.append(a)
        num, den = rem, num
    return RationalExpansion(digits=digits, truncated=num != 0)


def _horizon_ok(q: int, eps: float) -> bool:
    return q * q * eps <= RELIABILITY_TOL


def digits_of_real(x: Real, n: int, precision_bits: Optional[int] = None) -> RealExpansion:
    """Iterate the Gauss map in floating point.

    Python floats are used unless `x` is an mpmath number or
    `precision_bits` is given; then mpmath runs at that precision. The
    returned horizon is the largest index whose q_n^2 * eps stays within
    RELIABILITY_TOL; digits past it are still returned but flagged.
    """
    if not 0 < x < 1:
        raise DomainError(f"digits_of_real expects 0 < x < 1, got {x}")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    use_mp = precision_bits is not None or isinstance(x, mpmath.mpf)
    if use_mp:
        bits = precision_bits or mpmath.mp.prec
        with mpmath.workprec(bits):
            return _digits_mp(mpmath.mpf(x), n, bits)
    return _digits_float(float(x), n)


def _digits_float(x: float, n: int) -> RealExpansion:
    digits: List[int] = []
    state = ConvergentState.seed()
    horizon = 0
    reliable = True
    terminated = False
    t = x
    for _ in range(n):
        if t == 0.0:
            terminated = True
            break
        r = 1.0 / t
        if math.isinf(r):
            terminated = True
            break
        a = int(r)
        digits.append(a)
        state = push_digit(state, a)
        if reliable and _horizon_ok(state.q_cur, FLOAT_EPS):
            horizon = state.n
        else:
            reliable = False
        t = r - a
    return RealExpansion(digits=digits, horizon=horizon, terminated=terminated)


def _digits_mp(x: "mpmath.mpf", n: int, bits: int) -> RealExpansion:
    eps = 2.0 ** (1 - bits)
    digits: List[int] = []
    state = ConvergentState.seed()
    horizon = 0
    reliable = True
    terminated = False
    t = x
    for _ in range(n):
        if t == 0:
            terminated = True
            break
        r = 1 / t
        a = int(mpmath.floor(r))
        digits.append(a)
        state = push_digit(state, a)
        if reliable and _horizon_ok(state.q_cur, eps):
            horizon = state.n
        else:
            reliable = False
        t = r - a
    return RealExpansion(
        digits=digits, horizon=horizon, terminated=terminated, precision_bits=bits
    )


def as_fraction(x: Real) -> Fraction:
    """Exact rational value of a float, mpf or Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, mpmath.mpf):
        man, exp = int(x.man), int(x.exp)
        sign = -1 if x < 0 else 1
        man = abs(man) * sign
        return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)
    return Fraction(float(x))


def approximation_error(x: Fraction, state: ConvergentState) -> Fraction:
    """|x - p_n/q_n| for the current convergent of `state`."""
    return abs(x - Fraction(state.p_cur, state.q_cur))


def derived_vars(
    x: Real,
    digits: Sequence[int],
    horizon: Optional[int] = None,
    states: Optional[Sequence[ConvergentState]] = None,
) -> DerivedSequence:
    """r_n, y_n, u_n for n = 1..len(digits), evaluated exactly at x.

    r_n = (p_{n-2} - q_{n-2} x) / (q_{n-1} x - p_{n-1}),
    y_n = q_n / q_{n-1},
    u_n = 1 / (q_{n-1}^2 |x - p_{n-1}/q_{n-1}|).
    Indices past `horizon` are returned with reliable=False.
    """
    xf = as_fraction(x)
    if states is None:
        states = convergents(digits)
    if horizon is None:
        horizon = len(digits)
    out: List[DerivedVars] = []
    for n in range(1, len(digits) + 1):
        prev, cur = states[n - 1], states[n]
        denom = prev.q_cur * xf - prev.p_cur
        r = (prev.p_prev - prev.q_prev * xf) / denom if denom else math.inf
        err = approximation_error(xf, prev)
        u = 1 / (prev.q_cur**2 * err) if err else math.inf
        out.append(
            DerivedVars(
                n=n,
                digit=digits[n - 1],
                r=float(r),
                y=cur.q_cur / prev.q_cur,
                u=float(u),
                reliable=n <= horizon,
            )
        )
    return DerivedSequence(values=out, horizon=horizon)


def lemma_violations(x: Real, digits: Sequence[int], horizon: Optional[int] = None) -> List[str]:
    """Check the sandwich bounds and the approximation bracket exactly.

    Returns human-readable violations for reliable indices; empty when
    a_n <= r_n < a_n+1, a_n <= y_n < a_n+1 (y_2 = a_2+1 allowed when a_1 = 1),
    a_n < u_n < a_n+2 and
    1/(q_{n-1}(q_n+q_{n-1})) < |x - p_{n-1}/q_{n-1}| < 1/(q_{n-1} q_n) all hold.
    """
    xf = as_fraction(x)
    states = convergents(digits)
    if horizon is None:
        horizon = len(digits)
    problems: List[str] = []
    for n in range(1, min(horizon, len(digits)) + 1):
        a = digits[n - 1]
        prev, cur = states[n - 1], states[n]
        denom = prev.q_cur * xf - prev.p_cur
        r = (prev.p_prev - prev.q_prev * xf) / denom
        y = Fraction(cur.q_cur, prev.q_cur)
        err = approximation_error(xf, prev)
        u = 1 / (prev.q_cur**2 * err)
        if not a <= r < a + 1:
            problems.append(f"n={n}: r_n={float(r)} outside [{a}, {a + 1})")
        # y_2 = a_2 + 1/a_1 reaches a_2 + 1 when a_1 = 1
        y_top_ok = y < a + 1 or (n == 2 and digits[0] == 1 and y == a + 1)
        if not (a <= y and y_top_ok):
            problems.append(f"n={n}: y_n={float(y)} outside [{a}, {a + 1})")
        if not a < u < a + 2:
            problems.append(f"n={n}: u_n={float(u)} outside ({a}, {a + 2})")
        lower = Fraction(1, prev.q_cur * (cur.q_cur + prev.q_cur))
        upper = Fraction(1, prev.q_cur * cur.q_cur)
        if not lower < err < upper:
            problems.append(f"n={n}: |x - p/q| = {float(err)} outside approximation bracket")
    return problems


def derived_band_hits(
    values: DerivedSequence,
    c: Callable[[int], float],
    d: Callable[[int], float],
    variable: str = "u",
    n0: int = 1,
) -> List[int]:
    """Indices n with d_n < v_n <= d_n (1 + 1/c_n) + slack.

    slack is 1 for r_n and y_n, 2 for u_n; only reliable indices count.
    """
    if variable not in ("r", "y", "u"):
        raise DomainError(f"variable must be r, y or u, got {variable!r}")
    slack = 2.0 if variable == "u" else 1.0
    hits = []
    for dv in values.values:
        if not dv.reliable or dv.n < n0:
            continue
        v = getattr(dv, variable)
        dn = d(dv.n)
        if dn < v <= dn * (1 + 1 / c(dv.n)) + slack:
            hits.append(dv.n)
    return hits
