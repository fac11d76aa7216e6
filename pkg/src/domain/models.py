"""Domain data models: pure Python dataclasses."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Tuple

from src.domain.errors import DomainError

# Largest digit any sampler will emit
DIGIT_CAP = 2**63 - 1

Digit = int
MeasureValue = float


def check_digit(a: int) -> int:
    """Validate a continued-fraction digit (positive integer)."""
    if isinstance(a, bool) or not isinstance(a, int):
        raise DomainError(f"digit must be an integer, got {a!r}")
    if a < 1:
        raise DomainError(f"digit must be >= 1, got {a}")
    return a


@dataclass(frozen=True)
class ConvergentState:
    """Two consecutive convergents p_{n-1}/q_{n-1}, p_n/q_n.

    Invariant: q_cur * p_prev - p_cur * q_prev == (-1) ** n.
    """

    p_prev: int
    q_prev: int
    p_cur: int
    q_cur: int
    n: int = 0

    @classmethod
    def seed(cls) -> "ConvergentState":
        # p_{-1}=1, q_{-1}=0, p_0=a_0=0, q_0=1 for x in (0,1)
        return cls(p_prev=1, q_prev=0, p_cur=0, q_cur=1, n=0)

    @property
    def determinant(self) -> int:
        return self.q_cur * self.p_prev - self.p_cur * self.q_prev

    @property
    def value(self) -> Fraction:
        return Fraction(self.p_cur, self.q_cur)


@dataclass(frozen=True)
class DerivedVars:
    """r_n, y_n, u_n at index n (1-based)."""

    n: int
    digit: int
    r: float
    y: float
    u: float
    reliable: bool = True


@dataclass(frozen=True)
class CylinderSpec:
    """Exact interval of all x in (0,1) whose first digits equal `digits`."""

    digits: Tuple[int, ...]
    lo: Fraction
    hi: Fraction
    parity: int  # +1 for even n (p_n/q_n is the left end), -1 for odd n

    @property
    def depth(self) -> int:
        return len(self.digits)

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi


@dataclass
class RationalExpansion:
    digits: List[int]
    truncated: bool = False


@dataclass
class RealExpansion:
    """Float-pipeline digits with the index up to which they can be trusted."""

    digits: List[int]
    horizon: int
    terminated: bool = False  # hit an exact zero of the Gauss map
    precision_bits: int = 53

    @property
    def reliable_digits(self) -> List[int]:
        return self.digits[: self.horizon]


@dataclass
class DerivedSequence:
    values: List[DerivedVars] = field(default_factory=list)
    horizon: int = 0
