"""Digit event families A_n in sigma(a_n): threshold, equality and bands.

Every family reduces, at each index n, to an integer range of admissible
digits. Indices below the validity offset n0 carry the empty event.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Set, Tuple

import numpy as np

from src.domain.errors import SequenceSpecError
from src.domain.sequence_parser import SequenceSpec, parse_sequence


def _log(msg: str):
    print(msg, file=sys.stderr)


class EventKind(str, Enum):
    THRESHOLD = "threshold"  # a_n >= b_n
    EQUAL = "equal"  # a_n = d_n
    CLOSED_BAND = "closed_band"  # d_n <= a_n <= d_n + d_n/c_n
    OPEN_BAND = "open_band"  # d_n < a_n <= d_n + d_n/c_n


# Sequences each kind needs
REQUIRED_SEQUENCES: Dict[EventKind, tuple] = {
    EventKind.THRESHOLD: ("b",),
    EventKind.EQUAL: ("d",),
    EventKind.CLOSED_BAND: ("c", "d"),
    EventKind.OPEN_BAND: ("c", "d"),
}


@dataclass(frozen=True)
class DigitRange:
    """Inclusive digit range [lo, hi]; hi=None means unbounded."""

    lo: int
    hi: Optional[int]

    @property
    def is_empty(self) -> bool:
        return self.hi is not None and self.hi < self.lo

    @property
    def is_everything(self) -> bool:
        return self.lo <= 1 and self.hi is None

    def __contains__(self, a: int) -> bool:
        if a < self.lo:
            return False
        return self.hi is None or a <= self.hi


EMPTY_RANGE = DigitRange(lo=1, hi=0)


@dataclass
class EventFamily:
    kind: EventKind
    b: Optional[SequenceSpec] = None
    c: Optional[SequenceSpec] = None
    d: Optional[SequenceSpec] = None
    n0: int = 1
    name: str = ""

    def __post_init__(self):
        self.kind = EventKind(self.kind)
        for key in REQUIRED_SEQUENCES[self.kind]:
            if getattr(self, key) is None:
                raise SequenceSpecError(f"{self.kind.value} family needs sequence {key!r}")
        if self.n0 < 1:
            raise SequenceSpecError(f"n0 must be >= 1, got {self.n0}")
        self._floor_warned: Set[str] = set()

    # -- sequence access --

    def integer_term(self, key: str, n: int) -> int:
        """Evaluate an integer-valued sequence, flooring with a one-time warning."""
        seq = getattr(self, key)
        value = seq.positive(n)
        floored = math.floor(value)
        if floored != value and key not in self._floor_warned:
            self._floor_warned.add(key)
            _log(f"sequence {key}={seq.text!r} is not integral (n={n}: {value}); flooring")
        if floored < 1:
            raise SequenceSpecError(f"{key}={seq.text!r} floors to {floored} at n={n}")
        return floored

    def digit_range(self, n: int) -> DigitRange:
        """The set {a : a in A_n} as an integer range."""
        if n < self.n0:
            return EMPTY_RANGE
        if self.kind is EventKind.THRESHOLD:
            return DigitRange(lo=max(1, math.ceil(self.b.positive(n))), hi=None)
        d = self.integer_term("d", n)
        if self.kind is EventKind.EQUAL:
            return DigitRange(lo=d, hi=d)
        width = math.floor(d / self.c.positive(n))
        if self.kind is EventKind.CLOSED_BAND:
            return DigitRange(lo=d, hi=d + width)
        return DigitRange(lo=d + 1, hi=d + width)

    def contains(self, n: int, a: int) -> bool:
        return a in self.digit_range(n)

    def range_table(self, horizon: int) -> Tuple[np.ndarray, np.ndarray]:
        """Arrays lo, hi of length horizon+1 (index 0 unused, empty event).

        Unbounded ranges get hi = int64 max; empty ranges have hi < lo.
        """
        lo = np.ones(horizon + 1, dtype=np.int64)
        hi = np.zeros(horizon + 1, dtype=np.int64)
        top = np.iinfo(np.int64).max
        for n in range(1, horizon + 1):
            r = self.digit_range(n)
            lo[n] = min(r.lo, top)
            hi[n] = top if r.hi is None else min(r.hi, top)
        return lo, hi

    def sequences(self) -> Dict[str, str]:
        return {
            key: getattr(self, key).text
            for key in ("b", "c", "d")
            if getattr(self, key) is not None
        }

    def describe(self) -> str:
        seq = self.sequences()
        if self.kind is EventKind.THRESHOLD:
            body = f"a_n >= {seq['b']}"
        elif self.kind is EventKind.EQUAL:
            body = f"a_n = {seq['d']}"
        elif self.kind is EventKind.CLOSED_BAND:
            body = f"d <= a_n <= d + floor(d/c), d={seq['d']}, c={seq['c']}"
        else:
            body = f"d < a_n <= d + floor(d/c), d={seq['d']}, c={seq['c']}"
        return f"{self.name or self.kind.value}: {body} (n >= {self.n0})"


def make_family(
    kind: str,
    b: Optional[str] = None,
    c: Optional[str] = None,
    d: Optional[str] = None,
    n0: int = 1,
    name: str = "",
) -> EventFamily:
    """Build a family from expression strings."""
    return EventFamily(
        kind=EventKind(kind),
        b=parse_sequence(b) if b is not None else None,
        c=parse_sequence(c) if c is not None else None,
        d=parse_sequence(d) if d is not None else None,
        n0=n0,
        name=name,
    )


def threshold(b: str, n0: int = 1, name: str = "") -> EventFamily:
    return make_family("threshold", b=b, n0=n0, name=name)


def equal(d: str, n0: int = 1, name: str = "") -> EventFamily:
    return make_family("equal", d=d, n0=n0, name=name)


def closed_band(c: str, d: str, n0: int = 1, name: str = "") -> EventFamily:
    return make_family("closed_band", c=c, d=d, n0=n0, name=name)


def open_band(c: str, d: str, n0: int = 1, name: str = "") -> EventFamily:
    return make_family("open_band", c=c, d=d, n0=n0, name=name)
