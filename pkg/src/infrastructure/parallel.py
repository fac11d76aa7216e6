"""Trajectory worker pool and mergeable aggregates."""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, List, Sequence

import numpy as np


def _log(msg: str):
    print(msg, file=sys.stderr)


class TrajectoryPool:
    """Implements TrajectoryRunnerPort over a process pool.

    workers <= 1 runs serially in-process. Results always come back in
    item order, so output never depends on the worker count.
    """

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))

    def map(self, fn: Callable[[Any], Any], items: Sequence[Any]) -> List[Any]:
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        workers = min(self.workers, len(items))
        _log(f"Worker pool: {len(items)} jobs on {workers} processes")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, items))
        _log(f"Worker pool: {len(items)} jobs done")
        return results


def chunked(items: Sequence[Any], size: int) -> Iterator[Sequence[Any]]:
    if size < 1:
        raise ValueError(f"chunk size must be >= 1, got {size}")
    for start in range(0, len(items), size):
        yield items[start : start + size]


@dataclass
class CountMoments:
    """Count, sum and sum of squares of integer samples, merged exactly."""

    count: int = 0
    total: int = 0
    total_sq: int = 0

    @classmethod
    def of(cls, values: Iterable[int]) -> "CountMoments":
        arr = [int(v) for v in values]
        return cls(count=len(arr), total=sum(arr), total_sq=sum(v * v for v in arr))

    def merge(self, other: "CountMoments") -> "CountMoments":
        return CountMoments(
            count=self.count + other.count,
            total=self.total + other.total,
            total_sq=self.total_sq + other.total_sq,
        )

    __add__ = merge

    @property
    def mean(self) -> float:
        if self.count == 0:
            return float("nan")
        return float(Fraction(self.total, self.count))

    @property
    def variance(self) -> float:
        """Unbiased sample variance (ddof=1)."""
        if self.count < 2:
            return float("nan")
        n = self.count
        return float(Fraction(n * self.total_sq - self.total * self.total, n * (n - 1)))

    @property
    def standard_error(self) -> float:
        if self.count < 2:
            return float("nan")
        return float(np.sqrt(self.variance / self.count))


def merge_all(parts: Iterable[CountMoments]) -> CountMoments:
    out = CountMoments()
    for part in parts:
        out = out.merge(part)
    return out
