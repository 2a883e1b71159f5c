"""Closed real intervals with extended endpoints and sound arithmetic.

Division through an interval containing zero yields the unbounded interval;
unboundedness is a value, not an error, so verdicts can always be combined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf


def _prod(a: float, b: float) -> float:
    # 0 * inf = 0 keeps products sound when one factor is exactly zero.
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            # Degenerate overlap: collapse onto the nearer endpoint of `other`.
            edge = other.hi if self.lo > other.hi else other.lo
            return Interval(edge, edge)
        return Interval(lo, hi)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        ps = (
            _prod(self.lo, other.lo),
            _prod(self.lo, other.hi),
            _prod(self.hi, other.lo),
            _prod(self.hi, other.hi),
        )
        return Interval(min(ps), max(ps))

    def inverse(self) -> "Interval":
        if self.lo <= 0.0 <= self.hi:
            return UNBOUNDED
        return Interval(1.0 / self.hi, 1.0 / self.lo)

    def __truediv__(self, other: "Interval") -> "Interval":
        return self * other.inverse()

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


UNBOUNDED = Interval(-INF, INF)
UNIT = Interval(0.0, 1.0)

_OPS = {
    "+": Interval.__add__,
    "-": Interval.__sub__,
    "*": Interval.__mul__,
    "/": Interval.__truediv__,
}


def interval_combine(lhs: Interval, rhs: Interval, op: str) -> Interval:
    """Combine two intervals with one of ``+ - * /``.

    Soundness: for every x in lhs and y in rhs, ``x op y`` lies in the result.
    """
    try:
        f = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown interval operator {op!r}") from None
    return f(lhs, rhs)
