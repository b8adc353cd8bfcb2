"""Finite unions of closed integer intervals over the 64-bit line.

The bounds ``NEG_INF`` and ``POS_INF`` double as the infinities: a ray
``[3, POS_INF]`` means "3 or more".
"""

from __future__ import annotations

import random
from typing import Iterable, Iterator

from .errors import EmptyIntervalError

NEG_INF = -(2**63)
POS_INF = 2**63 - 1


def _clip(v: int) -> int:
    return NEG_INF if v < NEG_INF else POS_INF if v > POS_INF else v


def _normalize(pairs: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    items = sorted((_clip(lo), _clip(hi)) for lo, hi in pairs if lo <= hi)
    out: list[list[int]] = []
    for lo, hi in items:
        if out and lo <= out[-1][1] + 1:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


class IntervalSet:
    """Immutable, normalized set of integers: sorted, disjoint, non-adjacent pieces."""

    __slots__ = ("intervals",)

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        self.intervals = _normalize(pairs)

    @classmethod
    def full(cls) -> "IntervalSet":
        return cls([(NEG_INF, POS_INF)])

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls()

    @classmethod
    def point(cls, v: int) -> "IntervalSet":
        return cls([(v, v)])

    @classmethod
    def at_least(cls, v: int) -> "IntervalSet":
        return cls([(v, POS_INF)])

    @classmethod
    def at_most(cls, v: int) -> "IntervalSet":
        return cls([(NEG_INF, v)])

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        def fmt(v: int) -> str:
            return "-inf" if v == NEG_INF else "+inf" if v == POS_INF else str(v)

        body = " u ".join(f"[{fmt(lo)}, {fmt(hi)}]" for lo, hi in self.intervals)
        return f"IntervalSet({body or 'empty'})"

    def __contains__(self, v: int) -> bool:
        for lo, hi in self.intervals:
            if v < lo:
                return False
            if v <= hi:
                return True
        return False

    def size(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.intervals)

    def is_full(self) -> bool:
        return self.intervals == ((NEG_INF, POS_INF),)

    def normalized(self) -> "IntervalSet":
        return IntervalSet(self.intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        a, b = self.intervals, other.intervals
        i = j = 0
        out = []
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    def complement(self) -> "IntervalSet":
        out = []
        cursor = NEG_INF
        for lo, hi in self.intervals:
            if lo > cursor:
                out.append((cursor, lo - 1))
            cursor = hi + 1
        if cursor <= POS_INF:
            out.append((cursor, POS_INF))
        return IntervalSet(out)

    __or__ = union
    __and__ = intersect
    __invert__ = complement

    def cap(self, window: int) -> "IntervalSet":
        """Truncate each infinite ray to ``window`` values past its finite end.

        The full line becomes ``[-window, window]``.
        """
        if self.is_full():
            return IntervalSet([(-window, window)])
        out = []
        for lo, hi in self.intervals:
            if lo == NEG_INF and hi == POS_INF:
                lo, hi = -window, window
            elif lo == NEG_INF:
                lo = hi - window
            elif hi == POS_INF:
                hi = lo + window
            out.append((lo, hi))
        return IntervalSet(out)

    def sample(self, rng: random.Random) -> int:
        return interval_sample_uniform(self, rng)


def interval_intersect(s: IntervalSet, t: IntervalSet) -> IntervalSet:
    return s.intersect(t)


def interval_union(s: IntervalSet, t: IntervalSet) -> IntervalSet:
    return s.union(t)


def interval_complement(s: IntervalSet) -> IntervalSet:
    return s.complement()


def interval_sample_uniform(s: IntervalSet, rng: random.Random) -> int:
    """Draw one member of ``s`` with every member equally likely."""
    if not s.intervals:
        raise EmptyIntervalError("cannot sample from an empty interval set")
    r = rng.randrange(s.size())
    for lo, hi in s.intervals:
        width = hi - lo + 1
        if r < width:
            return lo + r
        r -= width
    raise AssertionError("unreachable")
