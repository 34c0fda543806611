"""Exact rational metric core.

Finite pseudo-metric spaces over ``fractions.Fraction`` together with the
point-to-set and Hausdorff distances, using the [0,1] conventions that the
rest of the library inherits: the distance from a point to the empty set is
1, the Hausdorff distance between two empty sets is 0, and between an empty
and a non-empty set it is 1.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(text: str) -> Fraction:
    """Parse a rational from its canonical "p/q" or "p" form."""
    return Fraction(text.strip())


def rat_str(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class FinMetric:
    """A finite matrix of rationals in [0,1] treated as a pseudo-metric.

    The constructor validates the value range only; use metric_defect to
    quantify how far the matrix is from being a pseudo-metric.
    """

    def __init__(self, dist: Sequence[Sequence[Fraction]]):
        n = len(dist)
        rows = []
        for row in dist:
            if len(row) != n:
                raise ValueError("distance matrix must be square")
            frow = tuple(Fraction(v) for v in row)
            for v in frow:
                if v < 0 or v > 1:
                    raise ValueError(f"distance {v} outside [0,1]")
            rows.append(frow)
        self.size = n
        self.dist = tuple(rows)

    def __eq__(self, other):
        return isinstance(other, FinMetric) and self.dist == other.dist

    def __repr__(self):
        return f"FinMetric(size={self.size})"

    def d(self, i: int, j: int) -> Fraction:
        return self.dist[i][j]


def metric_defect(m: FinMetric) -> Fraction:
    """Largest violation of the pseudo-metric laws; 0 iff m is one."""
    worst = ZERO
    d = m.dist
    n = m.size
    for i in range(n):
        worst = max(worst, abs(d[i][i]))
        for j in range(n):
            worst = max(worst, abs(d[i][j] - d[j][i]))
            for k in range(n):
                worst = max(worst, d[i][k] - d[i][j] - d[j][k])
    return worst


def pointset_dist(x: int, a: Iterable[int], m: FinMetric) -> Fraction:
    """min over a of dist(x, .); 1 when a is empty."""
    best = None
    row = m.dist[x]
    for i in a:
        v = row[i]
        if best is None or v < best:
            best = v
    return ONE if best is None else best


def hausdorff(a: Iterable[int], b: Iterable[int], m: FinMetric) -> Fraction:
    """Hausdorff distance between index sets with the [0,1] conventions."""
    a = list(a)
    b = list(b)
    if not a and not b:
        return ZERO
    if not a or not b:
        return ONE
    forward = max(pointset_dist(x, b, m) for x in a)
    backward = max(pointset_dist(y, a, m) for y in b)
    return max(forward, backward)
