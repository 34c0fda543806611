"""Shared structures and helpers.

The exact structures below were derived by hand: each metric entry is the
Hausdorff distance between the listed extensions, so `is_exact` holds by
construction and is asserted in test_semantics.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from metricset import FinMetric, free_vars
from metricset.semantics import MetricSetStructure

H = Fraction(1, 2)


def mss(d, mem) -> MetricSetStructure:
    return MetricSetStructure(FinMetric(d), mem)


def exact_point() -> MetricSetStructure:
    """One memberless point: d(a,a) = hausdorff(0,0) = 0."""
    return mss([[0]], [[False]])


def exact_chain2() -> MetricSetStructure:
    """{0 = empty, 1 = {0}}; all distinct extensions at Hausdorff distance 1."""
    return mss([[0, 1], [1, 0]], [[False, True], [False, False]])


def exact_chain3() -> MetricSetStructure:
    """{empty, {empty}, {{empty}}}."""
    d = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    mem = [[False, True, False], [False, False, True], [False, False, False]]
    return mss(d, mem)


def exact_quine_pair(r=H) -> MetricSetStructure:
    """Two Quine atoms at distance r."""
    return mss([[0, r], [r, 0]], [[True, False], [False, True]])


def exact_russell4() -> MetricSetStructure:
    """Quine atoms q0,q1 at 1/2, x = {q0,q1}, b = {x}; all pairs at 1/2."""
    d = [[0, H, H, H], [H, 0, H, H], [H, H, 0, H], [H, H, H, 0]]
    mem = [[True, False, True, False], [False, True, True, False],
           [False, False, False, True], [False, False, False, False]]
    return mss(d, mem)


def exact_v2() -> MetricSetStructure:
    """{empty, {empty}, {empty,{empty}}}: nested with a doubleton."""
    d = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    mem = [[False, True, True], [False, False, True], [False, False, False]]
    return mss(d, mem)


def exact_structures() -> list[MetricSetStructure]:
    return [exact_point(), exact_chain2(), exact_chain3(),
            exact_quine_pair(), exact_russell4(), exact_v2()]


def assignments(phi, size: int):
    """All assignments of the formula's free variables into range(size)."""
    fv = sorted(free_vars(phi))
    for vals in itertools.product(range(size), repeat=len(fv)):
        yield dict(zip(fv, vals))


@pytest.fixture(scope="session")
def s1_model():
    from metricset import pseudo_finite_gauge, quotient_model
    return quotient_model(None, 3, pseudo_finite_gauge(1, 3))


@pytest.fixture(scope="session")
def s2_model():
    from metricset import pseudo_finite_gauge, quotient_model
    return quotient_model(None, 4, pseudo_finite_gauge(2, 4))
