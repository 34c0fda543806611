"""Witness search, pair coding, self-membership gaps, chain analysis."""

import itertools
import random
from fractions import Fraction

import pytest

from metricset import (FinMetric, InsufficientDepth, NoWitness,
                       chain_report, discreteness_spectrum, exc_search,
                       find_extension, format_chain_report,
                       pair_distance_oracle, russell_gap, wiener_pair)
from metricset import formulas as F
from conftest import (exact_chain3, exact_quine_pair, exact_russell4,
                      exact_structures, exact_v2, exact_chain2, mss)

H = Fraction(1, 2)
ZERO_F = F.Scale(Fraction(0), F.CONST1)


# -- excision search ---------------------------------------------------------

def test_exc_search_requires_r_below_s():
    with pytest.raises(ValueError):
        exc_search(exact_chain2(), F.CONST1, H, H)


def test_exc_search_empty_cut_gives_memberless_witness():
    # constant 1 never drops to 0, so the cut is empty and any element with
    # members of value < 1/2 works; the memberless element is the smallest
    res = exc_search(exact_chain2(), F.CONST1, 0, H)
    assert (res.index, res.residual, res.satisfied) == (0, 0, True)


def test_exc_search_no_witness_reports_best_residual():
    # the zero formula cuts everything, but no element of v2 contains the
    # top element, which sits at distance 1 from every extension
    with pytest.raises(NoWitness) as exc:
        exc_search(exact_v2(), ZERO_F, H, 1)
    assert exc.value.best_index == 0
    assert exc.value.best_residual == 1


def test_exc_search_slack_relaxes_the_cover():
    res = exc_search(exact_v2(), ZERO_F, H, 1, slack=1)
    assert res.satisfied and res.residual == 0


def test_exc_search_accepts_e_formulas_via_translation():
    # e(x,x) <= 0 holds of the Quine atoms; {q0,q1} excises them
    m = exact_russell4()
    res = exc_search(m, F.E("x", "x"), 0, H)
    assert res.satisfied
    assert set(m.ext(res.index)) >= {0, 1}


# -- extension construction --------------------------------------------------

def test_find_extension_exact_targets():
    m = exact_russell4()
    res = find_extension(m, {0, 1})
    assert (res.index, res.residual, res.satisfied) == (2, 0, True)


def test_find_extension_reports_nearest_miss():
    m = exact_russell4()
    res = find_extension(m, {0, 3})
    assert not res.satisfied
    assert res.residual == H  # every extension misses one of the targets by 1/2


def test_find_extension_all_member_layer_subsets(s2_model):
    m = s2_model.mss_tree()
    for target in itertools.chain.from_iterable(
            itertools.combinations(s2_model.member_layer, k) for k in range(5)):
        res = find_extension(m, target)
        assert res.satisfied, target


# -- ordered pairs -----------------------------------------------------------

def _wiener_structure():
    """Quine atoms a=0, b=1; empty=2; {a,empty}=3; pair {{a},{}},{{b}} = 4."""
    d = [[0 if i == j else 1 for j in range(5)] for i in range(5)]
    mem = [[False] * 5 for _ in range(5)]
    mem[0][0] = True
    mem[1][1] = True
    mem[0][3] = True
    mem[2][3] = True
    mem[3][4] = True
    mem[1][4] = True
    return mss(d, mem)


def test_wiener_pair_found():
    res = wiener_pair(_wiener_structure(), 0, 1)
    assert (res.index, res.satisfied) == (4, True)


def test_wiener_pair_needs_depth():
    with pytest.raises(InsufficientDepth):
        wiener_pair(exact_russell4(), 0, 1)  # no memberless element


def _random_metric(rng, size=4):
    """Random rational metric on `size` points via shortest-path closure."""
    d = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            d[i][j] = d[j][i] = Fraction(rng.randint(1, 8), 8)
    for k in range(size):
        for i in range(size):
            for j in range(size):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return FinMetric(d)


def test_pair_distance_law_random_metrics():
    # d(pair(a,b), pair(c,f)) == max(d(a,c), d(b,f)) for the nested coding
    rng = random.Random(0)
    for _ in range(100):
        m = _random_metric(rng)
        a, b, c, f = (rng.randrange(4) for _ in range(4))
        got, want = pair_distance_oracle(m, a, b, c, f)
        assert got == want, (m.dist, a, b, c, f)


def test_pair_distance_law_on_exact_structures():
    for s in exact_structures():
        n = s.size
        for a, b, c, f in itertools.product(range(n), repeat=4):
            got, want = pair_distance_oracle(s.metric, a, b, c, f)
            assert got == want


# -- self-membership gap -----------------------------------------------------

def test_russell_gap_validates_r():
    m = exact_russell4()
    for bad in (0, 1, 2, Fraction(-1, 2)):
        with pytest.raises(ValueError):
            russell_gap(m, bad)


def test_russell_gap_exact_structure():
    # the witness's members all have self-distance 1/2, strictly inside (1/4, 1)
    gap = russell_gap(exact_russell4(), Fraction(1, 4))
    assert Fraction(1, 4) < gap < 1
    assert gap == H


def test_russell_gap_on_constructed_model(s2_model):
    m = s2_model.mss_tree()
    gap = russell_gap(m, Fraction(1, 4), slack=H)
    assert gap == H


# -- discreteness and chains -------------------------------------------------

def test_discreteness_spectrum():
    m = exact_russell4()
    spec = discreteness_spectrum(m)
    assert spec[0] == spec[1] == 1  # single member each (Quine atoms)
    assert spec[2] == H  # {q0, q1}
    assert spec[3] == 1  # single member {x}


def test_chain_report_values():
    # memberless elements evaluate to the empty-sup value -1 and are chains;
    # nested singleton chains sit at 0; the Quine-atom doubleton is an
    # antichain with defect 1/2
    got = [(e.chn, e.chain, e.well_ordered, e.dis)
           for e in chain_report(exact_chain3())]
    assert got == [(-1, True, True, 1), (-1, True, True, 1), (0, True, True, 1)]

    got = [(e.chn, e.chain) for e in chain_report(exact_russell4())]
    assert got == [(0, True), (0, True), (H, False), (0, True)]


def test_chain_report_v2_doubleton_is_chain():
    entries = chain_report(exact_v2())
    assert entries[2].chn == 0 and entries[2].chain


def test_format_chain_report():
    text = format_chain_report(chain_report(exact_v2()))
    assert text.splitlines()[0] == "index chn chain well_ordered dis"
    assert text.splitlines()[3] == "2 0 1 1 1"
