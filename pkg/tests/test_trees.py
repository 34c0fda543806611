"""Tree universes, gauges, quotient models and their certificates."""

import itertools
import random
from fractions import Fraction

import pytest

from metricset import (CapExceeded, FinMetric, Gauge, InvalidGauge,
                       MetricsetError, d_e_matrix, enumerate_universe,
                       pseudo_finite_gauge, quine_atoms_check, quotient_model,
                       rat, rho_s, v_sigma)
from metricset import trees
from metricset.errors import MetricsetError as Err

H = Fraction(1, 2)
T = Fraction(1, 3)


def _struct_key(store, x):
    """Structural identity of a hash-consed element, universe-independent."""
    if store.is_atom(x):
        return ("atom", store.atom_label[x])
    return frozenset(_struct_key(store, c) for c in store.children[x])


# -- universes ---------------------------------------------------------------

def test_universe_level_counts():
    u = enumerate_universe(None, 4)
    assert [len(l) for l in u.levels] == [1, 2, 4, 16, 65536]


def test_universe_with_atom():
    q = FinMetric([[0]])
    u = enumerate_universe(q, 1)
    assert len(u.atoms) == 1
    assert len(u.levels[1]) == 4  # subsets of {atom, empty}


def test_universe_cap():
    with pytest.raises(CapExceeded):
        enumerate_universe(None, 5, cap=2 ** 17)


def test_trunc_and_tc():
    q = FinMetric([[0]])
    u = enumerate_universe(q, 2)
    st = u.store
    atom = u.atoms[0]
    assert st.trunc_to(atom, 0) == atom  # atoms are fixed points
    empty = st.node(())
    s_empty = st.node((empty,))
    ss_empty = st.node((s_empty,))
    assert st.trunc_to(ss_empty, 1) == s_empty
    assert st.trunc_to(ss_empty, 0) == empty
    assert st.tc(atom) == {atom}
    assert st.tc(empty) == frozenset()
    mixed = st.node((s_empty, atom))
    assert st.tc(mixed) == {s_empty, empty, atom}


def test_trunc_surjective_onto_lower_level():
    u = enumerate_universe(None, 3)
    images = {u.store.trunc_to(x, 2) for x in u.levels[3]}
    assert images == set(u.levels[2])


# -- rho ---------------------------------------------------------------------

def test_rho_dichotomy_empty_atoms():
    # with no atoms, rho_beta is 0 iff the beta-truncations agree, else 1
    u = enumerate_universe(None, 3)
    for beta in range(4):
        for x, y in itertools.combinations(u.levels[3], 2):
            v = u.rho(beta, x, y)
            same = u.store.trunc_to(x, beta) == u.store.trunc_to(y, beta)
            assert v == (0 if same else 1), (beta, x, y)


def test_rho_monotone_in_beta():
    q = FinMetric([[0, H], [H, 0]])
    u = enumerate_universe(q, 2)
    pool = list(u.atoms) + u.levels[2]
    elems = pool[:2] + random.Random(7).sample(pool[2:], 60)
    for x, y in itertools.combinations(elems, 2):
        values = [u.rho(beta, x, y) for beta in range(3)]
        assert values == sorted(values), (x, y, values)


def test_rho_atoms_keep_their_distance():
    q = FinMetric([[0, H], [H, 0]])
    u = enumerate_universe(q, 2)
    for beta in range(3):
        assert u.rho(beta, u.atoms[0], u.atoms[1]) == H


def test_rho_zero_is_atom_hausdorff():
    q = FinMetric([[0, H], [H, 0]])
    u = enumerate_universe(q, 1)
    st = u.store
    both = st.node(u.atoms)
    one = st.node((u.atoms[0],))
    assert u.rho(0, both, one) == H
    empty = st.node(())
    assert u.rho(0, both, empty) == 1
    assert u.rho(0, empty, st.node((empty,))) == 0  # no atoms below either


# -- gauges ------------------------------------------------------------------

def test_gauge_validation():
    with pytest.raises(InvalidGauge):
        Gauge((H, H))  # must start at 1
    with pytest.raises(InvalidGauge):
        Gauge((1, H, 1))  # must be non-increasing
    with pytest.raises(InvalidGauge):
        Gauge((1, Fraction(3, 2)))
    g = Gauge((1, 1, H, 0))
    assert g.height == 3


def test_gauge_smoothness():
    s2 = pseudo_finite_gauge(2, 4)
    assert s2.values == (1, 1, H, 0, 0)
    assert s2.epsilon == H
    assert s2.is_smooth(H)
    assert not s2.is_smooth(T)
    assert s2.smallest_eps() == H
    # s(0) != s(1) or nonzero tail disqualify
    assert not Gauge((1, H, 0)).is_smooth(H)
    assert Gauge((1, H, 0)).smallest_eps() is None
    assert not Gauge((1, 1, H)).is_smooth(1)


def test_pseudo_finite_gauge_requirements():
    assert pseudo_finite_gauge(1, 3).values == (1, 1, 0, 0)
    with pytest.raises(InvalidGauge):
        pseudo_finite_gauge(2, 3)  # height must be at least n+2
    with pytest.raises(InvalidGauge):
        pseudo_finite_gauge(0, 3)


def test_rho_s_values():
    u = enumerate_universe(None, 3)
    g = pseudo_finite_gauge(2, 4)
    seen = set()
    for x, y in itertools.combinations(u.levels[3], 2):
        # only levels 0..3 of the gauge apply inside this universe
        v = max(min(u.rho(b, x, y), g.values[b]) for b in range(4))
        seen.add(v)
        assert v == rho_s(x, y, u, trees.Gauge(g.values[:4]))
    assert seen <= {Fraction(0), H, Fraction(1)}


# -- quotient models ---------------------------------------------------------

def test_quotient_sizes(s1_model, s2_model):
    assert s1_model.size == 4
    assert s2_model.size == 16
    assert all(r.passed for r in s1_model.reports)
    assert all(r.passed for r in s2_model.reports)


def test_gauge_height_mismatch():
    with pytest.raises(InvalidGauge):
        quotient_model(None, 3, pseudo_finite_gauge(1, 4))


def test_fast_and_generic_paths_agree_s1():
    g = pseudo_finite_gauge(1, 3)
    fast = trees._quotient_fast(1, 3, g, 2 ** 17)
    generic = trees._quotient_generic(None, 3, g, 2 ** 17)
    assert fast.size == generic.size == 4

    def table(qm):
        keys = [_struct_key(qm.universe.store, x) for x in qm.reps]
        return {(keys[i], keys[j]): qm.le.e(i, j)
                for i in range(qm.size) for j in range(qm.size)}

    tf, tg = table(fast), table(generic)
    # generic carrier holds ranks <= 2; fast reps are the same elements
    shared = set(tf) & set(tg)
    assert len(shared) == 16
    assert all(tf[k] == tg[k] for k in shared)


def test_fast_and_generic_paths_agree_s2():
    g = pseudo_finite_gauge(2, 4)
    fast = trees._quotient_fast(2, 4, g, 2 ** 17)
    generic = trees._quotient_generic(None, 4, g, 2 ** 17)
    assert fast.size == generic.size == 16

    def table(qm):
        keys = [_struct_key(qm.universe.store, x) for x in qm.reps]
        return {(keys[i], keys[j]): qm.le.e(i, j)
                for i in range(qm.size) for j in range(qm.size)}

    tf, tg = table(fast), table(generic)
    assert set(tf) == set(tg)
    assert tf == tg


def test_d_e_oracle_values(s2_model):
    # hand-derived induced distances between tree classes on the s_2 model
    key_of = {_struct_key(s2_model.universe.store, x): i
              for i, x in enumerate(s2_model.reps)}
    empty = frozenset()
    s_empty = frozenset({empty})
    ss_empty = frozenset({s_empty})
    pair = frozenset({empty, s_empty})
    dm = d_e_matrix(s2_model.le)
    d = lambda a, b: dm.d(key_of[a], key_of[b])
    assert d(s_empty, empty) == 1
    assert d(ss_empty, s_empty) == 1
    assert d(frozenset({ss_empty}), ss_empty) == H
    # V (all four level-2 classes) vs {empty, {empty}}
    v_key = frozenset({empty, s_empty, ss_empty, pair})
    assert d(v_key, pair) == H


def test_member_layer_and_tree_view(s2_model):
    assert len(s2_model.member_layer) == 4
    m = s2_model.mss_tree()
    # every subset of the member layer occurs as exactly one tree extension
    exts = {}
    for j in range(m.size):
        ext = frozenset(m.ext(j))
        assert ext <= set(s2_model.member_layer)
        exts.setdefault(ext, []).append(j)
    assert len(exts) == 16
    assert all(len(v) == 1 for v in exts.values())


def test_completion_view_spectrum_values(s2_model):
    mc = s2_model.mss_completion()
    from metricset import discreteness_spectrum
    values = set(discreteness_spectrum(mc).values())
    assert values == {H, Fraction(1)}


def test_s3_model_count():
    g = pseudo_finite_gauge(3, 5)
    qm = quotient_model(None, 5, g, certify=False)
    assert qm.size == 65536
    # spot-check: distinct representatives have distinct e-columns at
    # their differing child (children are reps of lower rank themselves)
    st = qm.universe.store
    idx = {x: i for i, x in enumerate(qm.reps)}
    import random
    rng = random.Random(0)
    for _ in range(50):
        i, j = rng.sample(range(qm.size), 2)
        ci = set(st.members(qm.reps[i]))
        cj = set(st.members(qm.reps[j]))
        c = next(iter(ci ^ cj))
        k = idx[c]
        assert qm.le.e(k, i) != qm.le.e(k, j)


def test_sampled_certificates_large_model():
    g = pseudo_finite_gauge(3, 5)
    qm = quotient_model(None, 5, g, certify=True)
    assert all(r.mode == "skipped" for r in qm.reports)


def test_sampled_certificates_medium_model():
    q = FinMetric([[0, H], [H, 0]])
    gauge = Gauge((1, 1, H, 0), epsilon=H)
    qm = quotient_model(q, 3, gauge, certify=True)
    assert qm.size == 256
    # closed corpus entries stay exhaustive; parametrized ones get sampled
    assert all(r.mode in ("sampled", "exhaustive") for r in qm.reports)
    assert any(r.mode == "sampled" for r in qm.reports)
    assert all(r.passed for r in qm.reports)


# -- special elements --------------------------------------------------------

def test_v_sigma():
    u = enumerate_universe(None, 3)
    st = u.store
    assert v_sigma(0, u) == st.node(())
    v2 = v_sigma(2, u)
    assert len(st.members(v2)) == 2
    v3 = v_sigma(3, u)
    assert len(st.members(v3)) == 4
    with pytest.raises(MetricsetError):
        v_sigma(4, u)
    with pytest.raises(ValueError):
        v_sigma(-1, u)


def test_v_sigma_members_pairwise_far():
    u = enumerate_universe(None, 3)
    v3 = v_sigma(3, u)
    g = Gauge((1, 1, 1, 1), epsilon=Fraction(1))
    members = u.store.members(v3)
    for a, b in itertools.combinations(members, 2):
        assert rho_s(a, b, u, g) == 1


def test_quine_atoms_check():
    q = FinMetric([[0, H], [H, 0]])
    chk = quine_atoms_check(q, 3, Gauge((1, 1, H, 0), epsilon=H))
    assert chk.passed
    assert any("distinct" in name for name, _, _ in chk.details)


def test_quine_atoms_check_needs_atoms():
    with pytest.raises(ValueError):
        quine_atoms_check(FinMetric([]), 2, Gauge((1, 1, 0), epsilon=1))
