"""Formula ASTs, measures, schemas, macro expansion, printing and parsing."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from metricset import (CaptureError, LeStructure, ParseError,
                       UnsupportedFormula, epsilon_phi, count_e,
                       eval_luk, eval_sq, expand_luk_macros, free_vars, parse,
                       print_formula, schema, v_of)
from metricset import formulas as F
from conftest import assignments, exact_russell4

H = Fraction(1, 2)


# -- measures ----------------------------------------------------------------

def test_v_of_basics():
    assert v_of(F.CONST1) == 1
    assert v_of(F.E("x", "y")) == 1
    assert v_of(F.Sum(F.E("x", "y"), F.E("y", "x"))) == 2
    assert v_of(F.Scale(Fraction(-3), F.CONST1)) == 3
    assert v_of(F.Max(F.CONST1, F.Sum(F.CONST1, F.CONST1))) == 2
    assert v_of(F.Sup("x", F.E("x", "y"))) == 1


def test_v_of_phi_r():
    # min(d(y,z), r - d(y,z)) at r=1/2: the Sum branch gives 1/2 + 1 = 3/2
    assert v_of(schema("phi_r", H)) == Fraction(3, 2)


def test_count_e():
    assert count_e(F.Ein("x", "y")) == 1
    assert count_e(F.EqE("x", "y")) == 2
    assert count_e(F.Strong(F.Ein("x", "y"), F.Neg(F.Ein("x", "z")))) == 2
    assert count_e(F.Bot()) == 0
    assert count_e(F.AffineClamp(0, (1, 1), (F.Ein("x", "y"), F.Bot()))) == 1
    assert count_e(F.Sum(F.E("x", "y"), F.E("x", "y"))) == 2


def test_epsilon_phi():
    assert epsilon_phi(F.E("x", "y")) == Fraction(1, 6)
    assert epsilon_phi(F.Scale(Fraction(1, 4), F.CONST1)) == Fraction(1, 3)
    assert epsilon_phi(F.Sum(F.E("x", "y"), F.E("y", "x"))) == Fraction(1, 12)


def test_free_vars():
    assert free_vars(schema("e")) == {"x", "y"}
    assert free_vars(schema("chn")) == {"x"}
    assert free_vars(F.Sup("x", F.E("x", "y"))) == {"y"}
    # the range variable of a bounded quantifier stays free
    assert free_vars(F.InfIn("z", "y", F.Dist("x", "z"))) == {"x", "y"}
    assert free_vars(F.ForallL("z", F.Iff(F.Ein("z", "x"), F.Ein("z", "y")))) == {"x", "y"}


def test_binder_capture_rejected():
    with pytest.raises(CaptureError):
        F.InfIn("x", "x", F.CONST1)
    with pytest.raises(CaptureError):
        F.d_e_formula("x", "y", "x")


# -- schemas -----------------------------------------------------------------

def test_schema_values_on_russell4():
    m = exact_russell4()
    russell = schema("russell")
    # Quine atoms fully self-member: e(q,q)=0 so 1-e = 1
    assert eval_sq(russell, m, {"x": 0}) == 1
    assert eval_sq(russell, m, {"x": 2}) == H
    assert eval_sq(russell, m, {"x": 3}) == H
    e = schema("e")
    assert eval_sq(e, m, {"x": 0, "y": 2}) == 0
    assert eval_sq(e, m, {"x": 3, "y": 2}) == H
    # E_r is the clamped affine connective clamp((2r - 3d)/r):
    # d=0 -> 2 clamped to 1; d=1/2=r -> (2r-3r)/r = -1 clamped to 0
    er = schema("E_r", H)
    assert eval_sq(er, m, {"x": 0, "y": 0}) == 1
    assert eval_sq(er, m, {"x": 0, "y": 1}) == 0


def test_schema_errors():
    with pytest.raises(ValueError):
        schema("phi_r")
    with pytest.raises(ValueError):
        schema("E_r", Fraction(2))
    with pytest.raises(ValueError):
        schema("nope")


# -- macro expansion ---------------------------------------------------------

_atoms = [F.Bot(), F.Ein("x", "y"), F.Ein("y", "x"), F.Ein("x", "x"), F.EqE("x", "y")]


def _luk_formulas():
    binary = st.sampled_from([F.Implies, F.AndL, F.OrL, F.Strong, F.Iff])
    return st.recursive(
        st.sampled_from(_atoms),
        lambda children: st.one_of(
            st.builds(F.Neg, children),
            st.builds(lambda c, v: F.ExistsL(v, c), children, st.sampled_from(["x", "y"])),
            st.builds(lambda c, v: F.ForallL(v, c), children, st.sampled_from(["x", "y"])),
            st.tuples(binary, children, children).map(lambda t: t[0](t[1], t[2]))),
        max_leaves=6)


_small_le = LeStructure(2, e=[[Fraction(0), Fraction(1, 3)], [Fraction(2, 3), Fraction(1)]])


@given(_luk_formulas())
def test_macro_expansion_preserves_value(phi):
    expanded = expand_luk_macros(phi, F.FreshVars("_z", avoid=free_vars(phi)))
    core = (F.Bot, F.Ein, F.Implies, F.ExistsL, F.ForallL)
    assert all(isinstance(g, core) for g in F.iter_nodes(expanded))
    for rho in assignments(phi, _small_le.size):
        assert eval_luk(phi, _small_le, rho) == eval_luk(expanded, _small_le, rho)


def test_affine_clamp_not_macro_expandable():
    clamp = F.AffineClamp(1, (-1,), (F.Ein("x", "y"),))
    with pytest.raises(UnsupportedFormula):
        expand_luk_macros(clamp, F.FreshVars())


# -- printing and parsing ----------------------------------------------------

_round_trip_cases = [
    ("sq", "1"),
    ("sq", "d(x,y)"),
    ("sq", "sup z in x . inf w in y . d(z,w)"),
    ("sq", "min(d(y,z), 1/2 * 1 + -1 * d(y,z))"),
    ("sq", "|d(x,y) + -1 * d(y,x)|"),
    ("e", "e(x,y) + -1/2 * 1"),
    ("e", "sup x . sup y . max(e(x,y), 1)"),
    ("e", "inf z . min(e(z,x) + 2 * e(z,y), 1)"),
    ("luk", "x in y -> bot"),
    ("luk", "forall x forall y (x in y <-> exists z (x =e z (*) z in y (*) z in y))"),
    ("luk", "~x in z | x in y & bot"),
    ("luk", "M[3; -6](x in y)"),
    ("luk", "forall x bot"),
]


@pytest.mark.parametrize("language,text", _round_trip_cases)
def test_parse_print_round_trip(language, text):
    phi = parse(language, text)
    assert parse(language, print_formula(phi)) == phi


def test_print_parse_identity_on_asts():
    for phi in [schema("chn"), schema("o"), schema("phi_r", H)]:
        assert parse("sq", print_formula(phi)) == phi


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("sq", "e(x,y)")  # wrong fragment
    with pytest.raises(ParseError):
        parse("e", "d(x,y)")
    with pytest.raises(ParseError):
        parse("sq", "2")  # bare non-unit constant
    with pytest.raises(ParseError):
        parse("sq", "d(x)")
    with pytest.raises(ParseError):
        parse("luk", "x in")
    with pytest.raises(ParseError):
        parse("sq", "min(1,1) garbage")
    with pytest.raises(ValueError):
        parse("xx", "1")


def test_multi_variable_quantifiers():
    phi = parse("sq", "sup x y . d(x,y)")
    assert phi == F.Sup("x", F.Sup("y", F.Dist("x", "y")))
    psi = parse("luk", "forall x y x in y")
    assert psi == F.ForallL("x", F.ForallL("y", F.Ein("x", "y")))


# -- discretization ----------------------------------------------------------

def test_discretize_shapes():
    ty = F.TVar("a")
    phi = F.DForall("x", ty, F.DNot(F.DMem("x", "x")))
    num = F.discretize(phi, Fraction(1))
    assert isinstance(num, F.InfIn)
    assert num.range_var == "a"
    with pytest.raises(UnsupportedFormula):
        F.discretize(F.DPairEq("x", "y", "z"), Fraction(1))
    with pytest.raises(ValueError):
        F.discretize(phi, Fraction(0))


def test_type_var_names():
    a = F.TVar("a")
    assert F.type_var_name(a) == "a"
    assert F.type_var_name(F.TPow(a)) == "P_a"
    assert F.type_var_name(F.TProd(a, F.TPow(a))) == "a_x_P_a"
