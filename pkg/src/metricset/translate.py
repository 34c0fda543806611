"""Translations between the three formula languages and axiom generators.

Covers: the membership-to-subsethood compilation (to_sq) and its rational
inverse (to_e); prenex maximal affine normal form; synthesis and certification
of integer-affine clamps as pure Lukasiewicz terms; the Lukasiewicz condition
compiler; and generators plus defect evaluators for the extensionality and
excision axiom schemes in both numeric and Lukasiewicz form.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .core import ONE, ZERO, rat_str
from .errors import CaptureError, DegenerateFormula, UnsupportedFormula
from . import formulas as F
from .semantics import LeStructure, e_evaluator, eval_e


def _all_var_names(phi) -> set[str]:
    names: set[str] = set()
    for g in F.iter_nodes(phi):
        if isinstance(g, (F.Dist, F.E, F.Ein, F.EqE)):
            names.update((g.x, g.y))
        elif isinstance(g, (F.Sup, F.Inf, F.ExistsL, F.ForallL)):
            names.add(g.var)
        elif isinstance(g, (F.SupIn, F.InfIn)):
            names.update((g.var, g.range_var))
    return names


# ---------------------------------------------------------------------------
# membership <-> subsethood translations


def to_sq(phi: F.NumFormula) -> F.NumFormula:
    """Replace each membership atom e(x,y) with a bounded inf over y."""
    if not F.is_e_formula(phi):
        raise UnsupportedFormula("to_sq expects a membership-language formula")
    fresh = F.FreshVars("_t", avoid=_all_var_names(phi))

    def go(f):
        if isinstance(f, F.Const1):
            return f
        if isinstance(f, F.E):
            z = fresh.next((f.x, f.y))
            return F.InfIn(z, f.y, F.Dist(f.x, z))
        if isinstance(f, F.Sum):
            return F.Sum(go(f.left), go(f.right))
        if isinstance(f, F.Max):
            return F.Max(go(f.left), go(f.right))
        if isinstance(f, F.Min):
            return F.Min(go(f.left), go(f.right))
        if isinstance(f, F.Scale):
            return F.Scale(f.coeff, go(f.body))
        if isinstance(f, F.Sup):
            return F.Sup(f.var, go(f.body))
        if isinstance(f, F.Inf):
            return F.Inf(f.var, go(f.body))
        raise TypeError(f"not a membership-language formula: {f!r}")

    return go(phi)


def to_e(phi: F.NumFormula) -> F.NumFormula:
    """Compile a subsethood-language formula to the membership language.

    Distance atoms become the induced-metric macro; a bounded inf over y
    becomes an unbounded inf penalized by 2v times the membership defect and
    clipped at the value bound v; bounded sups go through negation.
    """
    if not F.is_sq_formula(phi):
        raise UnsupportedFormula("to_e expects a subsethood-language formula")
    fresh = F.FreshVars("_t", avoid=_all_var_names(phi))

    def go(f):
        if isinstance(f, F.Const1):
            return f
        if isinstance(f, F.Dist):
            return F.d_e_formula(f.x, f.y, fresh.next((f.x, f.y)))
        if isinstance(f, F.Sum):
            return F.Sum(go(f.left), go(f.right))
        if isinstance(f, F.Max):
            return F.Max(go(f.left), go(f.right))
        if isinstance(f, F.Min):
            return F.Min(go(f.left), go(f.right))
        if isinstance(f, F.Scale):
            return F.Scale(f.coeff, go(f.body))
        if isinstance(f, F.Sup):
            return F.Sup(f.var, go(f.body))
        if isinstance(f, F.Inf):
            return F.Inf(f.var, go(f.body))
        if isinstance(f, F.InfIn):
            v = F.v_of(f.body)
            body = F.Sum(go(f.body), F.Scale(2 * v, F.E(f.var, f.range_var)))
            return F.Inf(f.var, F.Min(body, F.const(v)))
        if isinstance(f, F.SupIn):
            inner = F.InfIn(f.var, f.range_var, F.neg(f.body))
            return F.neg(go(inner))
        raise TypeError(f"not a subsethood-language formula: {f!r}")

    return go(phi)


# ---------------------------------------------------------------------------
# prenex maximal affine normal form


@dataclass(frozen=True)
class Literal:
    """Rational affine combination const + sum coeff * e(x,y)."""

    const: Fraction
    coeffs: tuple[tuple[Fraction, tuple[str, str]], ...]

    @staticmethod
    def make(const, pairs):
        acc: dict[tuple[str, str], Fraction] = {}
        for c, atom in pairs:
            acc[atom] = acc.get(atom, ZERO) + c
        coeffs = tuple((c, atom) for atom, c in sorted(acc.items(), key=lambda kv: kv[0])
                       if c != 0)
        return Literal(Fraction(const), coeffs)

    def add(self, other: "Literal") -> "Literal":
        return Literal.make(self.const + other.const,
                            list(self.coeffs) + list(other.coeffs))

    def scale(self, r: Fraction) -> "Literal":
        return Literal.make(self.const * r, [(c * r, a) for c, a in self.coeffs])


@dataclass(frozen=True)
class MaxAnf:
    """Quantifier prefix over a max of min-groups of affine literals."""

    prefix: tuple[tuple[str, str], ...]
    groups: tuple[tuple[Literal, ...], ...]


def _dedup(items):
    seen = set()
    out = []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return tuple(out)


def prenex_max_anf(phi: F.NumFormula) -> MaxAnf:
    """Value-preserving prenex maximal affine normal form."""
    if not F.is_e_formula(phi):
        raise UnsupportedFormula("normal form is defined on membership-language formulas")
    counter = itertools.count()

    def go(f, sub):
        if isinstance(f, F.Const1):
            return [], ((Literal.make(ONE, ()),),)
        if isinstance(f, F.E):
            atom = (sub.get(f.x, f.x), sub.get(f.y, f.y))
            return [], ((Literal.make(ZERO, [(ONE, atom)]),),)
        if isinstance(f, F.Sum):
            p1, g1 = go(f.left, sub)
            p2, g2 = go(f.right, sub)
            groups = tuple(_dedup(a.add(b) for a in ga for b in gb)
                           for ga in g1 for gb in g2)
            return p1 + p2, _dedup(groups)
        if isinstance(f, F.Max):
            p1, g1 = go(f.left, sub)
            p2, g2 = go(f.right, sub)
            return p1 + p2, _dedup(g1 + g2)
        if isinstance(f, F.Min):
            p1, g1 = go(f.left, sub)
            p2, g2 = go(f.right, sub)
            groups = tuple(_dedup(ga + gb) for ga in g1 for gb in g2)
            return p1 + p2, _dedup(groups)
        if isinstance(f, F.Scale):
            if f.coeff == 0:
                return [], ((Literal.make(ZERO, ()),),)
            prefix, groups = go(f.body, sub)
            if f.coeff > 0:
                return prefix, _dedup(tuple(_dedup(l.scale(f.coeff) for l in g))
                                      for g in groups)
            # negation turns a max of mins into a min of maxes; choice
            # functions turn it back
            flipped = [("inf" if k == "sup" else "sup", v) for k, v in prefix]
            negated = [tuple(l.scale(f.coeff) for l in g) for g in groups]
            out = tuple(_dedup(choice) for choice in itertools.product(*negated))
            return flipped, _dedup(out)
        if isinstance(f, (F.Sup, F.Inf)):
            v = f"_q{next(counter)}"
            prefix, groups = go(f.body, {**sub, f.var: v})
            kind = "sup" if isinstance(f, F.Sup) else "inf"
            return [(kind, v)] + prefix, groups
        raise TypeError(f"not a membership-language formula: {f!r}")

    prefix, groups = go(phi, {})
    return MaxAnf(tuple(prefix), groups)


def eval_max_anf(anf: MaxAnf, n: LeStructure, rho: dict[str, int]) -> Fraction:
    def literal(lit, env):
        return lit.const + sum((c * n.e(env[x], env[y]) for c, (x, y) in lit.coeffs),
                               ZERO)

    def matrix(env):
        return max(min(literal(l, env) for l in g) for g in anf.groups)

    def go(k, env):
        if k == len(anf.prefix):
            return matrix(env)
        kind, var = anf.prefix[k]
        pick = max if kind == "sup" else min
        return pick(go(k + 1, {**env, var: i}) for i in range(n.size))

    return go(0, dict(rho))


def print_literal(lit: Literal) -> str:
    parts = []
    if lit.const != 0 or not lit.coeffs:
        parts.append(rat_str(lit.const))
    for c, (x, y) in lit.coeffs:
        atom = f"e({x},{y})"
        parts.append(atom if c == 1 else f"{rat_str(c)}*{atom}")
    return " + ".join(parts)


def print_max_anf(anf: MaxAnf) -> str:
    lines = []
    if anf.prefix:
        lines.append(" ".join(f"{k} {v}." for k, v in anf.prefix))
    lines.append("max of:")
    for g in anf.groups:
        lines.append("  min[ " + " ; ".join(print_literal(l) for l in g) + " ]")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# integer-affine clamps as pure Lukasiewicz terms


def _oplus(a: F.LukFormula, b: F.LukFormula) -> F.LukFormula:
    return F.Implies(F.Implies(a, F.BOT), b)


def _otimes(a: F.LukFormula, b: F.LukFormula) -> F.LukFormula:
    return F.Implies(F.Implies(a, F.Implies(b, F.BOT)), F.BOT)


def _not(a: F.LukFormula) -> F.LukFormula:
    return F.Implies(a, F.BOT)


def mcnaughton(a: int, bs, args=None) -> F.LukFormula:
    """Pure {->, bot} term computing min(max(a + sum bs[i]*x_i, 0), 1).

    Synthesis peels one unit off a coefficient at a time:
    clamp(g + x) = (clamp(g) (+) x) (*) clamp(g + 1) and
    clamp(g - x) = (clamp(g - 1) (+) ~x) (*) clamp(g); subterms are shared
    through a memo table, so the result is a DAG.
    """
    bs = tuple(int(b) for b in bs)
    if args is None:
        args = tuple(F.Ein(f"x{i}", "u") for i in range(len(bs)))
    args = tuple(args)
    if len(args) != len(bs):
        raise ValueError("coefficient/argument arity mismatch")
    memo: dict[tuple[int, tuple[int, ...]], F.LukFormula] = {}

    def build(a: int, bs: tuple[int, ...]) -> F.LukFormula:
        key = (a, bs)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if all(b == 0 for b in bs):
            out = F.TOP if a >= 1 else F.BOT
        else:
            i = next(k for k, b in enumerate(bs) if b != 0)
            if bs[i] > 0:
                rest = bs[:i] + (bs[i] - 1,) + bs[i + 1:]
                out = _otimes(_oplus(build(a, rest), args[i]), build(a + 1, rest))
            else:
                rest = bs[:i] + (bs[i] + 1,) + bs[i + 1:]
                out = _otimes(_oplus(build(a - 1, rest), _not(args[i])), build(a, rest))
        memo[key] = out
        return out

    return build(int(a), bs)


def _clamp01(v: Fraction) -> Fraction:
    return min(max(v, ZERO), ONE)


def eval_term(term: F.LukFormula, atom_values: dict[int, Fraction]) -> Fraction:
    """Evaluate a pure {->, bot} DAG with given leaf values (keyed by id)."""
    memo: dict[int, Fraction] = {}

    def go(f):
        v = memo.get(id(f))
        if v is not None:
            return v
        if id(f) in atom_values:
            v = atom_values[id(f)]
        elif isinstance(f, F.Bot):
            v = ZERO
        elif isinstance(f, F.Implies):
            v = min(ONE - go(f.left) + go(f.right), ONE)
        else:
            raise TypeError(f"not a pure implication term: {f!r}")
        memo[id(f)] = v
        return v

    return go(term)


@dataclass
class CertResult:
    passed: bool
    points: int
    worst_gap: Fraction


def certify_mcnaughton(a: int, bs, seed: int = 0, term: F.LukFormula | None = None,
                       args=None, random_points: int = 1000) -> CertResult:
    """Check a synthesized clamp term on a rational grid plus random points.

    The grid has mesh 1/D with D = 2*(|a| + sum|bs| + 1); random points have
    denominators up to 64. All arithmetic is exact.
    """
    bs = tuple(int(b) for b in bs)
    n = len(bs)
    if args is None:
        args = tuple(F.Ein(f"x{i}", "u") for i in range(n))
    args = tuple(args)
    if term is None:
        term = mcnaughton(a, bs, args)
    ids = [id(x) for x in args]

    def check(values) -> Fraction:
        want = _clamp01(Fraction(a) + sum((b * v for b, v in zip(bs, values)), ZERO))
        got = eval_term(term, dict(zip(ids, values)))
        return abs(got - want)

    worst = ZERO
    points = 0
    d = 2 * (abs(int(a)) + sum(abs(b) for b in bs) + 1)
    for tup in itertools.product(range(d + 1), repeat=n):
        worst = max(worst, check([Fraction(t, d) for t in tup]))
        points += 1
    rng = random.Random(seed)
    for _ in range(random_points):
        values = []
        for _ in range(n):
            den = rng.randint(1, 64)
            values.append(Fraction(rng.randint(0, den), den))
        worst = max(worst, check(values))
        points += 1
    return CertResult(worst == 0, points, worst)


# ---------------------------------------------------------------------------
# the Lukasiewicz condition compiler


def to_luk_condition(phi: F.NumFormula) -> tuple[F.LukFormula, int]:
    """Compile a membership-language formula to (psi, L).

    L is a factorial every matrix denominator divides, and eval_luk(psi)
    equals min(max(L * eval_e(phi), 0), 1) pointwise; literals become affine
    clamps over membership atoms (the atom value is 1 - e, hence the sign
    flip on coefficients), mins become weak conjunctions, maxes weak
    disjunctions, and the quantifier prefix flips to exists/forall.
    """
    anf = prenex_max_anf(phi)
    dens = [1]
    for g in anf.groups:
        for lit in g:
            dens.append(lit.const.denominator)
            dens.extend(c.denominator for c, _ in lit.coeffs)
    ell = max(2, max(dens) + 1)
    scale = math.factorial(ell)

    def clamp_literal(lit: Literal) -> F.LukFormula:
        shift = lit.const + sum((c for c, _ in lit.coeffs), ZERO)
        a = scale * shift
        coeffs = tuple(-scale * c for c, _ in lit.coeffs)
        args = tuple(F.Ein(x, y) for _, (x, y) in lit.coeffs)
        return F.AffineClamp(int(a), tuple(int(c) for c in coeffs), args)

    def chain(make, parts):
        out = parts[0]
        for p in parts[1:]:
            out = make(out, p)
        return out

    groups = [chain(F.AndL, [clamp_literal(l) for l in g]) for g in anf.groups]
    body = chain(F.OrL, groups)
    for kind, var in reversed(anf.prefix):
        body = F.ExistsL(var, body) if kind == "sup" else F.ForallL(var, body)
    return body, scale


def expand_affine_clamps(phi: F.LukFormula) -> F.LukFormula:
    """Replace every affine-clamp macro with its synthesized pure term."""

    def go(f):
        if isinstance(f, F.AffineClamp):
            return mcnaughton(f.a, f.coeffs, tuple(go(a) for a in f.args))
        if isinstance(f, (F.Bot, F.Ein, F.EqE)):
            return f
        if isinstance(f, (F.Implies, F.AndL, F.OrL, F.Strong, F.Iff)):
            return type(f)(go(f.left), go(f.right))
        if isinstance(f, F.Neg):
            return F.Neg(go(f.body))
        if isinstance(f, (F.ExistsL, F.ForallL)):
            return type(f)(f.var, go(f.body))
        raise TypeError(f"not a Lukasiewicz formula: {f!r}")

    return go(phi)


# ---------------------------------------------------------------------------
# axiom schemes


@dataclass
class AxiomReport:
    name: str
    formula: str
    defect: Fraction
    bound: Fraction
    passed: bool
    mode: str = "exhaustive"

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"{status} {self.name}: defect {rat_str(self.defect)} "
                f"<= {rat_str(self.bound)} [{self.mode}]")


def h_ext_defect_at() -> F.NumFormula:
    """|e(x,y) - inf_z min(d_e(x,z) + 2 e(z,y), 1)| with x, y free."""
    inner = F.Inf("z", F.Min(
        F.Sum(F.d_e_formula("x", "z", "w"), F.Scale(2, F.E("z", "y"))), F.CONST1))
    return F.absf(F.sub(F.E("x", "y"), inner))


def axiom_h_ext() -> F.NumFormula:
    """The closed hereditary-extensionality defect; 0 exactly on exact models."""
    return F.Sup("x", F.Sup("y", h_ext_defect_at()))


def _excision_core(phi: F.NumFormula, var: str) -> tuple[F.NumFormula, tuple[str, ...]]:
    fv = F.free_vars(phi)
    if "z" in fv or var == "z":
        raise CaptureError("the excision scheme reserves the variable z")
    eps = F.epsilon_phi(phi)
    inner = F.Max(
        F.Min(F.E(var, "z"), F.neg(phi)),
        F.Min(F.sub(F.const(eps), F.E(var, "z")), F.sub(phi, F.CONST1)))
    core = F.Inf("z", F.Sup(var, inner))
    outer = tuple(sorted(fv - {var}))
    return core, outer


def axiom_excision(phi: F.NumFormula, var: str = "x") -> F.NumFormula:
    """Closed excision condition: every definable cut has a near-exact witness."""
    core, outer = _excision_core(phi, var)
    for y in reversed(outer):
        core = F.Sup(y, core)
    return core


def excision_defect(n: LeStructure, phi: F.NumFormula, var: str = "x",
                    samples: int | None = None, seed: int = 0) -> tuple[Fraction, str]:
    """Evaluate the excision defect, exhaustively or with sampled parameters."""
    core, outer = _excision_core(phi, var)
    if samples is None or not outer:
        return eval_e(axiom_excision(phi, var), n, {}), "exhaustive"
    rng = random.Random(seed)
    evaluate = e_evaluator(core, n)
    best = None
    for _ in range(samples):
        rho = {y: rng.randrange(n.size) for y in outer}
        v = evaluate(rho)
        best = v if best is None or v > best else best
    return best, "sampled"


def luk_axiom_ext() -> F.LukFormula:
    """Membership is invariant under extensional equality, up to a witness."""
    witness = F.ExistsL("z", F.Strong(
        F.Strong(F.EqE("x", "z"), F.Ein("z", "y")), F.Ein("z", "y")))
    return F.ForallL("x", F.ForallL("y", F.Iff(F.Ein("x", "y"), witness)))


def luk_axiom_excision(phi: F.LukFormula, var: str = "x") -> F.LukFormula:
    """The excision scheme: a z collecting exactly the strong-phi points."""
    n = F.count_e(phi)
    if n == 0:
        raise DegenerateFormula(
            "the excision scheme needs at least one membership atom")
    fv = F.free_vars(phi)
    if "z" in fv or var == "z":
        raise CaptureError("the excision scheme reserves the variable z")
    in_z = F.Ein(var, "z")
    body = F.AndL(
        F.OrL(in_z, F.strong_chain([F.Neg(phi)] * 3)),
        F.OrL(F.strong_chain([F.Neg(in_z)] * (6 * n)), F.strong_chain([phi] * 3)))
    out: F.LukFormula = F.ExistsL("z", F.ForallL(var, body))
    for y in reversed(sorted(fv - {var})):
        out = F.ForallL(y, out)
    return out
