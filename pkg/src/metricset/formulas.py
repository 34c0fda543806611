"""Formula languages.

Four abstract syntaxes share this module:

* numeric formulas over a metric membership structure (atoms ``1`` and
  ``d(x,y)``, bounded and unbounded quantifiers) and their restriction to a
  single predicate ``e(x,y)`` with unbounded quantifiers only;
* Lukasiewicz formulas over the graded membership atom ``x in y``;
* typed discrete (classical, two-valued) formulas.

The numeric languages reuse the same node classes; ``is_sq_formula`` /
``is_e_formula`` decide which fragment a tree belongs to.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import ONE, ZERO, rat_str
from .errors import CaptureError, ParseError, UnsupportedFormula


# ---------------------------------------------------------------------------
# numeric formulas


class NumFormula:
    __slots__ = ()


@dataclass(frozen=True)
class Const1(NumFormula):
    pass


@dataclass(frozen=True)
class Dist(NumFormula):
    x: str
    y: str


@dataclass(frozen=True)
class E(NumFormula):
    x: str
    y: str


@dataclass(frozen=True)
class Sum(NumFormula):
    left: NumFormula
    right: NumFormula


@dataclass(frozen=True)
class Max(NumFormula):
    left: NumFormula
    right: NumFormula


@dataclass(frozen=True)
class Min(NumFormula):
    left: NumFormula
    right: NumFormula


@dataclass(frozen=True)
class Scale(NumFormula):
    coeff: Fraction
    body: NumFormula

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))


@dataclass(frozen=True)
class Sup(NumFormula):
    var: str
    body: NumFormula


@dataclass(frozen=True)
class Inf(NumFormula):
    var: str
    body: NumFormula


@dataclass(frozen=True)
class SupIn(NumFormula):
    var: str
    range_var: str
    body: NumFormula

    def __post_init__(self):
        if self.var == self.range_var:
            raise CaptureError(f"binder {self.var!r} equals its range variable")


@dataclass(frozen=True)
class InfIn(NumFormula):
    var: str
    range_var: str
    body: NumFormula

    def __post_init__(self):
        if self.var == self.range_var:
            raise CaptureError(f"binder {self.var!r} equals its range variable")


CONST1 = Const1()


def const(r) -> NumFormula:
    r = Fraction(r)
    return CONST1 if r == 1 else Scale(r, CONST1)


def neg(f: NumFormula) -> NumFormula:
    return Scale(Fraction(-1), f)


def sub(a: NumFormula, b: NumFormula) -> NumFormula:
    return Sum(a, neg(b))


def absf(f: NumFormula) -> NumFormula:
    return Max(f, neg(f))


def d_e_formula(x: str, y: str, z: str) -> NumFormula:
    """sup_z max(e(z,x)-e(z,y), e(z,y)-e(z,x)); z must be fresh."""
    if z in (x, y):
        raise CaptureError(f"binder {z!r} collides with an argument")
    diff = sub(E(z, x), E(z, y))
    return Sup(z, absf(diff))


# ---------------------------------------------------------------------------
# Lukasiewicz formulas


class LukFormula:
    __slots__ = ()


@dataclass(frozen=True)
class Bot(LukFormula):
    pass


@dataclass(frozen=True)
class Ein(LukFormula):
    x: str
    y: str


@dataclass(frozen=True)
class Implies(LukFormula):
    left: LukFormula
    right: LukFormula


@dataclass(frozen=True)
class ExistsL(LukFormula):
    var: str
    body: LukFormula


@dataclass(frozen=True)
class ForallL(LukFormula):
    var: str
    body: LukFormula


@dataclass(frozen=True)
class Neg(LukFormula):
    body: LukFormula


@dataclass(frozen=True)
class AndL(LukFormula):
    left: LukFormula
    right: LukFormula


@dataclass(frozen=True)
class OrL(LukFormula):
    left: LukFormula
    right: LukFormula


@dataclass(frozen=True)
class Strong(LukFormula):
    left: LukFormula
    right: LukFormula


@dataclass(frozen=True)
class Iff(LukFormula):
    left: LukFormula
    right: LukFormula


@dataclass(frozen=True)
class EqE(LukFormula):
    x: str
    y: str


@dataclass(frozen=True)
class AffineClamp(LukFormula):
    """Integer-affine clamp min(max(a + sum coeffs[i]*args[i], 0), 1)."""

    a: int
    coeffs: tuple[int, ...]
    args: tuple[LukFormula, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.coeffs) != len(self.args):
            raise ValueError("coefficient/argument arity mismatch")


BOT = Bot()
TOP = Implies(BOT, BOT)


def strong_chain(parts) -> LukFormula:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = Strong(out, p)
    return out


def expand_luk_macros(phi: LukFormula, fresh: "FreshVars") -> LukFormula:
    """Expand every macro node into the pure {->, bot, exists, forall, in} core.

    AffineClamp is not handled here; its certified expansion lives in the
    translation pipeline.
    """

    def go(f: LukFormula) -> LukFormula:
        if isinstance(f, (Bot, Ein)):
            return f
        if isinstance(f, Implies):
            return Implies(go(f.left), go(f.right))
        if isinstance(f, ExistsL):
            return ExistsL(f.var, go(f.body))
        if isinstance(f, ForallL):
            return ForallL(f.var, go(f.body))
        if isinstance(f, Neg):
            return Implies(go(f.body), BOT)
        if isinstance(f, OrL):
            a, b = go(f.left), go(f.right)
            return Implies(Implies(a, b), b)
        if isinstance(f, AndL):
            # ~(~a | ~b)
            na, nb = go(Neg(f.left)), go(Neg(f.right))
            return go(Neg(OrL(na, nb)))
        if isinstance(f, Strong):
            # ~(a -> ~b)
            a, b = f.left, f.right
            return go(Neg(Implies(a, Neg(b))))
        if isinstance(f, Iff):
            return go(Strong(Implies(f.left, f.right), Implies(f.right, f.left)))
        if isinstance(f, EqE):
            z = fresh.next((f.x, f.y))
            return go(ForallL(z, Iff(Ein(z, f.x), Ein(z, f.y))))
        if isinstance(f, AffineClamp):
            raise UnsupportedFormula(
                "AffineClamp expansion requires the translation pipeline")
        raise TypeError(f"not a Lukasiewicz formula: {f!r}")

    return go(phi)


# ---------------------------------------------------------------------------
# typed discrete formulas


class TypeExpr:
    __slots__ = ()


@dataclass(frozen=True)
class TVar(TypeExpr):
    name: str


@dataclass(frozen=True)
class TProd(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass(frozen=True)
class TPow(TypeExpr):
    base: TypeExpr


def type_var_name(t: TypeExpr) -> str:
    """Deterministic assignment-variable name standing for a type witness."""
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TPow):
        return f"P_{type_var_name(t.base)}"
    if isinstance(t, TProd):
        return f"{type_var_name(t.left)}_x_{type_var_name(t.right)}"
    raise TypeError(f"not a type expression: {t!r}")


class DisFormula:
    __slots__ = ()


@dataclass(frozen=True)
class DEq(DisFormula):
    x: str
    y: str


@dataclass(frozen=True)
class DPairEq(DisFormula):
    x: str
    y: str
    z: str


@dataclass(frozen=True)
class DMem(DisFormula):
    x: str
    y: str


@dataclass(frozen=True)
class DAnd(DisFormula):
    left: DisFormula
    right: DisFormula


@dataclass(frozen=True)
class DOr(DisFormula):
    left: DisFormula
    right: DisFormula


@dataclass(frozen=True)
class DImplies(DisFormula):
    left: DisFormula
    right: DisFormula


@dataclass(frozen=True)
class DNot(DisFormula):
    body: DisFormula


@dataclass(frozen=True)
class DExists(DisFormula):
    var: str
    ty: TypeExpr
    body: DisFormula


@dataclass(frozen=True)
class DForall(DisFormula):
    var: str
    ty: TypeExpr
    body: DisFormula


def d_iff(a: DisFormula, b: DisFormula) -> DisFormula:
    return DAnd(DImplies(a, b), DImplies(b, a))


# ---------------------------------------------------------------------------
# static measures


def free_vars(f) -> frozenset[str]:
    if isinstance(f, (Const1, Bot)):
        return frozenset()
    if isinstance(f, (Dist, E, Ein, EqE, DEq, DMem)):
        return frozenset((f.x, f.y))
    if isinstance(f, DPairEq):
        return frozenset((f.x, f.y, f.z))
    if isinstance(f, (Sum, Max, Min, Implies, AndL, OrL, Strong, Iff,
                      DAnd, DOr, DImplies)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Scale, Neg, DNot)):
        return free_vars(f.body)
    if isinstance(f, (Sup, Inf, ExistsL, ForallL)):
        return free_vars(f.body) - {f.var}
    if isinstance(f, (SupIn, InfIn)):
        return (free_vars(f.body) - {f.var}) | {f.range_var}
    if isinstance(f, (DExists, DForall)):
        return (free_vars(f.body) - {f.var}) | {type_var_name(f.ty)}
    if isinstance(f, AffineClamp):
        out = frozenset()
        for a in f.args:
            out |= free_vars(a)
        return out
    raise TypeError(f"not a formula: {f!r}")


class FreshVars:
    """Deterministic fresh-name supply avoiding a fixed set of names."""

    def __init__(self, prefix: str = "_t", avoid=()):
        self.prefix = prefix
        self.avoid = set(avoid)
        self.counter = 0

    def next(self, extra_avoid=()) -> str:
        avoid = self.avoid.union(extra_avoid)
        while True:
            name = f"{self.prefix}{self.counter}"
            self.counter += 1
            if name not in avoid:
                self.avoid.add(name)
                return name


def is_sq_formula(f: NumFormula) -> bool:
    return not any(isinstance(g, E) for g in iter_nodes(f))


def is_e_formula(f: NumFormula) -> bool:
    return not any(isinstance(g, (Dist, SupIn, InfIn)) for g in iter_nodes(f))


def iter_nodes(f):
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, (Sum, Max, Min, Implies, AndL, OrL, Strong, Iff,
                          DAnd, DOr, DImplies)):
            stack.append(g.left)
            stack.append(g.right)
        elif isinstance(g, (Scale, Sup, Inf, SupIn, InfIn, Neg, ExistsL,
                            ForallL, DNot, DExists, DForall)):
            stack.append(g.body)
        elif isinstance(g, AffineClamp):
            stack.extend(g.args)


def v_of(f: NumFormula) -> Fraction:
    """Syntactic value bound: |eval| <= v_of and 2*v_of is a Lipschitz bound."""
    if isinstance(f, (Const1, Dist, E)):
        return ONE
    if isinstance(f, Sum):
        return v_of(f.left) + v_of(f.right)
    if isinstance(f, (Max, Min)):
        return max(v_of(f.left), v_of(f.right))
    if isinstance(f, Scale):
        return abs(f.coeff) * v_of(f.body)
    if isinstance(f, (Sup, Inf, SupIn, InfIn)):
        return v_of(f.body)
    raise TypeError(f"not a numeric formula: {f!r}")


def count_e(f) -> int:
    """Number of membership-predicate atoms in the displayed formula.

    The two-sided extensional equality atom counts as its two-atom expansion;
    connective macros contribute their operands once.
    """
    if isinstance(f, (E, Ein)):
        return 1
    if isinstance(f, EqE):
        return 2
    if isinstance(f, (Const1, Bot, Dist)):
        return 0
    if isinstance(f, (Sum, Max, Min, Implies, AndL, OrL, Strong, Iff)):
        return count_e(f.left) + count_e(f.right)
    if isinstance(f, (Scale, Sup, Inf, SupIn, InfIn, Neg, ExistsL, ForallL)):
        return count_e(f.body)
    if isinstance(f, AffineClamp):
        return sum(count_e(a) for a in f.args)
    raise TypeError(f"not a countable formula: {f!r}")


def epsilon_phi(f: NumFormula) -> Fraction:
    return 1 / max(6 * v_of(f), Fraction(3))


# ---------------------------------------------------------------------------
# schema library


def schema(name: str, r: Fraction | None = None) -> NumFormula:
    """Named formula library.

    e(x,y): graded membership inf_{z in y} d(x,z).
    sigma(x,y): directed subsethood sup_{z in x} e(z,y).
    chn(x): chain defect, 0 iff the members of x are linearly ordered by
      subsethood.
    o(x,y): mutual-member subsethood bound.
    phi_r(x): witness that two members of x sit at distance near r/2.
    E_r(x,y): the r-graded equality connective.
    russell(x): 1 - e(x,x), the self-exclusion degree.
    """
    if name == "e":
        return InfIn("z", "y", Dist("x", "z"))
    if name == "sigma":
        return SupIn("z", "x", InfIn("w", "y", Dist("z", "w")))
    if name == "chn":
        def sigma(a, b):
            return SupIn("u", a, InfIn("w", b, Dist("u", "w")))
        body = Min(sigma("y", "z"), sigma("z", "y"))
        return SupIn("y", "x", SupIn("z", "x", body))
    if name == "o":
        inner = SupIn("u", "z", InfIn("t", "w", Dist("u", "t")))
        return SupIn("z", "x", SupIn("w", "y", inner))
    if name == "phi_r":
        if r is None or not (0 < r <= 1):
            raise ValueError("phi_r needs a rational r in (0,1]")
        d = Dist("y", "z")
        return SupIn("z", "x", SupIn("y", "x", Min(d, sub(const(r), d))))
    if name == "E_r":
        if r is None or not (0 < r <= 1):
            raise ValueError("E_r needs a rational r in (0,1]")
        r = Fraction(r)
        inner = Scale(1 / r, Sum(const(2 * r), Scale(Fraction(-3), Dist("x", "y"))))
        return Max(Min(inner, CONST1), const(ZERO))
    if name == "russell":
        return sub(CONST1, InfIn("z", "x", Dist("x", "z")))
    raise ValueError(f"unknown schema {name!r}")


# ---------------------------------------------------------------------------
# discretization


def discretize(phi: DisFormula, eps: Fraction) -> NumFormula:
    """Compile a typed discrete formula to a numeric formula.

    The result evaluates to exactly 1 or 0 on interpretations whose type
    witnesses are eps-discrete, matching classical truth. Pair-equality atoms
    are not compilable (the target language has no pairing term).
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    fresh = FreshVars("_m", avoid=free_vars(phi))
    inv = 1 / eps

    def go(f: DisFormula) -> NumFormula:
        if isinstance(f, DEq):
            return Max(sub(CONST1, Scale(inv, Dist(f.x, f.y))), const(ZERO))
        if isinstance(f, DMem):
            z = fresh.next((f.x, f.y))
            e_xy = InfIn(z, f.y, Dist(f.x, z))
            return Max(sub(CONST1, Scale(inv, e_xy)), const(ZERO))
        if isinstance(f, DPairEq):
            raise UnsupportedFormula(
                "pair-equality atoms have no numeric compilation")
        if isinstance(f, DAnd):
            return Min(go(f.left), go(f.right))
        if isinstance(f, DOr):
            return Max(go(f.left), go(f.right))
        if isinstance(f, DNot):
            return sub(CONST1, go(f.body))
        if isinstance(f, DImplies):
            return Max(sub(CONST1, go(f.left)), go(f.right))
        if isinstance(f, DExists):
            rng = type_var_name(f.ty)
            if f.var == rng:
                raise CaptureError(f"binder {f.var!r} shadows its type witness")
            return SupIn(f.var, rng, go(f.body))
        if isinstance(f, DForall):
            rng = type_var_name(f.ty)
            if f.var == rng:
                raise CaptureError(f"binder {f.var!r} shadows its type witness")
            return InfIn(f.var, rng, go(f.body))
        raise TypeError(f"not a discrete formula: {f!r}")

    return go(phi)


# ---------------------------------------------------------------------------
# printing


_NUM_PREC = {
    Sup: 0, Inf: 0, SupIn: 0, InfIn: 0,
    Sum: 1,
    Scale: 2,
}


def _num_prec(f) -> int:
    return _NUM_PREC.get(type(f), 3)


def _print_num(f, required: int) -> str:
    if isinstance(f, Const1):
        s = "1"
    elif isinstance(f, Dist):
        s = f"d({f.x},{f.y})"
    elif isinstance(f, E):
        s = f"e({f.x},{f.y})"
    elif isinstance(f, Sum):
        s = f"{_print_num(f.left, 1)} + {_print_num(f.right, 2)}"
    elif isinstance(f, Max):
        s = f"max({_print_num(f.left, 0)}, {_print_num(f.right, 0)})"
    elif isinstance(f, Min):
        s = f"min({_print_num(f.left, 0)}, {_print_num(f.right, 0)})"
    elif isinstance(f, Scale):
        s = f"{rat_str(f.coeff)} * {_print_num(f.body, 2)}"
    elif isinstance(f, Sup):
        s = f"sup {f.var} . {_print_num(f.body, 0)}"
    elif isinstance(f, Inf):
        s = f"inf {f.var} . {_print_num(f.body, 0)}"
    elif isinstance(f, SupIn):
        s = f"sup {f.var} in {f.range_var} . {_print_num(f.body, 0)}"
    elif isinstance(f, InfIn):
        s = f"inf {f.var} in {f.range_var} . {_print_num(f.body, 0)}"
    else:
        raise TypeError(f"not a numeric formula: {f!r}")
    if _num_prec(f) < required:
        return f"({s})"
    return s


_LUK_PREC = {Implies: 0, Iff: 1, OrL: 2, AndL: 3, Strong: 4}


def _luk_prec(f) -> int:
    return _LUK_PREC.get(type(f), 5)


def _print_luk(f, required: int) -> str:
    if isinstance(f, Bot):
        s = "bot"
    elif isinstance(f, Ein):
        s = f"{f.x} in {f.y}"
    elif isinstance(f, EqE):
        s = f"{f.x} =e {f.y}"
    elif isinstance(f, Implies):
        s = f"{_print_luk(f.left, 1)} -> {_print_luk(f.right, 0)}"
    elif isinstance(f, Iff):
        s = f"{_print_luk(f.left, 1)} <-> {_print_luk(f.right, 2)}"
    elif isinstance(f, OrL):
        s = f"{_print_luk(f.left, 2)} | {_print_luk(f.right, 3)}"
    elif isinstance(f, AndL):
        s = f"{_print_luk(f.left, 3)} & {_print_luk(f.right, 4)}"
    elif isinstance(f, Strong):
        s = f"{_print_luk(f.left, 4)} (*) {_print_luk(f.right, 5)}"
    elif isinstance(f, Neg):
        s = f"~{_print_luk(f.body, 5)}"
    elif isinstance(f, ExistsL):
        s = f"exists {f.var} {_print_luk(f.body, 5)}"
    elif isinstance(f, ForallL):
        s = f"forall {f.var} {_print_luk(f.body, 5)}"
    elif isinstance(f, AffineClamp):
        head = f"M[{f.a}"
        if f.coeffs:
            head += "; " + ", ".join(str(c) for c in f.coeffs)
        head += "]"
        if f.args:
            head += "(" + ", ".join(_print_luk(a, 0) for a in f.args) + ")"
        s = head
    else:
        raise TypeError(f"not a Lukasiewicz formula: {f!r}")
    if _luk_prec(f) < required:
        return f"({s})"
    return s


def print_formula(f) -> str:
    if isinstance(f, NumFormula):
        return _print_num(f, 0)
    if isinstance(f, LukFormula):
        return _print_luk(f, 0)
    raise TypeError(f"cannot print {f!r}")


# ---------------------------------------------------------------------------
# parsing


_SYMBOLS = ["(*)", "<->", "->", "=e", "(", ")", ",", ".", "+", "-", "*", "/",
            "|", "&", "~", "[", "]", ";"]


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("INT", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("NAME", text[i:j], i))
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(("SYM", sym, i))
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("END", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.advance()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {tok[1]!r}", tok[2])
        return tok

    def at_sym(self, sym):
        tok = self.peek()
        return tok[0] == "SYM" and tok[1] == sym

    def at_name(self, name):
        tok = self.peek()
        return tok[0] == "NAME" and tok[1] == name

    def name(self) -> str:
        return self.expect("NAME")[1]

    # -- numeric grammar --

    def num_formula(self) -> NumFormula:
        out = self.num_term()
        while self.at_sym("+") or self.at_sym("-"):
            op = self.advance()[1]
            rhs = self.num_term()
            out = Sum(out, rhs if op == "+" else neg(rhs))
        return out

    def _rational(self) -> Fraction:
        sign = 1
        if self.at_sym("-"):
            self.advance()
            sign = -1
        num = int(self.expect("INT")[1])
        den = 1
        if self.at_sym("/"):
            self.advance()
            den = int(self.expect("INT")[1])
        return Fraction(sign * num, den)

    def num_term(self) -> NumFormula:
        tok = self.peek()
        if tok[0] == "INT" or (tok[0] == "SYM" and tok[1] == "-"):
            start = self.pos
            r = self._rational()
            if self.at_sym("*"):
                self.advance()
                return Scale(r, self.num_term())
            if r == 1:
                return CONST1
            # a bare non-unit constant is not in the grammar
            self.pos = start
            raise ParseError("only the constant 1 may stand alone", tok[2])
        return self.num_unary()

    def num_unary(self) -> NumFormula:
        tok = self.peek()
        if tok[0] == "SYM" and tok[1] == "(":
            self.advance()
            out = self.num_formula()
            self.expect("SYM", ")")
            return out
        if tok[0] == "SYM" and tok[1] == "|":
            self.advance()
            body = self.num_formula()
            self.expect("SYM", "|")
            return absf(body)
        if tok[0] == "NAME":
            word = tok[1]
            if word in ("max", "min"):
                self.advance()
                self.expect("SYM", "(")
                a = self.num_formula()
                self.expect("SYM", ",")
                b = self.num_formula()
                self.expect("SYM", ")")
                return Max(a, b) if word == "max" else Min(a, b)
            if word in ("d", "e") and self.tokens[self.pos + 1][:2] == ("SYM", "("):
                self.advance()
                self.advance()
                x = self.name()
                self.expect("SYM", ",")
                y = self.name()
                self.expect("SYM", ")")
                return Dist(x, y) if word == "d" else E(x, y)
            if word in ("sup", "inf"):
                self.advance()
                names = [self.name()]
                while self.peek()[0] == "NAME" and not self.at_name("in"):
                    names.append(self.name())
                range_var = None
                if self.at_name("in"):
                    self.advance()
                    range_var = self.name()
                self.expect("SYM", ".")
                body = self.num_formula()
                for v in reversed(names):
                    if range_var is None:
                        body = (Sup if word == "sup" else Inf)(v, body)
                    else:
                        body = (SupIn if word == "sup" else InfIn)(v, range_var, body)
                return body
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2])

    # -- Lukasiewicz grammar --

    def luk_formula(self) -> LukFormula:
        left = self.luk_iff()
        if self.at_sym("->"):
            self.advance()
            return Implies(left, self.luk_formula())
        return left

    def luk_iff(self) -> LukFormula:
        out = self.luk_or()
        while self.at_sym("<->"):
            self.advance()
            out = Iff(out, self.luk_or())
        return out

    def luk_or(self) -> LukFormula:
        out = self.luk_and()
        while self.at_sym("|"):
            self.advance()
            out = OrL(out, self.luk_and())
        return out

    def luk_and(self) -> LukFormula:
        out = self.luk_strong()
        while self.at_sym("&"):
            self.advance()
            out = AndL(out, self.luk_strong())
        return out

    def luk_strong(self) -> LukFormula:
        out = self.luk_unary()
        while self.at_sym("(*)"):
            self.advance()
            out = Strong(out, self.luk_unary())
        return out

    def luk_unary(self) -> LukFormula:
        tok = self.peek()
        if tok[0] == "SYM" and tok[1] == "~":
            self.advance()
            return Neg(self.luk_unary())
        if tok[0] == "SYM" and tok[1] == "(":
            self.advance()
            out = self.luk_formula()
            self.expect("SYM", ")")
            return out
        if tok[0] == "NAME":
            word = tok[1]
            if word == "bot":
                self.advance()
                return BOT
            if word in ("forall", "exists"):
                self.advance()
                names = [self.name()]
                while (self.peek()[0] == "NAME"
                       and self.peek()[1] not in ("bot", "forall", "exists", "M")
                       and self.tokens[self.pos + 1][:2] != ("SYM", "=e")
                       and not (self.tokens[self.pos + 1][0] == "NAME"
                                and self.tokens[self.pos + 1][1] == "in")):
                    names.append(self.name())
                body = self.luk_unary()
                for v in reversed(names):
                    body = (ForallL if word == "forall" else ExistsL)(v, body)
                return body
            if word == "M" and self.tokens[self.pos + 1][:2] == ("SYM", "["):
                self.advance()
                self.advance()
                a = self._int()
                coeffs = []
                if self.at_sym(";"):
                    self.advance()
                    coeffs.append(self._int())
                    while self.at_sym(","):
                        self.advance()
                        coeffs.append(self._int())
                self.expect("SYM", "]")
                args = []
                if coeffs:
                    self.expect("SYM", "(")
                    args.append(self.luk_formula())
                    while self.at_sym(","):
                        self.advance()
                        args.append(self.luk_formula())
                    self.expect("SYM", ")")
                return AffineClamp(a, tuple(coeffs), tuple(args))
            # membership or equality atom
            x = self.name()
            if self.at_name("in"):
                self.advance()
                return Ein(x, self.name())
            if self.at_sym("=e"):
                self.advance()
                return EqE(x, self.name())
            raise ParseError(f"expected 'in' or '=e' after {x!r}", self.peek()[2])
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2])

    def _int(self) -> int:
        sign = 1
        if self.at_sym("-"):
            self.advance()
            sign = -1
        return sign * int(self.expect("INT")[1])


def parse(language: str, text: str):
    """Parse a formula in the given language ("sq", "e" or "luk")."""
    p = _Parser(text)
    if language in ("sq", "e"):
        out = p.num_formula()
    elif language == "luk":
        out = p.luk_formula()
    else:
        raise ValueError(f"unknown language {language!r}")
    tok = p.peek()
    if tok[0] != "END":
        raise ParseError(f"trailing input {tok[1]!r}", tok[2])
    if language == "sq" and not is_sq_formula(out):
        raise ParseError("e-atoms are not part of this language", 0)
    if language == "e" and not is_e_formula(out):
        raise ParseError("d-atoms and bounded quantifiers are not part of this language", 0)
    return out
