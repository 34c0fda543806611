"""Exact evaluation of formulas over finite structures.

Evaluation is direct recursion with exhaustive quantifier enumeration; the
main optimization is caching of quantified-subformula values keyed by the
bindings of their free variables, which keeps independent quantifier blocks
from multiplying each other's cost.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Callable, Sequence

from .core import FinMetric, ONE, ZERO, hausdorff, pointset_dist, rat, rat_str
from .errors import EmptyStructure, IllTyped, UnboundVariable
from . import formulas as F


class MetricSetStructure:
    """Finite metric space with a membership relation mem(i,j): i is in j."""

    def __init__(self, metric: FinMetric, mem: Sequence[Sequence[bool]]):
        if metric.size == 0:
            raise EmptyStructure("structures must be non-empty")
        if len(mem) != metric.size or any(len(r) != metric.size for r in mem):
            raise ValueError("membership matrix shape mismatch")
        self.metric = metric
        self.size = metric.size
        self.mem = tuple(tuple(bool(v) for v in row) for row in mem)
        self._ext = tuple(
            tuple(i for i in range(self.size) if self.mem[i][j])
            for j in range(self.size))
        self._hext_defect = None

    def ext(self, j: int) -> tuple[int, ...]:
        return self._ext[j]

    @property
    def hext_defect(self) -> Fraction:
        if self._hext_defect is None:
            worst = ZERO
            for a in range(self.size):
                for b in range(a + 1, self.size):
                    h = hausdorff(self._ext[a], self._ext[b], self.metric)
                    worst = max(worst, abs(self.metric.d(a, b) - h))
                worst = max(worst, abs(self.metric.d(a, a)))
            self._hext_defect = worst
        return self._hext_defect

    @property
    def is_exact(self) -> bool:
        return self.hext_defect == 0

    def __eq__(self, other):
        return (isinstance(other, MetricSetStructure)
                and self.metric == other.metric and self.mem == other.mem)


class LeStructure:
    """Finite structure for the single [0,1]-valued predicate e.

    The matrix may be given eagerly or as a callable for large models.
    """

    def __init__(self, size: int, e=None, e_fn: Callable[[int, int], Fraction] | None = None):
        if size == 0:
            raise EmptyStructure("structures must be non-empty")
        self.size = size
        if (e is None) == (e_fn is None):
            raise ValueError("exactly one of e and e_fn must be given")
        if e is not None:
            rows = []
            for row in e:
                frow = tuple(Fraction(v) for v in row)
                if len(frow) != size:
                    raise ValueError("e matrix shape mismatch")
                for v in frow:
                    if v < 0 or v > 1:
                        raise ValueError(f"e value {v} outside [0,1]")
                rows.append(frow)
            if len(rows) != size:
                raise ValueError("e matrix shape mismatch")
            self.matrix = tuple(rows)
            self.e_fn = None
        else:
            self.matrix = None
            self.e_fn = e_fn

    def e(self, i: int, j: int) -> Fraction:
        if self.matrix is not None:
            return self.matrix[i][j]
        return self.e_fn(i, j)

    def __eq__(self, other):
        if not isinstance(other, LeStructure) or self.size != other.size:
            return False
        return all(self.e(i, j) == other.e(i, j)
                   for i in range(self.size) for j in range(self.size))


def _fv_map(root) -> dict[int, frozenset[str]]:
    fv: dict[int, frozenset[str]] = {}

    def go(f) -> frozenset[str]:
        key = id(f)
        if key in fv:
            return fv[key]
        if isinstance(f, (F.Const1, F.Bot)):
            out = frozenset()
        elif isinstance(f, (F.Dist, F.E, F.Ein, F.EqE)):
            out = frozenset((f.x, f.y))
        elif isinstance(f, (F.Sum, F.Max, F.Min, F.Implies, F.AndL, F.OrL,
                            F.Strong, F.Iff)):
            out = go(f.left) | go(f.right)
        elif isinstance(f, (F.Scale, F.Neg)):
            out = go(f.body)
        elif isinstance(f, (F.Sup, F.Inf, F.ExistsL, F.ForallL)):
            out = go(f.body) - {f.var}
        elif isinstance(f, (F.SupIn, F.InfIn)):
            out = (go(f.body) - {f.var}) | {f.range_var}
        elif isinstance(f, F.AffineClamp):
            out = frozenset().union(*(go(a) for a in f.args)) if f.args else frozenset()
        else:
            raise TypeError(f"not an evaluable formula: {f!r}")
        fv[key] = out
        return out

    go(root)
    return fv


class _Evaluator:
    def __init__(self, root):
        fv = _fv_map(root)
        # per-node sorted free-variable tuples so cache keys need no sorting
        self.fvl = {k: tuple(sorted(v)) for k, v in fv.items()}
        self.cache: dict = {}
        self.root = root  # keep the tree alive so id() keys stay valid


_MISSING = object()


def _check_bound(f, rho):
    missing = F.free_vars(f) - set(rho)
    if missing:
        raise UnboundVariable(f"unbound variables: {sorted(missing)}")


def sq_evaluator(phi: F.NumFormula, m: MetricSetStructure):
    """Reusable exact evaluator for a metric-membership formula.

    Bounded quantifiers over an element with empty extension return the
    formula's value bound: -v for sup, +v for inf. Quantified subformulas are
    cached per assignment of their free variables, shared across calls.
    """
    ev = _Evaluator(phi)
    fvl = ev.fvl
    cache = ev.cache
    rho: dict[str, int] = {}

    def go(f) -> Fraction:
        if isinstance(f, F.Const1):
            return ONE
        if isinstance(f, F.Dist):
            return m.metric.d(rho[f.x], rho[f.y])
        if isinstance(f, F.Sum):
            return go(f.left) + go(f.right)
        if isinstance(f, F.Max):
            return max(go(f.left), go(f.right))
        if isinstance(f, F.Min):
            return min(go(f.left), go(f.right))
        if isinstance(f, F.Scale):
            return f.coeff * go(f.body)
        if isinstance(f, (F.Sup, F.Inf, F.SupIn, F.InfIn)):
            key = (id(f), tuple(rho[v] for v in fvl[id(f)]))
            hit = cache.get(key)
            if hit is not None:
                return hit
            bounded = isinstance(f, (F.SupIn, F.InfIn))
            domain = m.ext(rho[f.range_var]) if bounded else range(m.size)
            is_sup = isinstance(f, (F.Sup, F.SupIn))
            if bounded and not domain:
                bound = F.v_of(f.body)
                out = -bound if is_sup else bound
            else:
                var = f.var
                old = rho.get(var, _MISSING)
                out = None
                for c in domain:
                    rho[var] = c
                    v = go(f.body)
                    if out is None or (v > out if is_sup else v < out):
                        out = v
                if old is _MISSING:
                    del rho[var]
                else:
                    rho[var] = old
            cache[key] = out
            return out
        if isinstance(f, F.E):
            raise TypeError("e-atoms cannot be evaluated on a metric structure")
        raise TypeError(f"not a numeric formula: {f!r}")

    def call(assignment: dict[str, int]) -> Fraction:
        _check_bound(phi, assignment)
        rho.clear()
        rho.update(assignment)
        return go(phi)

    return call


def eval_sq(phi: F.NumFormula, m: MetricSetStructure, rho: dict[str, int]) -> Fraction:
    """Evaluate a metric-membership formula exactly (see sq_evaluator)."""
    return sq_evaluator(phi, m)(rho)


def _scaled_e_evaluator(phi: F.NumFormula, n: LeStructure):
    """Exact e-formula evaluation over integers scaled by a common denominator.

    Only applies to materialized matrices. The scale is the lcm of the matrix
    denominators times the product of all scale-coefficient denominators, so
    every subformula value times the scale is an integer.
    """
    import math

    L = 1
    for f in F.iter_nodes(phi):
        if isinstance(f, F.Scale):
            L *= Fraction(f.coeff).denominator
        elif isinstance(f, (F.Dist, F.SupIn, F.InfIn)):
            raise TypeError("d-atoms and bounded quantifiers are not e-formulas")
    for row in n.matrix:
        for v in row:
            L = L * v.denominator // math.gcd(L, v.denominator)
    table = [[int(v * L) for v in row] for row in n.matrix]
    size = n.size
    ev = _Evaluator(phi)
    fvl = ev.fvl
    cache = ev.cache
    rho: dict[str, int] = {}

    def go(f) -> int:
        if isinstance(f, F.E):
            return table[rho[f.x]][rho[f.y]]
        if isinstance(f, F.Const1):
            return L
        if isinstance(f, F.Sum):
            return go(f.left) + go(f.right)
        if isinstance(f, F.Max):
            return max(go(f.left), go(f.right))
        if isinstance(f, F.Min):
            return min(go(f.left), go(f.right))
        if isinstance(f, F.Scale):
            c = Fraction(f.coeff)
            return c.numerator * go(f.body) // c.denominator
        if isinstance(f, (F.Sup, F.Inf)):
            key = (id(f), tuple(rho[v] for v in fvl[id(f)]))
            hit = cache.get(key)
            if hit is not None:
                return hit
            is_sup = isinstance(f, F.Sup)
            var = f.var
            old = rho.get(var, _MISSING)
            out = None
            for i in range(size):
                rho[var] = i
                v = go(f.body)
                if out is None or (v > out if is_sup else v < out):
                    out = v
            if old is _MISSING:
                del rho[var]
            else:
                rho[var] = old
            cache[key] = out
            return out
        raise TypeError(f"not a numeric formula: {f!r}")

    def call(assignment: dict[str, int]) -> Fraction:
        _check_bound(phi, assignment)
        rho.clear()
        rho.update(assignment)
        return Fraction(go(phi), L)

    return call


def e_evaluator(phi: F.NumFormula, n: LeStructure):
    """Reusable exact evaluator for a restricted e-formula."""
    if n.matrix is not None:
        return _scaled_e_evaluator(phi, n)
    ev = _Evaluator(phi)
    fvl = ev.fvl
    cache = ev.cache
    rho: dict[str, int] = {}

    def go(f) -> Fraction:
        if isinstance(f, F.E):
            return n.e(rho[f.x], rho[f.y])
        if isinstance(f, F.Const1):
            return ONE
        if isinstance(f, F.Sum):
            return go(f.left) + go(f.right)
        if isinstance(f, F.Max):
            return max(go(f.left), go(f.right))
        if isinstance(f, F.Min):
            return min(go(f.left), go(f.right))
        if isinstance(f, F.Scale):
            return f.coeff * go(f.body)
        if isinstance(f, (F.Sup, F.Inf)):
            key = (id(f), tuple(rho[v] for v in fvl[id(f)]))
            hit = cache.get(key)
            if hit is not None:
                return hit
            is_sup = isinstance(f, F.Sup)
            var = f.var
            old = rho.get(var, _MISSING)
            out = None
            for c in range(n.size):
                rho[var] = c
                v = go(f.body)
                if out is None or (v > out if is_sup else v < out):
                    out = v
            if old is _MISSING:
                del rho[var]
            else:
                rho[var] = old
            cache[key] = out
            return out
        if isinstance(f, (F.Dist, F.SupIn, F.InfIn)):
            raise TypeError("d-atoms and bounded quantifiers are not e-formulas")
        raise TypeError(f"not a numeric formula: {f!r}")

    def call(assignment: dict[str, int]) -> Fraction:
        _check_bound(phi, assignment)
        rho.clear()
        rho.update(assignment)
        return go(phi)

    return call


def eval_e(phi: F.NumFormula, n: LeStructure, rho: dict[str, int]) -> Fraction:
    """Evaluate a restricted e-formula exactly (see e_evaluator)."""
    return e_evaluator(phi, n)(rho)


def _clamp01(v: Fraction) -> Fraction:
    return min(max(v, ZERO), ONE)


def luk_evaluator(phi: F.LukFormula, n: LeStructure):
    """Reusable Lukasiewicz evaluator: x in y reads as 1 - e(x,y)."""
    ev = _Evaluator(phi)
    fvl = ev.fvl
    cache = ev.cache
    rho: dict[str, int] = {}

    def d_e(i, j) -> Fraction:
        return max(abs(n.e(z, i) - n.e(z, j)) for z in range(n.size))

    def go(f) -> Fraction:
        if isinstance(f, F.Bot):
            return ZERO
        if isinstance(f, F.Ein):
            return ONE - n.e(rho[f.x], rho[f.y])
        if isinstance(f, F.Implies):
            return min(ONE - go(f.left) + go(f.right), ONE)
        if isinstance(f, F.Neg):
            return ONE - go(f.body)
        if isinstance(f, F.AndL):
            return min(go(f.left), go(f.right))
        if isinstance(f, F.OrL):
            return max(go(f.left), go(f.right))
        if isinstance(f, F.Strong):
            return max(go(f.left) + go(f.right) - ONE, ZERO)
        if isinstance(f, F.Iff):
            return ONE - abs(go(f.left) - go(f.right))
        if isinstance(f, F.EqE):
            # EqE is quadratic per visit; cache it like a quantifier
            key = (id(f), tuple(rho[v] for v in fvl[id(f)]))
            hit = cache.get(key)
            if hit is not None:
                return hit
            out = ONE - d_e(rho[f.x], rho[f.y])
            cache[key] = out
            return out
        if isinstance(f, F.AffineClamp):
            total = Fraction(f.a)
            for c, arg in zip(f.coeffs, f.args):
                total += c * go(arg)
            return _clamp01(total)
        if isinstance(f, (F.ExistsL, F.ForallL)):
            key = (id(f), tuple(rho[v] for v in fvl[id(f)]))
            hit = cache.get(key)
            if hit is not None:
                return hit
            is_sup = isinstance(f, F.ExistsL)
            var = f.var
            old = rho.get(var, _MISSING)
            out = None
            for c in range(n.size):
                rho[var] = c
                v = go(f.body)
                if out is None or (v > out if is_sup else v < out):
                    out = v
            if old is _MISSING:
                del rho[var]
            else:
                rho[var] = old
            cache[key] = out
            return out
        raise TypeError(f"not a Lukasiewicz formula: {f!r}")

    def call(assignment: dict[str, int]) -> Fraction:
        _check_bound(phi, assignment)
        rho.clear()
        rho.update(assignment)
        return go(phi)

    return call


def eval_luk(phi: F.LukFormula, n: LeStructure, rho: dict[str, int]) -> Fraction:
    """Evaluate a Lukasiewicz formula exactly (see luk_evaluator)."""
    return luk_evaluator(phi, n)(rho)


def find_exact_extension(m: MetricSetStructure, target) -> int | None:
    """Index of the element whose extension is exactly the target index set."""
    target = frozenset(target)
    for j in range(m.size):
        if frozenset(m.ext(j)) == target:
            return j
    return None


def _pair_code(m: MetricSetStructure, a: int, b: int) -> int:
    """Element coding the ordered pair {{{a}, 0}, {{b}}}; raises if absent."""
    def need(target, what):
        j = find_exact_extension(m, target)
        if j is None:
            raise IllTyped(f"pair coding unrealizable: no element with extension {what}")
        return j

    empty = need(frozenset(), "{}")
    sa = need(frozenset((a,)), f"{{{a}}}")
    sb = need(frozenset((b,)), f"{{{b}}}")
    left = need(frozenset((sa, empty)), f"{{{{{a}}}, {{}}}}")
    right = need(frozenset((sb,)), f"{{{{{b}}}}}")
    return need(frozenset((left, right)), "pair")


def eval_dis(phi: F.DisFormula, m: MetricSetStructure,
             witnesses: dict[str, int], rho: dict[str, int]) -> bool:
    """Classical evaluation of a typed discrete formula.

    Quantifiers range over the extension of the witness element registered for
    the quantifier's type expression (keyed by its canonical variable name).
    """

    def witness(ty: F.TypeExpr) -> int:
        name = F.type_var_name(ty)
        if name in rho:
            return rho[name]
        if name not in witnesses:
            raise IllTyped(f"no witness for type {name!r}")
        return witnesses[name]

    def go(f, rho) -> bool:
        if isinstance(f, F.DEq):
            return m.metric.d(rho[f.x], rho[f.y]) == 0
        if isinstance(f, F.DMem):
            return m.mem[rho[f.x]][rho[f.y]]
        if isinstance(f, F.DPairEq):
            p = _pair_code(m, rho[f.x], rho[f.y])
            return m.metric.d(p, rho[f.z]) == 0
        if isinstance(f, F.DAnd):
            return go(f.left, rho) and go(f.right, rho)
        if isinstance(f, F.DOr):
            return go(f.left, rho) or go(f.right, rho)
        if isinstance(f, F.DImplies):
            return (not go(f.left, rho)) or go(f.right, rho)
        if isinstance(f, F.DNot):
            return not go(f.body, rho)
        if isinstance(f, (F.DExists, F.DForall)):
            domain = m.ext(witness(f.ty))
            if isinstance(f, F.DExists):
                return any(go(f.body, {**rho, f.var: c}) for c in domain)
            return all(go(f.body, {**rho, f.var: c}) for c in domain)
        raise TypeError(f"not a discrete formula: {f!r}")

    return go(phi, dict(rho))


def d_e_matrix(n: LeStructure) -> FinMetric:
    """The pseudo-metric d_e(x,y) = max_z |e(z,x) - e(z,y)|."""
    size = n.size
    rows = [[ZERO] * size for _ in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            v = max(abs(n.e(z, i) - n.e(z, j)) for z in range(size))
            rows[i][j] = v
            rows[j][i] = v
    return FinMetric(rows)


def induced_le(m: MetricSetStructure) -> LeStructure:
    """e(i,j) = distance from i to the extension of j (1 when empty)."""
    rows = [[pointset_dist(i, m.ext(j), m.metric) for j in range(m.size)]
            for i in range(m.size)]
    return LeStructure(m.size, e=rows)


def completion(n: LeStructure) -> MetricSetStructure:
    """Quotient by d_e = 0 with metric d_e and membership e = 0.

    The result carries a ``class_of`` attribute mapping original indices to
    class indices; representatives are the smallest original indices.
    """
    dm = d_e_matrix(n)
    reps: list[int] = []
    class_of: list[int] = []
    for i in range(n.size):
        for ci, r in enumerate(reps):
            if dm.d(i, r) == 0:
                class_of.append(ci)
                break
        else:
            class_of.append(len(reps))
            reps.append(i)
    k = len(reps)
    metric = FinMetric([[dm.d(reps[i], reps[j]) for j in range(k)] for i in range(k)])
    mem = [[n.e(reps[i], reps[j]) == 0 for j in range(k)] for i in range(k)]
    out = MetricSetStructure(metric, mem)
    out.class_of = class_of
    out.reps = reps
    return out


# ---------------------------------------------------------------------------
# model files


def structure_to_json(s) -> dict:
    if isinstance(s, LeStructure):
        if s.matrix is None:
            raise ValueError("cannot serialize a lazy e-structure")
        return {
            "kind": "le",
            "size": s.size,
            "e": [rat_str(v) for row in s.matrix for v in row],
        }
    if isinstance(s, MetricSetStructure):
        return {
            "kind": "mss",
            "size": s.size,
            "d": [rat_str(v) for row in s.metric.dist for v in row],
            "mem": [int(v) for row in s.mem for v in row],
        }
    raise TypeError(f"not a structure: {s!r}")


def structure_from_json(doc: dict):
    kind = doc["kind"]
    size = doc["size"]

    def unflatten(flat, convert):
        if len(flat) != size * size:
            raise ValueError("matrix length mismatch")
        return [[convert(flat[i * size + j]) for j in range(size)]
                for i in range(size)]

    if kind == "le":
        return LeStructure(size, e=unflatten(doc["e"], rat))
    if kind == "mss":
        metric = FinMetric(unflatten(doc["d"], rat))
        mem = unflatten(doc["mem"], lambda v: bool(int(v)))
        return MetricSetStructure(metric, mem)
    raise ValueError(f"unknown structure kind {kind!r}")


def save_structure(s, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(structure_to_json(s), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_structure(path: str):
    with open(path, encoding="utf-8") as fh:
        return structure_from_json(json.load(fh))
