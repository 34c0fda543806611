"""Search-based realizations of the library's existence principles.

Everything here is exact exhaustive search over finite structures: excision
witnesses with a two-sided contract, extension constructors, ordered-pair
coding and its metric law, the self-membership gap, and discreteness/chain
analysis of extensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import FinMetric, ONE, ZERO, pointset_dist, rat_str
from .errors import InsufficientDepth, NoWitness
from . import formulas as F
from .semantics import (MetricSetStructure, find_exact_extension,
                        sq_evaluator)
from .translate import to_sq


@dataclass
class WitnessResult:
    index: int
    residual: Fraction
    satisfied: bool


def _as_sq(phi: F.NumFormula) -> F.NumFormula:
    return phi if F.is_sq_formula(phi) else to_sq(phi)


def exc_search(m: MetricSetStructure, phi: F.NumFormula, r, s,
               var: str = "x", params: dict[str, int] | None = None,
               slack: Fraction = ZERO) -> WitnessResult:
    """Smallest element b whose extension excises {c : phi(c) <= r}.

    Contract: every c with phi(c) <= r lies within `slack` of the extension
    of b (exactly inside it when slack is 0), and every member of b has
    phi < s strictly. Raises NoWitness with the best residual otherwise.
    """
    r = Fraction(r)
    s = Fraction(s)
    slack = Fraction(slack)
    if not r < s:
        raise ValueError("excision needs r < s")
    sq = _as_sq(phi)
    params = dict(params or {})
    evaluate = sq_evaluator(sq, m)
    values = [evaluate({**params, var: c}) for c in range(m.size)]
    low = [c for c in range(m.size) if values[c] <= r]
    best_idx = None
    best_res = None
    for b in range(m.size):
        ext = m.ext(b)
        v1 = max((max(pointset_dist(c, ext, m.metric) - slack, ZERO) for c in low),
                 default=ZERO)
        v2 = max((max(values[c] - s, ZERO) for c in ext), default=ZERO)
        strict = all(values[c] < s for c in ext)
        if v1 == 0 and strict:
            return WitnessResult(b, ZERO, True)
        res = max(v1, v2)
        if best_res is None or res < best_res:
            best_res = res
            best_idx = b
    raise NoWitness(f"no excision witness for r={rat_str(r)}, s={rat_str(s)}",
                    best_idx, best_res)


def find_extension(m: MetricSetStructure, target) -> WitnessResult:
    """Element whose extension is Hausdorff-closest to the target index set."""
    from .core import hausdorff

    target = frozenset(target)
    best_idx = 0
    best_res = None
    for b in range(m.size):
        res = hausdorff(m.ext(b), target, m.metric)
        if best_res is None or res < best_res:
            best_res = res
            best_idx = b
        if best_res == 0:
            break
    return WitnessResult(best_idx, best_res, best_res == 0)


def wiener_pair(m: MetricSetStructure, a: int, b: int) -> WitnessResult:
    """Element coding the ordered pair {{{a}, 0}, {{b}}} by exact extensions."""

    def need(target, what):
        j = find_exact_extension(m, target)
        if j is None:
            raise InsufficientDepth(
                f"pair coding needs an element with extension {what}")
        return j

    empty = need(frozenset(), "{}")
    sa = need(frozenset((a,)), f"{{{a}}}")
    sb = need(frozenset((b,)), f"{{{b}}}")
    left = need(frozenset((sa, empty)), f"{{{{{a}}}, {{}}}}")
    right = need(frozenset((sb,)), f"{{{{{b}}}}}")
    pair = need(frozenset((left, right)), "the pair")
    return WitnessResult(pair, ZERO, True)


def pair_distance_oracle(m: FinMetric, a: int, b: int, c: int, f: int) -> tuple[Fraction, Fraction]:
    """Distance between abstract pair codes vs the coordinatewise maximum.

    Base points act as Quine atoms (their sole member is themselves); sets
    are nested frozensets measured by the recursive Hausdorff distance.
    """
    memo: dict = {}

    def dist(x, y) -> Fraction:
        if isinstance(x, int) and isinstance(y, int):
            return m.d(x, y)
        key = (x, y)
        hit = memo.get(key)
        if hit is not None:
            return hit
        mx = (x,) if isinstance(x, int) else tuple(x)
        my = (y,) if isinstance(y, int) else tuple(y)
        if not mx and not my:
            out = ZERO
        elif not mx or not my:
            out = ONE
        else:
            fwd = max(min(dist(u, w) for w in my) for u in mx)
            bwd = max(min(dist(u, w) for u in mx) for w in my)
            out = max(fwd, bwd)
        memo[key] = out
        return out

    def pair(u, w):
        return frozenset((frozenset((frozenset((u,)), frozenset())),
                          frozenset((frozenset((w,)),))))

    return dist(pair(a, b), pair(c, f)), max(m.d(a, c), m.d(b, f))


def russell_gap(m: MetricSetStructure, r, slack: Fraction = ZERO) -> Fraction:
    """Self-membership defect e(b,b) of the excision witness for 1 - e(x,x)."""
    r = Fraction(r)
    if not 0 < r < 1:
        raise ValueError("r must lie strictly between 0 and 1")
    res = exc_search(m, F.schema("russell"), r, ONE, slack=slack)
    b = res.index
    return pointset_dist(b, m.ext(b), m.metric)


def discreteness_spectrum(m: MetricSetStructure) -> dict[int, Fraction]:
    """Minimum pairwise member distance per element; 1 for <=1 member."""
    out = {}
    for b in range(m.size):
        ext = list(m.ext(b))
        if len(ext) <= 1:
            out[b] = ONE
        else:
            out[b] = min(m.metric.d(ext[i], ext[j])
                         for i in range(len(ext)) for j in range(i + 1, len(ext)))
    return out


@dataclass
class ChainEntry:
    index: int
    chn: Fraction
    chain: bool
    well_ordered: bool
    dis: Fraction


def chain_report(m: MetricSetStructure) -> list[ChainEntry]:
    """Per-element chain defect, chain flags and discreteness values.

    An element is a chain when its members are linearly preordered by
    subsethood (chain defect 0); finite chains are always well-ordered.
    """
    chn = F.schema("chn")
    dis = discreteness_spectrum(m)
    out = []
    evaluate = sq_evaluator(chn, m)
    for b in range(m.size):
        value = evaluate({"x": b})
        # memberless elements give the empty-sup value -v; they are chains
        is_chain = value <= 0
        out.append(ChainEntry(b, value, is_chain, is_chain, dis[b]))
    return out


def format_chain_report(entries: list[ChainEntry]) -> str:
    lines = ["index chn chain well_ordered dis"]
    for e in entries:
        lines.append(f"{e.index} {rat_str(e.chn)} "
                     f"{int(e.chain)} {int(e.well_ordered)} {rat_str(e.dis)}")
    return "\n".join(lines)
