"""Tree universes, gauges and finite quotient models.

Elements are hash-consed hereditarily-finite sets over an optional finite
metric space of atom labels; atoms behave as Quine atoms (their only member
is themselves). The level pseudo-metrics rho_beta, a gauge blending them into
rho_s, and the induced membership predicate e_s yield finite e-structures by
quotienting elements with identical e_s-profiles.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .core import FinMetric, ONE, ZERO, hausdorff
from .errors import CapExceeded, InvalidGauge, MetricsetError
from . import formulas as F
from .semantics import (LeStructure, MetricSetStructure, d_e_matrix,
                        e_evaluator, eval_e)
from . import translate as T


class TreeStore:
    """Hash-consed store of tree elements; identity equals structural equality."""

    def __init__(self, n_atoms: int = 0):
        self.kind: list[str] = []
        self.children: list[tuple[int, ...]] = []
        self.rank: list[int] = []
        self.atom_label: list[int | None] = []
        self._intern: dict = {}
        self._trunc: dict = {}
        self._tc: dict[int, frozenset] = {}
        self.atoms = tuple(self._make_atom(i) for i in range(n_atoms))

    def _make_atom(self, label: int) -> int:
        key = ("a", label)
        if key in self._intern:
            return self._intern[key]
        idx = len(self.kind)
        self.kind.append("a")
        self.children.append((idx,))
        self.rank.append(0)
        self.atom_label.append(label)
        self._intern[key] = idx
        return idx

    def node(self, child_ids) -> int:
        ch = tuple(sorted(set(child_ids)))
        key = ("n", ch)
        if key in self._intern:
            return self._intern[key]
        idx = len(self.kind)
        self.kind.append("n")
        self.children.append(ch)
        self.rank.append(1 + max((self.rank[c] for c in ch), default=-1))
        self.atom_label.append(None)
        self._intern[key] = idx
        return idx

    def is_atom(self, x: int) -> bool:
        return self.kind[x] == "a"

    def members(self, x: int) -> tuple[int, ...]:
        # atoms are their own single member; node members are their children
        return self.children[x]

    def trunc_to(self, x: int, k: int) -> int:
        """Truncate to rank <= k; atoms are fixed points."""
        if self.kind[x] == "a" or self.rank[x] <= k:
            return x
        key = (x, k)
        hit = self._trunc.get(key)
        if hit is not None:
            return hit
        if k <= 0:
            out = self.node(())
        else:
            out = self.node(self.trunc_to(c, k - 1) for c in self.children[x])
        self._trunc[key] = out
        return out

    def trunc(self, x: int) -> int:
        return self.trunc_to(x, max(self.rank[x] - 1, 0))

    def tc(self, x: int) -> frozenset[int]:
        """Transitive closure of the membership relation below x."""
        hit = self._tc.get(x)
        if hit is not None:
            return hit
        if self.kind[x] == "a":
            out = frozenset((x,))
        else:
            acc = set(self.children[x])
            for c in self.children[x]:
                acc |= self.tc(c)
            out = frozenset(acc)
        self._tc[x] = out
        return out


class TreeUniverse:
    """Cumulative layers of a tree store with memoized rho_beta values."""

    def __init__(self, q: FinMetric | None, height: int, cap: int = 2 ** 17):
        if height < 0:
            raise ValueError("height must be non-negative")
        self.q = q
        self.height = height
        n_atoms = q.size if q is not None else 0
        self.store = TreeStore(n_atoms)
        self.atoms = self.store.atoms
        empty = self.store.node(())
        self.levels: list[list[int]] = [[empty]]
        for _ in range(height):
            base = list(self.atoms) + self.levels[-1]
            predicted = 2 ** len(base)
            if predicted > cap:
                raise CapExceeded(predicted, cap)
            layer = []
            for mask in range(predicted):
                ids = [base[i] for i in range(len(base)) if mask >> i & 1]
                layer.append(self.store.node(ids))
            layer = sorted(set(layer))
            self.levels.append(layer)
        self._rho: dict = {}
        self._tcq: dict[int, frozenset[int]] = {}

    def elements(self, k: int) -> list[int]:
        """All non-atom elements of rank <= k."""
        return self.levels[k]

    def tc_atoms(self, x: int) -> frozenset[int]:
        hit = self._tcq.get(x)
        if hit is None:
            hit = frozenset(self.store.atom_label[i] for i in self.store.tc(x)
                            if self.store.is_atom(i))
            self._tcq[x] = hit
        return hit

    def rho(self, beta: int, x: int, y: int) -> Fraction:
        """Level pseudo-metric; sup over empty member sets is 0, inf is 1."""
        if x == y:
            return ZERO
        if x > y:
            x, y = y, x
        key = (beta, x, y)
        hit = self._rho.get(key)
        if hit is not None:
            return hit
        st = self.store
        if beta == 0:
            if self.q is None:
                out = ZERO
            else:
                out = hausdorff(self.tc_atoms(x), self.tc_atoms(y), self.q)
        else:
            def directed(a, b):
                best = ZERO
                for z in st.members(a):
                    e = self.e_beta(beta - 1, z, b)
                    if e > best:
                        best = e
                return best
            out = max(directed(x, y), directed(y, x))
        self._rho[key] = out
        return out

    def e_beta(self, beta: int, z: int, y: int) -> Fraction:
        members = self.store.members(y)
        if not members:
            return ONE
        return min(self.rho(beta, z, w) for w in members)


def enumerate_universe(q: FinMetric | None, h: int, cap: int = 2 ** 17) -> TreeUniverse:
    """Materialize all tree elements up to the given height, hash-consed."""
    return TreeUniverse(q, h, cap)


@dataclass(frozen=True)
class Gauge:
    """Non-increasing level weights s(0..h) with s(0) = 1."""

    values: tuple[Fraction, ...]
    epsilon: Fraction | None = None

    def __post_init__(self):
        vals = tuple(Fraction(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals or vals[0] != 1:
            raise InvalidGauge("a gauge must start at 1")
        for a, b in zip(vals, vals[1:]):
            if b > a:
                raise InvalidGauge("gauge values must be non-increasing")
        for v in vals:
            if v < 0 or v > 1:
                raise InvalidGauge("gauge values must lie in [0,1]")
        if self.epsilon is not None:
            object.__setattr__(self, "epsilon", Fraction(self.epsilon))

    @property
    def height(self) -> int:
        return len(self.values) - 1

    def is_smooth(self, eps: Fraction) -> bool:
        v = self.values
        if v[0] != v[1] or v[-1] != 0:
            return False
        return all(v[b] <= v[b + 1] + eps for b in range(len(v) - 1))

    def smallest_eps(self) -> Fraction | None:
        """Smallest certificate for which is_smooth holds, if any."""
        v = self.values
        if v[0] != v[1] or v[-1] != 0:
            return None
        return max(v[b] - v[b + 1] for b in range(len(v) - 1))


def pseudo_finite_gauge(n: int, h: int) -> Gauge:
    """The ramp gauge holding 1 at levels 0..1 and reaching 0 at level n+1."""
    if n < 1:
        raise InvalidGauge("n must be at least 1")
    if h < n + 2:
        raise InvalidGauge(f"height {h} too small for the ramp gauge (need >= {n + 2})")
    vals = [min(max(1 - Fraction(i - 1, n), ZERO), ONE) for i in range(h + 1)]
    return Gauge(tuple(vals), epsilon=Fraction(1, n))


def rho_s(x: int, y: int, u: TreeUniverse, s: Gauge) -> Fraction:
    best = ZERO
    for beta, w in enumerate(s.values):
        if w == 0:
            continue
        v = min(u.rho(beta, x, y), w)
        if v > best:
            best = v
    return best


def e_s(x: int, y: int, u: TreeUniverse, s: Gauge) -> Fraction:
    members = u.store.members(y)
    if not members:
        return ONE
    return min(rho_s(x, w, u, s) for w in members)


class QuotientModel:
    """Finite e-structure of e_s-profile classes plus its tree bookkeeping."""

    def __init__(self, le: LeStructure, reps: list[int], class_of: dict[int, int],
                 universe: TreeUniverse, gauge: Gauge, member_layer: list[int],
                 scaled: tuple[list[list[int]], int] | None = None):
        self.le = le
        self.reps = reps
        self.class_of = class_of
        self.universe = universe
        self.gauge = gauge
        self.member_layer = member_layer
        self._scaled = scaled
        self.reports: list[T.AxiomReport] = []

    @property
    def size(self) -> int:
        return self.le.size

    @property
    def epsilon(self) -> Fraction | None:
        return self.gauge.epsilon

    def rho_s_pair(self, i: int, j: int) -> Fraction:
        return rho_s(self.reps[i], self.reps[j], self.universe, self.gauge)

    def ext_tree(self, j: int) -> tuple[int, ...]:
        """Classes of the tree children of representative j."""
        st = self.universe.store
        y = self.reps[j]
        if st.is_atom(y):
            return (j,)
        return tuple(sorted({self.class_of[c] for c in st.members(y)}))

    def mss_tree(self) -> MetricSetStructure:
        metric = d_e_matrix(self.le)
        k = self.size
        mem = [[False] * k for _ in range(k)]
        for j in range(k):
            for i in self.ext_tree(j):
                mem[i][j] = True
        return MetricSetStructure(metric, mem)

    def mss_completion(self) -> MetricSetStructure:
        metric = d_e_matrix(self.le)
        k = self.size
        mem = [[self.le.e(i, j) == 0 for j in range(k)] for i in range(k)]
        return MetricSetStructure(metric, mem)


def _match_ramp(gauge: Gauge) -> int | None:
    h = gauge.height
    for n in range(1, max(h - 1, 1)):
        try:
            if pseudo_finite_gauge(n, h).values == gauge.values:
                return n
        except InvalidGauge:
            continue
    return None


def quotient_model(q: FinMetric | None, h: int, gauge: Gauge,
                   cap: int = 2 ** 17, certify: bool = True,
                   corpus=None, seed: int = 0) -> QuotientModel:
    """Build the finite quotient model for the given atoms, height and gauge."""
    if gauge.height != h:
        raise InvalidGauge(f"gauge length {gauge.height + 1} does not match height {h}")
    empty_q = q is None or q.size == 0
    n = _match_ramp(gauge) if empty_q else None
    if n is not None:
        qm = _quotient_fast(n, h, gauge, cap)
    else:
        qm = _quotient_generic(q, h, gauge, cap)
    if certify:
        qm.reports = model_reports(qm, corpus=corpus, seed=seed)
    return qm


def _quotient_fast(n: int, h: int, gauge: Gauge, cap: int) -> QuotientModel:
    u = TreeUniverse(None, n + 1, cap)
    reps = list(u.levels[n + 1])
    index = {x: i for i, x in enumerate(reps)}
    layer = u.levels[n]
    table = {x: {y: rho_s(x, y, u, gauge) for y in layer} for x in layer}
    st = u.store
    trunc_n = {x: st.trunc_to(x, n) for x in reps}

    def e_fn(i: int, j: int) -> Fraction:
        y = reps[j]
        members = st.members(y)
        if not members:
            return ONE
        row = table[trunc_n[reps[i]]]
        return min(row[c] for c in members)

    if len(reps) <= 4096:
        le = LeStructure(len(reps), e=[[e_fn(i, j) for j in range(len(reps))]
                                       for i in range(len(reps))])
    else:
        le = LeStructure(len(reps), e_fn=e_fn)
    class_of = dict(index)
    # lower-rank elements collapse onto their own class (they are reps too)
    member_layer = sorted(index[x] for x in layer)
    return QuotientModel(le, reps, class_of, u, gauge, member_layer)


def _quotient_generic(q: FinMetric | None, h: int, gauge: Gauge, cap: int) -> QuotientModel:
    if h < 1:
        raise InvalidGauge("height must be at least 1")
    u = TreeUniverse(q, h - 1, cap)
    st = u.store
    carrier = list(u.atoms) + u.levels[h - 1]
    carrier = sorted(set(carrier))
    pos = {x: i for i, x in enumerate(carrier)}
    m = len(carrier)

    # integer scaling: all rho/e values are max/min combinations of gauge
    # values and atom distances, so one common denominator suffices
    dens = [v.denominator for v in gauge.values]
    if q is not None:
        dens += [q.dist[i][j].denominator for i in range(q.size) for j in range(q.size)]
    scale = math.lcm(*dens) if dens else 1
    s_int = [int(v * scale) for v in gauge.values]
    beta_max = max((b for b, v in enumerate(s_int) if v > 0), default=0)

    members_pos = [tuple(pos[c] for c in st.members(x)) if not st.is_atom(x)
                   else (pos[x],) for x in carrier]

    def rho0_int():
        rows = [[0] * m for _ in range(m)]
        tcq = [u.tc_atoms(x) for x in carrier]
        cache: dict = {}
        for i in range(m):
            for j in range(i + 1, m):
                key = (tcq[i], tcq[j]) if tcq[i] <= tcq[j] else (tcq[j], tcq[i])
                v = cache.get(key)
                if v is None:
                    if q is None:
                        v = 0 if tcq[i] == tcq[j] else (scale if (tcq[i] or tcq[j]) else 0)
                    else:
                        v = int(hausdorff(tcq[i], tcq[j], q) * scale)
                    cache[key] = v
                rows[i][j] = v
                rows[j][i] = v
        return rows

    def e_table(rho):
        rows = [[0] * m for _ in range(m)]
        for j in range(m):
            mem = members_pos[j]
            if not mem:
                for i in range(m):
                    rows[i][j] = scale
            else:
                for i in range(m):
                    r = rho[i]
                    rows[i][j] = min(r[w] for w in mem)
        return rows

    def rho_step(e_prev):
        rows = [[0] * m for _ in range(m)]
        for i in range(m):
            mi = members_pos[i]
            for j in range(i + 1, m):
                fwd = max((e_prev[z][j] for z in mi), default=0)
                bwd = max((e_prev[w][i] for w in members_pos[j]), default=0)
                v = fwd if fwd >= bwd else bwd
                rows[i][j] = v
                rows[j][i] = v
        return rows

    rho = rho0_int()
    rho_s_int = [[min(rho[i][j], s_int[0]) for j in range(m)] for i in range(m)]
    for beta in range(1, beta_max + 1):
        rho = rho_step(e_table(rho))
        w = s_int[beta]
        for i in range(m):
            ri = rho[i]
            rsi = rho_s_int[i]
            for j in range(m):
                v = ri[j] if ri[j] < w else w
                if v > rsi[j]:
                    rsi[j] = v

    es_int = e_table(rho_s_int)

    profiles: dict = {}
    reps: list[int] = []
    class_of: dict[int, int] = {}
    rep_pos: list[int] = []
    for i, x in enumerate(carrier):
        key = (tuple(es_int[i]), tuple(es_int[z][i] for z in range(m)))
        ci = profiles.get(key)
        if ci is None:
            ci = len(reps)
            profiles[key] = ci
            reps.append(x)
            rep_pos.append(i)
        class_of[x] = ci

    k = len(reps)
    if k <= 256:
        le = LeStructure(k, e=[[Fraction(es_int[rep_pos[i]][rep_pos[j]], scale)
                                for j in range(k)] for i in range(k)])
    else:
        le = LeStructure(
            k, e_fn=lambda i, j: Fraction(es_int[rep_pos[i]][rep_pos[j]], scale))

    lower = set(u.atoms) | set(u.levels[h - 2] if h >= 2 else u.levels[0])
    member_layer = sorted({class_of[x] for x in lower})
    return QuotientModel(le, reps, class_of, u, gauge, member_layer)


# ---------------------------------------------------------------------------
# certificates


def default_corpus() -> list[tuple[str, F.NumFormula, str]]:
    """(label, formula, distinguished excision variable) triples."""
    chn_e = T.to_e(F.schema("chn"))
    return [
        ("e(x,y)", F.E("x", "y"), "x"),
        ("1 - e(x,x)", F.sub(F.CONST1, F.E("x", "x")), "x"),
        ("e(x,y) + e(y,x)", F.Sum(F.E("x", "y"), F.E("y", "x")), "x"),
        ("chn as e-formula", chn_e, "x"),
    ]


def model_reports(qm: QuotientModel, corpus=None, seed: int = 0) -> list[T.AxiomReport]:
    eps = qm.epsilon if qm.epsilon is not None else qm.gauge.smallest_eps()
    if eps is None:
        eps = ONE
    if corpus is None:
        corpus = default_corpus()
        if qm.size > 64:
            # deeply quantified corpus formulas are quadratic per sampled
            # parameter; keep only the shallow ones on larger models
            corpus = [c for c in corpus if F.v_of(c[1]) <= 2]
    reports = []
    if qm.size > 4096:
        reports.append(T.AxiomReport("h-ext", "", ZERO, eps, True, "skipped"))
        return reports
    if qm.size <= 64:
        value = eval_e(T.axiom_h_ext(), qm.le, {})
        mode = "exhaustive"
    else:
        rng = random.Random(seed)
        pairs = [(rng.randrange(qm.size), rng.randrange(qm.size)) for _ in range(32)]
        evaluate = e_evaluator(T.h_ext_defect_at(), qm.le)
        value = max(evaluate({"x": a, "y": b}) for a, b in pairs)
        mode = "sampled"
    reports.append(T.AxiomReport(
        "h-ext", F.print_formula(T.axiom_h_ext()), value, eps, value <= eps, mode))
    for label, phi, var in corpus:
        value, mode = T.excision_defect(
            qm.le, phi, var=var,
            samples=None if qm.size <= 64 else 32, seed=seed)
        bound = 2 * F.v_of(phi) * eps
        reports.append(T.AxiomReport(
            f"excision[{label}]", label, value, bound, value <= bound, mode))
    return reports


# ---------------------------------------------------------------------------
# special elements and checks


def v_sigma(sigma: int, u: TreeUniverse) -> int:
    """Code of the sigma-th cumulative hierarchy stage as a single element."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma > u.height:
        raise MetricsetError(f"universe height {u.height} cannot hold rank {sigma}")
    prev: list[int] = []
    for _ in range(sigma):
        subsets = []
        for mask in range(2 ** len(prev)):
            subsets.append(u.store.node(
                prev[i] for i in range(len(prev)) if mask >> i & 1))
        prev = sorted(set(subsets))
    return u.store.node(prev)


@dataclass
class QuineCheck:
    passed: bool
    details: list[tuple[str, bool, str]]


def quine_atoms_check(q: FinMetric, h: int, gauge: Gauge, cap: int = 2 ** 17) -> QuineCheck:
    """Verify that atom classes are self-singletons isometric to the atoms."""
    if q is None or q.size == 0:
        raise ValueError("needs at least one atom")
    qm = quotient_model(q, h, gauge, cap=cap, certify=False)
    eps = qm.epsilon if qm.epsilon is not None else ONE
    details = []
    atom_classes = [qm.class_of[a] for a in qm.universe.atoms]
    ok = len(set(atom_classes)) == len(atom_classes)
    details.append(("atom classes distinct", ok, str(len(set(atom_classes)))))
    le = qm.le
    dm = None
    for label, ci in enumerate(atom_classes):
        self_zero = le.e(ci, ci) == 0
        details.append((f"e(q{label},q{label}) = 0", self_zero, ""))
        singleton = all(le.e(x, ci) > 0 for x in range(qm.size) if x != ci)
        details.append((f"atom {label} class is a self-singleton", singleton, ""))
    for i in range(len(atom_classes)):
        for j in range(i + 1, len(atom_classes)):
            ci, cj = atom_classes[i], atom_classes[j]
            de = max(abs(le.e(z, ci) - le.e(z, cj)) for z in range(qm.size))
            gap = abs(de - q.d(i, j))
            details.append((
                f"|d_e(q{i},q{j}) - d(q{i},q{j})| <= eps",
                gap <= eps, f"{gap} vs {eps}"))
    passed = all(ok for _, ok, _ in details)
    check = QuineCheck(passed, details)
    check.model = qm
    return check
