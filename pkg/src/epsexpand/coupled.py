"""Hierarchically coupled first-order systems: clusters, uncoupling and expansion.

A difference system ``M1 Y(N+1) + M0 Y(N) = b(N)`` is brought to
``Y(N+1) = A Y(N) + c(N)``.  For a pivot ``I = Y_p`` the rows ``u_i`` with
``I(N+i) = u_i(N) . Y(N) + beta_i(N)`` satisfy
``u_{i+1}(N) = u_i(N+1) A(N)``; the first linear dependence among them is the
scalar recurrence for ``I`` and inverting ``[u_0; ...; u_{m-1}]`` expresses
the other unknowns through shifts of ``I``.

Right-hand sides are kept symbolic as ``{(source, shift): coefficient}``
where a source is ``("rhs", i)``, ``("input", name)`` or, for unknowns of
earlier clusters, ``("unknown", name)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import networkx as nx

from .core_algebra import PoleError, RationalFunction, particular_solution, rref
from .core_algebra.linalg import SingularSystem
from .eps_series import EP, EpsSeries, scale_series
from .eps_solver import bootstrap_expansion
from .operators import CoupledSystem, RecOperator, ode_to_rec

__all__ = [
    "ClusterPlan",
    "UncoupledForm",
    "CoupledSolution",
    "DegeneratePivot",
    "ClusterCycle",
    "cluster_order",
    "first_order_form",
    "uncouple",
    "solve_coupled_system",
    "fiber_check",
]

_ZERO = RationalFunction(0)
_ONE = RationalFunction(1)


class DegeneratePivot(ValueError):
    """No pivot yields a scalar recurrence that determines the whole cluster."""


class ClusterCycle(ValueError):
    """Declared clusters depend on each other cyclically."""


# -- symbolic right-hand sides -------------------------------------------------------------
def _combo_add(a: dict, b: dict, scale=_ONE) -> dict:
    out = dict(a)
    for k, v in b.items():
        t = v * scale
        out[k] = out[k] + t if k in out else t
    return {k: v for k, v in out.items() if not v.is_zero()}


def _combo_shift(a: dict, j: int) -> dict:
    return {(src, s + j): v.shift("N", j) for (src, s), v in a.items()}


def _combo_scale(a: dict, f) -> dict:
    return {k: v * f for k, v in a.items() if not (v * f).is_zero()}


def _combo_str(a: dict) -> str:
    if not a:
        return "0"
    parts = []
    for (src, s), v in sorted(a.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        kind, key = src
        name = f"rhs{key + 1}" if kind == "rhs" else key
        arg = "N" if s == 0 else f"N{'+' if s > 0 else '-'}{abs(s)}"
        parts.append(f"({v})*{name}({arg})")
    return " + ".join(parts)


def _combo_series(a: dict, sources: Mapping) -> EpsSeries:
    total = None
    for (src, s), v in sorted(a.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        if src not in sources:
            raise ValueError(f"no expansion available for {src}")
        term = scale_series(v, sources[src].shift(s))
        total = term if total is None else total + term
    return total if total is not None else EpsSeries.zero(0, None)


def _combo_value(a: dict, n: int, eps: Fraction, seqs: Mapping) -> Fraction:
    pt = {"N": n, EP: eps}
    total = Fraction(0)
    for (src, s), v in a.items():
        total += v.evaluate(pt) * Fraction(seqs[src](n + s))
    return total


# -- first-order form ------------------------------------------------------------------------
@dataclass
class FirstOrderForm:
    """``Y(N+1) = A(N) Y(N) + c(N)``; ``aux`` maps auxiliary names to ``(unknown, shift)``."""

    names: tuple
    A: list
    c: list
    aux: dict = field(default_factory=dict)
    valid_from: int = 0
    sources: dict = field(default_factory=dict)


def _with_auxiliaries(sys: CoupledSystem) -> CoupledSystem:
    """Replace shifts ``>= 2`` by auxiliary unknowns ``name@j(N) = name(N+j)``."""
    lo, hi = sys.shifts()
    if hi <= 1:
        return sys
    top = {}
    for eq in sys.equations:
        for (n, s) in eq:
            top[n] = max(top.get(n, 0), s)
    names = list(sys.unknowns)
    eqs = []
    aux_eqs = []
    for n in sys.unknowns:
        for j in range(1, top[n]):
            names.append(f"{n}@{j}")
            prev = n if j == 1 else f"{n}@{j - 1}"
            aux_eqs.append({(f"{n}@{j}", 0): _ONE, (prev, 1): -_ONE})
    for eq in sys.equations:
        new = {}
        for (n, s), c in eq.items():
            key = (n, s) if s <= 1 else (f"{n}@{s - 1}", 1)
            new[key] = new.get(key, _ZERO) + c
        eqs.append(new)
    forcing = list(sys.forcing) + [{} for _ in aux_eqs]
    rhs = list(sys.rhs) + [None for _ in aux_eqs]
    vf = list(sys.valid_from) + [min(sys.valid_from) for _ in aux_eqs]
    return CoupledSystem("rec", names, equations=eqs + aux_eqs, forcing=forcing, rhs=rhs, inputs=sys.inputs, valid_from=vf)


def _invert(m: list) -> list:
    n = len(m)
    aug = [list(row) + [_ONE if i == j else _ZERO for j in range(n)] for i, row in enumerate(m)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise SingularSystem("leading matrix of the system is singular")
    return [row[n:] for row in red[:n]]


def first_order_form(sys: CoupledSystem) -> FirstOrderForm:
    """Explicit first-order form of a difference system (ode systems are translated first)."""
    if sys.kind == "ode":
        sys = ode_to_rec(sys)
    sysr = _with_auxiliaries(sys.reindexed())
    m1, m0 = sysr.first_order_matrices()
    try:
        inv = _invert(m1)
    except SingularSystem as exc:
        raise DegeneratePivot(f"cannot solve the system for the highest shifts: {exc}") from exc
    m = sysr.size
    a = [[-sum((inv[i][k] * m0[k][j] for k in range(m)), _ZERO) for j in range(m)] for i in range(m)]
    terms = [sysr.rhs_terms(i) for i in range(m)]
    c = []
    for i in range(m):
        acc = {}
        for k in range(m):
            if not inv[i][k].is_zero():
                acc = _combo_add(acc, terms[k], inv[i][k])
        c.append(acc)
    aux = {n: (n.split("@")[0], int(n.split("@")[1])) for n in sysr.unknowns if "@" in n}
    sources = {("rhs", i): sysr.rhs[i] for i in range(m) if sysr.rhs[i] is not None}
    sources.update({("input", b): v for b, v in sysr.inputs.items()})
    return FirstOrderForm(sysr.unknowns, a, c, aux, max(sysr.valid_from), sources)


# -- clusters -----------------------------------------------------------------------------------
@dataclass
class ClusterPlan:
    clusters: list
    edges: dict
    inputs: dict

    def __str__(self):
        return " -> ".join("{" + ", ".join(c) + "}" for c in self.clusters)


def _plan_from_graph(g: nx.DiGraph, order_hint: list, groups: dict | None = None) -> ClusterPlan:
    """``g`` has an edge ``u -> v`` when ``v`` depends on ``u``."""
    rank = {n: i for i, n in enumerate(order_hint)}
    if groups is None:
        comps = [tuple(sorted(c, key=lambda n: rank.get(n, len(rank)))) for c in nx.strongly_connected_components(g)]
    else:
        comps = groups
    where = {n: i for i, c in enumerate(comps) for n in c}
    cg = nx.DiGraph()
    cg.add_nodes_from(range(len(comps)))
    for u, v in g.edges:
        if u in where and v in where and where[u] != where[v]:
            cg.add_edge(where[u], where[v])
    if not nx.is_directed_acyclic_graph(cg):
        raise ClusterCycle("clusters depend on each other cyclically")
    key = lambda i: min(rank.get(n, len(rank)) for n in comps[i])  # noqa: E731
    order = list(nx.lexicographical_topological_sort(cg, key=key))
    pos = {ci: k for k, ci in enumerate(order)}
    clusters = [comps[ci] for ci in order]
    edges = {pos[ci]: sorted(pos[p] for p in cg.predecessors(ci)) for ci in order}
    inputs = {}
    for ci in order:
        ext = set()
        for n in comps[ci]:
            for p in g.predecessors(n):
                if p not in where:
                    ext.add(p)
        inputs[pos[ci]] = sorted(ext)
    return ClusterPlan(clusters, edges, inputs)


def cluster_order(obj) -> ClusterPlan:
    """Topological order of strongly connected blocks of unknowns.

    ``obj`` is a dependency mapping ``{unknown: iterable of names it depends
    on}``, a single :class:`CoupledSystem`, or a list of systems each of which
    is one declared cluster.
    """
    g = nx.DiGraph()
    if isinstance(obj, CoupledSystem):
        fo = first_order_form(obj)
        for i, n in enumerate(fo.names):
            g.add_node(n)
            for j, m in enumerate(fo.names):
                if not fo.A[i][j].is_zero():
                    g.add_edge(m, n)
            for (src, _) in fo.c[i]:
                if src[0] == "input":
                    g.add_edge(src[1], n)
        hint = list(fo.names)
        groups = [tuple(sorted(c, key=hint.index)) for c in nx.strongly_connected_components(g.subgraph(hint))]
        return _plan_from_graph(g, hint, groups)
    if isinstance(obj, (list, tuple)) and obj and all(isinstance(s, CoupledSystem) for s in obj):
        groups = [tuple(s.unknowns) for s in obj]
        hint = [n for s in obj for n in s.unknowns]
        for s in obj:
            for n in s.unknowns:
                g.add_node(n)
            deps = set()
            for f in s.forcing:
                deps |= {b if s.kind == "ode" else b[0] for b in f}
            for n in s.unknowns:
                for d in deps:
                    g.add_edge(d, n)
        return _plan_from_graph(g, hint, groups)
    hint = list(obj)
    groups = [tuple(sorted(c, key=hint.index)) for c in nx.strongly_connected_components(_dep_graph(obj))]
    g = _dep_graph(obj, with_inputs=True)
    return _plan_from_graph(g, hint, [c for c in groups])


def _dep_graph(obj: Mapping, with_inputs: bool = False) -> nx.DiGraph:
    g = nx.DiGraph()
    for n, deps in obj.items():
        g.add_node(n)
        for d in deps:
            if d != n and (with_inputs or d in obj):
                g.add_edge(d, n)
    return g


# -- uncoupling -------------------------------------------------------------------------------------
@dataclass
class UncoupledForm:
    """``scalar_op I = scalar_rhs`` for the pivot and, for each other unknown,
    ``Y = sum_i coeffs[i] I(N+i) + tail``."""

    pivot: str
    scalar_op: RecOperator
    scalar_rhs: dict
    back_subs: dict
    names: tuple
    valid_from: int = 0

    def rhs_series(self, sources: Mapping) -> EpsSeries:
        return _combo_series(self.scalar_rhs, sources)

    def back_series(self, name: str, pivot_series: EpsSeries, sources: Mapping) -> EpsSeries:
        coeffs, tail = self.back_subs[name]
        total = _combo_series(tail, sources) if tail else None
        for i, c in enumerate(coeffs):
            if c.is_zero():
                continue
            term = scale_series(c, pivot_series.shift(i))
            total = term if total is None else total + term
        return total if total is not None else EpsSeries.zero(0, None)

    def describe(self) -> str:
        lines = [f"{self.scalar_op.to_string(self.pivot)} = {_combo_str(self.scalar_rhs)}"]
        for name, (coeffs, tail) in self.back_subs.items():
            parts = [f"({c})*{self.pivot}(N+{i})" if i else f"({c})*{self.pivot}(N)" for i, c in enumerate(coeffs) if not c.is_zero()]
            if tail:
                parts.append(_combo_str(tail))
            lines.append(f"{name}(N) = " + (" + ".join(parts) if parts else "0"))
        return "\n".join(lines)


def _row_times(u: list, a: list) -> list:
    m = len(u)
    return [sum((u[k] * a[k][j] for k in range(m) if not u[k].is_zero()), _ZERO) for j in range(m)]


def _row_dot_combo(u: list, c: list) -> dict:
    acc = {}
    for k, uk in enumerate(u):
        if not uk.is_zero() and c[k]:
            acc = _combo_add(acc, c[k], uk)
    return acc


def _cyclic(names: tuple, a: list, c: list, pivot: str):
    m = len(names)
    p = names.index(pivot)
    us = [[_ONE if j == p else _ZERO for j in range(m)]]
    betas = [{}]
    while True:
        prev = us[-1]
        nxt = _row_times([v.shift("N", 1) for v in prev], a)
        beta = _combo_add(_row_dot_combo([v.shift("N", 1) for v in prev], c), _combo_shift(betas[-1], 1))
        cols = [[us[i][j] for i in range(len(us))] for j in range(m)]
        alpha = particular_solution(cols, nxt, _ZERO)
        if alpha is not None:
            return us, betas, alpha, nxt, beta
        us.append(nxt)
        betas.append(beta)


def _uncouple_explicit(names: tuple, a: list, c: list, pivot: str, valid_from: int = 0) -> UncoupledForm:
    us, betas, alpha, _, beta_m = _cyclic(names, a, c, pivot)
    d = len(us)
    if d < len(names):
        raise DegeneratePivot(f"pivot {pivot} generates only {d} of {len(names)} directions")
    coeffs = [-x for x in alpha] + [_ONE]
    rhs = dict(beta_m)
    for i, x in enumerate(alpha):
        if not x.is_zero():
            rhs = _combo_add(rhs, betas[i], -x)
    op, den = RecOperator.from_rational(coeffs)
    op, g = op.primitive()
    scale = RationalFunction(den, g)
    if op[op.order].leading_coefficient() < 0:
        op = op.scaled(-1)
        scale = -scale
    rhs = _combo_scale(rhs, scale)
    inv = _invert(us)  # rows u_i; Y = U^{-1} (I_vec - beta_vec)
    # U Y = I_vec - beta  =>  Y = W (I_vec - beta) with W = U^{-1}
    back = {}
    for k, name in enumerate(names):
        if name == pivot:
            continue
        w = [inv[k][i] for i in range(d)]
        tail = {}
        for i in range(d):
            if not w[i].is_zero() and betas[i]:
                tail = _combo_add(tail, betas[i], -w[i])
        back[name] = (w, tail)
    return UncoupledForm(pivot, op, rhs, back, names, valid_from)


def uncouple(sys, pivot: str = "auto") -> UncoupledForm:
    """Scalar recurrence for ``pivot`` plus back-substitution rules for the rest.

    With ``pivot="auto"`` the first unknown (in declaration order) that
    determines the whole system is used.
    """
    fo = sys if isinstance(sys, FirstOrderForm) else first_order_form(sys)
    cands = list(fo.names) if pivot == "auto" else [pivot]
    last = None
    for p in cands:
        if p not in fo.names:
            raise ValueError(f"unknown pivot {p!r}")
        try:
            return _uncouple_explicit(fo.names, fo.A, fo.c, p, fo.valid_from)
        except DegeneratePivot as exc:
            last = exc
    raise DegeneratePivot(str(last))


# -- numeric certification ---------------------------------------------------------------------
def fiber_check(sys: CoupledSystem, form: UncoupledForm, eps, init: Mapping, inputs: Mapping | None = None, start: int = 0, nmax: int = 40) -> dict:
    """Forward-iterate ``sys`` at rational ``eps`` and test ``form`` exactly.

    Returns ``{"checked": int, "skipped": [n, ...], "failures": [...]}``;
    points where a coefficient has a pole are skipped.
    """
    from .operators import system_oracle

    eps = Fraction(eps)
    orc = system_oracle(sys, init, eps, inputs, start)
    inputs = dict(inputs or {})
    seqs = {}
    for src in {s for (s, _) in form.scalar_rhs} | {s for _, (_, t) in form.back_subs.items() for (s, _) in t}:
        kind, key = src
        name = key if kind == "input" else ("rhs", key)
        seqs[src] = inputs.get(name, lambda n: Fraction(0))
    piv = orc[form.pivot]
    d = form.scalar_op.order
    out = {"checked": 0, "skipped": [], "failures": []}
    lo = max(start, form.valid_from)
    for n in range(lo, nmax - d + 1):
        try:
            lhs = form.scalar_op.apply_values(piv, n, eps)
            rhs = _combo_value(form.scalar_rhs, n, eps, seqs)
            if lhs != rhs:
                out["failures"].append(("scalar", n, lhs - rhs))
            for name, (coeffs, tail) in form.back_subs.items():
                pt = {"N": n, EP: eps}
                val = sum((c.evaluate(pt) * piv(n + i) for i, c in enumerate(coeffs) if not c.is_zero()), Fraction(0))
                val += _combo_value(tail, n, eps, seqs)
                if val != orc[name](n):
                    out["failures"].append((name, n, val - orc[name](n)))
            out["checked"] += 1
        except PoleError:
            out["skipped"].append(n)
    return out


# -- end-to-end pipeline ----------------------------------------------------------------------------
class CoupledSolution(dict):
    """``{unknown: EpsSeries}``; the order-``j`` coefficient of ``Y(N)`` is also the
    ``x^N`` coefficient of the ``ep^j`` part of the generating function ``sum_N Y(N) x^N``."""

    interpretation = ("N-space coefficient sequences", "x-space power-series coefficients")

    def __init__(self, data=None, forms=None, plan=None, residuals=None):
        super().__init__(data or {})
        self.forms = forms or []
        self.plan = plan
        self.residuals = residuals or {}


def _iv_pairs(values) -> list:
    if isinstance(values, Mapping):
        return sorted((int(n), s) for n, s in values.items())
    out = []
    for i, item in enumerate(values):
        out.append((int(item[0]), item[1]) if isinstance(item, tuple) else (i + 1, item))
    return out


def solve_coupled_system(sys: CoupledSystem, ivs: Mapping, orders: int, pivot: str | Mapping = "auto") -> CoupledSolution:
    """Expansions of all unknowns, cluster by cluster.

    ``ivs`` maps an unknown to its initial-value expansions (``{n: EpsSeries}``
    or a list for ``n = 1, 2, ...``); each cluster needs them for its pivot.
    ``pivot`` may be a name, a mapping from cluster index to name, or ``"auto"``.
    """
    rec = ode_to_rec(sys) if sys.kind == "ode" else sys
    fo = first_order_form(rec)
    idx = {n: i for i, n in enumerate(fo.names)}
    g = nx.DiGraph()
    for i, n in enumerate(fo.names):
        g.add_node(n)
        for j, m in enumerate(fo.names):
            if not fo.A[i][j].is_zero():
                g.add_edge(m, n)
    plan = _plan_from_graph(g, list(fo.names))
    sources = fo.sources
    sols = {}
    forms = []
    for ci, cluster in enumerate(plan.clusters):
        names = tuple(cluster)
        sub_a = [[fo.A[idx[r]][idx[c]] for c in names] for r in names]
        sub_c = []
        for r in names:
            acc = dict(fo.c[idx[r]])
            for m in fo.names:
                if m not in names and not fo.A[idx[r]][idx[m]].is_zero():
                    acc = _combo_add(acc, {(("unknown", m), 0): fo.A[idx[r]][idx[m]]})
            sub_c.append(acc)
        if isinstance(pivot, Mapping):
            wanted = pivot.get(ci, "auto")
        elif pivot != "auto" and pivot in names:
            wanted = pivot
        else:
            wanted = "auto"
        cands = [wanted] if wanted != "auto" else [n for n in names if n in ivs] or list(names)
        form = None
        err = None
        for p in cands:
            try:
                form = _uncouple_explicit(names, sub_a, sub_c, p, fo.valid_from)
                break
            except DegeneratePivot as exc:
                err = exc
        if form is None:
            raise DegeneratePivot(f"cluster {ci} {names}: {err}")
        forms.append(form)
        if form.pivot not in ivs:
            raise ValueError(f"initial values for the pivot {form.pivot} of cluster {names} are required")
        srcs = dict(sources)
        srcs.update({("unknown", n): s for n, s in sols.items()})
        rhs = form.rhs_series(srcs)
        piv = bootstrap_expansion(form.scalar_op, rhs, _iv_pairs(ivs[form.pivot]), orders)
        sols[form.pivot] = piv
        for n in names:
            if n != form.pivot:
                sols[n] = form.back_series(n, piv, srcs)
    result = {n: s for n, s in sols.items() if n not in fo.aux}
    residuals = {}
    for i in range(rec.size):
        try:
            residuals[i] = rec.residual(result, i)
        except (ValueError, KeyError):
            residuals[i] = None
    return CoupledSolution({n: result[n] for n in rec.unknowns}, forms, plan, residuals)
