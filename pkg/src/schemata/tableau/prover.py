"""Depth-first construction of the proof tree."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..basesolver import BaseSat, BaseUnsat, solve_base
from ..core import (
    Renaming,
    Depth,
    Formula,
    Neq,
    Param,
    Signature,
    expand_max,
    noneq,
    params_of,
)
from ..equality import FREE, DeltaTable
from ..rewrite import RewriteSystem
from .measure import Measure, Weigher, measure
from .rules import (
    Context,
    History,
    LabelInfo,
    Options,
    RuleInstance,
    applicable_rule,
    apply_rule,
    is_base,
    make_label,
    n_explosion_applies,
)
from .subsumption import Pattern, Target, match

DEFAULT_MAX_NODES = 100_000

# rules whose edges are exempt from the strict-decrease check
MEASURE_EXEMPT = frozenset({"N-Explosion", "Unfolding", "Loop", "Start"})
DECOMPOSITIONS = frozenset({"And-Decomposition", "Or-Decomposition"})


@dataclass
class ProofNode:
    id: int
    label: frozenset
    parent: Optional[int] = None
    children: list = field(default_factory=list)
    via: str = "Start"  # rule that produced this node
    rule: Optional[str] = None  # rule applied at this node
    closed: bool = False
    layer: bool = False
    nexp: int = 0
    loop_target: Optional[int] = None
    renaming: Optional[dict] = None
    status: str = "unexpanded"  # open | closed | sat | base-unsat | unexpanded
    history: History = field(default_factory=History, repr=False)


@dataclass
class ProofTree:
    nodes: list
    N: Optional[Param] = None
    signature: Optional[Signature] = None

    @property
    def root(self) -> ProofNode:
        return self.nodes[0]

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, i) -> ProofNode:
        return self.nodes[i]

    def leaves(self):
        return [n for n in self.nodes if not n.children]

    def branch(self, node_id: int) -> list:
        out = []
        cur: Optional[int] = node_id
        while cur is not None:
            out.append(self.nodes[cur])
            cur = self.nodes[cur].parent
        return out[::-1]


@dataclass(frozen=True)
class Sat:
    leaf: int
    model: dict = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class ResourceLimit:
    nodes: int
    reason: str = "nodes"  # nodes | time


@dataclass(frozen=True)
class BackendUnsupported:
    leaf: int
    reason: str


@dataclass
class Report:
    """Diagnostics gathered during a run."""

    measure_violations: list = field(default_factory=list)
    invariant_violations: list = field(default_factory=list)
    loop_violations: list = field(default_factory=list)
    base_calls: int = 0
    seconds: float = 0.0


@dataclass
class ProofResult:
    verdict: object
    tree: ProofTree
    report: Report
    context: Context

    @property
    def sat(self) -> bool:
        return isinstance(self.verdict, Sat)

    @property
    def unsat(self) -> bool:
        return isinstance(self.verdict, Unsat)


def start(ctx: Context, phi: Formula) -> frozenset:
    """Root label: the formula plus the max-depth constraint on its parameters."""
    ps = sorted((p for p in params_of(phi) if ctx.sig.is_inductive(p.sort)), key=lambda p: p.key)
    if not ps:
        return make_label([phi])
    N = ctx.N or ctx.make_depth_param()
    return make_label([phi, expand_max(ps, N)], N)


def is_layer(ctx: Context, label, hist: Optional[History] = None) -> bool:
    return applicable_rule(ctx, label, hist or History()) is None


def find_loop(ctx: Context, label, ancestors) -> Optional[tuple]:
    """First ancestor layer subsuming ``label`` on NonEq sets: (entry, renaming)."""
    if not ancestors:
        return None
    target = Target(noneq(label), ctx.N)
    cache = ctx.patterns
    for entry in ancestors:
        nid, psi, _ = entry
        pat = cache.get(nid)
        if pat is None:
            pat = cache[nid] = Pattern(psi, ctx.N)
        rho = match(pat, target)
        if rho is not None:
            return entry, Renaming(rho)
    return None


def check_layer(ctx: Context, node: ProofNode, info: LabelInfo) -> list:
    """Shape invariants that every layer must satisfy."""
    out = []
    N = ctx.N
    for f in info.formulas:
        if isinstance(f, Depth) and (f.rel not in ("=", "<") or f.rhs != N):
            out.append((node.id, "depth-atom", f.key))
    cands = info.separation_candidates(ctx)
    for i, a in enumerate(cands):
        for b in cands[i + 1:]:
            if a.sort == b.sort and frozenset((a, b)) not in info.related:
                out.append((node.id, "unseparated", f"{a.key} {b.key}"))
    return out


def check_leaf(node: ProofNode) -> list:
    out = []
    for f in noneq(node.label):
        if isinstance(f, Neq):
            if not (isinstance(f.lhs, Param) and isinstance(f.rhs, Param)):
                out.append((node.id, "leaf-shape", f.key))
        elif not is_base(f):
            out.append((node.id, "leaf-shape", f.key))
    return out


def prove(
    phi: Formula,
    sig: Signature,
    rules: RewriteSystem,
    deltas: DeltaTable = FREE,
    backend: Callable = solve_base,
    max_nodes: int = DEFAULT_MAX_NODES,
    check_measure: bool = False,
    options: Optional[Options] = None,
    time_limit: Optional[float] = None,
) -> ProofResult:
    t0 = time.perf_counter()
    deadline = None if time_limit is None else t0 + time_limit
    ctx = Context(sig, rules, deltas, options)
    report = Report()
    root = ProofNode(0, start(ctx, phi))
    nodes = [root]
    tree = ProofTree(nodes, ctx.N, ctx.sig)
    weigher = Weigher(ctx) if check_measure else None
    stack = [0]
    verdict: object = None
    steps = 0
    while stack:
        steps += 1
        if deadline is not None and steps % 64 == 0 and time.perf_counter() > deadline:
            verdict = ResourceLimit(len(nodes), "time")
            break
        node = nodes[stack.pop()]
        label, hist = node.label, node.history
        info = LabelInfo(label, ctx.N)
        inst = applicable_rule(ctx, label, hist, info)
        if inst is None:
            node.layer = True
            report.invariant_violations.extend(check_layer(ctx, node, info))
            found = find_loop(ctx, label, hist.layers)
            if found is not None:
                (target, _, target_nexp), rho = found
                node.rule = "Loop"
                node.closed = True
                node.status = "closed"
                node.loop_target = target
                node.renaming = {k.key: v.key for k, v in rho.mapping.items()}
                if target_nexp >= node.nexp:
                    report.loop_violations.append((node.id, target))
                continue
            if n_explosion_applies(ctx, label):
                inst = RuleInstance("N-Explosion")
                entry = (node.id, noneq(label), node.nexp)
                hist = History(hist.unfolded, hist.neq_done, hist.layers + (entry,))
            else:
                report.invariant_violations.extend(check_leaf(node))
                report.base_calls += 1
                res = backend(noneq(label), ctx.sig)
                node.rule = "Leaf"
                if isinstance(res, BaseSat):
                    node.status = "sat"
                    verdict = Sat(node.id, res.assignment)
                    break
                if isinstance(res, BaseUnsat):
                    node.status = "base-unsat"
                    continue
                node.status = "unsupported"
                verdict = BackendUnsupported(node.id, getattr(res, "reason", str(res)))
                break
        node.rule = inst.tag
        if inst.closes:
            node.closed = True
            node.status = "closed"
            continue
        kids = apply_rule(ctx, label, hist, inst)
        if len(nodes) + len(kids) > max_nodes:
            verdict = ResourceLimit(len(nodes))
            break
        node.status = "open"
        nexp = node.nexp + (1 if inst.tag == "N-Explosion" else 0)
        ids = []
        for lab, h in kids:
            child = ProofNode(len(nodes), lab, node.id, via=inst.tag, nexp=nexp, history=h)
            nodes.append(child)
            ids.append(child.id)
        node.children = ids
        stack.extend(reversed(ids))
    if verdict is None:
        verdict = Unsat()
    if check_measure:
        report.measure_violations = check_measures(ctx, tree, weigher)
    report.seconds = time.perf_counter() - t0
    return ProofResult(verdict, tree, report, ctx)


def check_measures(ctx: Context, tree: ProofTree, weigher: Weigher) -> list:
    """Edges (parent, frontier node) where the measure fails to drop.

    For each rule application outside the exempt set, follow the children
    through conjunction/disjunction splits and compare every expanded,
    non-closed frontier node with the parent.
    """
    cache: dict[int, Measure] = {}

    def mes(n: ProofNode) -> Measure:
        m = cache.get(n.id)
        if m is None:
            m = measure(ctx, n.label, n.history, weigher)
            cache[n.id] = m
        return m

    out = []
    for node in tree.nodes:
        if not node.children or node.rule in MEASURE_EXEMPT:
            continue
        frontier = []
        todo = list(node.children)
        while todo:
            c = tree.nodes[todo.pop()]
            if c.closed or c.rule is None:
                continue
            if c.rule in DECOMPOSITIONS and c.children:
                todo.extend(c.children)
            else:
                frontier.append(c)
        before = mes(node)
        for c in frontier:
            if not mes(c) < before:
                out.append((node.id, c.id, node.rule))
    return out
