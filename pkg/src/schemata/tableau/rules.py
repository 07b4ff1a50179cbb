"""Expansion rules of the tableau and their selection order.

Selection is deterministic: closures first, then conjunction and
disjunction splitting, then the remaining rules in a fixed order
(``MEDIUM_ORDER``).  Loop and N-Explosion are handled by the prover since
they look at the branch, not just the label.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

from ..core import (
    FALSE,
    NAT,
    SUCC,
    TRUE,
    ZERO,
    And,
    App,
    Atom,
    Defined,
    Depth,
    Eq,
    Formula,
    Neq,
    Or,
    Param,
    Term,
    Quant,
    Signature,
    conj,
    disj,
    expand_max,
    mk_eq,
    mk_neq,
    negate,
    params_of,
    substitute_param,
    succ,
    zero,
)
from ..equality import FREE, DeltaTable, delta, negated_delta
from ..rewrite import RewriteSystem

CLOSURES = ("False", "Closure", "N-Closure", "Depth-Closure", "Cycle-Closure", "Depth-Order-Closure")
MEDIUM_ORDER = (
    "Replacement",
    "Unfolding",
    "Eq-Decomposition",
    "Neq-Decomposition",
    "Strictness",
    "Lt-Decomposition",
    "Lt-Separation",
    "Depth-Separation",
    "Separation",
    "Explosion",
)


@dataclass(frozen=True)
class RuleInstance:
    tag: str
    data: tuple = ()

    @property
    def closes(self) -> bool:
        return self.tag in CLOSURES


@dataclass(frozen=True)
class History:
    """What a branch has already done; children extend their parent's copy."""

    unfolded: frozenset = frozenset()
    neq_done: frozenset = frozenset()
    layers: tuple = ()  # (node id, noneq label, nexp count)


@dataclass
class Options:
    decompose_base_conjunctions: bool = True
    # "all": every parameter of the label; "relevant": skip non-inductive
    # parameters that only fill constructor slots
    separation_scope: str = "relevant"


class Context:
    """Per-run state shared by all branches: signature, rules, fresh names."""

    def __init__(
        self,
        sig: Signature,
        rules: RewriteSystem,
        deltas: DeltaTable = FREE,
        options: Optional[Options] = None,
    ):
        self.sig = sig.copy()
        self.rules = rules
        self.deltas = deltas
        self.options = options or Options()
        self.N: Optional[Param] = None
        self.rank: dict[Param, int] = {}
        self._counter = 0
        self.patterns: dict = {}  # compiled ancestor layers, by node id
        for i, p in enumerate(sorted(self.sig.parameters(), key=lambda p: p.name)):
            self.rank[p] = i
        self._next_rank = len(self.rank)

    def make_depth_param(self) -> Param:
        name = "N"
        k = 0
        while name in self.sig.symbols:
            k += 1
            name = f"N{k}"
        self.N = Param(name, NAT)
        self.sig.add_symbol(name, (), NAT, "parameter")
        self.rank[self.N] = -1
        return self.N

    def fresh(self, sort: str) -> Param:
        while True:
            self._counter += 1
            name = f"X{self._counter}"
            if name not in self.sig.symbols:
                break
        p = Param(name, sort)
        self.sig.add_symbol(name, (), sort, "parameter")
        self.rank[p] = self._next_rank
        self._next_rank += 1
        return p

    def rank_of(self, p: Param) -> int:
        return self.rank.get(p, 10**9)


# ---------------------------------------------------------------------------
# Label helpers


def make_label(formulas: Iterable[Formula], N: Optional[Param] = None) -> frozenset:
    out = set()
    for f in formulas:
        if f == TRUE:
            continue
        if N is not None and isinstance(f, Eq) and f.lhs == N and f.rhs != N:
            f = mk_eq(f.rhs, f.lhs)
        out.add(f)
    return frozenset(out)


def sorted_label(label) -> list:
    return sorted(label, key=lambda f: f.key)


class LabelInfo:
    """Indexes over a label used by rule selection and the measure."""

    def __init__(self, label, N: Optional[Param]):
        self.label = label
        self.N = N
        self.formulas = sorted_label(label)
        self.occ: dict[Param, list] = defaultdict(list)
        self.app_eqs: dict[Param, list] = defaultdict(list)
        self.related: set = set()
        for f in self.formulas:
            for p in params_of(f):
                self.occ[p].append(f)
            if isinstance(f, Eq) and isinstance(f.lhs, Param) and isinstance(f.rhs, App):
                self.app_eqs[f.lhs].append(f)
            if isinstance(f, (Eq, Neq)) and isinstance(f.lhs, Param) and isinstance(f.rhs, Param):
                self.related.add(frozenset((f.lhs, f.rhs)))

    def solved(self, p: Param) -> bool:
        if p == self.N:
            return False
        fs = self.occ.get(p, ())
        return (
            len(fs) == 1
            and isinstance(fs[0], Eq)
            and fs[0].lhs == p
            and isinstance(fs[0].rhs, Param)
        )

    def params(self) -> list:
        return list(self.occ)

    def unsolved(self) -> list:
        return [p for p in self.occ if not self.solved(p)]

    def separation_candidates(self, ctx: Context) -> list:
        if ctx.options.separation_scope == "relevant":
            scope = [p for p in self.occ if ctx.sig.is_inductive(p.sort) or self._used(p)]
        else:
            scope = list(self.occ)
        cands = [p for p in scope if p != self.N and not self.solved(p)]
        return sorted(cands, key=lambda p: (ctx.rank_of(p), p.name))

    def _used(self, p: Param) -> bool:
        """Occurs somewhere other than a constructor slot or a parameter (dis)equation."""
        for f in self.occ[p]:
            if isinstance(f, (Eq, Neq)) and isinstance(f.lhs, Param):
                if isinstance(f.rhs, Param) or (isinstance(f.rhs, App) and f.lhs != p):
                    continue
            return True
        return False

    def separable_pairs(self, ctx: Context) -> Iterable[tuple]:
        cands = self.separation_candidates(ctx)
        for i, a in enumerate(cands):
            for b in cands[i + 1:]:
                if a.sort == b.sort and frozenset((a, b)) not in self.related:
                    yield a, b

    def neq_instances(self, hist: History, ctx: Optional[Context] = None) -> Iterable[tuple]:
        for f in self.formulas:
            if isinstance(f, Neq) and isinstance(f.lhs, Param) and isinstance(f.rhs, Param):
                ea = self.app_eqs.get(f.lhs)
                eb = self.app_eqs.get(f.rhs)
                if ea and eb:
                    key = (f.key, ea[0].key, eb[0].key)
                    if key in hist.neq_done:
                        continue
                    if ctx is not None and self._slots_differ(ctx, ea[0], eb[0]):
                        continue
                    yield f, ea[0], eb[0], key

    def _slots_differ(self, ctx: Context, ea: Eq, eb: Eq) -> bool:
        """Both terms carry distinct slot-only parameters at some position.

        Such parameters are never separated and can always be read as
        distinct, so the disequation holds without decomposing it.  Any
        equation later merging them rewrites ea or eb and re-enables the rule.
        """
        if ctx.options.separation_scope != "relevant" or ea.rhs.fn != eb.rhs.fn:
            return False
        if ctx.deltas.lookup(ea.rhs.fn, eb.rhs.fn)[0] is not None:
            return False
        for x, y in zip(ea.rhs.args, eb.rhs.args):
            if (
                isinstance(x, Param)
                and isinstance(y, Param)
                and x != y
                and not ctx.sig.is_inductive(x.sort)
                and not self._used(x)
                and not self._used(y)
            ):
                return True
        return False


def is_base(f: Formula) -> bool:
    """No defined atoms, no depth atoms, no equations between parameters."""
    if isinstance(f, (Defined, Depth)):
        return False
    if isinstance(f, (Eq, Neq)):
        return not (isinstance(f.lhs, Param) and isinstance(f.rhs, Param))
    if isinstance(f, (And, Or)):
        return all(is_base(a) for a in f.args)
    if isinstance(f, Quant):
        return is_base(f.body)
    return True


def _literal(f) -> bool:
    return isinstance(f, (Atom, Defined, Eq, Neq))


# ---------------------------------------------------------------------------
# Selection


def constructor_cycle(ctx: Context, info: LabelInfo) -> Optional[list]:
    """Equations A = f(..B..), B = g(..A..) chaining back to A through inductive slots.

    Such a chain would make a term a proper subterm of itself.
    """
    succs: dict[Param, set] = {}
    for p, eqs in info.app_eqs.items():
        succs[p] = {
            x for f in eqs for x in f.rhs.args
            if isinstance(x, Param) and ctx.sig.is_inductive(x.sort)
        }
    state: dict[Param, int] = {}
    for root in sorted(succs, key=lambda p: p.key):
        if root in state:
            continue
        path = [root]
        state[root] = 1
        stack = [iter(sorted(succs[root], key=lambda p: p.key))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                state[path.pop()] = 2
                continue
            st = state.get(nxt)
            if st == 1:
                eqs = [info.app_eqs[q][0] for q in path[path.index(nxt):]]
                return eqs
            if st is None and nxt in succs:
                state[nxt] = 1
                path.append(nxt)
                stack.append(iter(sorted(succs[nxt], key=lambda p: p.key)))
            else:
                state.setdefault(nxt, 2)
    return None


def _peel(t: Term, N: Optional[Param]) -> tuple:
    """``s^k(base)`` as (base, k) with base "N" or "0"; None otherwise."""
    k = 0
    while isinstance(t, App) and t.fn == SUCC:
        t = t.args[0]
        k += 1
    if N is not None and t == N:
        return "N", k
    if isinstance(t, App) and t.fn == ZERO:
        return "0", k
    return None


def depth_bounds(ctx: Context, info: LabelInfo) -> tuple:
    """Lower and upper depth bounds per (parameter, base), base "N" or "0".

    ``A = f(..X..)`` makes A strictly deeper than every inductive argument X,
    so lower bounds flow upwards along constructor equations; upper bounds
    come from the depth atoms alone.
    """
    cached = getattr(info, "_bounds", None)
    if cached is not None:
        return cached
    lower: dict = {}
    upper: dict = {}
    for f in info.formulas:
        if not isinstance(f, Depth):
            continue
        pk = _peel(f.rhs, ctx.N)
        if pk is None:
            continue
        base, k = pk
        key = (f.param, base)
        hi = k - 1 if f.rel == "<" else k
        upper[key] = min(upper.get(key, hi), hi)
        if f.rel == "=":
            lower[key] = max(lower.get(key, k), k)
    for p in info.occ:
        if ctx.sig.is_inductive(p.sort) and p != ctx.N:
            lower[(p, "0")] = max(lower.get((p, "0"), 1), 1)
    edges = []
    for p, eqs in info.app_eqs.items():
        for f in eqs:
            edges.extend(
                (p, x) for x in f.rhs.args if isinstance(x, Param) and ctx.sig.is_inductive(x.sort)
            )
    # constructor equations form a DAG once cycles are closed; the bound
    # on rounds keeps this finite regardless
    for _ in range(len(info.occ) + 1):
        changed = False
        for p, x in edges:
            for base in ("N", "0"):
                lx = lower.get((x, base))
                if lx is None:
                    continue
                cur = lower.get((p, base))
                if cur is None or cur <= lx:
                    lower[(p, base)] = lx + 1
                    changed = True
        if not changed:
            break
    info._bounds = (lower, upper)
    return info._bounds


def depth_order_conflict(ctx: Context, info: LabelInfo) -> Optional[Param]:
    """A parameter whose depth atoms contradict the depth its equations force."""
    lower, upper = depth_bounds(ctx, info)
    for key, hi in sorted(upper.items(), key=lambda kv: (kv[0][0].key, kv[0][1])):
        lo = lower.get(key)
        if lo is not None and lo > hi:
            return key[0]
    return None


def depth_apart(ctx: Context, info: LabelInfo, a: Param, b: Param) -> bool:
    """The known depth intervals of a and b are disjoint."""
    lower, upper = depth_bounds(ctx, info)
    for base in ("N", "0"):
        la, ua = lower.get((a, base)), upper.get((a, base))
        lb, ub = lower.get((b, base)), upper.get((b, base))
        if la is not None and ub is not None and la > ub:
            return True
        if lb is not None and ua is not None and lb > ua:
            return True
    return False


def applicable_rule(ctx: Context, label, hist: History, info: Optional[LabelInfo] = None) -> Optional[RuleInstance]:
    """First applicable rule among closures, decompositions and medium rules."""
    info = info or LabelInfo(label, ctx.N)
    fs = info.formulas
    N = ctx.N
    # P0
    if FALSE in label:
        return RuleInstance("False")
    for f in fs:
        if _literal(f) and negate(f) in label:
            return RuleInstance("Closure", (f,))
    for f in fs:
        if isinstance(f, Eq) and isinstance(f.lhs, App) and isinstance(f.rhs, App):
            heads = {f.lhs.fn, f.rhs.fn}
            if heads == {ZERO, SUCC} and f.lhs.sort == NAT:
                return RuleInstance("N-Closure", (f,))
        # N is a maximal depth, hence at least 1
        if isinstance(f, Eq) and N is not None and {f.lhs.key, f.rhs.key} == {N.key, ZERO}:
            return RuleInstance("N-Closure", (f,))
    for f in fs:
        if isinstance(f, Depth) and f.rhs == zero():
            return RuleInstance("Depth-Closure", (f,))
    cyc = constructor_cycle(ctx, info)
    if cyc is not None:
        return RuleInstance("Cycle-Closure", tuple(cyc))
    bad = depth_order_conflict(ctx, info)
    if bad is not None:
        return RuleInstance("Depth-Order-Closure", (bad,))
    # P1
    for f in fs:
        if isinstance(f, And) and (ctx.options.decompose_base_conjunctions or not is_base(f)):
            return RuleInstance("And-Decomposition", (f,))
    for f in fs:
        if isinstance(f, Or):
            return RuleInstance("Or-Decomposition", (f,))
    # P2
    for f in fs:
        if isinstance(f, Eq) and isinstance(f.lhs, Param) and isinstance(f.rhs, Param) and f.lhs != N:
            if len(info.occ[f.lhs]) > 1:
                return RuleInstance("Replacement", (f,))
    for f in fs:
        if isinstance(f, Defined) and isinstance(f.index, Param):
            eqs = info.app_eqs.get(f.index)
            if eqs:
                return RuleInstance("Unfolding", (f, eqs[0]))
    for p in sorted(info.app_eqs, key=lambda p: p.key):
        eqs = info.app_eqs[p]
        if len(eqs) > 1:
            return RuleInstance("Eq-Decomposition", (eqs[0], eqs[1]))
    pending = tuple((neq, ea, eb) for neq, ea, eb, _ in info.neq_instances(hist, ctx))
    if pending:
        # the instances are independent, so they are decomposed together
        return RuleInstance("Neq-Decomposition", pending)
    for f in fs:
        if isinstance(f, Depth) and f.rel == "<=" and f.rhs != zero():
            return RuleInstance("Strictness", (f,))
    for f in fs:
        if isinstance(f, Depth) and f.rel == "<" and isinstance(f.rhs, App) and f.rhs.fn == SUCC:
            return RuleInstance("Lt-Decomposition", (f,))
    if N is not None:
        lts = [f for f in fs if isinstance(f, Depth) and f.rel == "<" and f.rhs == N]
        eqs = [f for f in fs if isinstance(f, Depth) and f.rel == "=" and f.rhs == N]
        apart = []
        for lt in lts:
            for eq in eqs:
                a, b = lt.param, eq.param
                if a.sort != b.sort:
                    continue
                if a != b and frozenset((a, b)) in info.related:
                    continue
                apart.append((a, b))
        if apart:
            # every implied disequation is added in one step
            return RuleInstance("Lt-Separation", tuple(apart))
    pairs = list(info.separable_pairs(ctx))
    apart = [(a, b) for a, b in pairs if depth_apart(ctx, info, a, b)]
    if apart:
        return RuleInstance("Depth-Separation", tuple(apart))
    for a, b in pairs:
        return RuleInstance("Separation", (a, b))
    for f in fs:
        if (
            isinstance(f, Depth)
            and f.rel == "="
            and isinstance(f.rhs, App)
            and f.rhs.fn == SUCC
            and (f.rhs.args[0] == zero() or f.rhs.args[0] == N)
        ):
            return RuleInstance("Explosion", (f,))
    return None


def n_explosion_applies(ctx: Context, label) -> bool:
    return ctx.N is not None and ctx.N in params_of(label)


# ---------------------------------------------------------------------------
# Application


def apply_rule(ctx: Context, label, hist: History, inst: RuleInstance) -> list:
    """Children of ``label`` as a list of (label, history) pairs."""
    N = ctx.N
    tag = inst.tag
    if inst.closes or tag == "Loop":
        return []

    def child(remove=(), add=(), h=hist):
        missing = [f for f in remove if f not in label]
        if missing:
            raise RuntimeError(f"stale rule instance {tag}: {missing[0]} not in label")
        return make_label((label - set(remove)) | set(add), N), h

    if tag == "And-Decomposition":
        (f,) = inst.data
        return [child([f], f.args)]
    if tag == "Or-Decomposition":
        (f,) = inst.data
        present = [a for a in f.args if a in label]
        if present:
            return [child([f])]
        return [child([f], [a]) for a in f.args]
    if tag == "Replacement":
        (eq,) = inst.data
        if eq not in label:
            raise RuntimeError(f"stale rule instance {tag}")
        rest = [substitute_param(g, eq.lhs, eq.rhs) for g in label if g != eq]
        return [(make_label(rest + [eq], N), hist)]
    if tag == "Unfolding":
        d, eq = inst.data
        a, t = eq.lhs, eq.rhs
        key = (d.sym, d.positive, a.key, t.key)
        if key in hist.unfolded:
            return [child([d])]
        body = ctx.rules.unfold(d.sym, a, t.fn, t.args, d.positive)
        h = History(hist.unfolded | {key}, hist.neq_done, hist.layers)
        return [child([d], [body], h)]
    if tag == "Eq-Decomposition":
        keep, drop = inst.data
        psi = delta(keep.rhs.fn, keep.rhs.args, drop.rhs.fn, drop.rhs.args, ctx.deltas)
        return [child([drop], [psi])]
    if tag == "Neq-Decomposition":
        psis = [negated_delta(ea.rhs.fn, ea.rhs.args, eb.rhs.fn, eb.rhs.args, ctx.deltas) for _, ea, eb in inst.data]
        keys = {(neq.key, ea.key, eb.key) for neq, ea, eb in inst.data}
        h = History(hist.unfolded, hist.neq_done | keys, hist.layers)
        return [child([], psis, h)]
    if tag == "Strictness":
        (f,) = inst.data
        return [child([f], [disj(Depth(f.param, "=", f.rhs), Depth(f.param, "<", f.rhs))])]
    if tag == "Lt-Decomposition":
        (f,) = inst.data
        return [child([f], [Depth(f.param, "<=", f.rhs.args[0])])]
    if tag in ("Lt-Separation", "Depth-Separation"):
        return [child([], [mk_neq(a, b) for a, b in inst.data])]
    if tag == "Separation":
        a, b = inst.data  # a is older
        return [child([], [mk_eq(b, a)]), child([], [mk_neq(a, b)])]
    if tag == "Explosion":
        (f,) = inst.data
        b, t = f.param, f.rhs.args[0]
        disjuncts = []
        for c in ctx.sig.constructors(b.sort):
            args = tuple(ctx.fresh(s) for s in c.arg_sorts)
            e = [x for x in args if ctx.sig.is_inductive(x.sort)]
            disjuncts.append(conj(expand_max(e, t), mk_eq(b, App(c.name, args, b.sort))))
        return [child([f], [disj(*disjuncts)])]
    if tag == "N-Explosion":
        return [
            (make_label(substitute_param(label, N, succ(zero())), N), hist),
            (make_label(substitute_param(label, N, succ(N)), N), hist),
        ]
    raise ValueError(f"unknown rule {tag}")
