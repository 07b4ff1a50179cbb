"""Termination measure: formula weights plus three counters.

The measure of a label is ``(W, separable, diseq, unsolved)`` where W is
the multiset of weights of the formulae that are not equations or
disequations between parameters.  Measures compare with the multiset
extension on W, then lexicographically on separable, unsolved, diseq.
Comparing unsolved before diseq matters: a Replacement can expose a new
disequation decomposition while it always solves one parameter.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from ..core import (
    FALSE,
    SUCC,
    TRUE,
    Atom,
    Defined,
    Depth,
    Eq,
    Formula,
    Neq,
    Not,
    Param,
    Quant,
    Term,
    Var,
    _Junction,
    params_of,
)
from .rules import Context, History, LabelInfo

NESTED_DEFINED_WEIGHT = 2


class Weigher:
    def __init__(self, ctx: Context):
        self.ctx = ctx
        self.a = ctx.sig.max_arity
        self._defined: dict[tuple[str, bool], int] = {}

    def term(self, t: Term, arith: bool = False) -> int:
        """Weight of a term; ``arith`` marks depth arithmetic, where s is heavy."""
        if isinstance(t, (Param, Var)):
            return 1
        if arith and t.fn == SUCC and len(t.args) == 1:
            return 3 + self.a + self.term(t.args[0], True)
        return 1 + sum(self.term(x, arith) for x in t.args)

    def formula(self, f: Formula, nested: bool = False) -> int:
        if f is TRUE or f is FALSE or f == TRUE or f == FALSE:
            return 1
        if isinstance(f, Atom):
            w = 1 + sum(self.term(x) for x in f.args)
            return w if f.positive else w + 1
        if isinstance(f, Eq):
            arith = self.ctx.N is not None and self.ctx.N in params_of(f)
            return self.term(f.lhs, arith) + self.term(f.rhs, arith) + 1
        if isinstance(f, Neq):
            return self.term(f.lhs) + self.term(f.rhs) + 2
        if isinstance(f, Depth):
            extra = 2 if f.rel == "<=" else 1
            return self.term(f.param) + self.term(f.rhs, True) + extra
        if isinstance(f, Defined):
            if nested:
                return NESTED_DEFINED_WEIGHT
            w = self.defined(f.sym, f.index.sort)
            return w if f.positive else w + 1
        if isinstance(f, _Junction):
            return 1 + sum(self.formula(x, nested) for x in f.args)
        if isinstance(f, Quant):
            return 1 + self.formula(f.body, nested)
        if isinstance(f, Not):
            return 1 + self.formula(f.arg, nested)
        raise TypeError(f"cannot weigh {f!r}")

    def defined(self, sym: str, sort: str) -> int:
        key = (sym, sort)
        w = self._defined.get(key)
        if w is None:
            best = 0
            a = Param("?A", sort)
            for c in self.ctx.sig.constructors(sort):
                args = [Param(f"?B{i}", s) for i, s in enumerate(c.arg_sorts)]
                psi = self.ctx.rules.unfold(sym, a, c.name, args, True)
                best = max(best, self.formula(psi, nested=True))
            w = 1 + best
            self._defined[key] = w
        return w


@dataclass(frozen=True)
class Measure:
    weights: tuple  # sorted descending
    separable: int
    diseq: int
    unsolved: int

    def __lt__(self, other: "Measure") -> bool:
        c = multiset_compare(self.weights, other.weights)
        if c != 0:
            return c < 0
        return (self.separable, self.unsolved, self.diseq) < (other.separable, other.unsolved, other.diseq)

    def __le__(self, other):
        return self == other or self < other


def multiset_compare(m: tuple, n: tuple) -> int:
    """Dershowitz-Manna comparison on multisets of naturals: -1, 0 or 1."""
    cm, cn = Counter(m), Counter(n)
    for v in sorted(set(cm) | set(cn), reverse=True):
        if cm[v] != cn[v]:
            return -1 if cm[v] < cn[v] else 1
    return 0


def is_param_literal(f: Formula) -> bool:
    return isinstance(f, (Eq, Neq)) and isinstance(f.lhs, Param) and isinstance(f.rhs, Param)


def measure(ctx: Context, label, hist: Optional[History] = None, weigher: Optional[Weigher] = None) -> Measure:
    hist = hist or History()
    weigher = weigher or Weigher(ctx)
    info = LabelInfo(label, ctx.N)
    ws = sorted((weigher.formula(f) for f in label if not is_param_literal(f)), reverse=True)
    separable = sum(1 for _ in info.separable_pairs(ctx))
    diseq = len({k for *_, k in info.neq_instances(hist, ctx)})
    unsolved = sum(1 for p in info.occ if not info.solved(p))
    return Measure(tuple(ws), separable, diseq, unsolved)


def weight(ctx: Context, f: Formula) -> int:
    return Weigher(ctx).formula(f)
