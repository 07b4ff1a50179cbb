"""Rewrite rules for defined symbols: normal forms and unfolding."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    And,
    App,
    Defined,
    Or,
    Quant,
    Formula,
    Not,
    Param,
    Term,
    Var,
    conj,
    disj,
    is_ground,
    map_terms,
    negate,
    nnf,
    replace_term,
)


class RewriteError(ValueError):
    pass


@dataclass(frozen=True)
class RewriteRule:
    defined: str
    constructor: str
    formals: tuple
    body: Formula
    sort: str

    @property
    def pattern(self) -> App:
        return App(self.constructor, self.formals, self.sort)


class RewriteSystem:
    """Rules ``d_{f(x1..xn)} -> body`` indexed by (defined symbol, constructor)."""

    def __init__(self, rules: Iterable[RewriteRule] = ()):
        self.rules: dict[tuple[str, str], RewriteRule] = {}
        self._templates: dict[tuple[str, str], Formula] = {}
        self._ground: dict[tuple[str, str], Formula] = {}
        self._lock = threading.Lock()
        for r in rules:
            self.add(r)

    def add(self, rule: RewriteRule) -> None:
        key = (rule.defined, rule.constructor)
        if key in self.rules:
            raise RewriteError(f"duplicate rule for {rule.defined} at {rule.constructor}")
        self.rules[key] = rule
        self._templates.clear()
        self._ground.clear()

    def get(self, d: str, f: str) -> RewriteRule:
        try:
            return self.rules[(d, f)]
        except KeyError:
            raise RewriteError(f"no rule for {d} at constructor {f}") from None

    def __iter__(self):
        return iter(self.rules.values())

    def __len__(self):
        return len(self.rules)

    # -- normal forms -----------------------------------------------------

    def template(self, d: str, f: str, _stack: tuple = ()) -> Formula:
        """Rule body with every head-recursive defined atom inlined.

        The result is expressed over the formals of rule (d, f).
        """
        key = (d, f)
        cached = self._templates.get(key)
        if cached is not None:
            return cached
        if key in _stack:
            raise RewriteError(f"cyclic head recursion through {d} at {f}")
        rule = self.get(d, f)
        pat = rule.pattern
        formals = rule.formals

        def inline(g: Formula) -> Formula:
            if isinstance(g, Defined) and g.index == pat:
                inner = self.template(g.sym, f, _stack + (key,))
                other = self.get(g.sym, f)
                inner = _rename_formals(inner, other.formals, formals)
                return inner if g.positive else nnf(Not(inner))
            return _map_sub(g, inline)

        result = inline(rule.body)
        with self._lock:
            self._templates.setdefault(key, result)
        return result

    def normal_form(self, d: str, f: str, args: Sequence[Term]) -> Formula:
        rule = self.get(d, f)
        if len(args) != len(rule.formals):
            raise RewriteError(f"{f} expects {len(rule.formals)} arguments, got {len(args)}")
        return instantiate(self.template(d, f), rule.formals, args)

    def unfold(self, d: str, a: Param, f: str, args: Sequence[Param], positive: bool = True) -> Formula:
        """Body of ``d_{f(args)}`` with the pattern ``f(args)`` written as ``a``."""
        nf = self.normal_form(d, f, args)
        pat = App(f, tuple(args), a.sort)
        psi = replace_term(nf, pat, a)
        return psi if positive else nnf(Not(psi))

    def ground_unfold_atom(self, d: str, t: Term, positive: bool = True) -> Formula:
        """Fully evaluate ``d_t`` for a ground constructor term ``t``."""
        if not is_ground(t) or not isinstance(t, App):
            raise RewriteError(f"ground_unfold_atom needs a ground constructor term, got {t}")
        key = (d, t.key)
        out = self._ground.get(key)
        if out is None:
            body = self.normal_form(d, t.fn, t.args)
            out = self.eliminate_defined(body)
            with self._lock:
                self._ground.setdefault(key, out)
        return out if positive else negate(out)

    def eliminate_defined(self, f: Formula) -> Formula:
        """Replace every defined atom with a ground index by its evaluation."""
        if isinstance(f, Defined):
            return self.ground_unfold_atom(f.sym, f.index, f.positive)
        return _map_sub(f, self.eliminate_defined)


def _map_sub(f: Formula, fn) -> Formula:
    if isinstance(f, And):
        return conj(*(fn(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(fn(a) for a in f.args))
    if isinstance(f, Quant):
        return Quant(f.q, f.var, fn(f.body))
    if isinstance(f, Not):
        return Not(fn(f.arg))
    return f


def instantiate(f: Formula, formals: Sequence[Var], args: Sequence[Term]) -> Formula:
    """Substitute rule formals by terms."""
    if not formals:
        return f
    table = {v.name: t for v, t in zip(formals, args)}
    for v, t in zip(formals, args):
        if v.sort != t.sort:
            raise RewriteError(f"argument {t} has sort {t.sort}, expected {v.sort}")
    return map_terms(f, lambda t: table.get(t.name) if isinstance(t, Var) else None)


def _rename_formals(f: Formula, old: Sequence[Var], new: Sequence[Var]) -> Formula:
    if tuple(old) == tuple(new):
        return f
    return instantiate(f, old, new)
