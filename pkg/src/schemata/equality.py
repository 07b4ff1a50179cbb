"""Decomposition of equations between constructor-headed terms."""

from __future__ import annotations

from typing import Mapping, Sequence

from .core import FALSE, Formula, Not, Term, Var, conj, map_terms, mk_eq, nnf


class DeltaError(ValueError):
    pass


def x_vars(sorts: Sequence[str]) -> tuple:
    return tuple(Var(f"x{i + 1}", s) for i, s in enumerate(sorts))


def y_vars(sorts: Sequence[str]) -> tuple:
    return tuple(Var(f"y{i + 1}", s) for i, s in enumerate(sorts))


class DeltaTable:
    """Per constructor pair templates over ``x1..xn`` and ``y1..ym``.

    A missing pair falls back to free constructors: false for distinct
    heads, argumentwise equality for equal heads.  Entries are looked up
    in either order.
    """

    def __init__(self, entries: Mapping[tuple, Formula] | None = None):
        self.entries: dict[tuple[str, str], Formula] = dict(entries or {})

    def add(self, f: str, g: str, template: Formula) -> None:
        if (f, g) in self.entries or (g, f) in self.entries:
            raise DeltaError(f"duplicate delta entry for ({f}, {g})")
        self.entries[(f, g)] = template

    def __len__(self):
        return len(self.entries)

    def lookup(self, f: str, g: str):
        """Template and whether the roles of x and y are swapped."""
        if (f, g) in self.entries:
            return self.entries[(f, g)], False
        if (g, f) in self.entries:
            return self.entries[(g, f)], True
        return None, False


FREE = DeltaTable()


def delta(f: str, ss: Sequence[Term], g: str, ts: Sequence[Term], table: DeltaTable = FREE) -> Formula:
    template, swapped = table.lookup(f, g)
    if template is None:
        if f != g:
            return FALSE
        if len(ss) != len(ts):
            raise DeltaError(f"arity mismatch for {f}")
        return conj(*(mk_eq(s, t) for s, t in zip(ss, ts)))
    xs, ys = (ts, ss) if swapped else (ss, ts)
    env = {f"x{i + 1}": t for i, t in enumerate(xs)}
    env.update({f"y{i + 1}": t for i, t in enumerate(ys)})

    def sub(t):
        if isinstance(t, Var):
            if t.name not in env:
                raise DeltaError(f"delta template for ({f}, {g}) uses unbound {t.name}")
            return env[t.name]
        return None

    return map_terms(template, sub)


def negated_delta(f: str, ss: Sequence[Term], g: str, ts: Sequence[Term], table: DeltaTable = FREE) -> Formula:
    return nnf(Not(delta(f, ss, g, ts, table)))
