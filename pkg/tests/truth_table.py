"""Brute-force truth tables over abstracted atoms, vectorised with numpy."""

from __future__ import annotations

import numpy as np

from schemata.core import FALSE, TRUE, And, Atom, Or


def table(n: int) -> np.ndarray:
    """Rows are all 2**n assignments; column i is atom i."""
    rows = np.arange(2**n, dtype=np.uint32)[:, None]
    return ((rows >> np.arange(n, dtype=np.uint32)) & 1).astype(bool)


def evaluate(f, columns: dict, rows: int) -> np.ndarray:
    if f == TRUE:
        return np.ones(rows, dtype=bool)
    if f == FALSE:
        return np.zeros(rows, dtype=bool)
    if isinstance(f, Atom):
        key = Atom(f.pred, f.args).key
        col = columns[key]
        return col if f.positive else ~col
    if isinstance(f, And):
        out = np.ones(rows, dtype=bool)
        for a in f.args:
            out &= evaluate(a, columns, rows)
        return out
    if isinstance(f, Or):
        out = np.zeros(rows, dtype=bool)
        for a in f.args:
            out |= evaluate(a, columns, rows)
        return out
    raise TypeError(f"not a propositional formula: {f}")


def satisfiable(f, atoms) -> bool:
    t = table(len(atoms))
    cols = {a.key: t[:, i] for i, a in enumerate(atoms)}
    return bool(evaluate(f, cols, t.shape[0]).any())
