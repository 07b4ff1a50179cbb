"""Bounded-instantiation oracle.

Every inductive parameter is replaced by a ground constructor term of
bounded depth, defined atoms are evaluated by the rewrite system, and the
resulting base formula goes to the base solver.  A satisfiable grounding
is a genuine model; exhausting the bound proves nothing beyond it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .basesolver import BaseSat, BaseUnsat, solve_base
from .core import (
    FALSE,
    TRUE,
    And,
    App,
    Defined,
    Eq,
    Formula,
    Neq,
    Not,
    Or,
    Param,
    Quant,
    Signature,
    conj,
    disj,
    map_terms,
    nnf,
    params_of,
    term_depth,
)
from .equality import FREE, DeltaTable, delta
from .rewrite import RewriteSystem

DEFAULT_BUDGET = 200_000


class OracleError(RuntimeError):
    pass


class BudgetExceeded(OracleError):
    def __init__(self, tried: int):
        super().__init__(f"grounding budget exhausted after {tried} groundings")
        self.tried = tried


class OracleUnsupported(OracleError):
    pass


@dataclass(frozen=True)
class SatAtDepth:
    assignment: dict = field(hash=False)
    depth: int = 0
    tried: int = 0

    def __str__(self):
        pairs = ", ".join(f"{p.name}={t}" for p, t in sorted(self.assignment.items(), key=lambda kv: kv[0].key))
        return f"SatAtDepth({pairs})"


@dataclass(frozen=True)
class UnsatUpTo:
    depth: int
    tried: int = 0

    def __str__(self):
        return f"UnsatUpTo({self.depth})"


# ---------------------------------------------------------------------------
# Ground terms


def slot_constant(sort: str, owner: str, path: tuple) -> App:
    """Fresh constant for a non-inductive argument slot."""
    where = ".".join(str(i) for i in path)
    return App(f"{sort}@{owner}.{where}" if where else f"{sort}@{owner}", (), sort)


def _terms(sig: Signature, sort: str, depth: int, owner: str, path: tuple, memo: dict) -> list:
    """Constructor terms of ``sort`` with depth exactly ``depth``."""
    key = (sort, depth, path)
    hit = memo.get(key)
    if hit is not None:
        return hit
    out = []
    for c in sig.constructors(sort):
        ind = [i for i, s in enumerate(c.arg_sorts) if sig.is_inductive(s)]
        if not ind:
            if depth == 1:
                out.append(_fill(c, {}, sig, owner, path))
            continue
        if depth < 2:
            continue
        # choose a depth for each inductive slot, at least one hitting depth-1
        for ds in itertools.product(range(1, depth), repeat=len(ind)):
            if max(ds) != depth - 1:
                continue
            pools = [_terms(sig, c.arg_sorts[i], d, owner, path + (i,), memo) for i, d in zip(ind, ds)]
            for combo in itertools.product(*pools):
                out.append(_fill(c, dict(zip(ind, combo)), sig, owner, path))
    memo[key] = out
    return out


def _fill(c, inductive_args: dict, sig: Signature, owner: str, path: tuple) -> App:
    args = []
    for i, s in enumerate(c.arg_sorts):
        if i in inductive_args:
            args.append(inductive_args[i])
        else:
            args.append(slot_constant(s, owner, path + (i,)))
    return App(c.name, args, c.result)


def enumerate_constructor_terms(sig: Signature, sort: str, max_depth: int, owner: str = "") -> list:
    """All ground constructor terms of ``sort`` with depth at most ``max_depth``.

    Ordered by depth, then by constructor declaration order.  Non-inductive
    slots hold constants named after ``owner`` and the slot position.
    """
    if not sig.is_inductive(sort):
        raise OracleError(f"sort {sort} is not inductive")
    if max_depth < 1:
        raise OracleError("max_depth must be positive")
    memo: dict = {}
    out = []
    for d in range(1, max_depth + 1):
        out.extend(_terms(sig, sort, d, owner, (), memo))
    return out


# ---------------------------------------------------------------------------
# Grounding


def ground_equalities(f: Formula, sig: Signature, table: DeltaTable = FREE) -> Formula:
    """Decide equations between ground constructor terms and between distinct constants."""

    def decide(lhs, rhs) -> Optional[Formula]:
        if lhs == rhs:
            return TRUE
        if sig.is_inductive(lhs.sort):
            if isinstance(lhs, App) and isinstance(rhs, App):
                d = delta(lhs.fn, lhs.args, rhs.fn, rhs.args, table)
                return ground_equalities(d, sig, table)
            return None
        if _is_constant(lhs, sig) and _is_constant(rhs, sig):
            return FALSE
        return None

    if isinstance(f, Eq):
        r = decide(f.lhs, f.rhs)
        return f if r is None else r
    if isinstance(f, Neq):
        r = decide(f.lhs, f.rhs)
        return f if r is None else nnf(Not(r))
    if isinstance(f, And):
        return conj(*(ground_equalities(a, sig, table) for a in f.args))
    if isinstance(f, Or):
        return disj(*(ground_equalities(a, sig, table) for a in f.args))
    if isinstance(f, Quant):
        return Quant(f.q, f.var, ground_equalities(f.body, sig, table))
    return f


def _is_constant(t, sig: Signature) -> bool:
    if isinstance(t, Param):
        return True
    if isinstance(t, App) and not t.args:
        decl = sig.symbols.get(t.fn)
        # generated slot constants are not declared
        return decl is None or decl.kind == "parameter"
    return False


def ground_unfold(
    phi: Formula,
    assignment: dict,
    rules: RewriteSystem,
    sig: Signature,
    table: DeltaTable = FREE,
) -> Formula:
    """Substitute the grounding and evaluate every defined atom."""
    missing = [p for p in params_of(phi) if sig.is_inductive(p.sort) and p not in assignment]
    if missing:
        raise OracleError("grounding does not cover " + ", ".join(sorted(p.name for p in missing)))
    g = map_terms(phi, lambda t: assignment.get(t) if isinstance(t, Param) else None)
    g = rules.eliminate_defined(g)
    return ground_equalities(g, sig, table)


def _has_defined(f: Formula) -> bool:
    if isinstance(f, Defined):
        return True
    if isinstance(f, (And, Or)):
        return any(_has_defined(a) for a in f.args)
    if isinstance(f, Quant):
        return _has_defined(f.body)
    return False


def groundings(sig: Signature, params: list, max_depth: int) -> Iterator[dict]:
    """Assignments ordered by total depth, then by term indices."""
    pools = [enumerate_constructor_terms(sig, p.sort, max_depth, owner=p.name) for p in params]
    depths = [[term_depth(t, sig) for t in pool] for pool in pools]
    if not params:
        yield {}
        return
    by_total: dict = {}
    for idx in itertools.product(*(range(len(pool)) for pool in pools)):
        total = sum(depths[i][j] for i, j in enumerate(idx))
        by_total.setdefault(total, []).append(idx)
    for total in sorted(by_total):
        for idx in by_total[total]:
            yield {p: pools[i][j] for i, (p, j) in enumerate(zip(params, idx))}


def count_groundings(sig: Signature, params: list, max_depth: int) -> int:
    n = 1
    for p in params:
        n *= len(enumerate_constructor_terms(sig, p.sort, max_depth, owner=p.name))
    return n


def oracle_check(
    phi: Formula,
    sig: Signature,
    rules: RewriteSystem,
    max_depth: int,
    table: DeltaTable = FREE,
    backend: Callable = solve_base,
    budget: int = DEFAULT_BUDGET,
):
    """First satisfiable grounding up to ``max_depth``, else UnsatUpTo."""
    params = sorted((p for p in params_of(phi) if sig.is_inductive(p.sort)), key=lambda p: p.key)
    total = count_groundings(sig, params, max_depth)
    if total > budget:
        raise BudgetExceeded(0)
    tried = 0
    for g in groundings(sig, params, max_depth):
        tried += 1
        f = ground_unfold(phi, g, rules, sig, table)
        res = backend([f], sig)
        if isinstance(res, BaseSat):
            depth = max((term_depth(t, sig) for t in g.values()), default=0)
            return SatAtDepth(g, depth, tried)
        if not isinstance(res, BaseUnsat):
            raise OracleUnsupported(getattr(res, "reason", str(res)))
    return UnsatUpTo(max_depth, tried)


# ---------------------------------------------------------------------------
# Witnesses from the prover and differential checking


def extract_witness(result, sig: Optional[Signature] = None) -> Optional[dict]:
    """Ground terms for the inductive parameters read off a Sat leaf.

    Parameters are resolved through the leaf's equations; a parameter left
    unconstrained gets the smallest term not used by another parameter.
    Returns None when the equations are cyclic or reference an unknown head.
    """
    from .tableau import Sat

    if not isinstance(result.verdict, Sat):
        return None
    sig = sig or result.context.sig
    leaf = result.tree[result.verdict.leaf]
    eqs: dict = {}
    for f in leaf.label:
        if isinstance(f, Eq) and isinstance(f.lhs, Param) and f.lhs not in eqs:
            eqs[f.lhs] = f.rhs
    N = result.tree.N
    values: dict = {}
    used: set = set()
    resolving: set = set()

    def value(p: Param):
        if p in values:
            return values[p]
        if not sig.is_inductive(p.sort):
            rhs = eqs.get(p)
            v = value(rhs) if isinstance(rhs, Param) else App(p.name, (), p.sort)
            values[p] = v
            return v
        if p in resolving:
            raise _Cycle()
        resolving.add(p)
        rhs = eqs.get(p)
        if isinstance(rhs, Param):
            v = value(rhs)
        elif isinstance(rhs, App):
            v = App(rhs.fn, tuple(arg(a) for a in rhs.args), rhs.sort)
        else:
            v = None
        resolving.discard(p)
        if v is not None:
            values[p] = v
            used.add(v)
        return v

    def fresh(p: Param):
        for d in range(1, 65):
            pool = [t for t in enumerate_constructor_terms(sig, p.sort, d, owner=p.name) if t not in used]
            if pool:
                values[p] = pool[0]
                used.add(pool[0])
                return pool[0]
        raise _Cycle()

    def arg(a):
        if not isinstance(a, Param):
            return a
        v = value(a)
        # an unconstrained parameter below a constructor still needs a value
        return fresh(a) if v is None else v

    try:
        for p in sorted(eqs, key=lambda p: p.key):
            value(p)
        free = sorted(
            (p for p in params_of(leaf.label) if p != N and sig.is_inductive(p.sort) and value(p) is None),
            key=lambda p: p.key,
        )
        for p in free:
            fresh(p)
    except _Cycle:
        return None
    return {p: v for p, v in values.items() if sig.is_inductive(p.sort)}


class _Cycle(Exception):
    pass


@dataclass
class DiffReport:
    status: str  # CONSISTENT | CONTRADICTION
    prover: str
    oracle: str
    reason: str = ""
    counterexample: Optional[dict] = None
    witness: Optional[dict] = None
    witness_depth: Optional[int] = None

    @property
    def consistent(self) -> bool:
        return self.status == "CONSISTENT"

    def __str__(self):
        line = f"{self.status}: prover {self.prover}, oracle {self.oracle}"
        return line + (f" ({self.reason})" if self.reason else "")


def differential_check(
    phi: Formula,
    sig: Signature,
    rules: RewriteSystem,
    max_depth: int,
    result,
    table: DeltaTable = FREE,
    oracle_result=None,
    backend: Callable = solve_base,
) -> DiffReport:
    """Compare a prover result with the oracle on the two checkable implications."""
    from .tableau import Sat, Unsat

    if oracle_result is None:
        oracle_result = oracle_check(phi, sig, rules, max_depth, table, backend)
    verdict = result.verdict
    pv = type(verdict).__name__
    ov = str(oracle_result)
    if isinstance(verdict, Unsat) and isinstance(oracle_result, SatAtDepth):
        return DiffReport(
            "CONTRADICTION", pv, ov, "prover refuted a formula with a model", oracle_result.assignment
        )
    if isinstance(verdict, Sat):
        w = extract_witness(result, sig)
        if w is None:
            return DiffReport("CONSISTENT", pv, ov, "no ground witness could be read off the leaf")
        relevant = {p: t for p, t in w.items() if p in params_of(phi)}
        for p in params_of(phi):
            if sig.is_inductive(p.sort) and p not in relevant:
                relevant[p] = enumerate_constructor_terms(sig, p.sort, 1, owner=p.name)[0]
        depth = max((term_depth(t, sig) for t in relevant.values()), default=0)
        check = backend([ground_unfold(phi, relevant, rules, sig, table)], sig)
        if not isinstance(check, BaseSat):
            return DiffReport(
                "CONTRADICTION", pv, ov, "witness read off the Sat leaf is not a model",
                witness=relevant, witness_depth=depth,
            )
        if isinstance(oracle_result, UnsatUpTo) and depth <= oracle_result.depth:
            return DiffReport(
                "CONTRADICTION", pv, ov, f"witness of depth {depth} missed by the oracle",
                witness=relevant, witness_depth=depth,
            )
        return DiffReport("CONSISTENT", pv, ov, witness=relevant, witness_depth=depth)
    return DiffReport("CONSISTENT", pv, ov)
