"""Base-formula satisfiability: propositional abstraction plus DPLL.

Distinct parameters denote distinct values, so syntactically distinct
ground atoms are independent propositions and disequations between
distinct parameter names are simply true.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .core import (
    FALSE,
    TRUE,
    And,
    Atom,
    Defined,
    Depth,
    Eq,
    Formula,
    Neq,
    Or,
    Param,
    Quant,
)


@dataclass(frozen=True)
class BaseSat:
    assignment: dict = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class BaseUnsat:
    pass


@dataclass(frozen=True)
class Unsupported:
    reason: str


SolverResult = Union[BaseSat, BaseUnsat, Unsupported]


# ---------------------------------------------------------------------------
# DPLL


def dpll(clauses: Iterable[Sequence[int]], num_vars: Optional[int] = None) -> Optional[dict]:
    """Decide a CNF given as lists of non-zero ints (DIMACS style).

    Returns a model ``{var: bool}`` covering every variable that occurs, or
    None.  Branches on the lowest unassigned variable, true first.
    """
    cls = []
    seen_vars: set[int] = set()
    for c in clauses:
        lits = set(c)
        if any(-l in lits for l in lits):
            seen_vars.update(abs(l) for l in lits)
            continue
        cls.append(tuple(sorted(lits, key=lambda l: (abs(l), l))))
        seen_vars.update(abs(l) for l in lits)
    if any(len(c) == 0 for c in cls):
        return None
    n = max(seen_vars, default=0)
    if num_vars is not None:
        n = max(n, num_vars)
    value = [0] * (n + 1)  # 0 unassigned, 1 true, -1 false
    occurs: list[list[int]] = [[] for _ in range(n + 1)]
    for i, c in enumerate(cls):
        for l in c:
            occurs[abs(l)].append(i)
    trail: list[int] = []

    def lit_val(l: int) -> int:
        v = value[abs(l)]
        return v if l > 0 else -v

    def assign(l: int) -> None:
        value[abs(l)] = 1 if l > 0 else -1
        trail.append(abs(l))

    def propagate(start: int) -> bool:
        """Unit propagation from trail[start:]; False on conflict."""
        if start < 0:
            check = set(range(len(cls)))
        else:
            check = set()
            for v in trail[start:]:
                check.update(occurs[v])
        while check:
            i = check.pop()
            c = cls[i]
            unassigned = None
            count = 0
            sat = False
            for l in c:
                lv = lit_val(l)
                if lv == 1:
                    sat = True
                    break
                if lv == 0:
                    count += 1
                    unassigned = l
                    if count > 1:
                        break
            if sat or count > 1:
                continue
            if count == 0:
                return False
            assign(unassigned)
            check.update(occurs[abs(unassigned)])
        return True

    def undo(mark: int) -> None:
        for u in trail[mark:]:
            value[u] = 0
        del trail[mark:]

    if not propagate(-1):
        return None
    stack: list[tuple[int, int, bool]] = []  # (decision var, trail mark, flipped)
    while True:
        var = next((v for v in range(1, n + 1) if value[v] == 0), None)
        if var is None:
            return {v: value[v] == 1 for v in sorted(seen_vars)}
        mark = len(trail)
        stack.append((var, mark, False))
        assign(var)
        while not propagate(mark):
            while stack and stack[-1][2]:
                undo(stack.pop()[1])
            if not stack:
                return None
            v, mark, _ = stack.pop()
            undo(mark)
            stack.append((v, mark, True))
            assign(-v)


# ---------------------------------------------------------------------------
# Abstraction


class _Unsupported(Exception):
    pass


class Abstraction:
    """Maps atom keys to propositional variables and formulae to clauses."""

    def __init__(self):
        self.var_of: dict[str, int] = {}
        self.clauses: list[list[int]] = []
        self.next_var = 1
        self._aux: dict[str, int] = {}

    def atom_var(self, key: str) -> int:
        v = self.var_of.get(key)
        if v is None:
            v = self.next_var
            self.next_var += 1
            self.var_of[key] = v
        return v

    def fresh(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v

    def literal(self, f: Formula):
        """Literal for ``f``, True/False for constants; adds definitional clauses."""
        if f is TRUE or f == TRUE:
            return True
        if f is FALSE or f == FALSE:
            return False
        if isinstance(f, Atom):
            v = self.atom_var(Atom(f.pred, f.args).key)
            return v if f.positive else -v
        if isinstance(f, Neq):
            if isinstance(f.lhs, Param) and isinstance(f.rhs, Param):
                return f.lhs != f.rhs
            raise _Unsupported(f"disequation between non-parameters: {f}")
        if isinstance(f, (And, Or)):
            cached = self._aux.get(f.key)
            if cached is not None:
                return cached
            kids = [self.literal(a) for a in f.args]
            if isinstance(f, And):
                if any(k is False for k in kids):
                    res = False
                else:
                    kids = [k for k in kids if k is not True]
                    if not kids:
                        res = True
                    else:
                        res = self.fresh()
                        for k in kids:  # res -> k
                            self.clauses.append([-res, k])
            else:
                if any(k is True for k in kids):
                    res = True
                else:
                    kids = [k for k in kids if k is not False]
                    if not kids:
                        res = False
                    else:
                        res = self.fresh()
                        self.clauses.append([-res] + kids)
            self._aux[f.key] = res
            return res
        if isinstance(f, Eq):
            raise _Unsupported(f"equation atom: {f}")
        if isinstance(f, Quant):
            raise _Unsupported(f"quantified formula: {f}")
        if isinstance(f, (Defined, Depth)):
            raise _Unsupported(f"not a base formula: {f}")
        raise _Unsupported(f"unsupported formula: {f}")

    def assert_formula(self, f: Formula) -> bool:
        """Add ``f`` as a top-level fact; False if trivially inconsistent."""
        lit = self.literal(f)
        if lit is True:
            return True
        if lit is False:
            return False
        self.clauses.append([lit])
        return True


def clausify(formulas: Iterable[Formula]):
    """CNF of a set of NNF base formulae: (clauses, atom->var) or None if trivially false."""
    ab = Abstraction()
    for f in sorted(formulas, key=lambda f: f.key):
        if not ab.assert_formula(f):
            return None, ab
    return ab.clauses, ab


def solve_base(formulas: Iterable[Formula], sig=None):
    """Decide a set of base formulae under distinct-parameter semantics."""
    try:
        clauses, ab = clausify(formulas)
    except _Unsupported as e:
        return Unsupported(str(e))
    if clauses is None:
        return BaseUnsat()
    model = dpll(clauses, ab.next_var - 1)
    if model is None:
        return BaseUnsat()
    return BaseSat({k: model.get(v, False) for k, v in sorted(ab.var_of.items())})


builtin_backend = solve_base


class BridgeBackend:
    """External prover reached through a subprocess.

    The leaf's base formulae are written in problem-file syntax to the
    command's stdin; the first non-empty output line must be ``sat``,
    ``unsat`` or ``unknown``.
    """

    def __init__(self, command: str, timeout: float = 60.0):
        self.command = command
        self.timeout = timeout

    def __call__(self, formulas, sig=None):
        from .parser import print_base_problem

        text = print_base_problem(sig, formulas) if sig is not None else "".join(
            f"(assert {f.key})\n" for f in sorted(formulas, key=lambda f: f.key)
        )
        try:
            proc = subprocess.run(
                shlex.split(self.command),
                input=text,
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as e:
            return Unsupported(f"bridge failed: {e}")
        for line in proc.stdout.splitlines():
            word = line.strip().lower()
            if not word:
                continue
            if word == "sat":
                return BaseSat({})
            if word == "unsat":
                return BaseUnsat()
            return Unsupported(f"bridge answered {word!r}")
        return Unsupported("bridge produced no answer")
