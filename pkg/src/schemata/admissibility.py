"""Static checks run before proving.

Every violation is a triple ``(condition, location, message)``.  Condition
ids:

* signature: ``SIG-nat``, ``SIG-profile``, ``SIG-constructor``,
  ``SIG-closure``, ``SIG-defined``, ``SIG-inhabited``
* rewrite system: ``C1`` free variables, ``C2`` inductive terms in bodies,
  ``C3`` acyclic head recursion, ``C4`` one rule per constructor,
  ``C5`` left-linear patterns, ``A4`` rule bodies stay admissible once
  inductive terms are read as parameters
* conjecture: ``A2`` no constructors or inductive variables, ``A3`` one
  parameter per base subformula, ``A-backend`` shapes the built-in solver
  cannot decide
* equality table: ``D1`` shape, ``D2`` argument coverage
"""

from __future__ import annotations

from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from itertools import product
from typing import Iterator, Mapping, Optional

from .core import (
    BOOL,
    FALSE,
    NAT,
    SUCC,
    TRUE,
    ZERO,
    And,
    App,
    Defined,
    Depth,
    Eq,
    Formula,
    Neq,
    Not,
    Or,
    Param,
    Quant,
    Signature,
    Term,
    Var,
    _Junction,
    iter_subformulas,
    iter_terms,
    subterms,
)
from .equality import DeltaTable, x_vars, y_vars
from .rewrite import RewriteSystem


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> set:
        return {c for c, _, _ in self.violations}

    def __add__(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.violations + other.violations)

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(f"[{c}] {loc}: {msg}" for c, loc, msg in self.violations)


def _where(name: str, locations: Optional[Mapping]) -> str:
    if locations and name in locations:
        line, col = locations[name]
        return f"{name} ({line}:{col})"
    return name


# -- signature --------------------------------------------------------------


def validate_signature(sig: Signature, locations: Optional[Mapping] = None) -> ValidationReport:
    out = []

    def bad(cond, name, msg):
        out.append((cond, _where(name, locations), msg))

    z, s = sig.symbols.get(ZERO), sig.symbols.get(SUCC)
    if not sig.is_inductive(NAT):
        bad("SIG-nat", NAT, "nat must be an inductive sort")
    if z is None or z.kind != "constructor" or z.arg_sorts or z.result != NAT:
        bad("SIG-nat", ZERO, "0 must be a nullary constructor of nat")
    if s is None or s.kind != "constructor" or s.arg_sorts != (NAT,) or s.result != NAT:
        bad("SIG-nat", SUCC, "s must be a constructor nat -> nat")

    for d in sig.symbols.values():
        for srt in d.arg_sorts:
            if srt not in sig.sorts or srt == BOOL:
                bad("SIG-profile", d.name, f"argument sort {srt} is undeclared or bool")
        if d.result not in sig.sorts:
            bad("SIG-profile", d.name, f"result sort {d.result} is undeclared")
        if d.kind == "constructor" and not sig.is_inductive(d.result):
            bad("SIG-constructor", d.name, f"constructor result sort {d.result} is not inductive")
        if d.kind in ("function", "parameter") and sig.is_inductive(d.result) and d.arity > 0:
            bad("SIG-closure", d.name, f"non-constructor symbol of inductive sort {d.result} must be a constant")
        if d.kind == "defined":
            if d.arity != 1 or not sig.is_inductive(d.arg_sorts[0]) or d.result != BOOL:
                bad("SIG-defined", d.name, "defined symbols take one argument of an inductive sort")

    inhabited: set = set()
    changed = True
    while changed:
        changed = False
        for c in sig.of_kind("constructor"):
            if c.result not in inhabited and all(
                not sig.is_inductive(a) or a in inhabited for a in c.arg_sorts
            ):
                inhabited.add(c.result)
                changed = True
    for srt, decl in sig.sorts.items():
        if decl.inductive and srt not in inhabited:
            bad("SIG-inhabited", srt, f"inductive sort {srt} has no ground constructor term")
    return ValidationReport(tuple(out))


# -- rewrite system -----------------------------------------------------------


def free_vars(f: Formula) -> set:
    """Variables of ``f`` not bound by a quantifier."""
    if isinstance(f, Quant):
        return free_vars(f.body) - {f.var}
    if isinstance(f, (_Junction, Not)):
        args = f.args if isinstance(f, _Junction) else (f.arg,)
        return set().union(*(free_vars(a) for a in args)) if args else set()
    return {t for top in iter_terms(f) for t in subterms(top) if isinstance(t, Var)}


def _terms(f: Formula) -> Iterator[Term]:
    for top in iter_terms(f):
        yield from subterms(top)


def _roots(t: Term, pattern: Term, formals: frozenset) -> set:
    """Terms that become parameters once a rule is unfolded."""
    if t == pattern or (isinstance(t, Var) and t in formals) or isinstance(t, Param):
        return {t}
    if isinstance(t, App):
        return set().union(*(_roots(a, pattern, formals) for a in t.args)) if t.args else set()
    return set()


def _defined_free(f: Formula) -> bool:
    return not any(isinstance(g, Defined) for g in iter_subformulas(f))


def _one_param(f: Formula, roots) -> Iterator[str]:
    """Messages for base subformulas with a defined symbol or several parameters."""
    if isinstance(f, _Junction):
        for a in f.args:
            yield from _one_param(a, roots)
        return
    if isinstance(f, Defined):
        return
    if not _defined_free(f):
        yield f"{f.key} has a defined symbol below a non-junction"
        return
    rs = set()
    for top in iter_terms(f):
        rs |= roots(top)
    if len(rs) > 1:
        yield f"{f.key} mentions {len(rs)} distinct parameters"


def validate_rewrite_system(
    system: RewriteSystem, sig: Signature, locations: Optional[Mapping] = None
) -> ValidationReport:
    out = []

    def bad(cond, rule, msg):
        out.append((cond, _where(f"rule {rule.defined} {rule.constructor}", locations), msg))

    graph: dict[str, set] = {d.name: set() for d in sig.of_kind("defined")}
    for r in system:
        formals = frozenset(r.formals)
        pat = r.pattern
        if len({v.name for v in r.formals}) != len(r.formals):
            bad("C5", r, "pattern variables must be distinct")
        extra = free_vars(r.body) - formals
        if extra:
            bad("C1", r, "free variables outside the pattern: " + ", ".join(sorted(v.name for v in extra)))
        for t in _terms(r.body):
            if sig.is_inductive(t.sort) and t != pat and t not in formals:
                bad("C2", r, f"inductive term {t.key} is neither a pattern variable nor the pattern")
        for g in iter_subformulas(r.body):
            if isinstance(g, Defined) and g.index == pat:
                graph.setdefault(r.defined, set()).add(g.sym)
        for msg in _one_param(r.body, lambda t: _roots(t, pat, formals)):
            bad("A4", r, msg)

    try:
        tuple(TopologicalSorter(graph).static_order())
    except CycleError as e:
        cyc = e.args[1]
        out.append(("C3", "rules", "head recursion cycle: " + " -> ".join(cyc)))

    for d in sig.of_kind("defined"):
        if d.arity != 1:
            continue
        for c in sig.constructors(d.arg_sorts[0]):
            if (d.name, c.name) not in system.rules:
                out.append(("C4", _where(d.name, locations), f"no rule for {d.name} at constructor {c.name}"))
    for r in system:
        decl = sig.symbols.get(r.defined)
        if decl is None or decl.kind != "defined":
            bad("C4", r, f"{r.defined} is not a declared defined symbol")
        elif sig.symbols.get(r.constructor) is None or sig.symbols[r.constructor].result != decl.arg_sorts[0]:
            bad("C4", r, f"{r.constructor} is not a constructor of {decl.arg_sorts[0]}")
    return ValidationReport(tuple(out))


# -- conjecture ---------------------------------------------------------------

ENCODING_HINT = (
    "move ground-case atoms into a rule body, e.g. replace p(0) in the conjecture "
    "by a defined symbol g with g_0 -> p(0)"
)


def validate_conjecture(
    phi: Formula, sig: Signature, backend: str = "builtin", location: str = "assert"
) -> ValidationReport:
    out = []
    seen = set()

    def bad(cond, msg):
        if (cond, msg) not in seen:
            seen.add((cond, msg))
            out.append((cond, location, msg))

    for g in iter_subformulas(phi):
        if isinstance(g, Quant) and sig.is_inductive(g.var.sort):
            bad("A2", f"variable {g.var.name} ranges over inductive sort {g.var.sort}")
        if isinstance(g, Depth):
            bad("A2", f"depth atom {g.key} is internal to the prover")
    for t in _terms(phi):
        if isinstance(t, App):
            d = sig.symbols.get(t.fn)
            if d is not None and d.kind == "constructor":
                where = "" if t.fn == t.key else f" (in {t.key})"
                bad("A2", f"constructor {t.fn} occurs in the conjecture{where}; {ENCODING_HINT}")
        elif isinstance(t, Var) and sig.is_inductive(t.sort):
            bad("A2", f"variable {t.name} of inductive sort {t.sort}")

    for msg in _one_param(phi, lambda t: {p for p in subterms(t) if isinstance(p, Param)}):
        bad("A3", msg)

    if backend == "builtin":
        for g in iter_subformulas(phi):
            if isinstance(g, Quant):
                bad("A-backend", "the built-in solver does not handle quantifiers")
            elif isinstance(g, (Eq, Neq)) and not (isinstance(g.lhs, Param) and isinstance(g.rhs, Param)):
                bad("A-backend", f"{g.key}: equations must relate two parameters")
    return ValidationReport(tuple(out))


# -- equality table -------------------------------------------------------------


def _dnf(f: Formula) -> list:
    """Disjuncts as lists of literals; ``[]`` for false, ``[[]]`` for true."""
    if f == TRUE:
        return [[]]
    if f == FALSE:
        return []
    if isinstance(f, Or):
        return [c for a in f.args for c in _dnf(a)]
    if isinstance(f, And):
        return [sum(cs, []) for cs in product(*(_dnf(a) for a in f.args))]
    return [[f]]


def validate_delta_table(table: DeltaTable, sig: Signature, locations: Optional[Mapping] = None) -> ValidationReport:
    out = []
    for (f, g), body in table.entries.items():
        where = _where(f"delta {f} {g}", locations)
        fd, gd = sig.symbols.get(f), sig.symbols.get(g)
        if fd is None or gd is None or fd.kind != "constructor" or gd.kind != "constructor":
            out.append(("D1", where, f"({f} {g}) is not a pair of constructors"))
            continue
        xs, ys = set(x_vars(fd.arg_sorts)), set(y_vars(gd.arg_sorts))
        shape_ok = True
        for h in iter_subformulas(body):
            if isinstance(h, (And, Or)) or h == TRUE or h == FALSE:
                continue
            if isinstance(h, Eq) and {h.lhs, h.rhs} <= xs | ys:
                continue
            out.append(("D1", where, f"{h.key} is not built from conjunction, disjunction and equations over x/y"))
            shape_ok = False
        if not shape_ok:
            continue
        for disjunct in _dnf(body):
            pairs = [(e.lhs, e.rhs) for e in disjunct]
            linked = {a for a, b in pairs if (a in xs) != (b in xs)} | {b for a, b in pairs if (a in xs) != (b in xs)}
            missing = sorted(v.name for v in (xs | ys) - linked)
            if missing:
                conj_key = " & ".join(e.key for e in disjunct) or "true"
                out.append(("D2", where, f"disjunct {conj_key} leaves {', '.join(missing)} unlinked"))
    return ValidationReport(tuple(out))


# -- whole problems ------------------------------------------------------------


def validate_problem(problem, backend: str = "builtin") -> ValidationReport:
    """All checks for a parsed problem, signature first."""
    locs = problem.locations
    report = validate_signature(problem.signature, locs)
    report += validate_rewrite_system(problem.rules, problem.signature, locs)
    report += validate_delta_table(problem.deltas, problem.signature, locs)
    for i, a in enumerate(problem.assertions, 1):
        report += validate_conjecture(a, problem.signature, backend, _where(f"assert {i}", locs))
    return report
