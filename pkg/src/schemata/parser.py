"""S-expression problem files.

Grammar::

    (sort NAME [:inductive])
    (constructor NAME (SORT*) SORT)
    (function NAME (SORT*) SORT)        ; result bool declares a predicate
    (parameter NAME SORT)
    (defined NAME SORT)
    (rule (DEF (CONSTR VAR*)) FORMULA)
    (delta (F G) FORMULA)               ; over x1..xn (F) and y1..ym (G)
    (assert FORMULA)

Formulae: ``true false (and ..) (or ..) (not f) (=> a b) (<=> a b)
(= t s) (/= t s) (forall (x SORT) f) (exists (x SORT) f)`` and applications.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    BOOL,
    FALSE,
    TRUE,
    App,
    Atom,
    Defined,
    Formula,
    Not,
    Param,
    Quant,
    Signature,
    SortError,
    Term,
    Var,
    conj,
    disj,
    mk_eq,
    mk_neq,
    nnf,
)
from .equality import DeltaTable, x_vars, y_vars
from .rewrite import RewriteRule, RewriteSystem


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Sym:
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    col: int


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


def read_sexprs(text: str) -> list:
    stack: list[list] = [[]]
    starts: list[tuple[int, int]] = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        tok = m.group()
        col = m.start() - line_start + 1
        if tok == "(":
            stack.append([])
            starts.append((line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            items = stack.pop()
            l0, c0 = starts.pop()
            stack[-1].append(SList(tuple(items), l0, c0))
        elif tok[0].isspace() or tok[0] == ";":
            pass
        else:
            stack[-1].append(Sym(tok, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = m.start() + tok.rindex("\n") + 1
    if len(stack) != 1:
        l0, c0 = starts[-1]
        raise ParseError("unclosed '('", l0, c0)
    return stack[0]


@dataclass
class Problem:
    signature: Signature
    rules: RewriteSystem
    deltas: DeltaTable
    assertions: list = field(default_factory=list)
    locations: dict = field(default_factory=dict)

    @property
    def conjecture(self) -> Formula:
        return conj(*self.assertions)


RESERVED = {"and", "or", "not", "=>", "<=>", "=", "/=", "true", "false", "forall", "exists", "depth"}


class _Parser:
    def __init__(self):
        self.sig = Signature()
        self.rules = RewriteSystem()
        self.deltas = DeltaTable()
        self.assertions: list[Formula] = []
        self.locations: dict[str, tuple[int, int]] = {}

    # helpers
    def name(self, x, what: str) -> str:
        if not isinstance(x, Sym):
            raise ParseError(f"expected {what}", x.line, x.col)
        return x.text

    def sort(self, x) -> str:
        s = self.name(x, "sort name")
        if s not in self.sig.sorts:
            raise ParseError(f"unknown sort {s}", x.line, x.col)
        return s

    def fresh_name(self, x) -> str:
        n = self.name(x, "identifier")
        if n in RESERVED:
            raise ParseError(f"{n} is reserved", x.line, x.col)
        if n in self.sig.symbols:
            raise ParseError(f"duplicate declaration of {n}", x.line, x.col)
        return n

    def sort_list(self, x) -> tuple:
        if not isinstance(x, SList):
            raise ParseError("expected a sort list", x.line, x.col)
        return tuple(self.sort(s) for s in x.items)

    # declarations
    def declare(self, form: SList) -> None:
        if not form.items or not isinstance(form.items[0], Sym):
            raise ParseError("expected a declaration", form.line, form.col)
        head = form.items[0].text
        args = form.items[1:]
        handler = getattr(self, "decl_" + head, None)
        if handler is None:
            raise ParseError(f"unknown declaration {head}", form.line, form.col)
        handler(form, args)

    def _arity(self, form, args, n, usage):
        if len(args) not in (n if isinstance(n, tuple) else (n,)):
            raise ParseError(f"usage: {usage}", form.line, form.col)

    def decl_sort(self, form, args):
        self._arity(form, args, (1, 2), "(sort NAME [:inductive])")
        n = self.name(args[0], "sort name")
        if n in self.sig.sorts:
            raise ParseError(f"duplicate sort {n}", args[0].line, args[0].col)
        inductive = False
        if len(args) == 2:
            if not (isinstance(args[1], Sym) and args[1].text == ":inductive"):
                raise ParseError("expected :inductive", args[1].line, args[1].col)
            inductive = True
        self.sig.add_sort(n, inductive)
        self.locations[n] = (form.line, form.col)

    def _symbol(self, form, args, kind):
        self._arity(form, args, 3, f"({kind} NAME (SORT*) SORT)")
        n = self.fresh_name(args[0])
        sorts = self.sort_list(args[1])
        res = self.sort(args[2])
        self.sig.add_symbol(n, sorts, res, kind)
        self.locations[n] = (form.line, form.col)

    def decl_constructor(self, form, args):
        self._symbol(form, args, "constructor")

    def decl_function(self, form, args):
        self._symbol(form, args, "function")

    def decl_parameter(self, form, args):
        self._arity(form, args, 2, "(parameter NAME SORT)")
        n = self.fresh_name(args[0])
        self.sig.add_symbol(n, (), self.sort(args[1]), "parameter")
        self.locations[n] = (form.line, form.col)

    def decl_defined(self, form, args):
        self._arity(form, args, 2, "(defined NAME SORT)")
        n = self.fresh_name(args[0])
        self.sig.add_symbol(n, (self.sort(args[1]),), BOOL, "defined")
        self.locations[n] = (form.line, form.col)

    def decl_rule(self, form, args):
        self._arity(form, args, 2, "(rule (DEF (CONSTR VAR*)) FORMULA)")
        lhs = args[0]
        if not (isinstance(lhs, SList) and len(lhs.items) == 2):
            raise ParseError("rule head must be (DEF PATTERN)", lhs.line, lhs.col)
        d = self.name(lhs.items[0], "defined symbol")
        ddecl = self.sig.symbols.get(d)
        if ddecl is None or ddecl.kind != "defined":
            raise ParseError(f"{d} is not a defined symbol", lhs.line, lhs.col)
        pat = lhs.items[1]
        if isinstance(pat, Sym):
            cname, formal_syms = pat.text, ()
        else:
            if not pat.items:
                raise ParseError("empty pattern", pat.line, pat.col)
            cname = self.name(pat.items[0], "constructor")
            formal_syms = pat.items[1:]
        cdecl = self.sig.symbols.get(cname)
        if cdecl is None or cdecl.kind != "constructor":
            raise ParseError(f"{cname} is not a constructor", pat.line, pat.col)
        if cdecl.result != ddecl.arg_sorts[0]:
            raise ParseError(f"constructor {cname} is not of sort {ddecl.arg_sorts[0]}", pat.line, pat.col)
        if len(formal_syms) != cdecl.arity:
            raise ParseError(f"{cname} takes {cdecl.arity} arguments", pat.line, pat.col)
        formals = []
        for s, srt in zip(formal_syms, cdecl.arg_sorts):
            v = self.name(s, "variable")
            if v in self.sig.symbols or v in RESERVED:
                raise ParseError(f"rule variable {v} clashes with a declared symbol", s.line, s.col)
            if any(f.name == v for f in formals):
                raise ParseError(f"rule variable {v} repeated", s.line, s.col)
            formals.append(Var(v, srt))
        env = {v.name: v for v in formals}
        body = nnf(self.formula(args[1], env))
        rule = RewriteRule(d, cname, tuple(formals), body, cdecl.result)
        if (d, cname) in self.rules.rules:
            raise ParseError(f"duplicate rule for {d} at {cname}", form.line, form.col)
        self.rules.add(rule)
        self.locations[f"rule {d} {cname}"] = (form.line, form.col)

    def decl_delta(self, form, args):
        self._arity(form, args, 2, "(delta (F G) FORMULA)")
        pair = args[0]
        if not (isinstance(pair, SList) and len(pair.items) == 2):
            raise ParseError("expected (F G)", pair.line, pair.col)
        f, g = (self.name(x, "constructor") for x in pair.items)
        decls = []
        for c in (f, g):
            d = self.sig.symbols.get(c)
            if d is None or d.kind != "constructor":
                raise ParseError(f"{c} is not a constructor", pair.line, pair.col)
            decls.append(d)
        if decls[0].result != decls[1].result:
            raise ParseError("delta pair has constructors of different sorts", pair.line, pair.col)
        env = {v.name: v for v in x_vars(decls[0].arg_sorts) + y_vars(decls[1].arg_sorts)}
        body = nnf(self.formula(args[1], env))
        if (f, g) in self.deltas.entries or (g, f) in self.deltas.entries:
            raise ParseError(f"duplicate delta entry for ({f} {g})", form.line, form.col)
        self.deltas.add(f, g, body)
        self.locations[f"delta {f} {g}"] = (form.line, form.col)

    def decl_assert(self, form, args):
        self._arity(form, args, 1, "(assert FORMULA)")
        self.assertions.append(nnf(self.formula(args[0], {})))
        self.locations[f"assert {len(self.assertions)}"] = (form.line, form.col)

    # terms and formulae
    def term(self, x, env) -> Term:
        if isinstance(x, Sym):
            if x.text in env:
                return env[x.text]
            d = self.sig.symbols.get(x.text)
            if d is None:
                raise ParseError(f"unknown symbol {x.text}", x.line, x.col)
            if d.kind == "parameter":
                return Param(d.name, d.result)
            if d.kind in ("constructor", "function") and d.arity == 0 and d.result != BOOL:
                return App(d.name, (), d.result)
            raise ParseError(f"{x.text} is not a term", x.line, x.col)
        if not x.items:
            raise ParseError("empty term", x.line, x.col)
        head = self.name(x.items[0], "function symbol")
        d = self.sig.symbols.get(head)
        if d is None or d.kind not in ("constructor", "function") or d.result == BOOL:
            raise ParseError(f"{head} is not a function or constructor", x.line, x.col)
        args = [self.term(a, env) for a in x.items[1:]]
        self._check_args(head, d.arg_sorts, args, x)
        return App(head, args, d.result)

    def _check_args(self, head, sorts, args, x):
        if len(args) != len(sorts):
            raise ParseError(f"{head} expects {len(sorts)} arguments, got {len(args)}", x.line, x.col)
        for a, s in zip(args, sorts):
            if a.sort != s:
                raise ParseError(f"argument {a} of {head} has sort {a.sort}, expected {s}", x.line, x.col)

    def formula(self, x, env) -> Formula:
        if isinstance(x, Sym):
            if x.text == "true":
                return TRUE
            if x.text == "false":
                return FALSE
            d = self.sig.symbols.get(x.text)
            if d is not None and d.kind == "function" and d.result == BOOL and d.arity == 0:
                return Atom(d.name, ())
            raise ParseError(f"{x.text} is not a formula", x.line, x.col)
        if not x.items:
            raise ParseError("empty formula", x.line, x.col)
        head = self.name(x.items[0], "connective or predicate")
        rest = x.items[1:]
        if head == "and":
            return conj(*(self.formula(a, env) for a in rest))
        if head == "or":
            return disj(*(self.formula(a, env) for a in rest))
        if head == "not":
            self._n(x, rest, 1)
            return Not(self.formula(rest[0], env))
        if head == "=>":
            self._n(x, rest, 2)
            return disj(Not(self.formula(rest[0], env)), self.formula(rest[1], env))
        if head == "<=>":
            self._n(x, rest, 2)
            a, b = self.formula(rest[0], env), self.formula(rest[1], env)
            return conj(disj(Not(a), b), disj(a, Not(b)))
        if head in ("=", "/="):
            self._n(x, rest, 2)
            s, t = self.term(rest[0], env), self.term(rest[1], env)
            try:
                return mk_eq(s, t) if head == "=" else mk_neq(s, t)
            except SortError as e:
                raise ParseError(str(e), x.line, x.col) from None
        if head in ("forall", "exists"):
            self._n(x, rest, 2)
            b = rest[0]
            if not (isinstance(b, SList) and len(b.items) == 2):
                raise ParseError("binder must be (VAR SORT)", b.line, b.col)
            v = Var(self.name(b.items[0], "variable"), self.sort(b.items[1]))
            if v.name in self.sig.symbols:
                raise ParseError(f"bound variable {v.name} clashes with a declared symbol", b.line, b.col)
            inner = dict(env)
            inner[v.name] = v
            return Quant(head, v, self.formula(rest[1], inner))
        d = self.sig.symbols.get(head)
        if d is None:
            raise ParseError(f"unknown symbol {head}", x.line, x.col)
        if d.kind == "defined":
            self._n(x, rest, 1)
            idx = self.term(rest[0], env)
            self._check_args(head, d.arg_sorts, [idx], x)
            return Defined(head, idx)
        if d.kind == "function" and d.result == BOOL:
            args = [self.term(a, env) for a in rest]
            self._check_args(head, d.arg_sorts, args, x)
            return Atom(head, args)
        raise ParseError(f"{head} is not a predicate or defined symbol", x.line, x.col)

    def _n(self, x, rest, n):
        if len(rest) != n:
            raise ParseError(f"expected {n} argument(s)", x.line, x.col)


def parse_problem(text: str) -> Problem:
    p = _Parser()
    for form in read_sexprs(text):
        if not isinstance(form, SList):
            raise ParseError(f"unexpected atom {form.text}", form.line, form.col)
        p.declare(form)
    return Problem(p.sig, p.rules, p.deltas, p.assertions, p.locations)


def parse_file(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def parse_formula(text: str, sig: Signature, env: Optional[dict] = None) -> Formula:
    """Parse one formula against an existing signature (used by tests and the bridge)."""
    p = _Parser()
    p.sig = sig
    forms = read_sexprs(text)
    if len(forms) != 1:
        raise ParseError("expected exactly one formula")
    return nnf(p.formula(forms[0], dict(env or {})))


def print_problem(problem: Problem) -> str:
    """Canonical text of a problem; parsing it gives back an equal problem."""
    sig = problem.signature
    out = []
    for s in sig.sorts.values():
        if s.name in ("nat", "bool"):
            continue
        out.append(f"(sort {s.name}{' :inductive' if s.inductive else ''})")
    builtin = {"0", "s"}
    for kind in ("constructor", "function"):
        for d in sig.of_kind(kind):
            if d.name in builtin:
                continue
            out.append(f"({kind} {d.name} ({' '.join(d.arg_sorts)}) {d.result})")
    for d in sig.of_kind("parameter"):
        out.append(f"(parameter {d.name} {d.result})")
    for d in sig.of_kind("defined"):
        out.append(f"(defined {d.name} {d.arg_sorts[0]})")
    for r in problem.rules:
        pat = r.constructor if not r.formals else "(" + " ".join([r.constructor] + [v.name for v in r.formals]) + ")"
        out.append(f"(rule ({r.defined} {pat}) {r.body.key})")
    for (f, g), t in problem.deltas.entries.items():
        out.append(f"(delta ({f} {g}) {t.key})")
    for a in problem.assertions:
        out.append(f"(assert {a.key})")
    return "\n".join(out) + "\n"


def print_base_problem(sig: Signature, formulas) -> str:
    """Serialize a leaf's base formulae in problem-file syntax."""
    out = []
    for s in sig.sorts.values():
        if s.name in ("nat", "bool"):
            continue
        out.append(f"(sort {s.name}{' :inductive' if s.inductive else ''})")
    for kind in ("constructor", "function", "parameter"):
        for d in sig.of_kind(kind):
            if d.name in ("0", "s"):
                continue
            if kind == "parameter":
                out.append(f"(parameter {d.name} {d.result})")
            else:
                out.append(f"({kind} {d.name} ({' '.join(d.arg_sorts)}) {d.result})")
    for f in sorted(formulas, key=lambda f: f.key):
        out.append(f"(assert {f.key})")
    return "\n".join(out) + "\n"
