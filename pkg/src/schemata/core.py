"""Sorted terms, NNF formulae, parameters and renamings.

Every term and formula carries a canonical printed key (an S-expression)
computed once at construction.  Equality and hashing go through that key, so
labels can be plain ``frozenset`` objects and set membership is syntactic.
Conjunctions and disjunctions are flattened, deduplicated and sorted by key.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

NAT = "nat"
BOOL = "bool"
ZERO = "0"
SUCC = "s"


class SortError(ValueError):
    """Raised when a term or formula operation is not well-sorted."""


# ---------------------------------------------------------------------------
# Signature


@dataclass(frozen=True)
class SortDecl:
    name: str
    inductive: bool = False


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    arg_sorts: tuple
    result: str
    kind: str  # constructor | function | parameter | defined

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


class Signature:
    """Sorts and symbols of a problem.

    ``nat`` with constructors ``0`` and ``s`` and the ``bool`` sort for
    predicates are always present.
    """

    def __init__(self):
        self.sorts: dict[str, SortDecl] = {}
        self.symbols: dict[str, SymbolDecl] = {}
        self._ctors: dict[str, list] = {}
        self.add_sort(NAT, inductive=True)
        self.add_sort(BOOL)
        self.add_symbol(ZERO, (), NAT, "constructor")
        self.add_symbol(SUCC, (NAT,), NAT, "constructor")

    def add_sort(self, name: str, inductive: bool = False) -> SortDecl:
        decl = SortDecl(name, inductive)
        self.sorts[name] = decl
        return decl

    def add_symbol(self, name, arg_sorts, result, kind) -> SymbolDecl:
        decl = SymbolDecl(name, tuple(arg_sorts), result, kind)
        self.symbols[name] = decl
        self._ctors.clear()
        return decl

    def is_inductive(self, sort: str) -> bool:
        decl = self.sorts.get(sort)
        return decl is not None and decl.inductive

    def constructors(self, sort: str) -> list[SymbolDecl]:
        got = self._ctors.get(sort)
        if got is None:
            got = [s for s in self.symbols.values() if s.kind == "constructor" and s.result == sort]
            self._ctors[sort] = got
        return list(got)

    def of_kind(self, kind: str) -> list[SymbolDecl]:
        return [s for s in self.symbols.values() if s.kind == kind]

    def parameters(self) -> list["Param"]:
        return [Param(s.name, s.result) for s in self.of_kind("parameter")]

    @property
    def max_arity(self) -> int:
        return max((s.arity for s in self.symbols.values() if s.kind in ("constructor", "function")), default=0)

    def copy(self) -> "Signature":
        other = Signature.__new__(Signature)
        other.sorts = dict(self.sorts)
        other.symbols = dict(self.symbols)
        other._ctors = {}
        return other


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ("key", "sort")

    def __eq__(self, other):
        return isinstance(other, Term) and type(self) is type(other) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    def __str__(self):
        return self.key

    def __repr__(self):
        return f"{type(self).__name__}({self.key!r})"


class Var(Term):
    """A bound or rule-formal variable."""

    __slots__ = ("name",)

    def __init__(self, name: str, sort: str):
        self.name = name
        self.sort = sort
        self.key = name


class Param(Term):
    """A parameter: an unknown constant, possibly of inductive sort."""

    __slots__ = ("name",)

    def __init__(self, name: str, sort: str):
        self.name = name
        self.sort = sort
        self.key = name


class App(Term):
    __slots__ = ("fn", "args")

    def __init__(self, fn: str, args: Iterable[Term], sort: str):
        self.fn = fn
        self.args = tuple(args)
        self.sort = sort
        self.key = fn if not self.args else "(" + fn + " " + " ".join(a.key for a in self.args) + ")"


def zero() -> App:
    return App(ZERO, (), NAT)


def succ(t: Term) -> App:
    return App(SUCC, (t,), NAT)


def term_depth(t: Term, sig: Signature) -> int:
    """Depth of a constructor term; constants count 1, non-inductive slots 0."""
    if not sig.is_inductive(t.sort):
        return 0
    if isinstance(t, App):
        return 1 + max((term_depth(a, sig) for a in t.args), default=0)
    return 1


def is_ground(t: Term) -> bool:
    if isinstance(t, (Var, Param)):
        return False
    return all(is_ground(a) for a in t.args)


# ---------------------------------------------------------------------------
# Formulae


class Formula:
    __slots__ = ("key",)

    def __eq__(self, other):
        return isinstance(other, Formula) and type(self) is type(other) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    def __str__(self):
        return self.key

    def __repr__(self):
        return f"<{self.key}>"


class _Const(Formula):
    __slots__ = ()

    def __init__(self, key):
        self.key = key


TRUE = _Const("true")
FALSE = _Const("false")


class Atom(Formula):
    """Base literal: predicate application, possibly negated."""

    __slots__ = ("pred", "args", "positive")

    def __init__(self, pred: str, args: Iterable[Term], positive: bool = True):
        self.pred = pred
        self.args = tuple(args)
        self.positive = positive
        inner = "(" + pred + "".join(" " + a.key for a in self.args) + ")" if self.args else pred
        self.key = inner if positive else "(not " + inner + ")"


class Eq(Formula):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs: Term, rhs: Term):
        self.lhs = lhs
        self.rhs = rhs
        self.key = "(= " + lhs.key + " " + rhs.key + ")"


class Neq(Formula):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs: Term, rhs: Term):
        self.lhs = lhs
        self.rhs = rhs
        self.key = "(/= " + lhs.key + " " + rhs.key + ")"


class Defined(Formula):
    __slots__ = ("sym", "index", "positive")

    def __init__(self, sym: str, index: Term, positive: bool = True):
        self.sym = sym
        self.index = index
        self.positive = positive
        inner = "(" + sym + " " + index.key + ")"
        self.key = inner if positive else "(not " + inner + ")"


DEPTH_RELS = ("=", "<", "<=")


class Depth(Formula):
    """``depth(param) rel rhs`` with rel one of ``=``, ``<``, ``<=``."""

    __slots__ = ("param", "rel", "rhs")

    def __init__(self, param: Param, rel: str, rhs: Term):
        if rel not in DEPTH_RELS:
            raise ValueError(f"bad depth relation {rel!r}")
        self.param = param
        self.rel = rel
        self.rhs = rhs
        self.key = "(" + rel + " (depth " + param.key + ") " + rhs.key + ")"


class _Junction(Formula):
    __slots__ = ("args",)
    op = ""

    def __init__(self, args: tuple):
        self.args = args
        self.key = "(" + self.op + "".join(" " + a.key for a in args) + ")"


class And(_Junction):
    __slots__ = ()
    op = "and"


class Or(_Junction):
    __slots__ = ()
    op = "or"


class Quant(Formula):
    __slots__ = ("q", "var", "body")

    def __init__(self, q: str, var: Var, body: Formula):
        self.q = q
        self.var = var
        self.body = body
        self.key = f"({q} ({var.name} {var.sort}) {body.key})"


class Not(Formula):
    """Negation of a compound formula; only present before :func:`nnf`."""

    __slots__ = ("arg",)

    def __init__(self, arg: Formula):
        self.arg = arg
        self.key = "(not " + arg.key + ")"


LITERALS = (Atom, Eq, Neq, Defined)


def _junction(cls, absorbing, unit, items):
    flat = set()
    for f in items:
        if f is unit or f == unit:
            continue
        if f == absorbing:
            return absorbing
        if type(f) is cls:
            flat.update(f.args)
        else:
            flat.add(f)
    if not flat:
        return unit
    if len(flat) == 1:
        return next(iter(flat))
    return cls(tuple(sorted(flat, key=lambda f: f.key)))


def conj(*items: Formula) -> Formula:
    return _junction(And, FALSE, TRUE, items)


def disj(*items: Formula) -> Formula:
    return _junction(Or, TRUE, FALSE, items)


def mk_eq(lhs: Term, rhs: Term) -> Formula:
    if lhs.sort != rhs.sort:
        raise SortError(f"equation between sorts {lhs.sort} and {rhs.sort}")
    if lhs == rhs:
        return TRUE
    return Eq(lhs, rhs)


def mk_neq(lhs: Term, rhs: Term) -> Formula:
    if lhs.sort != rhs.sort:
        raise SortError(f"disequation between sorts {lhs.sort} and {rhs.sort}")
    if lhs == rhs:
        return FALSE
    return Neq(lhs, rhs)


def negate(f: Formula) -> Formula:
    """Negation of a literal, or NNF negation of anything else."""
    if isinstance(f, Atom):
        return Atom(f.pred, f.args, not f.positive)
    if isinstance(f, Defined):
        return Defined(f.sym, f.index, not f.positive)
    if isinstance(f, Eq):
        return mk_neq(f.lhs, f.rhs)
    if isinstance(f, Neq):
        return mk_eq(f.lhs, f.rhs)
    if f is TRUE:
        return FALSE
    if f is FALSE:
        return TRUE
    return nnf(Not(f))


def nnf(f: Formula) -> Formula:
    """Push negations down to atoms."""
    if isinstance(f, Not):
        g = f.arg
        if isinstance(g, Not):
            return nnf(g.arg)
        if isinstance(g, And):
            return disj(*(nnf(Not(a)) for a in g.args))
        if isinstance(g, Or):
            return conj(*(nnf(Not(a)) for a in g.args))
        if isinstance(g, Quant):
            return Quant("exists" if g.q == "forall" else "forall", g.var, nnf(Not(g.body)))
        if isinstance(g, Depth):
            raise ValueError(f"depth atoms cannot be negated: {g}")
        return negate(g)
    if isinstance(f, And):
        return conj(*(nnf(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(nnf(a) for a in f.args))
    if isinstance(f, Quant):
        return Quant(f.q, f.var, nnf(f.body))
    return f


def is_nnf(f: Formula) -> bool:
    if isinstance(f, Not):
        return False
    if isinstance(f, _Junction):
        return all(is_nnf(a) for a in f.args)
    if isinstance(f, Quant):
        return is_nnf(f.body)
    return True


# ---------------------------------------------------------------------------
# Traversal


TermMap = Callable[[Term], Optional[Term]]


def map_term(t: Term, fn: TermMap) -> Term:
    """Rewrite ``t`` outermost-first; ``fn`` returns a replacement or None."""
    r = fn(t)
    if r is not None:
        return r
    if isinstance(t, App) and t.args:
        args = tuple(map_term(a, fn) for a in t.args)
        if any(a is not b for a, b in zip(args, t.args)):
            return App(t.fn, args, t.sort)
    return t


def map_terms(f: Formula, fn: TermMap) -> Formula:
    """Apply a term rewriting function to every term in ``f``, re-canonicalizing."""
    if isinstance(f, Atom):
        return Atom(f.pred, (map_term(a, fn) for a in f.args), f.positive)
    if isinstance(f, Eq):
        return mk_eq(map_term(f.lhs, fn), map_term(f.rhs, fn))
    if isinstance(f, Neq):
        return mk_neq(map_term(f.lhs, fn), map_term(f.rhs, fn))
    if isinstance(f, Defined):
        return Defined(f.sym, map_term(f.index, fn), f.positive)
    if isinstance(f, Depth):
        p = map_term(f.param, fn)
        if not isinstance(p, Param):
            raise SortError(f"depth atom over non-parameter {p}")
        return Depth(p, f.rel, map_term(f.rhs, fn))
    if isinstance(f, And):
        return conj(*(map_terms(a, fn) for a in f.args))
    if isinstance(f, Or):
        return disj(*(map_terms(a, fn) for a in f.args))
    if isinstance(f, Quant):
        return Quant(f.q, f.var, map_terms(f.body, fn))
    if isinstance(f, Not):
        return Not(map_terms(f.arg, fn))
    return f


def iter_terms(f: Formula) -> Iterator[Term]:
    """Top-level terms of ``f`` (not their subterms)."""
    if isinstance(f, Atom):
        yield from f.args
    elif isinstance(f, (Eq, Neq)):
        yield f.lhs
        yield f.rhs
    elif isinstance(f, Defined):
        yield f.index
    elif isinstance(f, Depth):
        yield f.param
        yield f.rhs
    elif isinstance(f, _Junction):
        for a in f.args:
            yield from iter_terms(a)
    elif isinstance(f, Quant):
        yield from iter_terms(f.body)
    elif isinstance(f, Not):
        yield from iter_terms(f.arg)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, _Junction):
        for a in f.args:
            yield from iter_subformulas(a)
    elif isinstance(f, Quant):
        yield from iter_subformulas(f.body)
    elif isinstance(f, Not):
        yield from iter_subformulas(f.arg)


def replace_term(f: Formula, pattern: Term, replacement: Term) -> Formula:
    """Replace every occurrence of ``pattern`` by ``replacement``."""
    if pattern.sort != replacement.sort:
        raise SortError(f"cannot replace {pattern}:{pattern.sort} by {replacement}:{replacement.sort}")
    return map_terms(f, lambda t: replacement if t == pattern else None)


Label = frozenset


def substitute_param(x, old: Param, new: Term):
    """Replace parameter ``old`` by ``new`` in a formula or a label."""
    if old.sort != new.sort:
        raise SortError(f"cannot substitute {new}:{new.sort} for {old}:{old.sort}")
    if isinstance(x, (set, frozenset)):
        return frozenset(substitute_param(f, old, new) for f in x)
    return replace_term(x, old, new)


def params_of(x) -> set:
    """Parameters occurring syntactically in a formula, term or label."""
    out = set()
    if isinstance(x, Term):
        items = [x]
    elif isinstance(x, Formula):
        items = iter_terms(x)
    else:
        items = (t for f in x for t in iter_terms(f))
    for t in items:
        for s in subterms(t):
            if isinstance(s, Param):
                out.add(s)
    return out


class Renaming:
    """Sort-preserving map from parameters to parameters.

    Parameters absent from the mapping are fixed, so the depth parameter is
    always mapped to itself unless the caller says otherwise (which is
    rejected).
    """

    def __init__(self, mapping: Mapping[Param, Param] | None = None, fixed: Param | None = None):
        self.mapping = dict(mapping or {})
        for a, b in self.mapping.items():
            if a.sort != b.sort:
                raise SortError(f"renaming {a} to {b} changes sort")
        if fixed is not None and self.mapping.get(fixed, fixed) != fixed:
            raise SortError(f"renaming must fix {fixed}")

    def __call__(self, p: Param) -> Param:
        return self.mapping.get(p, p)

    def compose(self, first: "Renaming") -> "Renaming":
        """``self ∘ first``: apply ``first`` then ``self``."""
        keys = set(first.mapping) | set(self.mapping)
        return Renaming({k: self(first(k)) for k in keys})

    def __eq__(self, other):
        if not isinstance(other, Renaming):
            return NotImplemented
        keys = set(self.mapping) | set(other.mapping)
        return all(self(k) == other(k) for k in keys)

    def __repr__(self):
        inner = ", ".join(f"{a}->{b}" for a, b in sorted(self.mapping.items()) if a != b)
        return f"Renaming({inner})"


def apply_renaming(rho: Renaming | Mapping, x):
    if not isinstance(rho, Renaming):
        rho = Renaming(rho)
    fn = lambda t: rho(t) if isinstance(t, Param) else None
    if isinstance(x, Formula):
        return map_terms(x, fn)
    return frozenset(map_terms(f, fn) for f in x)


def expand_max(params: Iterable[Param], rhs: Term) -> Formula:
    """``max({depth(A) | A in params}) = rhs`` as a conjunction of depth atoms."""
    ps = sorted(set(params), key=lambda p: p.key)
    if not ps:
        return mk_eq(zero(), rhs)
    return conj(
        conj(*(Depth(p, "<=", rhs) for p in ps)),
        disj(*(Depth(p, "=", rhs) for p in ps)),
    )


def noneq(label) -> frozenset:
    """The label without its equations; disequations stay."""
    return frozenset(f for f in label if not isinstance(f, Eq))


def format_label(label) -> str:
    return "{" + ", ".join(sorted(f.key for f in label)) + "}"


FormulaOrLabel = Union[Formula, frozenset]
