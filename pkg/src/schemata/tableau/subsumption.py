"""Subsumption of formula sets up to a renaming of parameters.

``find_renaming(psi, phi, fixed)`` looks for a sort-preserving map rho on
the parameters of ``psi`` with ``rho(psi) ⊆ phi``.  The fixed parameter
(the depth bound) maps to itself and is never the image of another one.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterator, Optional

from ..core import (
    App,
    Atom,
    Defined,
    Depth,
    Eq,
    Formula,
    Neq,
    Param,
    Quant,
    Renaming,
    Term,
    Var,
    _Junction,
    map_terms,
    params_of,
)


def skeleton(f: Formula, fixed: Optional[Param]) -> str:
    """Key of ``f`` with every parameter except ``fixed`` replaced by its sort."""

    def blank(t: Term):
        if isinstance(t, Param) and t != fixed:
            return Param("?" + t.sort, t.sort)
        return None

    return map_terms(f, blank).key


def _match_term(s: Term, t: Term, rho: dict, fixed) -> Optional[dict]:
    if isinstance(s, Param):
        if s == fixed:
            return rho if t == fixed else None
        if not isinstance(t, Param) or t == fixed or t.sort != s.sort:
            return None
        bound = rho.get(s)
        if bound is None:
            out = dict(rho)
            out[s] = t
            return out
        return rho if bound == t else None
    if isinstance(s, Var):
        return rho if isinstance(t, Var) and s.name == t.name and s.sort == t.sort else None
    if not isinstance(t, App) or s.fn != t.fn or len(s.args) != len(t.args):
        return None
    for a, b in zip(s.args, t.args):
        rho = _match_term(a, b, rho, fixed)
        if rho is None:
            return None
    return rho


def _match_terms(ss, ts, rho, fixed):
    if len(ss) != len(ts):
        return None
    for a, b in zip(ss, ts):
        rho = _match_term(a, b, rho, fixed)
        if rho is None:
            return None
    return rho


def match_formula(p: Formula, f: Formula, rho: dict, fixed) -> Iterator[dict]:
    """All extensions of ``rho`` mapping ``p`` onto ``f``."""
    if isinstance(p, Neq):
        if not isinstance(f, Neq):
            return
        r = _match_terms((p.lhs, p.rhs), (f.lhs, f.rhs), rho, fixed)
        if r is not None:
            yield r
        r2 = _match_terms((p.lhs, p.rhs), (f.rhs, f.lhs), rho, fixed)
        if r2 is not None and r2 != r:
            yield r2
        return
    if type(p) is not type(f):
        return
    if isinstance(p, Atom):
        if p.pred == f.pred and p.positive == f.positive:
            r = _match_terms(p.args, f.args, rho, fixed)
            if r is not None:
                yield r
    elif isinstance(p, Eq):
        r = _match_terms((p.lhs, p.rhs), (f.lhs, f.rhs), rho, fixed)
        if r is not None:
            yield r
    elif isinstance(p, Defined):
        if p.sym == f.sym and p.positive == f.positive:
            r = _match_term(p.index, f.index, rho, fixed)
            if r is not None:
                yield r
    elif isinstance(p, Depth):
        if p.rel == f.rel:
            r = _match_terms((p.param, p.rhs), (f.param, f.rhs), rho, fixed)
            if r is not None:
                yield r
    elif isinstance(p, _Junction):
        if len(p.args) == len(f.args):
            yield from _match_multiset(list(p.args), list(f.args), rho, fixed)
    elif isinstance(p, Quant):
        if p.q == f.q and p.var.name == f.var.name and p.var.sort == f.var.sort:
            yield from match_formula(p.body, f.body, rho, fixed)
    elif p == f:
        yield rho


def _match_multiset(ps, fs, rho, fixed):
    if not ps:
        yield rho
        return
    head, rest = ps[0], ps[1:]
    for i, f in enumerate(fs):
        for r in match_formula(head, f, rho, fixed):
            yield from _match_multiset(rest, fs[:i] + fs[i + 1:], r, fixed)


_LITERALS = (Atom, Eq, Neq, Defined, Depth)


def _term_params(t: Term, out: list) -> None:
    if isinstance(t, Param):
        out.append(t.key)
    elif isinstance(t, App):
        for a in t.args:
            _term_params(a, out)


def _literal_params(f: Formula) -> tuple:
    """Keys of the parameter occurrences of a literal, in a fixed order."""
    out: list = []
    if isinstance(f, Atom):
        for a in f.args:
            _term_params(a, out)
    elif isinstance(f, (Eq, Neq)):
        _term_params(f.lhs, out)
        _term_params(f.rhs, out)
    elif isinstance(f, Defined):
        _term_params(f.index, out)
    elif isinstance(f, Depth):
        out.append(f.param.key)
        _term_params(f.rhs, out)
    return tuple(out)


def _layout(pat: tuple, fixed) -> tuple:
    """Distinct pattern variables and, per position, a variable index or -1."""
    vs: list = []
    pos = []
    for x in pat:
        if x == fixed:
            pos.append(-1)
        else:
            if x not in vs:
                vs.append(x)
            pos.append(vs.index(x))
    return tuple(vs), tuple(pos)


def _bindings(pos: tuple, nvars: int, target: tuple, fixed) -> Optional[tuple]:
    """Values of the pattern variables under a positional match, or None."""
    vals: list = [None] * nvars
    for i, y in zip(pos, target):
        if i < 0:
            if y != fixed:
                return None
            continue
        if y == fixed:
            return None
        got = vals[i]
        if got is None:
            vals[i] = y
        elif got != y:
            return None
    return tuple(vals)


def _literal_solutions(patterns: list, domains: dict) -> Iterator[dict]:
    """Assignments satisfying every literal pattern, by propagation and search.

    ``patterns`` holds (variables, candidate value tuples); ``domains`` maps
    each variable to its allowed targets.
    """
    pats = [(vs, list(cands)) for vs, cands in patterns]
    doms = {v: set(d) for v, d in domains.items()}
    if not _propagate(pats, doms):
        return
    open_pats = [i for i, (vs, cands) in enumerate(pats) if len(cands) > 1]
    if not open_pats:
        yield {v: next(iter(d)) for v, d in doms.items()}
        return
    i = min(open_pats, key=lambda j: len(pats[j][1]))
    vs, cands = pats[i]
    for vals in sorted(cands):
        sub = dict(doms)
        for v, val in zip(vs, vals):
            sub[v] = {val}
        yield from _literal_solutions(pats, sub)


def _propagate(pats: list, doms: dict) -> bool:
    changed = True
    while changed:
        changed = False
        for k, (vs, cands) in enumerate(pats):
            keep = [c for c in cands if all(val in doms[v] for v, val in zip(vs, c))]
            if not keep:
                return False
            if len(keep) != len(cands):
                pats[k] = (vs, keep)
            for j, v in enumerate(vs):
                seen = {c[j] for c in keep}
                if seen != doms[v]:
                    narrowed = doms[v] & seen
                    if not narrowed:
                        return False
                    if narrowed != doms[v]:
                        doms[v] = narrowed
                        changed = True
    return True


def _skel_term(t: Term, fixed) -> str:
    if isinstance(t, Param):
        return t.key if t == fixed else "?" + t.sort
    if isinstance(t, App) and t.args:
        return "(" + t.fn + " " + " ".join(_skel_term(a, fixed) for a in t.args) + ")"
    return t.key


def _skel(f: Formula, fixed) -> str:
    if isinstance(f, Atom):
        body = "(" + f.pred + "".join(" " + _skel_term(a, fixed) for a in f.args) + ")" if f.args else f.pred
        return body if f.positive else "(not " + body + ")"
    if isinstance(f, Eq):
        return "(= " + _skel_term(f.lhs, fixed) + " " + _skel_term(f.rhs, fixed) + ")"
    if isinstance(f, Neq):
        return "(/= " + _skel_term(f.lhs, fixed) + " " + _skel_term(f.rhs, fixed) + ")"
    if isinstance(f, Defined):
        return ("+" if f.positive else "-") + f.sym + " " + _skel_term(f.index, fixed)
    if isinstance(f, Depth):
        return "(" + f.rel + " (depth " + _skel_term(f.param, fixed) + ") " + _skel_term(f.rhs, fixed) + ")"
    return skeleton(f, fixed)


class Target:
    """A formula set indexed for repeated subsumption queries."""

    def __init__(self, phi, fixed: Optional[Param] = None):
        self.fixed = fixed
        self.fixed_key = fixed.key if fixed is not None else None
        self.params = {p.key: p for p in params_of(phi)}
        self.literals: dict[str, set] = defaultdict(set)
        self.others: dict[str, list] = defaultdict(list)
        for f in phi:
            if isinstance(f, _LITERALS):
                self.literals[_skel(f, fixed)].add(_literal_params(f))
                if isinstance(f, Neq):
                    g = Neq(f.rhs, f.lhs)
                    self.literals[_skel(g, fixed)].add(_literal_params(g))
            else:
                self.others[skeleton(f, fixed)].append(f)


class Pattern:
    """A formula set compiled for matching against targets."""

    def __init__(self, psi, fixed: Optional[Param] = None):
        self.fixed = fixed
        self.params = {p.key: p for p in params_of(psi)}
        fk = fixed.key if fixed is not None else None
        self.literals = []
        self.others = []
        for p in psi:
            if isinstance(p, _LITERALS):
                vs, pos = _layout(_literal_params(p), fk)
                self.literals.append((_skel(p, fixed), vs, pos))
            else:
                self.others.append((skeleton(p, fixed), p))
        # most selective first helps the early exits below
        self.literals.sort(key=lambda sp: (-len(sp[2]), sp[0]))
        self.keys = {sk for sk, *_ in self.literals}
        self.other_keys = {sk for sk, _ in self.others}


def match(pattern: Pattern, target: Target) -> Optional[dict]:
    """A parameter map sending every pattern formula into the target."""
    fixed, fk = target.fixed, target.fixed_key
    tl, to = target.literals, target.others
    if not all(k in tl for k in pattern.keys) or not all(k in to for k in pattern.other_keys):
        return None
    literal_pats = []
    for sk, vs, pos in pattern.literals:
        if not vs:
            continue
        n = len(vs)
        bs = set()
        for tp in tl[sk]:
            b = _bindings(pos, n, tp, fk)
            if b is not None:
                bs.add(b)
        if not bs:
            return None
        literal_pats.append((vs, bs))
    other = [(p, to[sk]) for sk, p in pattern.others]
    domains: dict = {}
    for vs, cands in literal_pats:
        for j, v in enumerate(vs):
            vals = {c[j] for c in cands}
            domains[v] = domains[v] & vals if v in domains else vals
            if not domains[v]:
                return None
    other.sort(key=lambda pc: (len(pc[1]), pc[0].key))

    def rest(i: int, rho: dict):
        if i == len(other):
            return rho
        p, cands = other[i]
        for f in cands:
            for r in match_formula(p, f, rho, fixed):
                got = rest(i + 1, r)
                if got is not None:
                    return got
        return None

    pp, tp = pattern.params, target.params
    for sol in _literal_solutions(literal_pats, domains):
        found = rest(0, {pp[k]: tp[v] for k, v in sol.items()})
        if found is not None:
            return found
    return None


def find_renaming(psi, phi, fixed: Optional[Param] = None) -> Optional[Renaming]:
    """A renaming rho with rho(psi) ⊆ phi, or None."""
    if not psi:
        return Renaming({})
    found = match(Pattern(psi, fixed), Target(phi, fixed))
    return None if found is None else Renaming(found)


def subsumes(phi, psi, fixed: Optional[Param] = None) -> bool:
    """``phi ⊒ psi``."""
    return find_renaming(psi, phi, fixed) is not None
