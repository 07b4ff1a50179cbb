import pytest

from schemata.core import NAT, TRUE, FALSE, Defined, Not, Param, nnf, succ, zero, iter_subformulas
from schemata.rewrite import RewriteError

A, B = Param("A", NAT), Param("B", NAT)


def test_normal_form_examples(nat_problem, F):
    R = nat_problem.rules
    assert R.normal_form("g", "s", [B]) == F("(and (g B) (or (not (p B)) (p (s B))))")
    assert R.normal_form("g", "0", []) == F("(p 0)")
    assert R.normal_form("d", "0", []) == TRUE


def test_unfold_examples(nat_problem, F):
    R = nat_problem.rules
    assert R.unfold("g", A, "s", [B]) == F("(and (g B) (or (not (p B)) (p A)))")
    assert R.unfold("g", A, "0", []) == F("(p A)")
    assert R.unfold("g", A, "s", [B], positive=False) == F("(or (not (g B)) (and (p B) (not (p A))))")


def test_negative_unfold_is_nnf_of_positive(nat_problem):
    R = nat_problem.rules
    for d in ("g", "d", "c"):
        for f, args in (("0", []), ("s", [B])):
            assert R.unfold(d, A, f, args, False) == nnf(Not(R.unfold(d, A, f, args)))


def test_ground_unfold_examples(nat_problem, F):
    R = nat_problem.rules
    assert R.ground_unfold_atom("g", succ(zero())) == F("(and (p 0) (or (not (p 0)) (p (s 0))))")
    assert R.ground_unfold_atom("d", zero()) == TRUE
    assert R.ground_unfold_atom("c", succ(zero())) == FALSE


def test_ground_unfold_needs_ground_terms(nat_problem):
    with pytest.raises(RewriteError):
        nat_problem.rules.ground_unfold_atom("g", A)


def test_ground_unfold_removes_defined_atoms(nat_problem):
    t = zero()
    for _ in range(5):
        t = succ(t)
        for d in ("g", "d", "c"):
            out = nat_problem.rules.ground_unfold_atom(d, t)
            assert not any(isinstance(x, Defined) for x in iter_subformulas(out))


def test_head_recursion_is_inlined():
    from schemata.parser import parse_problem

    pr = parse_problem(
        "(function p (nat) bool)\n(defined a nat)\n(defined b nat)\n"
        "(rule (a 0) true)\n(rule (a (s K)) (p K))\n"
        "(rule (b 0) true)\n(rule (b (s K)) (and (a (s K)) (b K)))\n"
    )
    K = Param("K", NAT)
    nf = pr.rules.normal_form("b", "s", [K])
    assert all(not isinstance(x, Defined) or x.index == K for x in iter_subformulas(nf))
    assert "(p K)" in nf.key


def test_missing_rule():
    from schemata.rewrite import RewriteSystem

    with pytest.raises(RewriteError):
        RewriteSystem().get("g", "0")
