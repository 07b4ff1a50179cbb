import random

from hypothesis import given, settings
from hypothesis import strategies as st

from schemata.basesolver import BaseSat, BaseUnsat, BridgeBackend, Unsupported, clausify, dpll, solve_base
from schemata.core import NAT, App, Atom, Param, Quant, Var, mk_eq, mk_neq

from generators import random_base_formula
from truth_table import satisfiable

A, B = Param("A", NAT), Param("B", NAT)


def atom(p, t, pos=True):
    return Atom(p, (t,), pos)


def test_complementary_literals():
    assert isinstance(solve_base([atom("p", A), atom("p", A, False)]), BaseUnsat)


def test_ground_leaf_from_tree_trace():
    b = App("b", (), "elem")
    assert isinstance(solve_base([atom("p", b), atom("p", b, False)]), BaseUnsat)


def test_distinct_parameters_are_independent():
    res = solve_base([atom("p", A), atom("p", B, False), mk_neq(A, B)])
    assert isinstance(res, BaseSat)
    assert res.assignment == {"(p A)": True, "(p B)": False}


def test_unsupported_shapes():
    x = Var("x", "e")
    assert isinstance(solve_base([Quant("forall", x, Atom("r", (x,)))]), Unsupported)
    assert isinstance(solve_base([mk_eq(App("f", (A,), NAT), B)]), Unsupported)


def test_dpll_examples():
    assert dpll([[1], [-1]], 1) is None
    assert dpll([], 0) == {}
    assert dpll([[1, 2], [-1]], 2) == {1: False, 2: True}


def test_dpll_is_deterministic():
    clauses = [[1, 2, 3], [-1, -2], [-2, -3], [2, 3]]
    assert dpll(clauses, 3) == dpll(clauses, 3)


def test_bridge_protocol(tmp_path):
    script = tmp_path / "answer.py"
    script.write_text("import sys\nsys.stdin.read()\nprint('unsat')\n")
    bridge = BridgeBackend(f"python3 {script}")
    assert isinstance(bridge([atom("p", A)]), BaseUnsat)
    broken = BridgeBackend("/nonexistent/solver")
    assert isinstance(broken([atom("p", A)]), Unsupported)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8))
def test_agrees_with_truth_table(seed, n):
    f, atoms = random_base_formula(random.Random(seed), n)
    got = solve_base([f])
    assert isinstance(got, (BaseSat, BaseUnsat))
    assert isinstance(got, BaseSat) == satisfiable(f, atoms)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_clausification_preserves_satisfiability(seed):
    f, atoms = random_base_formula(random.Random(seed), 6)
    clauses, ab = clausify([f])
    sat = clauses is not None and dpll(clauses, ab.next_var - 1) is not None
    assert sat == satisfiable(f, atoms)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.permutations(range(6)))
def test_invariant_under_renaming(seed, perm):
    from schemata.core import apply_renaming

    f, atoms = random_base_formula(random.Random(seed), 6)
    rho = {Param(f"P{i}", "u"): Param(f"P{j}", "u") for i, j in enumerate(perm)}
    g = apply_renaming(rho, f)
    assert isinstance(solve_base([f]), BaseSat) == isinstance(solve_base([g]), BaseSat)
