import glob
import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schemata.admissibility import (
    ValidationReport,
    validate_conjecture,
    validate_delta_table,
    validate_problem,
    validate_rewrite_system,
    validate_signature,
)
from schemata.core import NAT, Param, Signature, Var, apply_renaming, conj, disj, mk_eq
from schemata.equality import FREE, DeltaTable
from schemata.parser import parse_formula, parse_problem

from conftest import NAT_HEADER

CORPUS = sorted(glob.glob(os.path.join(os.path.dirname(__file__), "..", "src", "schemata", "corpus", "*.sch")))


def problem(body: str):
    return parse_problem("(function p (nat) bool)\n(function q (nat nat) bool)\n(parameter A nat)\n(parameter B nat)\n" + body)


def conds(report: ValidationReport) -> set:
    return report.conditions()


def test_report_ok_iff_empty():
    assert ValidationReport().ok
    assert not ValidationReport((("C1", "x", "m"),)).ok


@pytest.mark.parametrize("path", CORPUS, ids=os.path.basename)
def test_corpus_is_admissible(path):
    with open(path, encoding="utf-8") as fh:
        assert validate_problem(parse_problem(fh.read())).ok


def test_intro_rules_ok():
    pr = problem("(defined g nat)\n(rule (g 0) (p 0))\n(rule (g (s K)) (and (g K) (or (not (p K)) (p (s K)))))")
    assert validate_rewrite_system(pr.rules, pr.signature).ok


def test_self_head_recursion_violates_c3():
    pr = problem("(defined d nat)\n(rule (d 0) true)\n(rule (d (s K)) (d (s K)))")
    assert conds(validate_rewrite_system(pr.rules, pr.signature)) == {"C3"}


def test_mutual_head_recursion_violates_c3():
    pr = problem(
        "(defined d nat)\n(defined e nat)\n(rule (d 0) true)\n(rule (e 0) true)\n"
        "(rule (d (s K)) (e (s K)))\n(rule (e (s K)) (d (s K)))"
    )
    assert "C3" in conds(validate_rewrite_system(pr.rules, pr.signature))


def test_missing_rule_violates_c4():
    pr = problem("(defined d nat)\n(rule (d 0) true)")
    rep = validate_rewrite_system(pr.rules, pr.signature)
    assert conds(rep) == {"C4"}
    assert "s" in rep.violations[0][2]


def test_deep_inductive_term_violates_c2():
    pr = problem("(defined d nat)\n(rule (d 0) true)\n(rule (d (s K)) (p (s (s K))))")
    assert "C2" in conds(validate_rewrite_system(pr.rules, pr.signature))


def test_two_parameters_in_rule_atom_violate_a4():
    pr = problem("(defined d nat)\n(rule (d 0) true)\n(rule (d (s K)) (q K (s K)))")
    assert "A4" in conds(validate_rewrite_system(pr.rules, pr.signature))


def test_intro_conjecture_ok(F, nat_problem):
    assert validate_conjecture(F("(and (not (p A)) (g A))"), nat_problem.signature).ok


def test_constructor_in_conjecture_violates_a2(F, nat_problem):
    rep = validate_conjecture(F("(and (p 0) (not (p A)) (d A))"), nat_problem.signature)
    assert conds(rep) == {"A2"}
    assert "rule body" in str(rep)


def test_two_parameters_violate_a3():
    pr = problem("(assert (q A B))")
    assert conds(validate_conjecture(pr.conjecture, pr.signature)) == {"A3"}


def test_defined_atom_under_quantifier_violates_a3():
    pr = parse_problem(
        "(sort e)\n(function r (e) bool)\n(parameter A nat)\n(defined d nat)\n"
        "(rule (d 0) true)\n(rule (d (s K)) (d K))\n"
        "(assert (forall (x e) (or (r x) (d A))))"
    )
    rep = validate_conjecture(pr.conjecture, pr.signature)
    assert "A3" in conds(rep)
    assert "A-backend" in conds(rep)


def test_quantifier_only_flagged_for_builtin_backend():
    pr = parse_problem("(sort e)\n(function r (e) bool)\n(parameter A nat)\n(function pa (nat) bool)\n"
                       "(assert (and (pa A) (exists (x e) (r x))))")
    assert conds(validate_conjecture(pr.conjecture, pr.signature)) == {"A-backend"}
    assert validate_conjecture(pr.conjecture, pr.signature, backend="bridge").ok


def test_inductive_variable_violates_a2():
    pr = parse_problem("(function p (nat) bool)\n(parameter A nat)\n(assert (and (p A) (forall (x nat) (p x))))")
    assert "A2" in conds(validate_conjecture(pr.conjecture, pr.signature, backend="bridge"))


def test_free_delta_table_ok():
    assert validate_delta_table(FREE, Signature()).ok
    t = DeltaTable()
    x1, y1 = Var("x1", NAT), Var("y1", NAT)
    t.add("s", "s", mk_eq(x1, y1))
    assert validate_delta_table(t, Signature()).ok


def _pair_sig():
    sig = Signature()
    sig.add_sort("t", inductive=True)
    sig.add_symbol("leaf", (), "t", "constructor")
    sig.add_symbol("g", ("t", "t"), "t", "constructor")
    return sig


def test_commutative_delta_ok():
    x1, x2, y1, y2 = Var("x1", "t"), Var("x2", "t"), Var("y1", "t"), Var("y2", "t")
    t = DeltaTable()
    t.add("g", "g", disj(conj(mk_eq(x1, y1), mk_eq(x2, y2)), conj(mk_eq(x1, y2), mk_eq(x2, y1))))
    assert validate_delta_table(t, _pair_sig()).ok


def test_uncovered_argument_violates_d2():
    x1, y1 = Var("x1", "t"), Var("y1", "t")
    t = DeltaTable()
    t.add("g", "g", mk_eq(x1, y1))
    rep = validate_delta_table(t, _pair_sig())
    assert conds(rep) == {"D2"}
    assert "x2" in str(rep)


def test_delta_shape_violates_d1():
    from schemata.core import Atom

    t = DeltaTable()
    t.add("g", "g", Atom("r", ()))
    assert conds(validate_delta_table(t, _pair_sig())) == {"D1"}


def test_signature_examples(nat_problem):
    assert validate_signature(nat_problem.signature).ok
    bad = Signature()
    bad.add_sort("t", inductive=True)
    bad.add_symbol("leaf", (), "t", "constructor")
    bad.add_symbol("join", ("t", "t"), "t", "function")
    assert conds(validate_signature(bad)) == {"SIG-closure"}
    bad2 = Signature()
    bad2.add_sort("e")
    bad2.add_symbol("d", ("e",), "bool", "defined")
    assert conds(validate_signature(bad2)) == {"SIG-defined"}


def test_uninhabited_inductive_sort():
    sig = Signature()
    sig.add_sort("loop", inductive=True)
    sig.add_symbol("mk", ("loop",), "loop", "constructor")
    assert conds(validate_signature(sig)) == {"SIG-inhabited"}


def test_locations_in_messages():
    pr = problem("(defined d nat)\n(rule (d 0) true)\n(rule (d (s K)) (d (s K)))\n(assert (p 0))")
    text = str(validate_problem(pr))
    assert "assert 1 (" in text
    assert "C3" in text and "A2" in text


NAMES = ["A", "B", "C", "D"]


@given(st.permutations(NAMES))
def test_verdict_invariant_under_parameter_renaming(perm):
    header = NAT_HEADER + "(parameter D nat)\n"
    rho = {Param(a, NAT): Param(b, NAT) for a, b in zip(NAMES, perm)}
    sig = parse_problem(header).signature
    for text in ("(and (g A) (not (p B)))", "(and (p A) (d B) (c C))", "(or (p A) (p B))", "(q A)"):
        try:
            f = parse_formula(text, sig)
        except Exception:
            continue
        g = apply_renaming(rho, f)
        assert validate_conjecture(f, sig).ok == validate_conjecture(g, sig).ok
