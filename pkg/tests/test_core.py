import pytest
from hypothesis import given
from hypothesis import strategies as st

from schemata.core import (
    FALSE,
    NAT,
    TRUE,
    Depth,
    Not,
    Param,
    Renaming,
    Signature,
    SortError,
    apply_renaming,
    conj,
    disj,
    expand_max,
    is_nnf,
    mk_eq,
    mk_neq,
    nnf,
    noneq,
    params_of,
    replace_term,
    substitute_param,
    succ,
    zero,
)

A, B, C = (Param(n, NAT) for n in "ABC")
N = Param("N", NAT)


def test_nat_is_predeclared():
    sig = Signature()
    assert sig.is_inductive(NAT)
    assert [c.name for c in sig.constructors(NAT)] == ["0", "s"]


def test_constructor_cache_follows_new_symbols():
    sig = Signature()
    assert len(sig.constructors(NAT)) == 2
    sig.add_sort("t", inductive=True)
    sig.add_symbol("leaf", (), "t", "constructor")
    assert [c.name for c in sig.constructors("t")] == ["leaf"]


def test_nnf_de_morgan(F):
    assert nnf(Not(F("(and (p A) (not (q A)))"))) == F("(or (not (p A)) (q A))")


def test_nnf_flips_equations(F):
    assert nnf(Not(F("(or (= A B) (d A))"))) == F("(and (/= A B) (not (d A)))")


def test_nnf_negated_unfolding_body(F):
    got = nnf(Not(F("(and (d B) (or (not (p B)) (p A)))")))
    assert got == F("(or (not (d B)) (and (p B) (not (p A))))")


def test_nnf_constants():
    assert nnf(Not(TRUE)) == FALSE
    assert nnf(Not(FALSE)) == TRUE


def test_nnf_is_identity_on_nnf(F):
    f = F("(or (not (d B)) (and (p B) (not (p A))))")
    assert is_nnf(f)
    assert nnf(f) == f


def test_junctions_flatten_and_sort(F):
    a, b, c = F("(p A)"), F("(p B)"), F("(q C)")
    assert conj(a, conj(b, c)) == conj(c, b, a)
    assert disj(a, FALSE) == a
    assert conj(a, FALSE) == FALSE


def test_reflexive_ground_equations_simplify():
    assert mk_eq(zero(), zero()) == TRUE
    assert mk_neq(succ(zero()), succ(zero())) == FALSE


def test_replace_term_examples(F):
    assert replace_term(F("(p 0)"), zero(), A) == F("(p A)")
    body = F("(and (d B) (or (not (p B)) (p (s B))))")
    assert replace_term(body, succ(B), A) == F("(and (d B) (or (not (p B)) (p A)))")
    assert replace_term(F("(q B)"), zero(), A) == F("(q B)")


def test_replace_term_rejects_sort_mismatch():
    with pytest.raises(SortError):
        replace_term(TRUE, zero(), Param("e", "elem"))


def test_substitute_param_on_labels(F):
    lab = frozenset({F("(p A)"), mk_eq(A, B)})
    assert substitute_param(lab, A, B) == frozenset({F("(p B)"), mk_eq(B, B)})


def test_substitute_depth_param():
    f = Depth(A, "=", N)
    assert substitute_param(f, N, succ(N)) == Depth(A, "=", succ(N))
    assert substitute_param(f, N, succ(zero())) == Depth(A, "=", succ(zero()))


def test_apply_renaming_examples(F):
    lab = frozenset({F("(d A)"), Depth(A, "=", N)})
    assert apply_renaming(Renaming(), lab) == lab
    assert apply_renaming({A: B}, lab) == frozenset({F("(d B)"), Depth(B, "=", N)})
    assert apply_renaming({A: C, B: C}, frozenset({F("(p A)"), F("(p B)")})) == frozenset({F("(p C)")})


def test_renaming_rejects_sort_change():
    with pytest.raises(SortError):
        Renaming({A: Param("e", "elem")})
    with pytest.raises(SortError):
        Renaming({N: A}, fixed=N)


def test_params_of_examples(F):
    assert params_of(F("(and (p A) (d B))")) == {A, B}
    assert params_of(TRUE) == set()
    assert params_of(Depth(A, "=", N)) == {A, N}


def test_expand_max_examples():
    assert expand_max([A], N) == conj(Depth(A, "<=", N), Depth(A, "=", N))
    assert expand_max([], zero()) == TRUE
    two = expand_max([B, C], N)
    assert two == conj(conj(Depth(B, "<=", N), Depth(C, "<=", N)), disj(Depth(B, "=", N), Depth(C, "=", N)))


def test_noneq_keeps_disequations(F):
    lab = frozenset({F("(p A)"), mk_eq(A, zero()), mk_neq(A, B)})
    assert noneq(lab) == frozenset({F("(p A)"), mk_neq(A, B)})
    assert noneq(frozenset({mk_eq(A, B)})) == frozenset()


PARAMS = [Param(n, NAT) for n in ("A", "B", "C", "D")]
renamings = st.dictionaries(st.sampled_from(PARAMS), st.sampled_from(PARAMS)).map(Renaming)


@given(renamings, renamings)
def test_renamings_compose(r1, r2):
    lab = frozenset(
        {mk_neq(p, q) for p in PARAMS for q in PARAMS if p != q}
        | {Depth(p, "=", N) for p in PARAMS}
    )
    assert apply_renaming(r2, apply_renaming(r1, lab)) == apply_renaming(r2.compose(r1), lab)


@given(renamings)
def test_params_of_commutes_with_renaming(rho):
    lab = frozenset({mk_neq(A, B), Depth(C, "<", N), mk_eq(Param("D", NAT), succ(A))})
    assert params_of(apply_renaming(rho, lab)) == {rho(p) for p in params_of(lab)}


@given(st.sampled_from(PARAMS))
def test_self_substitution_is_identity(p):
    lab = frozenset({mk_neq(A, B), Depth(C, "<", N), mk_eq(Param("D", NAT), succ(A))})
    assert substitute_param(lab, p, p) == lab
