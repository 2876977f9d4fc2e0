import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from hsmc.formulas import And, Atom, Bind, Exists, Lt, Next, Not, Prev, Top, Var
from hsmc.hs_eval import eval_interval, loop_cap
from hsmc.kripke import Lasso, enumerate_lassos, enumerate_traces, fig1, kn, mn
from hsmc.pointwise import (
    BeLanguage,
    FoEvaluator,
    PointEvalError,
    _labels,
    _quantifier_depth,
    all_words,
    check_ctlstar,
    check_finitary_ctlstar,
    check_hybrid,
    check_ltl,
    eval_finitary_ctlstar,
    eval_fo,
    eval_hybrid,
    eval_ltl,
    lact_enumerate,
    lact_member,
    letter_name,
)
from hsmc.syntax import parse
from hsmc.translate import hs_to_fo

from gen import hs_formulas, ltl_formulas
from oracles import naive_be_word, naive_ltl

p, q = Atom("p"), Atom("q")
FIG1_LASSOS = list(enumerate_lassos(fig1(), 5))
slow = settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def test_eval_ltl_examples():
    assert eval_ltl(kn(1), Lasso((), ("s0",)), 0, parse("F p", "point")) is False
    for lasso in enumerate_lassos(mn(1), 6):
        assert eval_ltl(mn(1), lasso, 0, parse("F p", "point")) is True
    assert eval_ltl(fig1(), Lasso(("s0",), ("s1",)), 0, parse("X q", "point")) is True


def test_eval_ltl_rejects_quantifiers():
    with pytest.raises(PointEvalError):
        eval_ltl(fig1(), Lasso(("s0",), ("s1",)), 0, Exists(p))


def test_check_ltl_examples():
    v = check_ltl(kn(1), parse("F p", "point"), 4)
    assert v.value == "fails" and v.witness == Lasso((), ("s0",))
    assert check_ltl(mn(1), parse("F p", "point"), 6).value == "holds_in_bound"
    assert check_ltl(fig1(), parse("G(p -> X q)", "point"), 5).value == "holds_in_bound"


@given(ltl_formulas(max_leaves=6))
@slow
def test_eval_ltl_matches_naive(f):
    k = fig1()
    for lasso in FIG1_LASSOS[:12]:
        for i in range(6):
            assert eval_ltl(k, lasso, i, f) == naive_ltl(k, lasso, i, f)


@given(ltl_formulas(max_leaves=6))
@slow
def test_eval_ltl_period_stability(f):
    k = fig1()
    for lasso in FIG1_LASSOS[:12]:
        doubled = Lasso(lasso.stem, lasso.loop * 2)
        for i in range(5):
            assert eval_ltl(k, lasso, i, f) == eval_ltl(k, doubled, i, f)


def test_finitary_examples():
    k = fig1()
    assert eval_finitary_ctlstar(k, ("s0",), 0, parse("Ef(F q)", "point"), 3) is True
    assert eval_finitary_ctlstar(k, ("s0", "s1"), 0, Top(), 3) is True


@given(st.sampled_from(list(enumerate_traces(fig1(), 4))), ltl_formulas(past=False, max_leaves=3))
@slow
def test_finitary_x_boundary(rho, g):
    assert eval_finitary_ctlstar(fig1(), rho, len(rho) - 1, Next(g), 4) is False


def test_finitary_rejects_mixed():
    with pytest.raises(PointEvalError):
        eval_finitary_ctlstar(fig1(), ("s0",), 0, Exists(p), 3)


def test_hybrid_examples():
    k = fig1()
    path = Lasso(("s0",), ("s1",))
    for i in range(4):
        assert eval_hybrid(k, path, {}, i, Bind("x", Var("x")), 4) is True
    assert eval_hybrid(k, path, {}, 0, Prev(Top()), 4) is False
    with pytest.raises(PointEvalError):
        eval_hybrid(k, path, {}, 0, Var("y"), 4)


def test_hybrid_memoryful_existential():
    # from s0 s1, some path with the same prefix visits s0 again
    k = fig1()
    f = Next(Exists(parse("X p", "point")))
    assert eval_hybrid(k, Lasso(("s0",), ("s1",)), {}, 0, f, 4) is True


@pytest.mark.parametrize("sentence", ["down x . G (x | O x)", "down x . F x", "E(F q)", "A(G(p -> X q))"])
def test_hybrid_sentence_insensitive_to_valuation(sentence):
    k = fig1()
    f = parse(sentence, "point")
    for lasso in enumerate_lassos(k, 3):
        base = eval_hybrid(k, lasso, {}, 0, f, 4)
        for val in ({"x": 3}, {"x": 0, "y": 5}):
            assert eval_hybrid(k, lasso, val, 0, f, 4) == base


def test_ctlstar_and_finitary_checks():
    k = fig1()
    assert check_ctlstar(k, parse("A(G(p -> X q))", "point"), 4).value == "holds_in_bound"
    v = check_ctlstar(k, parse("A(G p)", "point"), 4)
    assert v.value == "fails"
    assert check_finitary_ctlstar(k, parse("Ef(F q)", "point"), 3).value == "holds_in_bound"
    assert check_hybrid(k, parse("down x . x", "point"), 3).value == "holds_in_bound"
    with pytest.raises(PointEvalError):
        check_ctlstar(k, parse("Ef(F q)", "point"), 3)


def test_eval_fo_examples():
    k = fig1()
    pi = Lasso(("s0",), ("s1",))
    h_p, _ = hs_to_fo(p)
    assert eval_fo(k, pi, {"x": 0, "y": 0}, h_p, 6) is True
    assert eval_fo(k, pi, {"x": 2, "y": 1}, Lt("x", "y"), 6) is False
    h_bq, _ = hs_to_fo(parse("<B> q", "hs"))
    assert eval_fo(k, pi, {"x": 0, "y": 2}, h_bq, 6) is False
    assert eval_interval(k, pi, 0, 2, parse("<B> q", "hs"), 6) is False
    with pytest.raises(PointEvalError):
        eval_fo(k, pi, {"x": 9, "y": 9}, h_p, 6)


@given(hs_formulas(atoms=("p", "q"), max_leaves=4))
@slow
def test_fo_interval_agreement(f):
    k = fig1()
    open_formula, _ = hs_to_fo(f)
    for lasso in FIG1_LASSOS[:8]:
        cap = loop_cap(14, len(lasso.stem), len(lasso.loop), _quantifier_depth(open_formula))
        fo = FoEvaluator(lasso, _labels(k), cap)
        for i in range(7):
            for j in range(i, 7):
                assert eval_interval(k, lasso, i, j, f, 14) == fo.ev(open_formula, {"x": i, "y": j})


def test_lact_examples():
    a = parse("a", "hs")
    assert lact_member("aa", a) is True
    assert lact_member("ab", a) is False
    assert lact_member("ba", parse("<E> a", "hs")) is True
    with pytest.raises(PointEvalError):
        lact_member("ax", a, alphabet=("a", "b"))
    assert lact_enumerate(("a", "b"), a, 2) == {("a",), ("a", "a")}
    assert lact_enumerate(("a", "b"), parse("<B> a", "hs"), 2) == {("a", "a"), ("a", "b")}


@given(hs_formulas(atoms=("a", "c"), relations=("B", "E", "G"), max_leaves=5))
@slow
def test_be_language_matches_naive_and_boolean_laws(f):
    lang, neg = BeLanguage(f), BeLanguage(Not(f))
    both = BeLanguage(And(f, parse("<B> a | c", "hs")))
    other = BeLanguage(parse("<B> a | c", "hs"))
    for w in all_words(("a", "c"), 5):
        assert (w in lang) == naive_be_word(w, f)
        assert (w in neg) == (w not in lang)
        assert (w in both) == (w in lang and w in other)
    assert len(lact_enumerate(("a", "c"), f, 4)) <= 2 + 4 + 8 + 16


def test_ltl_finite_dialect():
    # letters are atom sets; X is strong on finite words
    f = parse("X p", "point")
    lp, l0 = frozenset({"p"}), frozenset()
    assert lact_member((l0, lp), f, "ltl_finite") is True
    assert lact_member((lp,), f, "ltl_finite") is False
    assert letter_name(frozenset({"q", "p"})) == "L_p_q"
    assert letter_name(frozenset()) == "L"
