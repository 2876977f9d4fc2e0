import pytest
from hypothesis import HealthCheck, given, settings

from hsmc.formulas import (
    And,
    Always,
    Atom,
    Bind,
    Bot,
    FoExists,
    FoForall,
    Historically,
    Implies,
    Le,
    Lt,
    Modal,
    Not,
    Once,
    Or,
    Pred,
    Prev,
    Since,
    Top,
    Var,
    atoms,
    box,
    build_length,
    conj,
    dia,
    disj,
    subformulas,
)
from hsmc.kripke import fig1, k1, k2
from hsmc.pointwise import all_words, lact_enumerate
from hsmc.suites import (
    fixed_letter_theory,
    validate_closure,
    validate_ct2hybrid,
    validate_ctlstar2abe,
    validate_hs2fo,
    validate_ltl2ab,
    validate_past_elim,
)
from hsmc.syntax import parse
from hsmc.translate import (
    CLOSURE_KINDS,
    BeOracle,
    LetterTheory,
    TranslationError,
    _h_b,
    closure_formula,
    closure_substitute,
    eliminate_initial_past,
    finitary_ctlstar_to_abe,
    hs_ct_to_hybrid,
    hs_to_fo,
    is_well_formed,
    letter_substitution,
    load_be_oracle,
    ltl_to_ab,
    maximal_existentials,
    mirror,
    substitute_preimage,
)

from gen import all_hs, hs_formulas, ltl_formulas
from oracles import naive_be_word, words

p, q, a, b, c = Atom("p"), Atom("q"), Atom("a"), Atom("b"), Atom("c")
len1, len2 = build_length(1), build_length(2)
slow = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
PAST = (Prev, Since, Once, Historically)


def _atom_fo(name, x, y, z):
    return FoForall(z, Implies(And(Le(x, z), Le(z, y)), Pred(name, z)))


# HS to FO


def test_hs_to_fo_atom():
    open_formula, sentence = hs_to_fo(p)
    assert open_formula == _atom_fo("p", "x", "y", "z0")
    assert sentence == FoExists("x", And(FoForall("z1", Le("x", "z1")), FoForall("y", open_formula)))


def test_hs_to_fo_modal_clauses():
    e, _ = hs_to_fo(dia("E", p))
    assert e == FoExists("z0", And(And(Lt("x", "z0"), Le("z0", "y")), _atom_fo("p", "z0", "y", "z1")))
    bb, _ = hs_to_fo(dia("Bbar", p))
    assert bb == FoExists("z0", And(Lt("y", "z0"), _atom_fo("p", "x", "z0", "z1")))
    bf, _ = hs_to_fo(dia("B", p))
    assert bf == FoExists("z0", And(And(Le("x", "z0"), Lt("z0", "y")), _atom_fo("p", "x", "z0", "z1")))


def test_hs_to_fo_rejects_derived_relations():
    with pytest.raises(TranslationError):
        hs_to_fo(dia("A", p))


@given(hs_formulas(atoms=("p", "q"), max_leaves=4))
@slow
def test_hs_to_fo_agreement(f):
    checked, bad = validate_hs2fo(f, 3)
    assert checked > 0 and bad == []


# LTL to AB


def test_ltl_to_ab_clauses():
    assert ltl_to_ab(p) == p
    assert ltl_to_ab(parse("X q", "point")) == dia("A", And(len2, dia("A", And(len1, q))))
    assert ltl_to_ab(parse("p U q", "point")) == dia(
        "A", And(dia("A", And(len1, q)), box("B", dia("A", And(len1, p))))
    )


def test_ltl_to_ab_rejects_past_and_quantifiers():
    with pytest.raises(TranslationError):
        ltl_to_ab(parse("Y p", "point"))
    with pytest.raises(TranslationError):
        ltl_to_ab(parse("E(F p)", "point"))


@given(ltl_formulas(past=False, max_leaves=5))
@slow
def test_ltl_to_ab_point_interval_correspondence(f):
    checked, bad = validate_ltl2ab(f, 4)
    assert checked > 0 and bad == []


# BE closure constructions


def _direct(kind, w, f, sep="b"):
    """Word-splitting membership using the reference BE evaluator."""
    n = len(w)

    def in_l(u):
        return len(u) > 0 and sep not in u and naive_be_word(u, f)

    if kind == "bL":
        return w[0] == sep and in_l(w[1:])
    if kind == "Lb":
        return w[-1] == sep and in_l(w[:-1])
    if kind == "sigma_bL":
        return any(w[i] == sep and in_l(w[i + 1 :]) for i in range(n))
    if kind == "sigma_bL_eps":
        return _direct("sigma_bL", w, f, sep) or w[-1] == sep
    if kind == "Lb_sigma":
        return any(w[i] == sep and in_l(w[:i]) for i in range(n))
    if kind == "L_eps_b_sigma":
        return _direct("Lb_sigma", w, f, sep) or w[0] == sep
    assert kind == "bLb"
    return n >= 3 and w[0] == sep and w[-1] == sep and in_l(w[1:-1])


def test_closure_bl_of_a():
    lang = lact_enumerate(("a", "b"), closure_formula(a, "bL", "b"), 4)
    assert lang == {("b", "a"), ("b", "a", "a"), ("b", "a", "a", "a")}


def test_sigma_star_b():
    g = Or(b, dia("E", b))
    for w in words(("a", "c", "b"), 5):
        assert naive_be_word(w, g) == (w[-1] == "b")


@pytest.mark.parametrize("f", all_hs(3, atoms=("a", "c"), relations=("B", "E")), ids=str)
def test_claim_h_b(f):
    hb = _h_b(f, "b")
    for u in words(("a", "c"), 5):
        assert naive_be_word(u, f) == naive_be_word(("b",) + u, hb)


@pytest.mark.parametrize("kind", CLOSURE_KINDS)
@pytest.mark.parametrize("f", all_hs(2, atoms=("a", "c"), relations=("B", "E")), ids=str)
def test_closure_kind_identity(kind, f):
    g = closure_formula(f, kind, "b")
    assert set(atoms(g)) <= {"a", "b", "c"}
    for w in words(("a", "c", "b"), 5):
        assert naive_be_word(w, g) == _direct(kind, w, f), w


@pytest.mark.parametrize("kind", CLOSURE_KINDS)
def test_validate_closure_hook(kind):
    checked, bad = validate_closure(parse("<B> a & !c", "hs"), 5, kind)
    assert checked == 3 + 9 + 27 + 81 + 243 and bad == []


def test_closure_errors():
    with pytest.raises(TranslationError):
        closure_formula(b, "bL", "b")
    with pytest.raises(TranslationError):
        closure_formula(dia("A", a), "bL", "b")
    with pytest.raises(TranslationError):
        closure_formula(a, "bad", "b")


@given(hs_formulas(atoms=("a", "c"), relations=("B", "E"), max_leaves=4))
@slow
def test_mirror_reverses_language(f):
    g = mirror(f)
    for w in words(("a", "c"), 5):
        assert naive_be_word(w, f) == naive_be_word(w[::-1], g)


# Letter substitution


def _psi_b():
    return conj([Not(len1), dia("B", b), dia("E", b), box("E", box("B", Not(b)))])


def test_closure_substitute_letter_case():
    theory, _ = fixed_letter_theory()
    psi = _psi_b()
    assert closure_substitute(Atom("d1"), theory, "b") == And(
        dia("G", psi), box("G", Implies(psi, theory.formula("d1")))
    )


def test_closure_substitute_negation_guard():
    theory, _ = fixed_letter_theory()
    well = box("G", Implies(_psi_b(), disj([theory.formula("d1"), theory.formula("d2")])))
    assert well in subformulas(closure_substitute(Not(Atom("d1")), theory, "b"))


def test_letter_theory_disjoint_and_complete():
    theory, block_letter = fixed_letter_theory()
    assert theory.validate(7) is None
    d1, d2 = theory.formula("d1"), theory.formula("d2")
    for mid in words(("a", "c"), 4, min_len=0):
        w = ("b",) + mid + ("b",)
        hits = {d for d, g in (("d1", d1), ("d2", d2)) if naive_be_word(w, g)}
        assert hits == {block_letter(mid)}


def test_letter_theory_overlap_reported():
    theory = LetterTheory.build({"d1": Top(), "d2": Top()}, ("a",), "b")
    w, hits = theory.validate(4)
    assert w == ("b", "b") and hits == ["d1", "d2"]


def test_closure_substitute_missing_letter():
    theory, _ = fixed_letter_theory()
    with pytest.raises(TranslationError):
        closure_substitute(Atom("d3"), theory, "b")


def test_substitute_preimage():
    bl = lambda u: "d1" if all(x == "a" for x in u) else "d2"
    assert substitute_preimage("cbabbcb", "b", bl) == ("d1", "d1", "d2")
    assert substitute_preimage("acb", "b", bl) is None


@pytest.mark.parametrize("text", ["d1", "!d1", "d1 & d2", "<E> d2", "[B] d1"])
def test_closure_substitute_identity_short_words(text):
    # Gamma* b h^-1(L) Gamma*: the blocks between the first and the last b spell a word of L
    theory, block_letter = fixed_letter_theory()
    f = parse(text, "hs")
    g = closure_substitute(f, theory, "b")
    for w in all_words(("a", "b", "c"), 6):
        pos = [i for i, x in enumerate(w) if x == "b"]
        blocks = [tuple(w[i + 1 : j]) for i, j in zip(pos, pos[1:])]
        want = bool(blocks) and naive_be_word(tuple(block_letter(u) for u in blocks), f)
        assert naive_be_word(w, g) == want, w


# Finitary CTL* to ABE


def test_maximal_existentials():
    f = parse("Ef(F p) & Ef(G q)", "point")
    assert maximal_existentials(f) == [parse("Ef(F p)", "point"), parse("Ef(G q)", "point")]
    assert maximal_existentials(parse("Ef(F Ef(p))", "point")) == [parse("Ef(F Ef(p))", "point")]


def test_letter_substitution_degenerate():
    assert letter_substitution(frozenset({"p"}), {"p"}, [], []) == box("G", Implies(len1, p))


def test_be_oracle_validation():
    oracle = BeOracle(validate_len=3)
    oracle.add(["p"], "F p", "<G> L_p")
    assert oracle.lookup(parse("F p", "point"), ["p"]) == parse("<G> L_p", "hs")
    with pytest.raises(TranslationError, match="disagrees"):
        oracle.add(["p"], "G p", "<G> L_p")
    with pytest.raises(TranslationError, match="no oracle entry"):
        oracle.lookup(parse("X X p", "point"), ["p"])


def test_shipped_oracle_loads():
    assert len(load_be_oracle(validate_len=4).table) >= 10


@pytest.mark.parametrize("text", ["F p", "G p", "X p", "!p", "Ef(F p)", "Ef(p & Ef(F p))", "Af(G p)"])
def test_ctlstar_to_abe_agrees_with_finitary_evaluator(text):
    checked, bad = validate_ctlstar2abe(parse(text, "point"), 5)
    assert checked > 0 and bad == []


def test_ctlstar_to_abe_rejects_infinitary():
    with pytest.raises(TranslationError):
        finitary_ctlstar_to_abe(parse("E(F p)", "point"), load_be_oracle())


def test_ctlstar_to_abe_is_abe():
    g = finitary_ctlstar_to_abe(parse("Ef(F p)", "point"), load_be_oracle())
    assert {m.rel for m in subformulas(g) if isinstance(m, Modal)} <= {"A", "B", "E", "G"}


# HS_ct to hybrid


def _hyb_atom(x="x"):
    return Historically(Implies(Once(Var(x)), p))


def test_hybrid_atom_clause():
    assert hs_ct_to_hybrid(p) == Bind("x", Always(_hyb_atom()))


def test_hybrid_b_clause():
    assert hs_ct_to_hybrid(dia("B", p)) == Bind("x", Always(Prev(Once(And(_hyb_atom(), Once(Var("x")))))))


def test_hybrid_rejects_derived():
    with pytest.raises(TranslationError):
        hs_ct_to_hybrid(dia("A", p))


@pytest.mark.parametrize("f", all_hs(4, atoms=("p", "q")), ids=str)
def test_hybrid_output_well_formed(f):
    assert is_well_formed(hs_ct_to_hybrid(f))
    assert is_well_formed(hs_ct_to_hybrid(f, finitary=True))


def test_well_formed_examples():
    assert not is_well_formed(parse("E(F down x . H(!Y true -> A(F(x & p))))", "point"))
    assert is_well_formed(parse("A(G(p -> E(X q)))", "point"))
    assert not is_well_formed(parse("down x . down y . E(F (x & y))", "point"))


@pytest.mark.parametrize("text", ["p", "<B> p", "<E> p", "<Bbar> p", "<Ebar> p", "<Bbar><Ebar> p"])
def test_ct2hybrid_agreement(text):
    checked, bad = validate_ct2hybrid(parse(text, "hs"), 4, (fig1(), k1(), k2()))
    assert checked == 3 and bad == []


# Initial past elimination


def test_past_elimination_clauses():
    assert eliminate_initial_past(Prev(p)) == Bot()
    assert eliminate_initial_past(Since(p, q)) == q
    assert eliminate_initial_past(parse("Ef(F p) & Y q", "point")) == And(parse("Ef(F p)", "point"), Bot())


@given(ltl_formulas(future=False, max_leaves=6))
@settings(max_examples=200, deadline=None)
def test_past_elimination_output_past_free(f):
    g = eliminate_initial_past(f)
    assert not any(isinstance(s, PAST) for s in subformulas(g))


@given(ltl_formulas(max_leaves=5))
@slow
def test_past_elimination_congruence(f):
    checked, bad = validate_past_elim(f, 4)
    assert checked > 0 and bad == []
