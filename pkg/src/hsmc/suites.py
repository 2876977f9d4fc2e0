"""Verdict tables, word-level oracles and brute-force validators for the translations."""

from dataclasses import dataclass, field

from hsmc.expressiveness import agreement_check, distinguishing_report
from hsmc.formulas import And, Atom, Not, Or, atoms, build_length
from hsmc.hs_eval import EvalContext, check, check_ct, eval_st, lin_engine, loop_cap, recheck_witness
from hsmc.kripke import enumerate_lassos, enumerate_traces, fig1, k1, k2, kn, mn, vending
from hsmc.pointwise import (
    BeLanguage,
    FoEvaluator,
    _labels,
    _quantifier_depth,
    all_words,
    check_hybrid,
    check_ltl,
    eval_finitary_ctlstar,
    eval_ltl,
    lact_member,
)
from hsmc.syntax import parse
from hsmc.translate import (
    LetterTheory,
    closure_formula,
    eliminate_initial_past,
    finitary_ctlstar_to_abe,
    hs_ct_to_hybrid,
    hs_to_fo,
    is_well_formed,
    load_be_oracle,
    ltl_to_ab,
)

# Property 1 uses len7 in place of the much longer original length so it stays checkable.
VENDING_PROPERTIES = {
    "p1": "(p_operative & len7) -> ((<B><E> p_hotdog) & (<B><E> p_water) & (<B><E> p_candy))",
    "credit": "(<E> p_credit_050) -> !<A>(len2 & <E>(p_hotdog | p_candy))",
    "maint": "(<E> p_maint_end) -> <A><E> p_operative",
    "fair": "([A]<A><E> p_maint) -> [A]<A><E> p_operative",
    "water": "(<E> p_water) -> <E>(p_water & (<Abar>(len2 & <B> p_credit_2)) & (<Abar>(len2 & <B> p_credit_1)) & (<Abar>(len2 & <B> p_credit_050)))",
}

VENDING_EXPECTED = {
    ("p1", "st"): "fails",
    ("p1", "ct"): "fails",
    ("p1", "lin"): "fails",
    ("credit", "st"): "holds_in_bound",
    ("credit", "ct"): "holds_in_bound",
    ("credit", "lin"): "holds_in_bound",
    ("maint", "st"): "holds_in_bound",
    ("maint", "ct"): "holds_in_bound",
    ("maint", "lin"): "fails",
    ("fair", "st"): "holds_in_bound",
    ("fair", "ct"): "holds_in_bound",
    ("fair", "lin"): "fails",
    ("water", "st"): "holds_in_bound",
    ("water", "ct"): "fails",
    ("water", "lin"): "fails",
}


def vending_bound(prop, sem, bound=8):
    if prop == "p1":
        return 7
    if prop == "water" and sem == "ct":
        return min(bound, 6)
    return bound


@dataclass
class Row:
    name: str
    semantics: str
    bound: int
    expected: str
    verdict: object
    sound: bool = True

    @property
    def ok(self):
        return self.verdict.value == self.expected and self.sound


@dataclass
class SuiteResult:
    title: str
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    extra_ok: bool = True

    @property
    def ok(self):
        return self.extra_ok and all(r.ok for r in self.rows)


def _witness_sound(ctx, f, verdict):
    if verdict.value != "fails":
        return True
    return recheck_witness(ctx, f, verdict.witness) is False


def vending_suite(bound=8, jobs=1):
    k = vending()
    result = SuiteResult(f"vending machine (bound {bound}, property 1 at bound 7)")
    for name, text in VENDING_PROPERTIES.items():
        f = parse(text, "hs")
        for sem in ("st", "ct", "lin"):
            b = vending_bound(name, sem, bound)
            ctx = EvalContext(k, sem, b, jobs=jobs)
            v = check(ctx, f)
            result.rows.append(Row(name, sem, b, VENDING_EXPECTED[(name, sem)], v, _witness_sound(ctx, f, v)))
    return result


FIG7_EXPECTED = {("K1", "st"): "holds_in_bound", ("K2", "st"): "fails", ("K1", "ct"): "fails", ("K2", "ct"): "fails"}


def fig7_suite(bound=6):
    result = SuiteResult(f"K1 / K2 separation (bound {bound})")
    for (name, sem), (v, recheck) in distinguishing_report(bound).items():
        result.rows.append(Row(name, sem, bound, FIG7_EXPECTED[(name, sem)], v, recheck in (None, False)))
    return result


def fig9_suite(n, bound=None, jobs=1):
    bound = bound or 2 * n + 4
    fp = parse("F p", "point")
    result = SuiteResult(f"K_{n} / M_{n} (bound {bound})")
    result.rows.append(Row(f"K_{n} F p", "ltl", bound, "fails", check_ltl(kn(n), fp, bound)))
    result.rows.append(Row(f"M_{n} F p", "ltl", bound, "holds_in_bound", check_ltl(mn(n), fp, bound)))
    report = agreement_check(n, min(n, 3), 2 * n + 6, jobs=jobs)
    result.notes.append(report.to_text())
    result.extra_ok = report.ok
    return result


# Word-level oracles for the closure languages


def closure_oracle(kind, w, f, b):
    """Direct membership of w in the closure language of L_act(f) (letters other than b)."""
    w = tuple(w)
    n = len(w)

    def in_l(u):
        return len(u) > 0 and b not in u and lact_member(u, f)

    if kind == "bL":
        return w[0] == b and in_l(w[1:])
    if kind == "Lb":
        return w[-1] == b and in_l(w[:-1])
    if kind == "sigma_bL":
        return any(w[i] == b and in_l(w[i + 1 :]) for i in range(n))
    if kind == "sigma_bL_eps":
        return closure_oracle("sigma_bL", w, f, b) or w[-1] == b
    if kind == "Lb_sigma":
        return any(w[i] == b and in_l(w[:i]) for i in range(n))
    if kind == "L_eps_b_sigma":
        return closure_oracle("Lb_sigma", w, f, b) or w[0] == b
    if kind == "bLb":
        return n >= 3 and w[0] == b and w[-1] == b and in_l(w[1:-1])
    raise ValueError(f"unknown closure kind {kind!r}")


def fixed_letter_theory(b="b"):
    """Delta = {d1, d2} over Gamma = {a, c}: d1 marks all-a blocks (empty included), d2 the rest."""
    d1 = Or(closure_formula(Atom("a"), "bLb", b), And(Atom(b), build_length(2)))
    d2 = closure_formula(Not(Atom("a")), "bLb", b)
    theory = LetterTheory.build({"d1": d1, "d2": d2}, ("a", "c"), b)

    def block_letter(u):
        return "d1" if all(x == "a" for x in u) else "d2"

    return theory, block_letter


# Validators: each returns (checked, mismatches)


def validate_ltl2ab(f, n, k=None):
    k = k or fig1()
    g = ltl_to_ab(f)
    checked, bad = 0, []
    for lasso in enumerate_lassos(k, n):
        eng = lin_engine(k, lasso, g, 2 * n + 2)
        for i in range(n + 1):
            checked += 1
            if eval_ltl(k, lasso, i, f) != eng.eval(eng.space.canon(i, i))[0]:
                bad.append((lasso, i))
    return checked, bad


def validate_hs2fo(f, n, k=None):
    k = k or fig1()
    open_formula, _ = hs_to_fo(f)
    horizon = 2 * n + 2
    checked, bad = 0, []
    for lasso in enumerate_lassos(k, n):
        eng = lin_engine(k, lasso, f, horizon)
        cap = loop_cap(horizon, len(lasso.stem), len(lasso.loop), _quantifier_depth(open_formula))
        fo = FoEvaluator(lasso, _labels(k), cap)
        for i in range(n + 1):
            for j in range(i, n + 1):
                checked += 1
                if eng.eval(eng.space.canon(i, j))[0] != fo.ev(open_formula, {"x": i, "y": j}):
                    bad.append((lasso, i, j))
    return checked, bad


def validate_ct2hybrid(f, n, structures=None):
    sentence = hs_ct_to_hybrid(f, finitary=True)
    checked, bad = 0, []
    if not is_well_formed(sentence):
        bad.append(("not well formed", sentence))
    for k in structures or (fig1(), k1(), k2()):
        checked += 1
        a = check_ct(EvalContext(k, "ct", n, ct_mode="tree"), f).value
        b = check_hybrid(k, sentence, n, finitary=True).value
        if a != b:
            bad.append((k.initial, a, b))
    return checked, bad


def validate_closure(f, n, kind="bLb", b="b", gamma=None):
    gamma = tuple(gamma or sorted(set(atoms(f)) | {"a", "c"}))
    lang = BeLanguage(closure_formula(f, kind, b))
    checked, bad = 0, []
    for w in all_words(gamma + (b,), n):
        checked += 1
        if (w in lang) != closure_oracle(kind, w, f, b):
            bad.append(w)
    return checked, bad


def validate_past_elim(f, n, k=None):
    k = k or fig1()
    g = eliminate_initial_past(f)
    checked, bad = 0, []
    for lasso in enumerate_lassos(k, n):
        checked += 1
        if eval_ltl(k, lasso, 0, f) != eval_ltl(k, lasso, 0, g):
            bad.append(lasso)
    return checked, bad


def validate_ctlstar2abe(f, n, k=None, oracle=None):
    k = k or fig1()
    g = finitary_ctlstar_to_abe(f, oracle or load_be_oracle())
    ctx = EvalContext(k, "st", n)
    checked, bad = 0, []
    for rho in enumerate_traces(k, n, initial_only=True):
        checked += 1
        if eval_finitary_ctlstar(k, rho, 0, f, n) != eval_st(ctx, rho, g):
            bad.append(rho)
    return checked, bad


VALIDATORS = {
    "ltl2ab": validate_ltl2ab,
    "hs2fo": validate_hs2fo,
    "ct2hybrid": validate_ct2hybrid,
    "closure": validate_closure,
    "past-elim": validate_past_elim,
    "ctlstar2abe": validate_ctlstar2abe,
}
