"""Constructive formula mappings: HS to FO, LTL to AB, BE closure constructions,
letter substitution, finitary CTL* to ABE, HS_ct to hybrid CTL*, and initial past elimination."""

import itertools
from dataclasses import dataclass
from importlib import resources

import yaml

from hsmc.formulas import (
    And,
    Always,
    Atom,
    Bind,
    Bot,
    Eventually,
    Exists,
    ExistsF,
    FoExists,
    Forall,
    ForallF,
    Formula,
    Historically,
    Implies,
    Le,
    Lt,
    Modal,
    Next,
    Not,
    Once,
    Or,
    Pred,
    Prev,
    Since,
    Top,
    Until,
    Var,
    FoForall,
    atoms,
    box,
    build_length,
    conj,
    dia,
    disj,
    expand_point_shorthands,
    free_vars,
    is_finitary_ctlstar,
    is_pure_ltl,
    relations,
    subformulas,
)
from hsmc.pointwise import all_words, lact_member, letter_name, BeLanguage
from hsmc.syntax import parse, render

CLOSURE_KINDS = ("bL", "Lb", "sigma_bL", "sigma_bL_eps", "Lb_sigma", "L_eps_b_sigma", "bLb")


class TranslationError(ValueError):
    pass


def _fresh(prefix):
    counter = itertools.count()
    return lambda: f"{prefix}{next(counter)}"


# HS over {B, E, Bbar, Ebar} to FO


def hs_to_fo(f):
    """Return (h(f, x, y), sentence) where the sentence asserts f on every initial interval."""
    bad = relations(f) - {"B", "E", "Bbar", "Ebar"}
    if bad:
        raise TranslationError(f"expand derived relations first; found {sorted(bad)}")
    fresh = _fresh("z")
    open_formula = _h(f, "x", "y", fresh)
    z = fresh()
    sentence = FoExists("x", And(FoForall(z, Le("x", z)), FoForall("y", open_formula)))
    return open_formula, sentence


def _h(f, x, y, fresh):
    if isinstance(f, Atom):
        z = fresh()
        return FoForall(z, Implies(And(Le(x, z), Le(z, y)), Pred(f.name, z)))
    if isinstance(f, Top):
        return Top()
    if isinstance(f, Bot):
        return Bot()
    if isinstance(f, Not):
        return Not(_h(f.arg, x, y, fresh))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_h(f.left, x, y, fresh), _h(f.right, x, y, fresh))
    if isinstance(f, Modal):
        if f.universal:
            return Not(_h(Modal(f.rel, False, Not(f.arg)), x, y, fresh))
        z = fresh()
        if f.rel == "E":
            return FoExists(z, And(And(Lt(x, z), Le(z, y)), _h(f.arg, z, y, fresh)))
        if f.rel == "B":
            return FoExists(z, And(And(Le(x, z), Lt(z, y)), _h(f.arg, x, z, fresh)))
        if f.rel == "Ebar":
            return FoExists(z, And(Lt(z, x), _h(f.arg, z, y, fresh)))
        if f.rel == "Bbar":
            return FoExists(z, And(Lt(y, z), _h(f.arg, x, z, fresh)))
    raise TranslationError(f"unsupported node {f!r}")


# LTL to AB


def ltl_to_ab(f):
    if not is_pure_ltl(f):
        raise TranslationError("ltl_to_ab needs a pure LTL formula")
    return _ltl_ab(expand_point_shorthands(f))


def _ltl_ab(f):
    len1, len2 = build_length(1), build_length(2)
    if isinstance(f, (Atom, Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(_ltl_ab(f.arg))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_ltl_ab(f.left), _ltl_ab(f.right))
    if isinstance(f, Next):
        return dia("A", And(len2, dia("A", And(len1, _ltl_ab(f.arg)))))
    if isinstance(f, Until):
        goal = dia("A", And(len1, _ltl_ab(f.right)))
        keep = box("B", dia("A", And(len1, _ltl_ab(f.left))))
        return dia("A", And(goal, keep))
    raise TranslationError(f"unsupported node {f!r}")


# BE closure constructions over Sigma = Gamma + {b}


def _check_be(f, name):
    for g in subformulas(f):
        if isinstance(g, Modal) and g.rel not in ("B", "E"):
            raise TranslationError(f"{name} needs a BE formula; found relation {g.rel}")
        if not isinstance(g, (Atom, Top, Bot, Not, And, Or, Implies, Modal)):
            raise TranslationError(f"{name} needs a BE formula; found {type(g).__name__}")


def mirror(f):
    """Swap B and E (and their inverses): L_act(mirror(f)) is the reversal of L_act(f)."""
    swap = {"B": "E", "E": "B", "Bbar": "Ebar", "Ebar": "Bbar"}
    if isinstance(f, Modal):
        return Modal(swap.get(f.rel, f.rel), f.universal, mirror(f.arg))
    if isinstance(f, Not):
        return Not(mirror(f.arg))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(mirror(f.left), mirror(f.right))
    return f


def _h_b(f, b):
    """Formula true on b.u exactly when f is true on u (u over Gamma)."""
    bb = Atom(b)
    starts_b = dia("B", bb)
    if isinstance(f, Atom):
        return Or(f, conj([starts_b, dia("E", f), box("E", f)]))
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(_h_b(f.arg, b))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_h_b(f.left, b), _h_b(f.right, b))
    if isinstance(f, Modal):
        if f.universal:
            return Not(_h_b(Modal(f.rel, False, Not(f.arg)), b))
        inner = _h_b(f.arg, b)
        if f.rel == "B":
            return Or(And(dia("B", inner), Not(starts_b)), dia("B", And(inner, starts_b)))
        return Or(And(dia("E", inner), Not(starts_b)), And(starts_b, dia("E", dia("E", inner))))
    raise TranslationError(f"unsupported node {f!r}")


def _k_b(f, b):
    """Formula true on w.b exactly when f is true on w (w over Sigma, here w in bL)."""
    bb = Atom(b)
    ends_b = dia("E", bb)
    if isinstance(f, Atom):
        if f.name == b:
            return f
        return Or(f, conj([ends_b, dia("B", f), box("B", f)]))
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(_k_b(f.arg, b))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_k_b(f.left, b), _k_b(f.right, b))
    if isinstance(f, Modal):
        if f.universal:
            return Not(_k_b(Modal(f.rel, False, Not(f.arg)), b))
        inner = _k_b(f.arg, b)
        if f.rel == "B":
            return Or(And(dia("B", inner), Not(ends_b)), And(ends_b, dia("B", dia("B", inner))))
        return Or(And(dia("E", inner), Not(ends_b)), dia("E", And(inner, ends_b)))
    raise TranslationError(f"unsupported node {f!r}")


def _b_l(f, b):
    bb = Atom(b)
    guard = conj([Not(build_length(1)), dia("B", bb), box("E", And(Not(bb), box("B", Not(bb))))])
    return And(guard, _h_b(f, b))


def _sigma_b(b):
    return Or(Atom(b), dia("E", Atom(b)))


def closure_formula(f, kind, b):
    """BE formula over Gamma + {b} for one of the seven languages built from L = L_act(f)."""
    if kind not in CLOSURE_KINDS:
        raise TranslationError(f"unknown closure kind {kind!r}")
    _check_be(f, "closure_formula")
    if b in atoms(f):
        raise TranslationError(f"separator letter {b!r} occurs in the formula")
    if kind == "bL":
        return _b_l(f, b)
    if kind == "sigma_bL":
        phi = _b_l(f, b)
        return Or(phi, dia("E", phi))
    if kind == "sigma_bL_eps":
        return Or(closure_formula(f, "sigma_bL", b), _sigma_b(b))
    if kind == "Lb":
        return mirror(_b_l(mirror(f), b))
    if kind == "Lb_sigma":
        return mirror(closure_formula(mirror(f), "sigma_bL", b))
    if kind == "L_eps_b_sigma":
        return mirror(closure_formula(mirror(f), "sigma_bL_eps", b))
    bb = Atom(b)
    guard = conj(
        [
            Not(build_length(1)),
            Not(build_length(2)),
            dia("B", bb),
            dia("E", bb),
            box("E", box("B", Not(bb))),
        ]
    )
    return And(guard, _k_b(_b_l(f, b), b))


@dataclass(frozen=True)
class LetterTheory:
    """For each letter d of Delta, a BE formula over Gamma + {b} defining b.L_d.b."""

    formulas: tuple
    gamma: tuple
    b: str

    @classmethod
    def build(cls, mapping, gamma, b):
        return cls(tuple(sorted(mapping.items())), tuple(gamma), b)

    @property
    def letters(self):
        return tuple(d for d, _ in self.formulas)

    def formula(self, d):
        for name, f in self.formulas:
            if name == d:
                return f
        raise TranslationError(f"letter {d!r} has no formula in the theory")

    def validate(self, max_len=6):
        """The letter languages must be disjoint on words b.Gamma*.b; returns the first overlap or None."""
        langs = {d: BeLanguage(f) for d, f in self.formulas}
        for n in range(0, max_len - 1):
            for mid in itertools.product(self.gamma, repeat=n):
                w = (self.b,) + mid + (self.b,)
                hits = [d for d, lang in langs.items() if w in lang]
                if len(hits) > 1:
                    return w, hits
        return None


def closure_substitute(f, theory, b):
    """BE formula over Gamma + {b} for Gamma* b h^-1(L_act(f)) Gamma*."""
    _check_be(f, "closure_substitute")
    for a in atoms(f):
        theory.formula(a)
    bb = Atom(b)
    psi_b = conj([Not(build_length(1)), dia("B", bb), dia("E", bb), box("E", box("B", Not(bb)))])
    well = box("G", Implies(psi_b, disj(theory.formula(d) for d in theory.letters)))
    has_block = dia("G", psi_b)

    def plus(g):
        if isinstance(g, Atom):
            return And(has_block, box("G", Implies(psi_b, theory.formula(g.name))))
        if isinstance(g, Top):
            return And(has_block, well)
        if isinstance(g, Bot):
            return Bot()
        if isinstance(g, Not):
            return conj([has_block, well, Not(plus(g.arg))])
        if isinstance(g, And):
            return And(plus(g.left), plus(g.right))
        if isinstance(g, Or):
            return plus(Not(And(Not(g.left), Not(g.right))))
        if isinstance(g, Implies):
            return plus(Not(And(g.left, Not(g.right))))
        if isinstance(g, Modal):
            if g.universal:
                return plus(Not(Modal(g.rel, False, Not(g.arg))))
            inner = plus(g.arg)
            if g.rel == "B":
                xi = And(dia("E", bb), dia("B", And(inner, dia("E", bb))))
                return And(well, Or(xi, dia("B", xi)))
            xi = And(dia("B", bb), dia("E", And(inner, dia("B", bb))))
            return And(well, Or(xi, dia("E", xi)))
        raise TranslationError(f"unsupported node {g!r}")

    return plus(f)


def substitute_preimage(w, b, block_letter):
    """Direct reading of w as x b u1 ... um y (x, y without b, each ui ending in b).

    Returns the Delta word block_letter(u1 minus b) ... or None when w has fewer than two b's.
    """
    pos = [i for i, x in enumerate(w) if x == b]
    if len(pos) < 2:
        return None
    return tuple(block_letter(tuple(w[p + 1 : q])) for p, q in zip(pos, pos[1:]))


# Finitary CTL* to ABE


def letter_substitution(letter, ap, h_names, h_formulas):
    """[G](len1 -> conditions describing the letter) for a letter given as a set of names."""
    parts = []
    for name, psi in zip(h_names, h_formulas):
        cond = dia("A", psi)
        parts.append(cond if name in letter else Not(cond))
    for p in sorted(ap):
        parts.append(Atom(p) if p in letter else Not(Atom(p)))
    return box("G", Implies(build_length(1), conj(parts)))


def alphabet_letters(names):
    names = sorted(names)
    out = []
    for n in range(len(names) + 1):
        for combo in itertools.combinations(names, n):
            out.append(frozenset(combo))
    return out


def _substitute_atoms(f, table):
    if isinstance(f, Atom):
        if f.name not in table:
            raise TranslationError(f"oracle formula uses unknown letter {f.name!r}")
        return table[f.name]
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(_substitute_atoms(f.arg, table))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_substitute_atoms(f.left, table), _substitute_atoms(f.right, table))
    if isinstance(f, Modal):
        return Modal(f.rel, f.universal, _substitute_atoms(f.arg, table))
    raise TranslationError(f"unsupported node {f!r}")


def _normalize_forall(f):
    if isinstance(f, ForallF):
        return Not(ExistsF(Not(_normalize_forall(f.arg))))
    if isinstance(f, ExistsF):
        return ExistsF(_normalize_forall(f.arg))
    if isinstance(f, Not):
        return Not(_normalize_forall(f.arg))
    if isinstance(f, (And, Or, Implies, Until)):
        return type(f)(_normalize_forall(f.left), _normalize_forall(f.right))
    if isinstance(f, (Next, Eventually, Always)):
        return type(f)(_normalize_forall(f.arg))
    return f


def maximal_existentials(f):
    """Maximal Ef subformulas in first-occurrence order."""
    out = []

    def walk(g):
        if isinstance(g, ExistsF):
            if g not in out:
                out.append(g)
            return
        for c in g.children():
            walk(c)

    walk(f)
    return out


def _replace(f, table):
    if f in table:
        return table[f]
    if isinstance(f, Formula) and f.children():
        if isinstance(f, Not):
            return Not(_replace(f.arg, table))
        if isinstance(f, (And, Or, Implies, Until)):
            return type(f)(_replace(f.left, table), _replace(f.right, table))
        if isinstance(f, (Next, Eventually, Always)):
            return type(f)(_replace(f.arg, table))
    return f


class BeOracle:
    """Validated table from (finite-word LTL formula, alphabet) to an equivalent BE formula."""

    def __init__(self, validate_len=4):
        self.validate_len = validate_len
        self.table = {}

    def add(self, alphabet, ltl, be):
        alphabet = tuple(sorted(alphabet))
        ltl_f = parse(ltl, "point") if isinstance(ltl, str) else ltl
        be_f = parse(be, "hs") if isinstance(be, str) else be
        letters = alphabet_letters(alphabet)
        lang = BeLanguage(be_f)
        for w in all_words(letters, self.validate_len):
            if (w in lang) != lact_member(w, ltl_f, "ltl_finite"):
                shown = " ".join(letter_name(x) for x in w)
                raise TranslationError(f"oracle entry for {render(ltl_f)!r} disagrees on word {shown}")
        self.table[(render(ltl_f), alphabet)] = be_f

    def lookup(self, ltl_f, alphabet):
        key = (render(ltl_f), tuple(sorted(alphabet)))
        if key not in self.table:
            raise TranslationError(f"no oracle entry for {key[0]!r} over {list(key[1])}")
        return self.table[key]


def load_be_oracle(text=None, validate_len=4):
    if text is None:
        text = resources.files("hsmc").joinpath("data/be_oracle.yaml").read_text()
    oracle = BeOracle(validate_len)
    for entry in yaml.safe_load(text) or []:
        oracle.add(entry["alphabet"], entry["ltl"], entry["be"])
    return oracle


def finitary_ctlstar_to_abe(f, be_oracle, ap=None):
    """ABE formula phi_HS with rho, 0 |= f iff rho |=_st phi_HS (same trace-length bound on both sides)."""
    if not is_finitary_ctlstar(f):
        raise TranslationError("finitary_ctlstar_to_abe needs a finitary CTL* formula")
    f = _normalize_forall(f)
    ap = set(atoms(f)) if ap is None else set(ap)
    return _ctlstar_abe(f, be_oracle, ap)


def _ctlstar_abe(f, oracle, ap):
    hs = maximal_existentials(f)
    names = [f"h{i}" for i in range(len(hs))]
    inner = [_ctlstar_abe(h.arg, oracle, ap) for h in hs]
    flat = _replace(f, {h: Atom(n) for h, n in zip(hs, names)})
    alphabet = sorted(set(ap) | set(names))
    be = oracle.lookup(flat, alphabet)
    table = {letter_name(P): letter_substitution(P, ap, names, inner) for P in alphabet_letters(alphabet)}
    return _substitute_atoms(be, table)


# HS_ct to hybrid CTL* with linear past


def hs_ct_to_hybrid(f, finitary=False):
    """Well-formed sentence down x . G f(phi, x) of (finitary) hybrid CTL*."""
    bad = relations(f) - {"B", "E", "Bbar", "Ebar"}
    if bad:
        raise TranslationError(f"expand derived relations first; found {sorted(bad)}")
    fresh = _fresh("y")
    return Bind("x", Always(_hyb(f, "x", fresh, finitary)))


def _hyb(f, x, fresh, finitary):
    vx = Var(x)
    if isinstance(f, Atom):
        return Historically(Implies(Once(vx), f))
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(_hyb(f.arg, x, fresh, finitary))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_hyb(f.left, x, fresh, finitary), _hyb(f.right, x, fresh, finitary))
    if isinstance(f, Modal):
        if f.universal:
            return Not(_hyb(Modal(f.rel, False, Not(f.arg)), x, fresh, finitary))
        if f.rel == "B":
            return Prev(Once(And(_hyb(f.arg, x, fresh, finitary), Once(vx))))
        if f.rel == "Bbar":
            quant = ExistsF if finitary else Exists
            return And(quant(Next(Eventually(_hyb(f.arg, x, fresh, finitary)))), Once(vx))
        y = fresh()
        back_to_y = Bind(x, Eventually(And(Var(y), _hyb(f.arg, x, fresh, finitary))))
        if f.rel == "E":
            return Bind(y, Once(And(vx, Next(Eventually(back_to_y)))))
        if f.rel == "Ebar":
            return Bind(y, Once(And(Next(Eventually(vx)), back_to_y)))
    raise TranslationError(f"unsupported node {f!r}")


def _is_once_of(f, x):
    if isinstance(f, Once) and f.arg == Var(x):
        return True
    return isinstance(f, Since) and isinstance(f.left, Top) and f.right == Var(x)


def is_well_formed(f):
    """Every path quantifier subformula has at most one free variable x and sits in (O x) & Q."""

    def walk(g, parent):
        if isinstance(g, (Exists, Forall, ExistsF, ForallF)):
            fv = free_vars(g)
            if len(fv) > 1:
                return False
            if fv:
                (x,) = fv
                if not isinstance(parent, And):
                    return False
                other = parent.right if parent.left is g else parent.left
                if not _is_once_of(other, x):
                    return False
        return all(walk(c, g) for c in g.children())

    return walk(f, None)


# Past elimination at the initial position


def eliminate_initial_past(f):
    """Map a formula to one equivalent at position 0: Y becomes false, a S b becomes b."""
    if isinstance(f, Prev):
        return Bot()
    if isinstance(f, Since):
        return eliminate_initial_past(f.right)
    if isinstance(f, (Once, Historically)):
        return eliminate_initial_past(f.arg)
    if isinstance(f, Not):
        return Not(eliminate_initial_past(f.arg))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(eliminate_initial_past(f.left), eliminate_initial_past(f.right))
    # atoms, constants and any other subformula act as letters
    return f
