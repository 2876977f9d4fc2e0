"""Formula ASTs shared by every dialect: HS, point-based (LTL, CTL*, hybrid) and FO."""

from dataclasses import dataclass, fields

RELATIONS = ("A", "Abar", "B", "Bbar", "E", "Ebar", "L", "Lbar", "D", "Dbar", "O", "Obar", "G")
CORE_RELATIONS = frozenset({"B", "Bbar", "E", "Ebar"})


def _node(cls):
    """Frozen dataclass whose structural hash is computed once and cached."""
    cls = dataclass(frozen=True)(cls)
    plain = cls.__hash__

    def cached(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = plain(self)
            object.__setattr__(self, "_hash", h)
        return h

    cls.__hash__ = cached
    return cls


class Formula:
    def __getstate__(self):
        # string hashes differ between processes, so never ship the cached one
        state = dict(self.__dict__)
        state.pop("_hash", None)
        return state

    def children(self):
        return tuple(getattr(self, f.name) for f in fields(self) if isinstance(getattr(self, f.name), Formula))


# Boolean nodes, shared by all dialects


@_node
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("atom name must be nonempty")


@_node
class Top(Formula):
    pass


@_node
class Bot(Formula):
    pass


@_node
class Not(Formula):
    arg: Formula


@_node
class And(Formula):
    left: Formula
    right: Formula


@_node
class Or(Formula):
    left: Formula
    right: Formula


@_node
class Implies(Formula):
    left: Formula
    right: Formula


# HS


@_node
class Modal(Formula):
    rel: str
    universal: bool
    arg: Formula

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")


# Point-based: future, past, path quantifiers, hybrid binders


@_node
class Next(Formula):
    arg: Formula


@_node
class Until(Formula):
    left: Formula
    right: Formula


@_node
class Eventually(Formula):
    arg: Formula


@_node
class Always(Formula):
    arg: Formula


@_node
class Prev(Formula):
    arg: Formula


@_node
class Since(Formula):
    left: Formula
    right: Formula


@_node
class Once(Formula):
    arg: Formula


@_node
class Historically(Formula):
    arg: Formula


@_node
class Exists(Formula):
    arg: Formula


@_node
class Forall(Formula):
    arg: Formula


@_node
class ExistsF(Formula):
    arg: Formula


@_node
class ForallF(Formula):
    arg: Formula


@_node
class Var(Formula):
    name: str


@_node
class Bind(Formula):
    var: str
    arg: Formula


# FO over paths


@_node
class Pred(Formula):
    atom: str
    var: str


@_node
class Le(Formula):
    left: str
    right: str


@_node
class Lt(Formula):
    left: str
    right: str


@_node
class FoExists(Formula):
    var: str
    arg: Formula


@_node
class FoForall(Formula):
    var: str
    arg: Formula


UNARY_BOOL = (Not,)
BINARY_BOOL = (And, Or, Implies)
FUTURE = (Next, Until, Eventually, Always)
PAST = (Prev, Since, Once, Historically)
QUANTIFIERS = (Exists, Forall, ExistsF, ForallF)
FINITARY_QUANTIFIERS = (ExistsF, ForallF)
INFINITE_QUANTIFIERS = (Exists, Forall)


def dia(rel, f):
    return Modal(rel, False, f)


def box(rel, f):
    return Modal(rel, True, f)


def conj(items):
    items = list(items)
    if not items:
        return Top()
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disj(items):
    items = list(items)
    if not items:
        return Bot()
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def subformulas(f):
    """Post-order list of distinct subformulas (children before parents)."""
    seen = set()
    order = []
    stack = [(f, False)]
    while stack:
        g, done = stack.pop()
        if done:
            if g not in seen:
                seen.add(g)
                order.append(g)
            continue
        if g in seen:
            continue
        stack.append((g, True))
        for c in reversed(g.children()):
            stack.append((c, False))
    return order


def formula_size(f):
    """Number of AST nodes; boxes, F and G count as one node each."""
    return 1 + sum(formula_size(c) for c in f.children())


def atoms(f):
    out = set()
    for g in subformulas(f):
        if isinstance(g, Atom):
            out.add(g.name)
        elif isinstance(g, Pred):
            out.add(g.atom)
    return out


def relations(f):
    return {g.rel for g in subformulas(f) if isinstance(g, Modal)}


def free_vars(f):
    """Free position variables of a hybrid or FO formula."""
    if isinstance(f, Var):
        return frozenset({f.name})
    if isinstance(f, Pred):
        return frozenset({f.var})
    if isinstance(f, (Le, Lt)):
        return frozenset({f.left, f.right})
    if isinstance(f, Bind):
        return free_vars(f.arg) - {f.var}
    if isinstance(f, (FoExists, FoForall)):
        return free_vars(f.arg) - {f.var}
    out = frozenset()
    for c in f.children():
        out |= free_vars(c)
    return out


def temporal_depth(f):
    d = max((temporal_depth(c) for c in f.children()), default=0)
    if isinstance(f, FUTURE + PAST + (Modal,)):
        d += 1
    return d


def is_pure_ltl(f):
    bad = PAST + QUANTIFIERS + (Var, Bind, Modal, Pred, Le, Lt, FoExists, FoForall)
    return not any(isinstance(g, bad) for g in subformulas(f))


def is_pure_past(f):
    bad = FUTURE + QUANTIFIERS + (Var, Bind, Modal, Pred, Le, Lt, FoExists, FoForall)
    return not any(isinstance(g, bad) for g in subformulas(f))


def is_ctlstar(f):
    bad = PAST + FINITARY_QUANTIFIERS + (Var, Bind, Modal, Pred, Le, Lt, FoExists, FoForall)
    return not any(isinstance(g, bad) for g in subformulas(f))


def is_finitary_ctlstar(f):
    bad = PAST + INFINITE_QUANTIFIERS + (Var, Bind, Modal, Pred, Le, Lt, FoExists, FoForall)
    return not any(isinstance(g, bad) for g in subformulas(f))


def build_length(n):
    """(<B>^(n-1) true) & ([B]^n false): holds exactly on intervals with n points."""
    if n < 1:
        raise ValueError("length_n needs n >= 1")
    left = Top()
    for _ in range(n - 1):
        left = dia("B", left)
    right = Bot()
    for _ in range(n):
        right = box("B", right)
    return And(left, right)


def match_length(f):
    """Return n if f is exactly build_length(n), else None."""
    if not isinstance(f, And):
        return None
    left, right, ex = f.left, f.right, 0
    while isinstance(left, Modal) and left.rel == "B" and not left.universal:
        left, ex = left.arg, ex + 1
    if not isinstance(left, Top):
        return None
    un = 0
    while isinstance(right, Modal) and right.rel == "B" and right.universal:
        right, un = right.arg, un + 1
    if not isinstance(right, Bot) or un != ex + 1:
        return None
    return un


def expand_derived(f):
    """Rewrite every relation outside {B, Bbar, E, Ebar} in terms of those four."""
    if isinstance(f, (Atom, Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(expand_derived(f.arg))
    if isinstance(f, BINARY_BOOL):
        return type(f)(expand_derived(f.left), expand_derived(f.right))
    if isinstance(f, Modal):
        arg = expand_derived(f.arg)
        if f.rel in CORE_RELATIONS:
            return Modal(f.rel, f.universal, arg)
        if f.universal:
            return Not(_expand_diamond(f.rel, Not(arg)))
        return _expand_diamond(f.rel, arg)
    raise TypeError(f"not an HS formula: {f!r}")


def _expand_diamond(rel, g):
    len1 = build_length(1)
    if rel == "A":
        here = And(box("E", Bot()), Or(g, dia("Bbar", g)))
        return Or(here, dia("E", here))
    if rel == "Abar":
        here = And(box("B", Bot()), Or(g, dia("Ebar", g)))
        return Or(here, dia("B", here))
    if rel == "L":
        return _expand_diamond("A", And(Not(len1), _expand_diamond("A", g)))
    if rel == "Lbar":
        return _expand_diamond("Abar", And(Not(len1), _expand_diamond("Abar", g)))
    if rel == "D":
        return dia("B", dia("E", g))
    if rel == "Dbar":
        return dia("Bbar", dia("Ebar", g))
    if rel == "O":
        return dia("E", And(Not(len1), dia("Bbar", g)))
    if rel == "Obar":
        return dia("B", And(Not(len1), dia("Ebar", g)))
    if rel == "G":
        return disj([g, dia("B", g), dia("E", g), dia("B", dia("E", g))])
    raise ValueError(f"unknown relation {rel!r}")


def expand_point_shorthands(f):
    """Rewrite F, G, O, H into U and S so translation clause tables are total."""
    if isinstance(f, Eventually):
        return Until(Top(), expand_point_shorthands(f.arg))
    if isinstance(f, Always):
        return Not(Until(Top(), Not(expand_point_shorthands(f.arg))))
    if isinstance(f, Once):
        return Since(Top(), expand_point_shorthands(f.arg))
    if isinstance(f, Historically):
        return Not(Since(Top(), Not(expand_point_shorthands(f.arg))))
    kids = f.children()
    if not kids:
        return f
    vals = {}
    for fl in fields(f):
        v = getattr(f, fl.name)
        vals[fl.name] = expand_point_shorthands(v) if isinstance(v, Formula) else v
    return type(f)(**vals)
