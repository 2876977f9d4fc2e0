"""Point-based evaluators: LTL with past on lassos, CTL* and finitary CTL*, hybrid CTL*
with linear past and binders, FO over paths, and finite-word languages (L_act)."""

import itertools
import math

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
    FoForall,
    Forall,
    ForallF,
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
    free_vars,
    is_ctlstar,
    is_finitary_ctlstar,
    relations,
    subformulas,
    temporal_depth,
)
from hsmc.hs_eval import Compiled, Engine, Verdict, loop_cap
from hsmc.kripke import Lasso, enumerate_lassos, enumerate_traces

LTL_NODES = (Atom, Top, Bot, Not, And, Or, Implies, Next, Until, Eventually, Always, Prev, Since, Once, Historically)


class PointEvalError(ValueError):
    pass


# LTL with past on a lasso, exact


def _ltl_tables(lasso, f, labels):
    """Truth tables over the unrolled lasso; the last loop copy wraps onto itself."""
    d = temporal_depth(f)
    stem = lasso.stem + lasso.loop * (d + 1)
    path = stem + lasso.loop
    n, first = len(path), len(stem)
    nxt = list(range(1, n)) + [first]
    table = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            val = [g.name in labels(s) for s in path]
        elif isinstance(g, Top):
            val = [True] * n
        elif isinstance(g, Bot):
            val = [False] * n
        elif isinstance(g, Not):
            val = [not v for v in table[g.arg]]
        elif isinstance(g, And):
            val = [a and b for a, b in zip(table[g.left], table[g.right])]
        elif isinstance(g, Or):
            val = [a or b for a, b in zip(table[g.left], table[g.right])]
        elif isinstance(g, Implies):
            val = [(not a) or b for a, b in zip(table[g.left], table[g.right])]
        elif isinstance(g, Next):
            a = table[g.arg]
            val = [a[nxt[i]] for i in range(n)]
        elif isinstance(g, (Until, Eventually, Always)):
            if isinstance(g, Until):
                left, right = table[g.left], table[g.right]
            elif isinstance(g, Eventually):
                left, right = [True] * n, table[g.arg]
            else:
                left, right = table[g.arg], [False] * n
            val = _until(left, right, first, nxt, strong=not isinstance(g, Always))
        elif isinstance(g, Prev):
            a = table[g.arg]
            val = [False] + a[:-1]
        elif isinstance(g, (Since, Once, Historically)):
            if isinstance(g, Since):
                left, right = table[g.left], table[g.right]
            elif isinstance(g, Once):
                left, right = [True] * n, table[g.arg]
            else:
                left, right = [not v for v in table[g.arg]], None
            if right is None:
                # H a = !(true S !a)
                once_not = _since([True] * n, left)
                val = [not v for v in once_not]
            else:
                val = _since(left, right)
        else:
            raise PointEvalError(f"not an LTL formula node: {g!r}")
        table[g] = val
    return table, first, len(lasso.loop)


def _until(left, right, first, nxt, strong=True):
    """Least fixpoint of right | (left & X .) (or greatest of left & X . for G)."""
    n = len(left)
    if strong:
        val = [False] * n
        for _ in range(2):
            for i in range(n - 1, first - 1, -1):
                val[i] = right[i] or (left[i] and val[nxt[i]])
        for i in range(first - 1, -1, -1):
            val[i] = right[i] or (left[i] and val[i + 1])
        return val
    loop_all = all(left[first:])
    val = [False] * n
    for i in range(first, n):
        val[i] = loop_all
    for i in range(first - 1, -1, -1):
        val[i] = left[i] and val[i + 1]
    return val


def _since(left, right):
    val = []
    prev = False
    for i in range(len(left)):
        prev = right[i] or (i > 0 and left[i] and prev)
        val.append(prev)
    return val


def _fold_position(i, first, loop_len):
    if i < first:
        return i
    return first + (i - first) % loop_len


def eval_ltl(k, lasso, i, f):
    """Truth of an LTL (with past) formula at position i of stem.loop^omega."""
    if not all(isinstance(g, LTL_NODES) for g in subformulas(f)):
        raise PointEvalError("eval_ltl needs a quantifier-free LTL formula")
    table, first, p = _ltl_tables(lasso, f, _labels(k))
    return table[f][_fold_position(i, first, p)]


def _labels(k):
    return k.labels.__getitem__


def check_ltl(k, f, bound):
    """Check f at position 0 of every initial lasso with |stem| + |loop| <= bound."""
    count = 0
    for lasso in enumerate_lassos(k, bound):
        count += 1
        if not eval_ltl(k, lasso, 0, f):
            return Verdict("fails", lasso, True, True, count)
    return Verdict("holds_in_bound", None, True, True, count)


# Paths for the branching evaluators


class _FinitePath:
    def __init__(self, states):
        self.states = tuple(states)
        self.key = ("trace", self.states)

    def state(self, i):
        return self.states[i]

    def succ(self, i):
        return i + 1 if i + 1 < len(self.states) else None

    def prefix(self, i):
        return self.states[: i + 1]

    def rep(self, i):
        return i


class _LassoPath:
    """A lasso unrolled to ``horizon`` positions whose last loop copy wraps onto itself."""

    def __init__(self, lasso, horizon):
        self.lasso = lasso
        p = len(lasso.loop)
        s = len(lasso.stem)
        self.horizon = max(horizon, s + 2 * p)
        self.horizon = s + math.ceil((self.horizon - s) / p) * p
        self.wrap = self.horizon - p
        self.key = ("lasso", lasso, self.horizon)

    def state(self, i):
        return self.lasso.state_at(i)

    def succ(self, i):
        return i + 1 if i + 1 < self.horizon else self.wrap

    def prefix(self, i):
        return self.lasso.prefix(i + 1)

    def rep(self, i):
        if i < self.horizon:
            return i
        return self.wrap + (i - self.wrap) % len(self.lasso.loop)


class BranchingEvaluator:
    """Evaluator for CTL*, finitary CTL* and hybrid CTL* with linear past.

    ``memoryful`` quantifiers keep the concrete prefix of the current path (hybrid
    semantics); otherwise finitary quantifiers start a fresh trace at the current state.
    """

    def __init__(self, k, bound, memoryful=True, depth_extra=2):
        self.k = k
        self.bound = bound
        self.memoryful = memoryful
        self.depth_extra = depth_extra
        self.memo = {}
        self._fv = {}
        self._lassos = None
        self._by_prefix = {}
        self._trace_ext = {}
        self.depth = 0

    def free(self, f):
        out = self._fv.get(f)
        if out is None:
            out = free_vars(f)
            self._fv[f] = out
        return out

    def lasso_path(self, lasso):
        h = len(lasso.stem) + (self.depth + self.depth_extra) * len(lasso.loop)
        return _LassoPath(lasso, h)

    def lassos_with_prefix(self, prefix):
        if self._lassos is None:
            self._lassos = list(enumerate_lassos(self.k, self.bound))
        out = self._by_prefix.get(prefix)
        if out is None:
            n = len(prefix)
            out = [lz for lz in self._lassos if lz.prefix(n) == prefix]
            self._by_prefix[prefix] = out
        return out

    def traces_extending(self, prefix):
        out = self._trace_ext.get(prefix)
        if out is None:
            out = []
            layer = [prefix]
            while layer and len(layer[0]) <= self.bound:
                out.extend(layer)
                layer = [t + (s,) for t in layer for s in self.k.succ[t[-1]]]
            self._trace_ext[prefix] = out
        return out

    def traces_from(self, state):
        return self.traces_extending((state,))

    def ev(self, f, path, i, g):
        fv = self.free(f)
        try:
            gkey = tuple(sorted((v, g[v]) for v in fv))
        except KeyError as exc:
            raise PointEvalError(f"unbound variable {exc.args[0]!r}") from None
        key = (f, path.key, i, gkey)
        hit = self.memo.get(key)
        if hit is None:
            hit = self._ev(f, path, i, g)
            self.memo[key] = hit
        return hit

    def _walk(self, path, i):
        seen = set()
        j = i
        while j is not None and j not in seen:
            seen.add(j)
            yield j
            j = path.succ(j)

    def _ev(self, f, path, i, g):
        if isinstance(f, Atom):
            return f.name in self.k.labels[path.state(i)]
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Var):
            return g[f.name] == i
        if isinstance(f, Not):
            return not self.ev(f.arg, path, i, g)
        if isinstance(f, And):
            return self.ev(f.left, path, i, g) and self.ev(f.right, path, i, g)
        if isinstance(f, Or):
            return self.ev(f.left, path, i, g) or self.ev(f.right, path, i, g)
        if isinstance(f, Implies):
            return (not self.ev(f.left, path, i, g)) or self.ev(f.right, path, i, g)
        if isinstance(f, Next):
            j = path.succ(i)
            return j is not None and self.ev(f.arg, path, j, g)
        if isinstance(f, Until):
            for j in self._walk(path, i):
                if self.ev(f.right, path, j, g):
                    return True
                if not self.ev(f.left, path, j, g):
                    return False
            return False
        if isinstance(f, Eventually):
            return any(self.ev(f.arg, path, j, g) for j in self._walk(path, i))
        if isinstance(f, Always):
            return all(self.ev(f.arg, path, j, g) for j in self._walk(path, i))
        if isinstance(f, Prev):
            return i > 0 and self.ev(f.arg, path, i - 1, g)
        if isinstance(f, Since):
            for j in range(i, -1, -1):
                if self.ev(f.right, path, j, g):
                    return True
                if not self.ev(f.left, path, j, g):
                    return False
            return False
        if isinstance(f, Once):
            return any(self.ev(f.arg, path, j, g) for j in range(i + 1))
        if isinstance(f, Historically):
            return all(self.ev(f.arg, path, j, g) for j in range(i + 1))
        if isinstance(f, Bind):
            g2 = dict(g)
            g2[f.var] = i
            return self.ev(f.arg, path, i, g2)
        if isinstance(f, (Exists, Forall)):
            want = isinstance(f, Exists)
            prefix = path.prefix(i)
            for lasso in self.lassos_with_prefix(prefix):
                p2 = self.lasso_path(lasso)
                if self.ev(f.arg, p2, p2.rep(i), g) == want:
                    return want
            return not want
        if isinstance(f, (ExistsF, ForallF)):
            want = isinstance(f, ExistsF)
            if self.memoryful:
                cands = ((t, i) for t in self.traces_extending(path.prefix(i)) if len(t) > i)
            else:
                cands = ((t, 0) for t in self.traces_from(path.state(i)))
            for t, pos in cands:
                if self.ev(f.arg, _FinitePath(t), pos, g) == want:
                    return want
            return not want
        raise PointEvalError(f"unsupported node in point formula: {f!r}")


def _as_path(ev, path):
    if isinstance(path, Lasso):
        return ev.lasso_path(path)
    return _FinitePath(path)


def eval_finitary_ctlstar(k, rho, i, f, bound):
    """Finitary CTL*: Ef ranges over traces from rho(i) of length <= bound."""
    if not is_finitary_ctlstar(f):
        raise PointEvalError("formula mixes in non-finitary operators")
    rho = tuple(rho)
    if not 0 <= i < len(rho):
        raise PointEvalError("position outside the trace")
    ev = BranchingEvaluator(k, bound, memoryful=False)
    return ev.ev(f, _FinitePath(rho), i, {})


def eval_hybrid(k, path, g, i, f, bound, evaluator=None):
    """Hybrid CTL* with linear past; ``path`` is a Lasso (infinite) or a trace (finitary).

    E/A range over initial lassos agreeing with the path on [0, i]; Ef/Af over
    initial traces of length <= bound extending path[0..i].
    """
    missing = free_vars(f) - set(g)
    if missing:
        raise PointEvalError(f"unbound variable(s) {sorted(missing)}")
    ev = evaluator or BranchingEvaluator(k, bound, memoryful=True)
    ev.depth = max(ev.depth, temporal_depth(f))
    p = _as_path(ev, path)
    return ev.ev(f, p, p.rep(i), dict(g))


def check_hybrid(k, f, bound, finitary=False):
    """K satisfies f iff f holds at position 0 of every initial path in the bounded universe."""
    ev = BranchingEvaluator(k, bound, memoryful=True)
    ev.depth = temporal_depth(f)
    paths = enumerate_traces(k, bound, initial_only=True) if finitary else enumerate_lassos(k, bound)
    count = 0
    for path in paths:
        count += 1
        if not eval_hybrid(k, path, {}, 0, f, bound, evaluator=ev):
            return Verdict("fails", path, True, True, count)
    return Verdict("holds_in_bound", None, True, True, count)


def check_ctlstar(k, f, bound):
    if not is_ctlstar(f):
        raise PointEvalError("not a CTL* formula")
    return check_hybrid(k, f, bound, finitary=False)


def check_finitary_ctlstar(k, f, bound):
    if not is_finitary_ctlstar(f):
        raise PointEvalError("not a finitary CTL* formula")
    ev = BranchingEvaluator(k, bound, memoryful=False)
    count = 0
    for rho in enumerate_traces(k, bound, initial_only=True):
        count += 1
        if not ev.ev(f, _FinitePath(rho), 0, {}):
            return Verdict("fails", rho, True, True, count)
    return Verdict("holds_in_bound", None, True, True, count)


# FO over a lasso. Assignments are folded like lin intervals: every gap between
# consecutive assigned positions keeps at most c full loops.


class FoEvaluator:
    def __init__(self, lasso, labels, cap):
        self.lasso = lasso
        self.labels = labels
        self.s = len(lasso.stem)
        self.p = len(lasso.loop)
        self.c = cap
        self.memo = {}
        self._fv = {}

    def fold(self, x):
        return min(x // self.p, self.c) * self.p + x % self.p

    def canon(self, g):
        out = {}
        prev_real = prev_canon = None
        for v, pos in sorted(g.items(), key=lambda kv: kv[1]):
            if pos < self.s:
                new = pos
            elif prev_real is None or prev_real < self.s:
                new = self.s + self.fold(pos - self.s)
            else:
                new = prev_canon + self.fold(pos - prev_real)
            out[v] = new
            prev_real, prev_canon = pos, new
        return out

    def free(self, f):
        out = self._fv.get(f)
        if out is None:
            out = free_vars(f)
            self._fv[f] = out
        return out

    def ev(self, f, g):
        g = self.canon({v: g[v] for v in self.free(f)})
        key = (f, tuple(sorted(g.items())))
        hit = self.memo.get(key)
        if hit is None:
            hit = self._ev(f, g)
            self.memo[key] = hit
        return hit

    def _ev(self, f, g):
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Pred):
            return f.atom in self.labels(self.lasso.state_at(g[f.var]))
        if isinstance(f, Le):
            return g[f.left] <= g[f.right]
        if isinstance(f, Lt):
            return g[f.left] < g[f.right]
        if isinstance(f, Not):
            return not self.ev(f.arg, g)
        if isinstance(f, And):
            return self.ev(f.left, g) and self.ev(f.right, g)
        if isinstance(f, Or):
            return self.ev(f.left, g) or self.ev(f.right, g)
        if isinstance(f, Implies):
            return (not self.ev(f.left, g)) or self.ev(f.right, g)
        if isinstance(f, (FoExists, FoForall)):
            want = isinstance(f, FoExists)
            top = max([self.s] + list(g.values())) + (self.c + 1) * self.p
            for pos in range(top + 1):
                g2 = dict(g)
                g2[f.var] = pos
                if self.ev(f.arg, g2) == want:
                    return want
            return not want
        raise PointEvalError(f"not an FO formula node: {f!r}")


def _quantifier_depth(f):
    d = max((_quantifier_depth(c) for c in f.children()), default=0)
    return d + 1 if isinstance(f, (FoExists, FoForall)) else d


def eval_fo(k, lasso, g, f, horizon):
    missing = free_vars(f) - set(g)
    if missing:
        raise PointEvalError(f"unbound variable(s) {sorted(missing)}")
    if g and horizon < max(g.values()):
        raise PointEvalError("horizon below an assigned position")
    cap = loop_cap(horizon, len(lasso.stem), len(lasso.loop), _quantifier_depth(f))
    return FoEvaluator(lasso, _labels(k), cap).ev(f, dict(g))


# Finite words


def letter_name(letter):
    """Atom naming a letter: plain letters name themselves, atom sets become L_a_b."""
    if isinstance(letter, str):
        return letter
    return "L" + "".join("_" + a for a in sorted(letter))


def as_word(w):
    if isinstance(w, str):
        return tuple(w)
    return tuple(w)


class WordSpace:
    """Subwords as intervals for the BE action-based semantics; nodes are the subwords themselves."""

    def key(self, w, past_free):
        return w

    def length(self, w):
        return len(w)

    def label(self, w):
        first = w[0]
        if all(x == first for x in w):
            return {letter_name(first)}
        return set()

    def related(self, rel, w):
        n = len(w)
        if rel == "B":
            return [w[:m] for m in range(1, n)], False
        if rel == "E":
            return [w[m:] for m in range(1, n)], False
        if rel == "G":
            return [w[a:b] for a in range(n) for b in range(a + 1, n + 1)], False
        raise PointEvalError(f"relation {rel} is not part of the BE word semantics")


class BeLanguage:
    """Membership oracle for L_act of one BE formula, memoized across words."""

    def __init__(self, f):
        bad = relations(f) - {"B", "E", "G"}
        if bad:
            raise PointEvalError(f"BE word semantics has no relation(s) {sorted(bad)}")
        for g in subformulas(f):
            if not isinstance(g, (Atom, Top, Bot, Not, And, Or, Implies, Modal)):
                raise PointEvalError(f"not a BE formula node: {g!r}")
        self.engine = Engine(Compiled(f, frozenset({"B", "E", "G"})), WordSpace())

    def __contains__(self, w):
        return self.engine.eval(as_word(w))[0]


def _ltl_finite(w, f):
    n = len(w)

    def holds(letter, name):
        return letter == name if isinstance(letter, str) else name in letter

    table = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            val = [holds(x, g.name) for x in w]
        elif isinstance(g, Top):
            val = [True] * n
        elif isinstance(g, Bot):
            val = [False] * n
        elif isinstance(g, Not):
            val = [not v for v in table[g.arg]]
        elif isinstance(g, And):
            val = [a and b for a, b in zip(table[g.left], table[g.right])]
        elif isinstance(g, Or):
            val = [a or b for a, b in zip(table[g.left], table[g.right])]
        elif isinstance(g, Implies):
            val = [(not a) or b for a, b in zip(table[g.left], table[g.right])]
        elif isinstance(g, Next):
            a = table[g.arg]
            val = a[1:] + [False]
        elif isinstance(g, (Until, Eventually, Always)):
            if isinstance(g, Always):
                a = table[g.arg]
                val = [all(a[i:]) for i in range(n)]
            else:
                left = table[g.left] if isinstance(g, Until) else [True] * n
                right = table[g.right] if isinstance(g, Until) else table[g.arg]
                val = [False] * n
                nxt = False
                for i in range(n - 1, -1, -1):
                    nxt = right[i] or (left[i] and nxt)
                    val[i] = nxt
        elif isinstance(g, Prev):
            val = [False] + table[g.arg][:-1]
        elif isinstance(g, Since):
            val = _since(table[g.left], table[g.right])
        elif isinstance(g, Once):
            val = _since([True] * n, table[g.arg])
        elif isinstance(g, Historically):
            a = table[g.arg]
            val = [all(a[: i + 1]) for i in range(n)]
        else:
            raise PointEvalError(f"not a finite-word LTL node: {g!r}")
        table[g] = val
    return table[f][0]


def lact_member(w, f, dialect="be_action", alphabet=None):
    w = as_word(w)
    if not w:
        raise PointEvalError("words are nonempty")
    if alphabet is not None:
        allowed = set(alphabet)
        for x in w:
            if x not in allowed:
                raise PointEvalError(f"letter {x!r} outside the alphabet")
    if dialect == "be_action":
        return w in BeLanguage(f)
    if dialect == "ltl_finite":
        return _ltl_finite(w, f)
    raise PointEvalError(f"unknown word dialect {dialect!r}")


def all_words(alphabet, max_len, min_len=1):
    alphabet = list(alphabet)
    for n in range(min_len, max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def lact_enumerate(alphabet, f, max_len, dialect="be_action"):
    if max_len < 1:
        raise PointEvalError("max_len must be >= 1")
    if dialect == "be_action":
        lang = BeLanguage(f)
        return {w for w in all_words(alphabet, max_len) if w in lang}
    return {w for w in all_words(alphabet, max_len) if _ltl_finite(w, f)}
