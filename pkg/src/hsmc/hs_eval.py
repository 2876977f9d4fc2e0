"""HS evaluation under the state-based (st), computation-tree-based (ct) and trace-based (lin) semantics.

All three share one memoized engine. A *space* supplies interval labels and,
for each relation, the related intervals together with a flag telling whether
the bound cut that domain short. The engine returns (value, exact): exact
means no cut domain could have changed the value.
"""

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from hsmc.formulas import (
    Atom,
    And,
    Bot,
    Implies,
    Modal,
    Not,
    Or,
    Top,
    _expand_diamond,
    match_length,
    temporal_depth,
)
from hsmc.kripke import CtNode, enumerate_lassos, enumerate_traces

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

ALL_RELATIONS = frozenset({"A", "Abar", "B", "Bbar", "E", "Ebar", "L", "Lbar", "D", "Dbar", "O", "Obar", "G"})
SEMANTICS = ("st", "ct", "lin")


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class EvalContext:
    structure: object
    semantics: str
    bound: int
    ct_mode: str = "interval"
    horizon: int = None
    jobs: int = 1

    def __post_init__(self):
        if self.semantics not in SEMANTICS:
            raise EvalError(f"unknown semantics {self.semantics!r}")
        if self.bound < 1:
            raise EvalError("bound must be >= 1")
        if self.ct_mode not in ("interval", "tree"):
            raise EvalError(f"unknown ct mode {self.ct_mode!r}")


@dataclass(frozen=True)
class Verdict:
    value: str
    witness: object = None
    bound_hit: bool = True
    # for fails: the witness evaluation never relied on a cut universal domain
    exact: bool = True
    checked: int = field(default=0, compare=False)

    @property
    def holds(self):
        return self.value in ("holds", "holds_in_bound")


class Compiled:
    """A formula flattened into an int-indexed table; relations outside ``native`` are expanded."""

    def __init__(self, f, native=ALL_RELATIONS):
        self.native = native
        self.nodes = []
        self.index = {}
        self.root = self._add(f)

    def _add(self, g):
        if g in self.index:
            return self.index[g]
        n = match_length(g)
        if n is not None:
            entry = ("len", n)
        elif isinstance(g, Atom):
            entry = ("atom", g.name)
        elif isinstance(g, Top):
            entry = ("const", True)
        elif isinstance(g, Bot):
            entry = ("const", False)
        elif isinstance(g, Not):
            entry = ("not", self._add(g.arg))
        elif isinstance(g, And):
            entry = ("and", self._add(g.left), self._add(g.right))
        elif isinstance(g, Or):
            entry = ("or", self._add(g.left), self._add(g.right))
        elif isinstance(g, Implies):
            entry = ("or", self._add(Not(g.left)), self._add(g.right))
        elif isinstance(g, Modal):
            if g.rel in self.native:
                entry = ("box" if g.universal else "dia", g.rel, self._add(g.arg))
            else:
                if g.universal:
                    rewritten = Not(_expand_diamond(g.rel, Not(g.arg)))
                else:
                    rewritten = _expand_diamond(g.rel, g.arg)
                idx = self._add(rewritten)
                self.index[g] = idx
                return idx
        else:
            raise EvalError(f"not an HS formula node: {g!r}")
        self.nodes.append(entry)
        idx = len(self.nodes) - 1
        self.index[g] = idx
        return idx


class Engine:
    def __init__(self, compiled, space):
        self.c = compiled
        self.space = space
        self.memo = {}
        self.past_free = self._past_free_table()

    def _past_free_table(self):
        past = {"Ebar", "Abar", "Lbar", "Dbar", "O", "Obar", "G"}
        out = []
        for entry in self.c.nodes:
            kind = entry[0]
            if kind in ("atom", "const", "len"):
                out.append(True)
            elif kind == "not":
                out.append(out[entry[1]])
            elif kind in ("and", "or"):
                out.append(out[entry[1]] and out[entry[2]])
            else:
                out.append(entry[1] not in past and out[entry[2]])
        return out

    def eval(self, node, fid=None):
        if fid is None:
            fid = self.c.root
        key = (fid, self.space.key(node, self.past_free[fid]))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        res = self._eval(fid, node)
        self.memo[key] = res
        return res

    def _eval(self, fid, node):
        entry = self.c.nodes[fid]
        kind = entry[0]
        if kind == "atom":
            return entry[1] in self.space.label(node), True
        if kind == "const":
            return entry[1], True
        if kind == "len":
            return self.space.length(node) == entry[1], True
        if kind == "not":
            v, e = self.eval(node, entry[1])
            return not v, e
        if kind in ("and", "or"):
            short = kind == "or"
            v1, e1 = self.eval(node, entry[1])
            if v1 == short and e1:
                return v1, True
            v2, e2 = self.eval(node, entry[2])
            if v2 == short and e2:
                return v2, True
            value = (v1 or v2) if short else (v1 and v2)
            if value == short:
                return value, False
            return value, e1 and e2
        rel, child = entry[1], entry[2]
        want = kind == "dia"
        targets, truncated = self.space.related(rel, node)
        exact = not truncated
        found = False
        for other in targets:
            v, e = self.eval(other, child)
            if v == want:
                if e:
                    return want, True
                found = True
            elif not e:
                exact = False
        if found:
            return want, False
        return (not want), exact


# State-based: intervals are traces of the structure, both directions branch


def back_depths(k):
    """Longest backward walk from each state (infinite if a cycle is reachable backwards)."""
    back_reach = {}
    for s in k.states:
        seen, todo = set(), list(k.pred[s])
        while todo:
            u = todo.pop()
            if u not in seen:
                seen.add(u)
                todo.extend(k.pred[u])
        back_reach[s] = seen
    on_cycle = {s for s in k.states if s in back_reach[s]}
    memo = {}

    def go(s):
        if s not in memo:
            if s in on_cycle or back_reach[s] & on_cycle:
                memo[s] = math.inf
            else:
                memo[s] = max((go(u) + 1 for u in k.pred[s]), default=0)
        return memo[s]

    return {s: go(s) for s in k.states}


class StSpace:
    def __init__(self, k, bound):
        self.k = k
        self.n = bound
        self.back = back_depths(k)
        self._from = {}
        self._to = {}
        self._reach = {}

    def key(self, t, past_free):
        return t

    def length(self, t):
        return len(t)

    def label(self, t):
        out = self.k.labels[t[0]]
        for s in t[1:]:
            if not out:
                break
            out = out & self.k.labels[s]
        return out

    def paths_from(self, s, m):
        key = (s, m)
        if key not in self._from:
            if m == 1:
                self._from[key] = [(s,)]
            else:
                self._from[key] = [(s,) + rest for t in self.k.succ[s] for rest in self.paths_from(t, m - 1)]
        return self._from[key]

    def paths_to(self, s, m):
        key = (s, m)
        if key not in self._to:
            if m == 1:
                self._to[key] = [(s,)]
            else:
                self._to[key] = [rest + (s,) for t in self.k.pred[s] for rest in self.paths_to(t, m - 1)]
        return self._to[key]

    def reach(self, s):
        """States reachable from s in 1..bound-1 steps."""
        if s not in self._reach:
            seen, frontier = set(), {s}
            for _ in range(self.n - 1):
                frontier = {t for u in frontier for t in self.k.succ[u]}
                seen |= frontier
            self._reach[s] = seen
        return self._reach[s]

    def coreach(self, s):
        seen, frontier = set(), {s}
        for _ in range(self.n - 1):
            frontier = {t for u in frontier for t in self.k.pred[u]}
            seen |= frontier
        return seen

    def right_ext(self, t, limit=None):
        limit = self.n if limit is None else limit
        for m in range(2, limit - len(t) + 2):
            for u in self.paths_from(t[-1], m):
                yield t + u[1:]

    def left_ext(self, t):
        for m in range(2, self.n - len(t) + 2):
            for u in self.paths_to(t[0], m):
                yield u[:-1] + t

    def related(self, rel, t):
        n, N = len(t), self.n
        if rel == "B":
            return [t[:m] for m in range(1, n)], False
        if rel == "E":
            return [t[m:] for m in range(1, n)], False
        if rel == "Bbar":
            return self.right_ext(t), True
        if rel == "Ebar":
            return self.left_ext(t), self.back[t[0]] > N - n
        if rel == "A":
            return (u for m in range(1, N + 1) for u in self.paths_from(t[-1], m)), True
        if rel == "Abar":
            return (u for m in range(1, N + 1) for u in self.paths_to(t[0], m)), self.back[t[0]] >= N
        if rel == "L":
            starts = sorted(self.reach(t[-1]), key=self.k.order.__getitem__)
            return (u for s in starts for m in range(1, N + 1) for u in self.paths_from(s, m)), True
        if rel == "Lbar":
            ends = sorted(self.coreach(t[0]), key=self.k.order.__getitem__)
            return (u for s in ends for m in range(1, N + 1) for u in self.paths_to(s, m)), self.back[t[0]] >= N
        if rel == "D":
            return [t[a:b] for a in range(1, n - 1) for b in range(a + 1, n)], False
        if rel == "Dbar":
            return (w for u in self.right_ext(t) for w in self.left_ext(u)), True
        if rel == "O":
            return (w for k in range(1, n - 1) for w in self.right_ext(t[k:])), True
        if rel == "Obar":
            return (w for m in range(2, n) for w in self.left_ext(t[:m])), n >= 3 and self.back[t[0]] >= N - n + 2
        if rel == "G":
            return [t[a:b] for a in range(n) for b in range(a + 1, n + 1)], False
        raise EvalError(f"relation {rel} unsupported")


# Computation-tree-based: a node (base, start) is the path base[start:] in the unwinding,
# reached through the unique history base[:start+1]


class CtSpace:
    def __init__(self, k, bound, mode="interval"):
        self.k = k
        self.n = bound
        self.mode = mode
        self.st = StSpace(k, bound)

    def key(self, node, past_free):
        base, start = node
        if not past_free:
            return node
        if self.mode == "tree":
            # the future still depends on how much room the history leaves
            return base[start:], len(base)
        return base[start:]

    def length(self, node):
        return len(node[0]) - node[1]

    def label(self, node):
        return self.st.label(node[0][node[1]:])

    def _room(self, base, start):
        """How many states may be appended to base."""
        if self.mode == "tree":
            return self.n - len(base)
        return self.n - (len(base) - start)

    def _extend(self, base, start, room):
        for m in range(2, room + 2):
            for u in self.st.paths_from(base[-1], m):
                yield base + u[1:]

    def related(self, rel, node):
        base, start = node
        n = len(base)
        if rel == "B":
            return [(base[:m], start) for m in range(start + 1, n)], False
        if rel == "E":
            return [(base, k) for k in range(start + 1, n)], False
        if rel == "Ebar":
            # base may outgrow the bound after extensions; intervals may not
            lo = 0 if self.mode == "tree" else max(0, n - self.n)
            return [(base, k) for k in range(lo, start)], lo > 0
        if rel == "Bbar":
            return ((b, start) for b in self._extend(base, start, self._room(base, start))), True
        if rel == "A":
            room = self.n - n if self.mode == "tree" else self.n - 1
            return [(base, n - 1)] + [(b, n - 1) for b in self._extend(base, n - 1, room)], True
        if rel == "Abar":
            lo = 0 if self.mode == "tree" else max(0, start + 1 - self.n)
            return [(base[: start + 1], k) for k in range(lo, start + 1)], lo > 0
        if rel == "G":
            return [(base[:m], k) for k in range(start, n) for m in range(k + 1, n + 1)], False
        if rel == "D":
            return [(base[:m], k) for k in range(start + 1, n - 1) for m in range(k + 1, n)], False
        raise EvalError(f"relation {rel} is not native to ct")


CT_NATIVE = frozenset({"A", "Abar", "B", "Bbar", "E", "Ebar", "G", "D"})


# Trace-based: intervals are position pairs on one lasso. Positions are folded onto
# canonical representatives: a gap of more than c full loops behaves like c loops.


def loop_cap(horizon, stem_len, loop_len, depth=0):
    return max(1, math.ceil(max(horizon - stem_len, 0) / loop_len), depth)


class LinSpace:
    def __init__(self, k, lasso, cap):
        self.k = k
        self.lasso = lasso
        self.s = len(lasso.stem)
        self.p = len(lasso.loop)
        self.c = cap
        self._label = {}

    def fold(self, x):
        p = self.p
        return min(x // p, self.c) * p + x % p

    def canon(self, i, j):
        s = self.s
        ci = i if i < s else s + self.fold(i - s)
        if j < s:
            return ci, j
        if i < s:
            return ci, s + self.fold(j - s)
        return ci, ci + self.fold(j - i)

    def limit(self, *positions):
        return max(max(positions), self.s) + (self.c + 1) * self.p

    def key(self, node, past_free):
        return node

    def length(self, node):
        return node[1] - node[0] + 1

    def label(self, node):
        out = self._label.get(node)
        if out is None:
            i, j = node
            lab = self.k.labels
            span = j
            if j >= self.s and j - max(i, self.s) + 1 > self.p:
                span = max(i, self.s) + self.p - 1
            out = lab[self.lasso.state_at(i)]
            for h in range(i + 1, span + 1):
                out = out & lab[self.lasso.state_at(h)]
            self._label[node] = out
        return out

    def _dedup(self, pairs):
        seen = set()
        out = []
        for a, b in pairs:
            c = self.canon(a, b)
            if c not in seen:
                seen.add(c)
                out.append(c)
        return out

    def related(self, rel, node):
        i, j = node
        lim = self.limit(i, j)
        if rel == "B":
            pairs = ((i, b) for b in range(i, j))
        elif rel == "E":
            pairs = ((a, j) for a in range(i + 1, j + 1))
        elif rel == "Bbar":
            pairs = ((i, b) for b in range(j + 1, lim + 1))
        elif rel == "Ebar":
            pairs = ((a, j) for a in range(i))
        elif rel == "A":
            pairs = ((j, b) for b in range(j, lim + 1))
        elif rel == "Abar":
            pairs = ((a, i) for a in range(i + 1))
        elif rel == "L":
            pairs = ((a, b) for a in range(j + 1, lim + 1) for b in range(a, self.limit(a) + 1))
        elif rel == "Lbar":
            pairs = ((a, b) for b in range(i) for a in range(b + 1))
        elif rel == "D":
            pairs = ((a, b) for a in range(i + 1, j) for b in range(a, j))
        elif rel == "Dbar":
            pairs = ((a, b) for a in range(i) for b in range(j + 1, lim + 1))
        elif rel == "O":
            pairs = ((a, b) for a in range(i + 1, j) for b in range(j + 1, lim + 1))
        elif rel == "Obar":
            pairs = ((a, b) for a in range(i) for b in range(i + 1, j))
        elif rel == "G":
            pairs = ((a, b) for a in range(i, j + 1) for b in range(a, j + 1))
        else:
            raise EvalError(f"relation {rel} unsupported")
        return self._dedup(pairs), False


# Public evaluation API


def _require(ctx, semantics):
    if ctx.semantics != semantics:
        raise EvalError(f"context semantics is {ctx.semantics}, expected {semantics}")


def st_engine(k, f, bound):
    return Engine(Compiled(f), StSpace(k, bound))


def ct_engine(k, f, bound, mode="interval"):
    return Engine(Compiled(f, CT_NATIVE), CtSpace(k, bound, mode))


def lin_engine(k, lasso, f, horizon):
    cap = loop_cap(horizon, len(lasso.stem), len(lasso.loop), temporal_depth(f))
    return Engine(Compiled(f), LinSpace(k, lasso, cap))


def eval_st(ctx, t, f, with_exact=False):
    _require(ctx, "st")
    t = tuple(t)
    if not ctx.structure.is_trace(t):
        raise EvalError(f"not a trace: {t!r}")
    if len(t) > ctx.bound:
        raise EvalError("trace longer than the bound")
    v, e = st_engine(ctx.structure, f, ctx.bound).eval(t)
    return (v, e) if with_exact else v


def eval_ct(ctx, node, f, with_exact=False):
    _require(ctx, "ct")
    if not isinstance(node, CtNode):
        node = CtNode(tuple(node[0]), node[1])
    k = ctx.structure
    if node.base[0] != k.initial or not k.is_trace(node.base):
        raise EvalError("ct node base must be an initial trace")
    size = len(node.base) if ctx.ct_mode == "tree" else len(node.base) - node.start
    if size > ctx.bound:
        raise EvalError("node exceeds the bound")
    v, e = ct_engine(k, f, ctx.bound, ctx.ct_mode).eval((node.base, node.start))
    return (v, e) if with_exact else v


def eval_interval(k, lasso, i, j, f, horizon):
    if not 0 <= i <= j:
        raise EvalError("need 0 <= i <= j")
    if horizon < j:
        raise EvalError("interval end beyond the horizon")
    if not lasso.is_valid(k):
        raise EvalError("lasso is not an initial path of the structure")
    eng = lin_engine(k, lasso, f, horizon)
    return eng.eval(eng.space.canon(i, j))[0]


def _first_failure(evaluate, items):
    for idx, item in enumerate(items):
        v, e = evaluate(item)
        if not v:
            return idx, e
    return None


def _st_chunk(args):
    k, f, bound, items = args
    eng = st_engine(k, f, bound)
    return _first_failure(eng.eval, items)


def _ct_chunk(args):
    k, f, bound, mode, items = args
    eng = ct_engine(k, f, bound, mode)
    return _first_failure(lambda t: eng.eval((t, 0)), items)


def _lin_items(k, bound):
    return [(lasso, i) for lasso in enumerate_lassos(k, bound) for i in range(bound + 1)]


def _lin_chunk(args):
    k, f, horizon, items = args
    engines = {}

    def evaluate(item):
        lasso, i = item
        if lasso not in engines:
            engines.clear()
            engines[lasso] = lin_engine(k, lasso, f, horizon)
        eng = engines[lasso]
        return eng.eval(eng.space.canon(0, i))

    return _first_failure(evaluate, items)


def _run(items, make_args, worker, jobs):
    if jobs <= 1 or len(items) < 2 * jobs:
        found = worker(make_args(items))
        return found
    size = math.ceil(len(items) / jobs)
    chunks = [items[i : i + size] for i in range(0, len(items), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(worker, [make_args(c) for c in chunks]))
    for n, res in enumerate(results):
        if res is not None:
            return n * size + res[0], res[1]
    return None


def _verdict(items, found, witness_of):
    if found is None:
        return Verdict("holds_in_bound", None, True, True, len(items))
    idx, exact = found
    return Verdict("fails", witness_of(items[idx]), True, exact, idx + 1)


def check_st(ctx, f):
    """Check f on every initial trace of length <= bound; the first failure in length-lex order is the witness."""
    _require(ctx, "st")
    items = list(enumerate_traces(ctx.structure, ctx.bound, initial_only=True))
    found = _run(items, lambda c: (ctx.structure, f, ctx.bound, c), _st_chunk, ctx.jobs)
    return _verdict(items, found, lambda t: t)


def check_ct(ctx, f):
    _require(ctx, "ct")
    items = list(enumerate_traces(ctx.structure, ctx.bound, initial_only=True))
    found = _run(items, lambda c: (ctx.structure, f, ctx.bound, ctx.ct_mode, c), _ct_chunk, ctx.jobs)
    return _verdict(items, found, lambda t: t)


def check_lin(ctx, f):
    """Check f on every initial interval [0, i], i <= bound, of every initial lasso with total size <= bound."""
    _require(ctx, "lin")
    horizon = ctx.horizon if ctx.horizon is not None else 2 * ctx.bound
    items = _lin_items(ctx.structure, ctx.bound)
    found = _run(items, lambda c: (ctx.structure, f, horizon, c), _lin_chunk, ctx.jobs)
    return _verdict(items, found, lambda item: (item[0], (0, item[1])))


def check(ctx, f):
    return {"st": check_st, "ct": check_ct, "lin": check_lin}[ctx.semantics](ctx, f)


def recheck_witness(ctx, f, witness):
    """Re-evaluate a fails witness; returns the truth value (False for a sound witness)."""
    if ctx.semantics == "st":
        return eval_st(ctx, witness, f)
    if ctx.semantics == "ct":
        return eval_ct(ctx, CtNode(tuple(witness), 0), f)
    lasso, (i, j) = witness
    horizon = ctx.horizon if ctx.horizon is not None else 2 * ctx.bound
    return eval_interval(ctx.structure, lasso, i, j, f, max(horizon, j))
