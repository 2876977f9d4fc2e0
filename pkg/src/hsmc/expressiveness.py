"""Counterexample families K_n / M_n and K1 / K2, trace profiles, h-compatibility and
bounded replays of the separation lemmas."""

from dataclasses import dataclass, field

from hsmc.formulas import And, Atom, Modal, Not, Top, formula_size
from hsmc.hs_eval import EvalContext, check, check_st, recheck_witness, st_engine
from hsmc.kripke import enumerate_traces, k1, k2, kn, mn
from hsmc.syntax import parse, render

FIG7_PSI = "<E>(p & len1) -> <E>(len1 & <Abar>(p & !len1))"


@dataclass(frozen=True)
class TraceProfile:
    n_empty: int
    n_p: int
    d_p: int


def _chain_index(n, state):
    if state == "t":
        return None
    if not (state.startswith("s") and state[1:].isdigit() and int(state[1:]) <= 2 * n):
        raise ValueError(f"{state!r} is not a state of K_{n}")
    return int(state[1:])


def profile(n, t):
    """(N_empty, N_p, D_p), all counted in states."""
    t = tuple(t)
    if not kn(n).is_trace(t):
        raise ValueError(f"not a trace of K_{n}: {t!r}")
    n_p = sum(1 for s in t if s == "t")
    n_empty = len(t) - n_p
    if n_p:
        return TraceProfile(n_empty, n_p, 0)
    # states on the shortest path from lst to s_2n, both ends included
    return TraceProfile(n_empty, 0, 2 * n - _chain_index(n, t[-1]) + 1)


def compat_key(prof, h):
    """Two traces are h-compatible exactly when their keys coincide."""
    return (prof.n_p, min(prof.n_empty, h), min(prof.d_p, h))


def _check_h(n, h):
    if not 1 <= h <= n:
        raise ValueError(f"h must lie in [1, {n}]")


def h_compatible(n, t1, t2, h):
    _check_h(n, h)
    a, b = profile(n, t1), profile(n, t2)
    if a.n_p != b.n_p:
        return False
    if a.n_empty != b.n_empty and not (a.n_empty >= h and b.n_empty >= h):
        return False
    return a.d_p == b.d_p or (a.d_p >= h and b.d_p >= h)


@dataclass
class Report:
    title: str
    checked: int = 0
    skipped: int = 0
    problems: list = field(default_factory=list)
    lines: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.problems

    def to_text(self):
        out = [f"{self.title}: checked={self.checked} skipped={self.skipped} problems={len(self.problems)}"]
        out.extend(self.lines)
        out.extend(f"  problem: {p}" for p in self.problems[:20])
        return "\n".join(out)


def _extensions(k, t, max_len, forward=True):
    """Traces t.sigma (or sigma.t) with sigma nonempty and total length <= max_len."""
    out = []
    layer = [t]
    while layer and len(layer[0]) < max_len:
        if forward:
            layer = [u + (s,) for u in layer for s in k.succ[u[-1]]]
        else:
            layer = [(s,) + u for u in layer for s in k.pred[u[0]]]
        out.extend(layer)
    return out


def verify_compatibility_lemma(n, h, bound, key=None):
    """Replay the four matching properties of R(h) on all trace pairs of length <= bound.

    The side that must be matched ranges over traces of length <= bound. A partner
    may have to cross the whole p-free chain before it collects the same number of
    p-states, so the matching side may use length up to 2 * bound + 2n + 1.
    ``key`` overrides the relation (for mutation tests).
    """
    if not 2 <= h <= n:
        raise ValueError(f"h must lie in [2, {n}]")
    key = key or (lambda t, level: compat_key(profile(n, t), level))
    k = kn(n)
    half = h // 2
    reach = 2 * bound + 2 * n + 1
    traces = list(enumerate_traces(k, bound))
    facts = {}
    for t in traces:
        prefixes = {key(t[:m], half) for m in range(1, len(t))}
        suffixes = {key(t[m:], h - 1) for m in range(1, len(t))}
        fwd_need = {key(u, half) for u in _extensions(k, t, bound)}
        fwd_have = {key(u, half) for u in _extensions(k, t, reach)}
        bwd_need = {key(u, h) for u in _extensions(k, t, bound, forward=False)}
        bwd_have = {key(u, h) for u in _extensions(k, t, reach, forward=False)}
        facts[t] = (prefixes, fwd_need, fwd_have, suffixes, bwd_need, bwd_have)
    classes = {}
    for t in traces:
        classes.setdefault(key(t, h), []).append(t)
    report = Report(f"compatibility lemma n={n} h={h} bound={bound}")
    for members in classes.values():
        for a in members:
            fa = facts[a]
            for b in members:
                fb = facts[b]
                report.checked += 1
                if not fa[0] <= fb[0]:
                    report.problems.append(("prefix", a, b))
                if not fa[1] <= fb[2]:
                    report.problems.append(("forward extension", a, b))
                if not fa[3] <= fb[3]:
                    report.problems.append(("suffix", a, b))
                if not fa[4] <= fb[5]:
                    report.problems.append(("backward extension", a, b))
    return report


@dataclass(frozen=True)
class BalancedFormulaSpec:
    atoms: tuple = ("p",)
    relations: tuple = ("B", "Bbar", "E", "Ebar")
    max_size: int = 3


BALANCED_RELATIONS = ("B", "Bbar")


def enumerate_balanced(spec):
    """All balanced formulas over not, and, existential modalities, atoms and true, by size."""
    if spec.max_size < 1:
        raise ValueError("max_size must be >= 1")
    by_size = {1: [Atom(a) for a in sorted(spec.atoms)] + [Top()]}
    conj_by_size = {}
    for s in range(2, spec.max_size + 1):
        out = [Not(g) for g in by_size[s - 1]]
        conjs = []
        for a in range(1, s - 1):
            for left in by_size[a]:
                for right in by_size[s - 1 - a]:
                    conjs.append(And(left, right))
        out.extend(conjs)
        conj_by_size[s] = [c for c in conjs if formula_size(c.left) == formula_size(c.right)]
        for rel in spec.relations:
            if rel in BALANCED_RELATIONS:
                args = conj_by_size.get(s - 1, [])
            else:
                args = by_size[s - 1]
            out.extend(Modal(rel, False, g) for g in args)
        by_size[s] = out
    for s in range(1, spec.max_size + 1):
        yield from by_size[s]


def count_balanced(n_atoms, n_plain, n_balanced, size):
    """Closed recursion for the number of balanced formulas of exactly ``size``."""
    memo = {}

    def c(s):
        if s in memo:
            return memo[s]
        if s == 1:
            v = n_atoms + 1
        else:
            v = c(s - 1) + sum(c(a) * c(s - 1 - a) for a in range(1, s - 1)) + n_plain * c(s - 1)
            if (s - 1) % 2 == 1 and s - 1 >= 3:
                half = (s - 2) // 2
                v += n_balanced * c(half) ** 2
        memo[s] = v
        return v

    return c(size)


def agreement_check(n, max_size, bound, jobs=1):
    """(a) h-compatible traces agree on balanced formulas of size h; (b) K_n and M_n agree under st."""
    if max_size > n:
        raise ValueError("max_size must not exceed n")
    kk, mm = kn(n), mn(n)
    traces = list(enumerate_traces(kk, bound))
    profiles = {t: profile(n, t) for t in traces}
    report = Report(f"agreement n={n} max_size={max_size} bound={bound}")
    formulas = list(enumerate_balanced(BalancedFormulaSpec(max_size=max_size)))
    for f in formulas:
        h = formula_size(f)
        eng = st_engine(kk, f, bound)
        seen = {}
        for t in traces:
            v, exact = eng.eval(t)
            if not exact:
                report.skipped += 1
                continue
            report.checked += 1
            cls = compat_key(profiles[t], h)
            if cls in seen and seen[cls][0] != v:
                report.problems.append(("compatible traces disagree", render(f), seen[cls][1], t))
            seen.setdefault(cls, (v, t))
        vk = check_st(EvalContext(kk, "st", bound, jobs=jobs), f)
        vm = check_st(EvalContext(mm, "st", bound, jobs=jobs), f)
        report.checked += 1
        if vk.value != vm.value:
            report.problems.append(("K_n and M_n differ", render(f), vk.value, vm.value))
    report.lines.append(f"  balanced formulas: {len(formulas)}")
    return report


def initial_matching(n, bound):
    """Every trace from s0 of length <= bound has an R(n)-compatible trace from s1, and vice versa.

    Partners may be one state longer (the extra s0 in front of the chain).
    """
    k = kn(n)
    traces = [t for t in enumerate_traces(k, bound) if t[0] in ("s0", "s1")]
    keys = {}
    for t in enumerate_traces(k, bound + 1):
        keys.setdefault(t[0], set()).add(compat_key(profile(n, t), n))
    report = Report(f"initial matching n={n} bound={bound}")
    for t in traces:
        other = "s1" if t[0] == "s0" else "s0"
        report.checked += 1
        if compat_key(profile(n, t), n) not in keys.get(other, set()):
            report.problems.append(("unmatched", t))
    return report


def distinguishing_report(bound=6):
    """The formula that separates K1 from K2 under st but not under ct."""
    psi = parse(FIG7_PSI, "hs")
    out = {}
    for name, k in (("K1", k1()), ("K2", k2())):
        for sem in ("st", "ct"):
            ctx = EvalContext(k, sem, bound)
            verdict = check(ctx, psi)
            recheck = recheck_witness(ctx, psi, verdict.witness) if verdict.value == "fails" else None
            out[(name, sem)] = (verdict, recheck)
    return out
