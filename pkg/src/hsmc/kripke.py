"""Finite Kripke structures, traces, lassos, unwinding and the built-in example structures."""

import json
from dataclasses import dataclass, field
from functools import cached_property

import yaml

DOCUMENT_KEYS = {"atoms", "states", "edges", "initial"}


class StructureError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KripkeStructure:
    atoms: tuple
    states: tuple
    edges: frozenset
    labels: dict
    initial: str
    # non-empty only for unwound trees: frontier nodes have no successors
    frontier: frozenset = field(default=frozenset())

    def __post_init__(self):
        ids = set(self.states)
        if len(ids) != len(self.states):
            raise StructureError("duplicate state id")
        if self.initial not in ids:
            raise StructureError(f"initial state {self.initial!r} is not a declared state")
        for s, t in self.edges:
            if s not in ids or t not in ids:
                raise StructureError(f"edge ({s}, {t}) mentions an unknown state")
        known = set(self.atoms)
        for s in self.states:
            if s not in self.labels:
                raise StructureError(f"state {s!r} has no label")
            extra = set(self.labels[s]) - known
            if extra:
                raise StructureError(f"state {s!r} uses unknown atom(s) {sorted(extra)}")
        for s in self.states:
            if not self.succ[s] and s not in self.frontier:
                raise StructureError(f"transition relation is not left-total: state {s!r} has no successor")

    @cached_property
    def order(self):
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def succ(self):
        out = {s: [] for s in self.states}
        for s, t in self.edges:
            out[s].append(t)
        return {s: tuple(sorted(ts, key=self.order.__getitem__)) for s, ts in out.items()}

    @cached_property
    def pred(self):
        out = {s: [] for s in self.states}
        for s, t in self.edges:
            out[t].append(s)
        return {s: tuple(sorted(ts, key=self.order.__getitem__)) for s, ts in out.items()}

    def has_edge(self, s, t):
        return (s, t) in self.edges

    def is_trace(self, t):
        if not t or any(s not in self.order for s in t):
            return False
        return all((a, b) in self.edges for a, b in zip(t, t[1:]))

    def label(self, s):
        return self.labels[s]

    def sort_key(self, t):
        return (len(t), tuple(self.order[s] for s in t))


def make_structure(atoms, states, edges, initial):
    """``states`` is a sequence of (id, label) pairs; declaration order fixes the trace order."""
    return KripkeStructure(
        atoms=tuple(atoms),
        states=tuple(s for s, _ in states),
        edges=frozenset((a, b) for a, b in edges),
        labels={s: frozenset(lab) for s, lab in states},
        initial=initial,
    )


def load_kripke(text):
    """Load a structure document (YAML or JSON) with keys atoms, states, edges, initial."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise StructureError(f"malformed document: {exc}") from exc
    if not isinstance(doc, dict):
        raise StructureError("structure document must be a mapping")
    unknown = set(doc) - DOCUMENT_KEYS
    if unknown:
        raise StructureError(f"unknown key(s) {sorted(unknown)}")
    if "initial" not in doc:
        raise StructureError("missing initial state")
    missing = DOCUMENT_KEYS - set(doc)
    if missing:
        raise StructureError(f"missing key(s) {sorted(missing)}")
    states = []
    for entry in doc["states"] or []:
        if not isinstance(entry, dict) or set(entry) - {"id", "label"} or "id" not in entry:
            raise StructureError(f"malformed state entry {entry!r}")
        states.append((str(entry["id"]), [str(a) for a in entry.get("label") or []]))
    edges = []
    for e in doc["edges"] or []:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise StructureError(f"malformed edge {e!r}")
        edges.append((str(e[0]), str(e[1])))
    return make_structure([str(a) for a in doc["atoms"] or []], states, edges, str(doc["initial"]))


def load_kripke_file(path):
    with open(path) as fh:
        return load_kripke(fh.read())


def dump_kripke(k, fmt="yaml"):
    doc = {
        "atoms": list(k.atoms),
        "states": [{"id": s, "label": sorted(k.labels[s])} for s in k.states],
        "edges": [[a, b] for a in k.states for b in k.succ[a]],
        "initial": k.initial,
    }
    if fmt == "json":
        return json.dumps(doc, indent=2)
    return yaml.safe_dump(doc, sort_keys=False)


def trace_label(k, t):
    """Atoms holding over a trace under homogeneity: the intersection of its state labels."""
    if not k.is_trace(t):
        raise StructureError(f"not a trace of the structure: {t!r}")
    out = k.labels[t[0]]
    for s in t[1:]:
        out = out & k.labels[s]
    return out


def enumerate_traces(k, max_len, initial_only=False):
    """All (initial) traces with at most ``max_len`` states, in length-lexicographic order."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    layer = [(k.initial,)] if initial_only else [(s,) for s in k.states]
    for _ in range(max_len):
        yield from layer
        layer = [t + (s,) for t in layer for s in k.succ[t[-1]]]


@dataclass(frozen=True)
class Lasso:
    """The infinite path stem . loop^omega."""

    stem: tuple
    loop: tuple

    def __post_init__(self):
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    def state_at(self, i):
        s = len(self.stem)
        if i < s:
            return self.stem[i]
        return self.loop[(i - s) % len(self.loop)]

    def prefix(self, n):
        return tuple(self.state_at(i) for i in range(n))

    @property
    def total(self):
        return len(self.stem) + len(self.loop)

    def is_valid(self, k):
        path = self.stem + self.loop + self.loop
        return path[0] == k.initial and k.is_trace(path)


def _primitive(loop):
    n = len(loop)
    return not any(n % d == 0 and loop == loop[:d] * (n // d) for d in range(1, n))


def enumerate_lassos(k, max_total):
    """Initial lassos with |stem| + |loop| <= max_total, one per ultimately periodic path.

    Each path is emitted in its shortest form: the loop is primitive and the stem
    cannot be shortened by rotating the loop. Order: total size, then the
    unrolled stem.loop sequence, then the stem length.
    """
    if max_total < 1:
        raise ValueError("max_total must be >= 1")
    for t in enumerate_traces(k, max_total, initial_only=True):
        for s in range(len(t)):
            stem, loop = t[:s], t[s:]
            if not k.has_edge(loop[-1], loop[0]):
                continue
            if not _primitive(loop):
                continue
            if stem and stem[-1] == loop[-1]:
                continue
            yield Lasso(stem, loop)


@dataclass(frozen=True)
class CtNode:
    """Computation-tree interval from node base[:start+1] to node base."""

    base: tuple
    start: int

    def __post_init__(self):
        if not 0 <= self.start < len(self.base):
            raise ValueError("start index out of range")

    @property
    def trace(self):
        return self.base[self.start:]


def unwind(k, depth):
    """Computation-tree prefix of the given depth; nodes are initial traces.

    Frontier nodes have no successors, so the result is only meant for display.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    nodes = list(enumerate_traces(k, depth, initial_only=True))
    name = {t: ".".join(t) for t in nodes}
    edges = [(name[t], name[t + (s,)]) for t in nodes if len(t) < depth for s in k.succ[t[-1]]]
    return KripkeStructure(
        atoms=k.atoms,
        states=tuple(name[t] for t in nodes),
        edges=frozenset(edges),
        labels={name[t]: k.labels[t[-1]] for t in nodes},
        initial=name[(k.initial,)],
        frontier=frozenset(name[t] for t in nodes if len(t) == depth),
    )


# Built-in structures


def fig1():
    return make_structure(["p", "q"], [("s0", ["p"]), ("s1", ["q"])], [("s0", "s1"), ("s1", "s0"), ("s1", "s1")], "s0")


VENDING_ATOMS = (
    "p_credit_0",
    "p_credit_1",
    "p_credit_2",
    "p_credit_050",
    "p_candy",
    "p_hotdog",
    "p_water",
    "p_change",
    "p_maint",
    "p_maint_end",
    "p_operative",
)


def vending():
    own = ["p_credit_0", "p_credit_1", "p_credit_2", "p_credit_050", "p_candy", "p_hotdog", "p_water", "p_change", "p_maint", "p_maint_end"]
    states = []
    for i, a in enumerate(own):
        lab = [a] + (["p_operative"] if i <= 7 else [])
        states.append((f"s{i}", lab))
    edges = [
        ("s0", "s1"), ("s0", "s2"), ("s0", "s3"),
        ("s1", "s4"), ("s1", "s6"),
        ("s2", "s4"), ("s2", "s5"), ("s2", "s6"),
        ("s3", "s6"),
        ("s4", "s7"), ("s5", "s7"), ("s6", "s7"),
        ("s7", "s8"), ("s7", "s0"),
        ("s8", "s9"),
        ("s9", "s8"), ("s9", "s0"),
    ]
    return make_structure(VENDING_ATOMS, states, edges, "s0")


def k1():
    return make_structure(["p"], [("s0", []), ("s1", ["p"])], [("s0", "s1"), ("s1", "s1")], "s0")


def k2():
    return make_structure(
        ["p"],
        [("s0'", []), ("s1'", ["p"]), ("s2'", ["p"])],
        [("s0'", "s1'"), ("s1'", "s2'"), ("s2'", "s2'")],
        "s0'",
    )


def kn(n, initial="s0"):
    if n < 1:
        raise ValueError("n must be >= 1")
    chain = [f"s{i}" for i in range(2 * n + 1)]
    states = [(s, []) for s in chain] + [("t", ["p"])]
    edges = [("s0", "s0")] + list(zip(chain, chain[1:])) + [(chain[-1], "t"), ("t", "t")]
    return make_structure(["p"], states, edges, initial)


def mn(n):
    return kn(n, initial="s1")


def builtin(name):
    """Look up fig1, vending, k1, k2, knN or mnN (for example kn2)."""
    table = {"fig1": fig1, "vending": vending, "k1": k1, "k2": k2}
    if name in table:
        return table[name]()
    for prefix, ctor in (("kn", kn), ("mn", mn)):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            return ctor(int(name[len(prefix):]))
    raise KeyError(f"unknown builtin structure {name!r}")
