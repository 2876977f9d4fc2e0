import itertools
import json

import pytest
from hypothesis import given, strategies as st

from hsmc.kripke import (
    CtNode,
    Lasso,
    StructureError,
    builtin,
    dump_kripke,
    enumerate_lassos,
    enumerate_traces,
    fig1,
    k1,
    k2,
    kn,
    load_kripke,
    mn,
    trace_label,
    unwind,
    vending,
)

FIG1_DOC = """
atoms: [p, q]
states:
  - {id: s0, label: [p]}
  - {id: s1, label: [q]}
edges: [[s0, s1], [s1, s0], [s1, s1]]
initial: s0
"""


def test_load_fig1():
    k = load_kripke(FIG1_DOC)
    assert set(k.states) == {"s0", "s1"}
    assert k.labels["s0"] == {"p"} and k.labels["s1"] == {"q"}
    assert k.edges == fig1().edges


def test_load_rejects_dead_end():
    doc = FIG1_DOC.replace("[s1, s0], [s1, s1]", "")
    with pytest.raises(StructureError, match="s1"):
        load_kripke(doc)


def test_load_rejects_unknown_atom_and_key():
    with pytest.raises(StructureError):
        load_kripke(FIG1_DOC.replace("label: [q]", "label: [r]"))
    with pytest.raises(StructureError):
        load_kripke(FIG1_DOC + "extra: 1\n")


def test_load_rejects_missing_initial():
    with pytest.raises(StructureError, match="initial"):
        load_kripke(FIG1_DOC.replace("initial: s0", ""))


@pytest.mark.parametrize("fmt", ["yaml", "json"])
def test_dump_round_trip(fmt):
    k = vending()
    k2_ = load_kripke(dump_kripke(k, fmt))
    assert k2_.states == k.states and k2_.edges == k.edges and k2_.labels == k.labels
    if fmt == "json":
        json.loads(dump_kripke(k, fmt))


def test_vending_shape():
    k = vending()
    assert len(k.states) == 10
    assert [s for s in k.states if "p_operative" in k.labels[s]] == [f"s{i}" for i in range(8)]


def test_trace_label_examples():
    k = fig1()
    assert trace_label(k, ("s0", "s1")) == set()
    assert trace_label(k, ("s1", "s1")) == {"q"}
    assert trace_label(vending(), ("s0", "s1", "s4")) == {"p_operative"}
    with pytest.raises(StructureError):
        trace_label(k, ("s0", "s0"))


@pytest.mark.parametrize("name", ["fig1", "vending", "k1", "k2", "kn2"])
def test_homogeneity_and_monotonicity(name):
    k = builtin(name)
    for t in enumerate_traces(k, 5):
        lab = trace_label(k, t)
        for a in k.atoms:
            assert (a in lab) == all(a in k.labels[s] for s in t)
        for s in k.succ[t[-1]]:
            assert trace_label(k, t + (s,)) <= lab


def test_enumerate_traces_examples():
    k = fig1()
    assert list(enumerate_traces(k, 1, initial_only=True)) == [("s0",)]
    assert list(enumerate_traces(k, 2, initial_only=True)) == [("s0",), ("s0", "s1")]
    # brute-force count over all state sequences of length <= 3
    brute = [t for n in (1, 2, 3) for t in itertools.product(k.states, repeat=n) if k.is_trace(t)]
    assert len(brute) == 10
    assert sorted(enumerate_traces(k, 3)) == sorted(brute)


@pytest.mark.parametrize("name", ["fig1", "vending", "kn2"])
@pytest.mark.parametrize("m", [2, 3, 5])
def test_enumerate_traces_prefix_closed_and_ordered(name, m):
    k = builtin(name)
    longer = list(enumerate_traces(k, m))
    assert [t for t in longer if len(t) <= m - 1] == list(enumerate_traces(k, m - 1))
    keys = [k.sort_key(t) for t in longer]
    assert keys == sorted(keys) and len(set(longer)) == len(longer)


def _naive_lasso_paths(k, max_total):
    """Every valid (stem, loop) pair, keyed by a long unrolled prefix (distinct paths differ on it)."""
    n = 4 * max_total + 2
    paths = {}
    for t in enumerate_traces(k, max_total, initial_only=True):
        for s in range(len(t)):
            stem, loop = t[:s], t[s:]
            if k.has_edge(loop[-1], loop[0]):
                paths.setdefault(Lasso(stem, loop).prefix(n), Lasso(stem, loop))
    return paths


@pytest.mark.parametrize("name,m", [("fig1", 2), ("fig1", 5), ("vending", 8), ("kn1", 4), ("k2", 4)])
def test_lassos_one_per_path(name, m):
    k = builtin(name)
    ours = list(enumerate_lassos(k, m))
    n = 4 * m + 2
    keys = [x.prefix(n) for x in ours]
    assert len(set(keys)) == len(keys)
    assert set(keys) == set(_naive_lasso_paths(k, m))
    for x in ours:
        assert x.is_valid(k) and k.is_trace(x.prefix(3 * x.total))


def test_fig1_lassos_total_two():
    assert list(enumerate_lassos(fig1(), 2)) == [Lasso((), ("s0", "s1")), Lasso(("s0",), ("s1",))]


def test_kn_self_loop_lasso_first():
    assert next(iter(enumerate_lassos(kn(1), 3))) == Lasso((), ("s0",))


def test_single_self_loop_structure():
    from hsmc.kripke import make_structure

    k = make_structure(["p"], [("s", ["p"])], [("s", "s")], "s")
    assert list(enumerate_lassos(k, 5)) == [Lasso((), ("s",))]


def test_unwind_examples():
    t = unwind(fig1(), 3)
    assert set(t.states) == {"s0", "s0.s1", "s0.s1.s0", "s0.s1.s1"}
    assert t.frontier == {"s0.s1.s0", "s0.s1.s1"}
    assert unwind(fig1(), 1).states == ("s0",)


@pytest.mark.parametrize("d", range(1, 7))
def test_unwind_node_count(d):
    k = vending()
    assert len(unwind(k, d).states) == len(list(enumerate_traces(k, d, initial_only=True)))


def test_builtin_shapes():
    assert k1().succ["s1"] == ("s1",) and k1().labels["s1"] == {"p"}
    assert len(kn(1).states) == 4
    assert mn(2).initial == "s1"
    k = kn(2)
    assert k.edges == frozenset(
        [("s0", "s0"), ("s0", "s1"), ("s1", "s2"), ("s2", "s3"), ("s3", "s4"), ("s4", "t"), ("t", "t")]
    )
    assert k2().initial == "s0'"
    with pytest.raises(KeyError):
        builtin("nope")


def test_ctnode_bounds():
    assert CtNode(("s0", "s1"), 1).trace == ("s1",)
    with pytest.raises(ValueError):
        CtNode(("s0",), 1)


@given(st.integers(0, 3), st.integers(1, 3), st.integers(0, 20))
def test_lasso_state_at_periodic(s, p, i):
    lasso = Lasso(tuple(f"a{j}" for j in range(s)), tuple(f"b{j}" for j in range(p)))
    if i >= s:
        assert lasso.state_at(i) == lasso.state_at(i + p)
