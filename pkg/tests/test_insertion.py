import random

import pytest
from hypothesis import given, settings, strategies as st

from tconnectors.connectivity import steiner_edge_connectivity
from tconnectors.families import build_atom_gadget, build_F0, build_Fi, build_Fstar
from tconnectors.insertion import (
    EdgeBijection,
    InsertionError,
    canonical_bijection,
    insert,
    make_class_bijection,
)
from tconnectors.multigraph import EdgeClass

from helpers import nx_steiner, random_terminal_graph, tg


def random_bijection(rng, G1, t1, G2, t2):
    a, b = list(G1.incidence[t1]), list(G2.incidence[t2])
    rng.shuffle(b)
    return EdgeBijection(t1, t2, tuple(zip(a, b)))


def test_f0_into_f0_is_f0():
    for seed in range(4):
        rng = random.Random(seed)
        F = build_F0(1)
        G = insert(F, 1, F, 0, random_bijection(rng, F, 1, F, 0))
        assert (G.n, G.m) == (2, 3) and G.multiplicity(0, 1) == 3
        assert all(G.terminal)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_atom_insertion_bookkeeping(k):
    host = build_F0(k)
    K = build_atom_gadget(k)
    G = insert(host, 1, K, K.root)
    assert G.n - host.n == 3 * k + 1
    assert G.m - host.m == 6 * k


def test_degree_mismatch_rejected():
    with pytest.raises(InsertionError):
        insert(build_F0(1), 1, build_F0(2), 0)


def test_nonterminal_rejected():
    host = tg(3, [(0, 1), (1, 2)], [0, 2])
    guest = tg(3, [(0, 1), (1, 2)], [0, 2])
    with pytest.raises(InsertionError):
        insert(host, 1, guest, 1)


def test_non_bijective_pairing_rejected():
    F = build_F0(1)
    h = EdgeBijection(1, 0, ((0, 0), (1, 0), (2, 2)))
    with pytest.raises(InsertionError):
        insert(F, 1, F, 0, h)


def test_class_bijection_respects_groups():
    k, i = 4, 2
    host = build_Fi(k, i)
    guest = build_Fstar(k, i - 1)
    f = host.vertex("f1")
    uA, uB = host.vertex("uA1"), host.vertex("uB1")
    to_uA = [e for e in host.incidence[f] if host.other(e, f) == uA]
    to_uB = [e for e in host.incidence[f] if host.other(e, f) == uB]
    rest = [e for e in host.incidence[f] if e not in to_uA + to_uB]
    assert (len(to_uA), len(to_uB), len(rest)) == (6, 4, 2)
    h = make_class_bijection(host, f, guest, [(to_uA, EdgeClass.A), (to_uB, EdgeClass.B), (rest, EdgeClass.C)])
    pairs = h.as_dict()
    assert {guest.classes[pairs[e]] for e in to_uA} == {EdgeClass.A}
    assert {guest.classes[pairs[e]] for e in to_uB} == {EdgeClass.B}
    assert {guest.classes[pairs[e]] for e in rest} == {EdgeClass.C}


def test_class_bijection_size_mismatch_names_group():
    host = build_Fi(4, 2)
    guest = build_Fstar(4, 1)
    f = host.vertex("f1")
    at = list(host.incidence[f])
    with pytest.raises(InsertionError, match="group 0"):
        make_class_bijection(host, f, guest, [(at[:5], EdgeClass.A), (at[5:], EdgeClass.B)])


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]))
def test_degrees_and_kinds_preserved(seed, d):
    rng = random.Random(seed)
    G1 = random_terminal_graph(rng, d, 6)
    G2 = random_terminal_graph(rng, d, 6)
    G = insert(G1, 0, G2, 0, random_bijection(rng, G1, 0, G2, 0))
    assert G.n == G1.n + G2.n - 2
    assert G.m == G1.m + G2.m - d
    want = [G1.degree(v) for v in range(1, G1.n)] + [G2.degree(v) for v in range(1, G2.n)]
    assert [G.degree(v) for v in range(G.n)] == want
    kinds = list(G1.terminal[1:]) + list(G2.terminal[1:])
    assert list(G.terminal) == kinds


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4, 6]))
def test_insertion_preserves_terminal_connectivity(seed, d):
    rng = random.Random(seed)
    G1 = random_terminal_graph(rng, d, 7)
    G2 = random_terminal_graph(rng, d, 7)
    G = insert(G1, 0, G2, 0, random_bijection(rng, G1, 0, G2, 0))
    if len(G.terminals) >= 2:
        assert steiner_edge_connectivity(G).value >= d
        assert nx_steiner(G) >= d


def test_canonical_bijection_pairs_by_id():
    F = build_F0(1)
    assert canonical_bijection(F, 1, F, 0).pairing == ((0, 0), (1, 1), (2, 2))
