import pytest
from hypothesis import given, strategies as st

from tconnectors.families import assemble_G, atom_registry, build_F0, build_Fi
from tconnectors.catalog import get
from tconnectors.multigraph import (
    EdgeClass,
    GraphBuilder,
    GraphError,
    GraphParseError,
    StructureError,
    TerminalGraph,
    boundary,
    contract,
    contract_many,
    degree,
    deserialize,
    induced_edge_set,
    serialize,
    suppress_and_clean,
    to_dot,
)

from helpers import tg


@st.composite
def multigraphs(draw, max_n=7, max_m=14):
    n = draw(st.integers(2, max_n))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1])
    edges = draw(st.lists(pairs, max_size=max_m))
    term = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return TerminalGraph(term, edges)


def test_boundary_of_f0_terminal():
    G = build_F0(1)
    assert len(boundary(G, [0])) == 3


def test_boundary_of_everything_is_empty():
    G = build_Fi(2, 1)
    assert boundary(G, range(G.n)) == []


def test_boundary_at_vpp_in_f1():
    G = build_Fi(2, 1)
    assert degree(G, [G.vertex("vpp1")]) == 6


def test_induced_edges_small_cases():
    G = build_F0(2)
    assert len(induced_edge_set(G, [0, 1])) == 6
    assert induced_edge_set(G, [0]) == []
    F = build_Fi(2, 1)
    assert len(induced_edge_set(F, [F.vertex("vp1"), F.vertex("vpp1")])) == 3


def test_unknown_vertex_is_an_input_error():
    with pytest.raises(GraphError):
        boundary(build_F0(1), [7])


@given(multigraphs(), st.data())
def test_degree_identity(G, data):
    X = data.draw(st.sets(st.integers(0, G.n - 1)))
    assert degree(G, X) == sum(G.degree(v) for v in X) - 2 * len(induced_edge_set(G, X))


@given(multigraphs(), st.data())
def test_contracted_vertex_keeps_the_boundary(G, data):
    X = data.draw(st.sets(st.integers(0, G.n - 1), min_size=1))
    H, v = contract(G, X, "X")
    assert H.degree(v) == len(boundary(G, X))
    assert H.n == G.n - len(X) + 1
    assert H.m == G.m - len(induced_edge_set(G, X))


def test_contract_single_edge():
    G = tg(2, [(0, 1)], [0, 1])
    H, v = contract(G, [0, 1])
    assert (H.n, H.m) == (1, 0)


def test_contract_atom_of_g0():
    asm = assemble_G(get("k33").graph, 1)
    a = asm.registry.atoms[0]
    assert len(a.vertices) == 5 and len(a.terminals) == 2
    H, v = contract(asm.graph, a.vertices, "atom")
    assert H.degree(v) == 3 and H.terminal[v]


def test_contract_all_but_one_vertex_of_cubic_graph():
    N = get("heawood").graph
    H, v = contract(N, range(1, N.n))
    assert H.n == 2 and H.multiplicity(0, 1) == 3


def test_contract_groups_must_be_disjoint():
    with pytest.raises(GraphError):
        contract_many(tg(3, [(0, 1), (1, 2)], [0]), [[0, 1], [1, 2]])


def test_suppress_path_through_nonterminal():
    H = suppress_and_clean(tg(3, [(0, 1), (1, 2)], [0, 2]))
    assert (H.n, H.m) == (2, 1)


def test_suppress_deletes_isolated_nonterminal():
    H = suppress_and_clean(tg(3, [(0, 1)], [0, 1]))
    assert (H.n, H.m) == (2, 1)


def _one_step(G):
    """Suppress a single degree-2 non-terminal; the reference for the chain case."""
    for v in G.nonterminals:
        if G.degree(v) == 2:
            e, f = G.incidence[v]
            a, b = G.other(e, v), G.other(f, v)
            keep = [x for x in range(G.m) if x not in (e, f)]
            verts = [u for u in range(G.n) if u != v]
            idx = {u: i for i, u in enumerate(verts)}
            edges = [(idx[G.edges[x][0]], idx[G.edges[x][1]]) for x in keep]
            if a != b:
                edges.append((idx[a], idx[b]))
            return TerminalGraph([G.terminal[u] for u in verts], edges), True
    return G, False


def test_suppress_chain_matches_repeated_single_steps():
    G = tg(4, [(0, 1), (1, 2), (2, 3)], [0, 3])
    H = suppress_and_clean(G)
    ref, changed = G, True
    while changed:
        ref, changed = _one_step(ref)
    assert (H.n, H.m) == (ref.n, ref.m) == (2, 1)


def test_suppress_rejects_branching_nonterminal():
    star = tg(4, [(0, 1), (0, 2), (0, 3)], [1, 2, 3])
    with pytest.raises(StructureError):
        suppress_and_clean(star)


def test_root_must_be_terminal():
    with pytest.raises(GraphError):
        tg(2, [(0, 1)], [1], root=0)


def test_loops_rejected():
    with pytest.raises(GraphError):
        tg(2, [(0, 0)], [0])


def test_round_trip_f0_and_fi():
    for G in (build_F0(2), build_Fi(4, 2)):
        H = deserialize(serialize(G))
        assert H == G
        assert H.classes == G.classes and H.root == G.root


@given(multigraphs())
def test_round_trip_is_identity(G):
    assert deserialize(serialize(G)) == G


def test_truncated_input_reports_location():
    blob = serialize(build_F0(1))
    with pytest.raises(GraphParseError) as ei:
        deserialize(blob[: len(blob) // 2])
    assert "line 1" in ei.value.location


def test_bad_kind_reports_field():
    with pytest.raises(GraphParseError) as ei:
        deserialize('{"vertices":[{"id":0,"kind":"x"}],"edges":[],"root":null}')
    assert ei.value.location == "$.vertices[0].kind"


def test_g0_round_trip_counts():
    # |X| atoms of 3 + 2 vertices each plus |Y| non-terminals, for k = 1
    N = get("ellingham-horton-54").graph
    G = assemble_G(N, 1).graph
    assert (G.n, G.m) == (27 * 5 + 27, 243)
    assert deserialize(serialize(G)) == G


def test_dot_marks_kinds_and_multiplicity():
    text = to_dot(build_F0(2))
    assert "shape=circle" in text and '0 -- 1 [label="A:3"]' in text
    text = to_dot(build_Fi(2, 1))
    assert "shape=square" in text


def test_builder_classes_and_origins():
    b = GraphBuilder()
    r, t = b.add_vertex("r", True), b.add_vertex("t", True)
    b.add_edges(r, t, 2, EdgeClass.A)
    G = b.build(root=r, stage="S")
    assert G.class_sizes()["A"] == 2
    assert G.edge_origin[1] == (("S", (), 1),)
    assert atom_registry(G).atoms == []
