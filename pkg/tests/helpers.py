"""Small graph factories and a networkx-based connectivity reference."""

from __future__ import annotations

import itertools

import networkx as nx

from tconnectors.multigraph import GraphBuilder, TerminalGraph


def tg(n, edges, terminals, root=None):
    T = set(terminals)
    return TerminalGraph([v in T for v in range(n)], edges, root)


def nx_steiner(G: TerminalGraph, T=None) -> int:
    """Minimum over terminal pairs of the min cut, via networkx on a capacity graph."""
    T = sorted(G.terminals if T is None else T)
    h = nx.Graph()
    h.add_nodes_from(range(G.n))
    for u, v in G.edges:
        if h.has_edge(u, v):
            h[u][v]["capacity"] += 1
        else:
            h.add_edge(u, v, capacity=1)
    return min(nx.minimum_cut_value(h, s, t) for s, t in itertools.combinations(T, 2))


def random_terminal_graph(rng, d, max_n=8):
    """A random multigraph whose terminal set is d-edge-connected; vertex 0 is a terminal of degree d."""
    while True:
        n = rng.randint(2, max_n)
        nt = rng.randint(2, n)
        T = [0] + rng.sample(range(1, n), nt - 1)
        edges = []
        deg = [0] * n
        for _ in range(8 * n * d):
            u, v = rng.sample(range(n), 2)
            if 0 in (u, v) and deg[0] == d:
                continue
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
            if deg[0] == d and all(deg[t] >= d for t in T):
                G = tg(n, edges, T)
                if nx_steiner(G) >= d:
                    return G
        # retry with fresh parameters


def star(leaves, centre_terminal=False):
    b = GraphBuilder()
    c = b.add_vertex("c", centre_terminal)
    for i in range(leaves):
        b.add_edge(c, b.add_vertex(f"t{i}", True))
    return b.build()
