"""Independent brute-force references used by the tests.

Nothing here imports the search or validation code under test.
"""

from __future__ import annotations

import itertools
from collections import defaultdict

import networkx as nx


def all_tpaths(n, edges, T):
    """Every T-path as a (vertex tuple, edge tuple), each undirected path listed once."""
    T = set(T)
    inc = defaultdict(list)
    for e, (a, b) in enumerate(edges):
        inc[a].append(e)
        inc[b].append(e)
    found = set()
    out = []

    def walk(vs, es):
        u = vs[-1]
        for e in inc[u]:
            a, b = edges[e]
            w = b if a == u else a
            if w in vs:
                continue
            if w in T:
                key = frozenset(es + [e])
                cand = (tuple(vs + [w]), tuple(es + [e]))
                if (key, frozenset((vs[0], w))) not in found:
                    found.add((key, frozenset((vs[0], w))))
                    out.append(cand)
            else:
                walk(vs + [w], es + [e])

    for t in sorted(T):
        walk([t], [])
    return out


def spans(T, pairs):
    T = sorted(T)
    if len(T) <= 1:
        return True
    g = nx.Graph()
    g.add_nodes_from(T)
    g.add_edges_from(pairs)
    return nx.is_connected(g)


def packing_exists(n, edges, T, k):
    return find_packing(n, edges, T, k) is not None


def find_packing(n, edges, T, k):
    """Search all assignments of T-paths to k connectors (or to none).

    Returns a witness as a list of k lists of (vertices, edges), or ``None``.
    """
    T = sorted(set(T))
    if len(T) <= 1:
        return [[] for _ in range(k)]
    paths = all_tpaths(n, edges, T)
    # a connector needs at least one path at every terminal
    for t in T:
        if sum(1 for (vs, _) in paths if t in (vs[0], vs[-1])) < k:
            return None
    assigned = [[] for _ in range(k)]
    chosen = [[] for _ in range(k)]

    def rec(i, used):
        if all(spans(T, assigned[j]) for j in range(k)):
            return True
        if i == len(paths):
            return False
        vs, es = paths[i]
        if not used & set(es):
            for j in range(k):
                if j > 0 and assigned[j] == assigned[j - 1] == []:
                    break
                assigned[j].append((vs[0], vs[-1]))
                chosen[j].append((vs, es))
                if rec(i + 1, used | set(es)):
                    return True
                assigned[j].pop()
                chosen[j].pop()
        return rec(i + 1, used)

    return chosen if rec(0, frozenset()) else None


def certificate_is_valid(n, edges, T, connectors):
    """The definition, checked literally. ``connectors`` is a list of lists of (vertices, edges)."""
    T = set(T)
    seen = set()
    for c in connectors:
        for vs, es in c:
            if len(es) == 0 or len(vs) != len(es) + 1 or len(set(vs)) != len(vs):
                return False
            if any(not (0 <= v < n) for v in vs) or any(not (0 <= e < len(edges)) for e in es):
                return False
            for i, e in enumerate(es):
                if sorted(edges[e]) != sorted((vs[i], vs[i + 1])):
                    return False
            if vs[0] not in T or vs[-1] not in T or any(v in T for v in vs[1:-1]):
                return False
            for e in es:
                if e in seen:
                    return False
                seen.add(e)
        if not spans(T, [(vs[0], vs[-1]) for vs, _ in c]):
            return False
    return True


# -- corpus -----------------------------------------------------------------------


def _nx(n, edges, T):
    g = nx.Graph()
    for v in range(n):
        g.add_node(v, t=v in T)
    for a, b in edges:
        if g.has_edge(a, b):
            g[a][b]["m"] += 1
        else:
            g.add_edge(a, b, m=1)
    return g


def _key(g):
    return nx.weisfeiler_lehman_graph_hash(g, node_attr="t", edge_attr="m", iterations=3)


def _iso(g, h):
    return nx.is_isomorphic(
        g, h, node_match=lambda a, b: a["t"] == b["t"], edge_match=lambda a, b: a["m"] == b["m"]
    )


def _norm(n, edges, T):
    return n, tuple(sorted(tuple(sorted(e)) for e in edges)), frozenset(T)


def connected_multigraphs(max_edges, max_terminals):
    """Connected loopless multigraphs with terminals, up to isomorphism, by edge count.

    Every connected graph with ``m`` edges arises from one with ``m - 1`` edges by
    adding an edge between existing vertices or a pendant edge to a new vertex, so
    growing level by level and reducing each level is exhaustive.
    """
    levels = [[(1, (), frozenset())], [(1, (), frozenset([0]))]]
    # one-vertex seeds with 0 or 1 terminal; edges are added below
    current = levels[0] + levels[1]
    for m in range(max_edges + 1):
        for item in current:
            yield item
        if m == max_edges:
            break
        buckets = defaultdict(list)
        nxt = []
        for n, edges, T in current:
            cands = []
            for a, b in itertools.combinations(range(n), 2):
                cands.append((n, edges + ((a, b),), T))
            for a in range(n):
                cands.append((n + 1, edges + ((a, n),), T))
                if len(T) < max_terminals:
                    cands.append((n + 1, edges + ((a, n),), T | {n}))
            for c in cands:
                c = _norm(*c)
                g = _nx(*c)
                key = (c[0], len(c[2]), _key(g))
                if any(_iso(g, h) for h in buckets[key]):
                    continue
                buckets[key].append(g)
                nxt.append(c)
        current = nxt


def corpus(max_edges=8, terminals=(2, 4)):
    lo, hi = terminals
    for n, edges, T in connected_multigraphs(max_edges, hi):
        if not lo <= len(T) <= hi:
            continue
        deg = [0] * n
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        if any(deg[v] < 2 for v in range(n) if v not in T):
            continue
        yield n, list(edges), sorted(T)
