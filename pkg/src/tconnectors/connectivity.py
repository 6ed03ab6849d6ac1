"""Edge-connectivity of terminal sets, vertex connectivity, and basic edge-cuts."""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow as _sp_maximum_flow

from .multigraph import GraphError, TerminalGraph, boundary


class FlowNetwork:
    """Integer-capacity network solved with Dinic's algorithm.

    Arcs are stored in pairs; arc ``a ^ 1`` is the reverse of arc ``a``.  An
    undirected edge of capacity ``c`` is an arc pair with capacity ``c`` in
    both directions.
    """

    def __init__(self, n: int):
        self.n = n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.head: list[int] = []
        self.cap: list[int] = []

    def add_arc(self, u: int, v: int, cap: int, rev_cap: int = 0) -> int:
        a = len(self.head)
        self.head += [v, u]
        self.cap += [cap, rev_cap]
        self.adj[u].append(a)
        self.adj[v].append(a + 1)
        return a

    def _levels(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        head, cap, adj = self.head, self.cap, self.adj
        while q:
            u = q.popleft()
            for a in adj[u]:
                v = head[a]
                if cap[a] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    if v == t:
                        return level
                    q.append(v)
        return None

    def max_flow(self, s: int, t: int, limit: int | None = None) -> int:
        """Push flow from ``s`` to ``t``; stops early once ``limit`` is reached."""
        if s == t:
            raise GraphError("source equals sink")
        head, cap, adj = self.head, self.cap, self.adj
        flow = 0
        while limit is None or flow < limit:
            level = self._levels(s, t)
            if level is None:
                break
            ptr = [0] * self.n
            # iterative blocking-flow search, one augmenting path at a time
            while limit is None or flow < limit:
                path: list[int] = []
                u = s
                while u != t:
                    lst = adj[u]
                    i = ptr[u]
                    while i < len(lst):
                        a = lst[i]
                        v = head[a]
                        if cap[a] > 0 and level[v] == level[u] + 1:
                            break
                        i += 1
                    ptr[u] = i
                    if i == len(lst):
                        if u == s:
                            break
                        level[u] = -1  # dead end
                        a = path.pop()
                        u = head[a ^ 1]
                        ptr[u] += 1
                        continue
                    path.append(lst[i])
                    u = head[lst[i]]
                if u != t:
                    break
                push = min(cap[a] for a in path)
                if limit is not None:
                    push = min(push, limit - flow)
                for a in path:
                    cap[a] -= push
                    cap[a ^ 1] += push
                flow += push
        return flow

    def reachable(self, s: int) -> list[bool]:
        seen = [False] * self.n
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for a in self.adj[u]:
                v = self.head[a]
                if self.cap[a] > 0 and not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return seen


@dataclass(frozen=True)
class FlowResult:
    value: int
    cut: tuple[int, ...]  # edge ids of a minimum st-cut
    source_side: frozenset[int]


def _edge_network(G: TerminalGraph) -> FlowNetwork:
    # parallel edges collapsed to one arc pair with integer capacity
    mult: dict[tuple[int, int], int] = {}
    for u, v in G.edges:
        if u != v:
            key = (u, v) if u < v else (v, u)
            mult[key] = mult.get(key, 0) + 1
    net = FlowNetwork(G.n)
    for (u, v), c in sorted(mult.items()):
        net.add_arc(u, v, c, c)
    return net


def max_flow(G: TerminalGraph, s: int, t: int) -> FlowResult:
    """Maximum number of edge-disjoint ``st``-paths, with a minimum cut."""
    G.check_vertices((s, t))
    if s == t:
        raise GraphError("max_flow needs two distinct vertices")
    net = _edge_network(G)
    value = net.max_flow(s, t)
    side = net.reachable(s)
    cut = tuple(e for e, (u, v) in enumerate(G.edges) if side[u] != side[v])
    return FlowResult(value, cut, frozenset(v for v in range(G.n) if side[v]))


def local_edge_connectivity(G: TerminalGraph, s: int, t: int) -> int:
    return _edge_network(G).max_flow(s, t)


def _capacity_matrix(G: TerminalGraph) -> csr_matrix:
    mult: dict[tuple[int, int], int] = {}
    for u, v in G.edges:
        if u != v:
            mult[(u, v)] = mult.get((u, v), 0) + 1
            mult[(v, u)] = mult.get((v, u), 0) + 1
    keys = sorted(mult)
    rows = np.fromiter((a for a, _ in keys), dtype=np.int32, count=len(keys))
    cols = np.fromiter((b for _, b in keys), dtype=np.int32, count=len(keys))
    data = np.fromiter((mult[x] for x in keys), dtype=np.int32, count=len(keys))
    return csr_matrix((data, (rows, cols)), shape=(G.n, G.n))


class _Flows:
    """Repeated st-flow values on one graph with a chosen backend."""

    def __init__(self, G: TerminalGraph, backend: str):
        if backend not in ("scipy", "dinic"):
            raise GraphError(f"unknown flow backend {backend!r}")
        self.G, self.backend = G, backend
        self.M = _capacity_matrix(G) if backend == "scipy" else None

    def value(self, s: int, t: int) -> int:
        if self.backend == "scipy":
            return int(_sp_maximum_flow(self.M, s, t, method="dinic").flow_value)
        return local_edge_connectivity(self.G, s, t)


@dataclass
class SteinerResult:
    value: int
    source: int
    flows: dict[int, int] = field(default_factory=dict)  # terminal -> flow from source
    witness: tuple[int, ...] = ()  # a minimum terminal-separating cut
    witness_sink: int | None = None

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "source": self.source,
            "witness_sink": self.witness_sink,
            "witness_cut": list(self.witness),
            "flows": {str(t): f for t, f in sorted(self.flows.items())},
        }


_WORKER_GRAPH: TerminalGraph | None = None


def _init_worker(G: TerminalGraph) -> None:
    global _WORKER_GRAPH
    _WORKER_GRAPH = G


def _flow_job(args: tuple[int, int, str]) -> tuple[int, int]:
    s, t, backend = args
    return t, _Flows(_WORKER_GRAPH, backend).value(s, t)


def steiner_edge_connectivity(
    G: TerminalGraph, T: Iterable[int] | None = None, jobs: int = 1, backend: str = "scipy"
) -> SteinerResult:
    """Smallest edge-cut separating two vertices of ``T`` (default: all terminals).

    Any minimum terminal-separating cut separates a fixed terminal ``t0`` from
    some other terminal, so ``|T| - 1`` flows from ``t0`` suffice.  Flow values
    come from ``backend`` (``"scipy"`` or the in-house ``"dinic"``); the witness
    cut always comes from the in-house solver.
    """
    T = sorted(G.check_vertices(G.terminals if T is None else T))
    if len(T) < 2:
        raise GraphError("steiner connectivity needs at least two terminals")
    t0, rest = T[0], T[1:]
    flows: dict[int, int] = {}
    if jobs > 1 and len(rest) > 8:
        with ProcessPoolExecutor(
            max_workers=min(jobs, os.cpu_count() or 1), initializer=_init_worker, initargs=(G,)
        ) as ex:
            for t, f in ex.map(_flow_job, [(t0, t, backend) for t in rest], chunksize=16):
                flows[t] = f
    else:
        fl = _Flows(G, backend)
        for t in rest:
            flows[t] = fl.value(t0, t)
    value = min(flows.values())
    sink = min(t for t in rest if flows[t] == value)
    witness = max_flow(G, t0, sink).cut
    return SteinerResult(value, t0, flows, witness, sink)


# -- vertex connectivity ---------------------------------------------------------


def local_vertex_connectivity(G: TerminalGraph, s: int, t: int, limit: int | None = None) -> int:
    """Internally vertex-disjoint ``st``-paths, via the split-vertex network.

    ``s`` and ``t`` must be non-adjacent.
    """
    if G.multiplicity(s, t):
        raise GraphError("local vertex connectivity is undefined for adjacent vertices")
    n = G.n
    big = G.m + 1
    net = FlowNetwork(2 * n)
    for v in range(n):
        net.add_arc(2 * v, 2 * v + 1, big if v in (s, t) else 1)
    for u, v in G.edges:
        if u != v:
            net.add_arc(2 * u + 1, 2 * v, big)
            net.add_arc(2 * v + 1, 2 * u, big)
    return net.max_flow(2 * s + 1, 2 * t, limit)


def is_k_vertex_connected(G: TerminalGraph, k: int) -> bool:
    """True iff ``G`` has more than ``k`` vertices and no separator of size < ``k``."""
    if G.n <= k:
        return False
    if not is_connected(G):
        return False
    adj = [set(G.neighbours(v)) for v in range(G.n)]
    for s in range(G.n):
        for t in range(s + 1, G.n):
            if t in adj[s]:
                continue
            if local_vertex_connectivity(G, s, t, limit=k) < k:
                return False
    return True


def components(G: TerminalGraph, removed: Iterable[int] = ()) -> list[list[int]]:
    """Vertex sets of connected components of ``G - removed`` (sorted by least vertex)."""
    removed = set(removed)
    seen = [False] * G.n
    for v in removed:
        seen[v] = True
    out = []
    inc, edges = G.incidence, G.edges
    for s in range(G.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for e in inc[u]:
                a, b = edges[e]
                w = b if a == u else a
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        comp.sort()
        out.append(comp)
    return out


def is_connected(G: TerminalGraph) -> bool:
    return len(components(G)) <= 1


# -- aligned sets and basic cuts ----------------------------------------------------


def is_aligned(registry, Y: Iterable[int]) -> bool:
    """Every atom of ``registry`` is contained in ``Y`` or disjoint from it."""
    Y = set(Y)
    for atom in registry.atoms:
        inside = len(Y.intersection(atom.vertices))
        if 0 < inside < len(atom.vertices):
            return False
    return True


@dataclass(frozen=True)
class CutCertificate:
    X0: frozenset[int]
    partition: tuple[tuple[int, ...], ...]
    Y: tuple[int, ...]
    cut: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "X0": sorted(self.X0),
            "partition": [list(p) for p in self.partition],
            "Y": list(self.Y),
            "cut": list(self.cut),
        }


class NotBasicCut(GraphError):
    def __init__(self, condition: str, witness):
        super().__init__(f"{condition}: {witness}")
        self.condition = condition
        self.witness = witness


def is_basic_cut(
    G: TerminalGraph, registry, X0: Iterable[int], k: int, strict: bool = False
) -> list[CutCertificate]:
    """Certify ``X0`` as the independent non-terminal set of basic edge-cuts.

    Returns one certificate per component of ``G - X0``; each component's
    boundary is a basic edge-cut.  Raises :class:`NotBasicCut` naming the
    first violated condition.

    Alignment is checked against the atoms disjoint from ``X0``.  An atom that
    meets ``X0`` cannot lie inside any component, and the standard certificate
    for an atom boundary (``X0`` = the atom's non-terminals) splits exactly that
    atom.  ``strict=True`` checks against every atom instead.
    """
    X0 = G.check_vertices(X0)
    for v in sorted(X0):
        if G.terminal[v]:
            raise NotBasicCut("X0 contains a terminal", v)
    for v in sorted(X0):
        for e in G.incidence[v]:
            if G.other(e, v) in X0:
                raise NotBasicCut("X0 is not independent", e)
    parts = components(G, X0)
    parts = [p for p in parts if p[0] not in X0]
    certs = []
    part_tuple = tuple(tuple(p) for p in parts)
    atom_of = registry.atom_of
    for p in parts:
        cut = boundary(G, p)
        if len(cut) != 3 * k:
            raise NotBasicCut(f"component has degree {len(cut)} instead of {3 * k}", p[0])
        if not any(G.terminal[v] for v in p):
            raise NotBasicCut("component contains no terminal", p[0])
        pset = set(p)
        for v in p:
            a = atom_of.get(v)
            if a is None:
                continue
            verts = registry.atoms[a].vertices
            if not strict and verts & X0:
                continue
            if not verts <= pset:
                raise NotBasicCut("component is not aligned", registry.atoms[a].name)
        certs.append(CutCertificate(X0, part_tuple, tuple(p), tuple(cut)))
    return certs


def brute_force_steiner(G: TerminalGraph, T: Sequence[int] | None = None) -> int:
    """Minimum over all terminal pairs of the minimum edge cut; exponential oracle.

    Enumerates every vertex bipartition, so only for graphs with at most
    about 14 vertices.
    """
    T = list(G.terminals if T is None else T)
    n = G.n
    best = None
    t0 = T[0]
    others = [v for v in range(n) if v != t0]
    for mask in range(1 << len(others)):
        side = {t0} | {others[i] for i in range(len(others)) if mask >> i & 1}
        if all(t in side for t in T):
            continue
        c = sum(1 for u, v in G.edges if (u in side) != (v in side))
        if best is None or c < best:
            best = c
    return best
