"""Base graphs for step 5 and the hamiltonian controls.

Each named graph is stored twice under ``data/``: as a verbatim adjacency list
(``<name>.adj``) and as graph6 (``<name>.g6``).  Loading parses both and
refuses to continue if they disagree.  Expected properties are recorded per
graph but :func:`verify_base` always recomputes them.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from .connectivity import components, is_k_vertex_connected
from .multigraph import GraphError, GraphParseError, TerminalGraph


class CatalogError(GraphError):
    pass


@dataclass(frozen=True)
class Expected:
    cubic: bool = True
    bipartite: bool = True
    three_connected: bool = True
    hamiltonian: bool = False


@dataclass(frozen=True)
class NamedGraph:
    name: str
    graph: TerminalGraph
    expected: Expected
    source: str = ""


_ENTRIES: dict[str, tuple[Expected, str]] = {
    "georges-50": (Expected(), "smallest known 3-connected non-hamiltonian bicubic graph"),
    "ellingham-horton-54": (Expected(), "Ellingham-Horton 54-graph"),
    "ellingham-horton-78": (Expected(), "Ellingham-Horton 78-graph"),
    "k33": (Expected(hamiltonian=True), "complete bipartite K_{3,3} (control)"),
    "cube-q3": (Expected(hamiltonian=True), "3-cube Q_3 (control)"),
    "heawood": (Expected(hamiltonian=True), "Heawood graph (control)"),
}


def names() -> list[str]:
    return list(_ENTRIES)


def available() -> list[str]:
    return [n for n in _ENTRIES if _data_file(n, "adj") is not None]


# -- graph6 --------------------------------------------------------------------


def _g6_decode_n(data: bytes) -> tuple[int, int]:
    if not data:
        raise GraphParseError("byte 0", "empty graph6 string")
    if data[0] != 126:
        return data[0] - 63, 1
    if len(data) >= 2 and data[1] == 126:
        if len(data) < 8:
            raise GraphParseError("byte 2", "truncated 36-bit vertex count")
        n = 0
        for b in data[2:8]:
            n = (n << 6) | (b - 63)
        return n, 8
    if len(data) < 4:
        raise GraphParseError("byte 1", "truncated 18-bit vertex count")
    n = 0
    for b in data[1:4]:
        n = (n << 6) | (b - 63)
    return n, 4


def parse_graph6(text: str | bytes) -> TerminalGraph:
    """Parse one graph6 line into a terminal-free :class:`TerminalGraph`."""
    data = text.encode() if isinstance(text, str) else bytes(text)
    data = data.strip()
    if data.startswith(b">>graph6<<"):
        data = data[10:]
    for i, b in enumerate(data):
        if not 63 <= b <= 126:
            raise GraphParseError(f"byte {i}", f"character {chr(b)!r} outside graph6 range")
    n, pos = _g6_decode_n(data)
    need = n * (n - 1) // 2
    nbytes = (need + 5) // 6
    body = data[pos:]
    if len(body) != nbytes:
        raise GraphParseError(
            f"byte {pos + min(len(body), nbytes)}",
            f"expected {nbytes} adjacency bytes for {n} vertices, found {len(body)}",
        )
    bits = []
    for b in body:
        v = b - 63
        bits.extend((v >> s) & 1 for s in range(5, -1, -1))
    edges = []
    k = 0
    # upper triangle in column order: (0,1), (0,2), (1,2), (0,3), ...
    for j in range(1, n):
        for i in range(j):
            if bits[k]:
                edges.append((i, j))
            k += 1
    if any(bits[need:]):
        raise GraphParseError(f"byte {len(data) - 1}", "non-zero padding bits")
    edges.sort()
    return TerminalGraph([False] * n, edges)


def to_graph6(G: TerminalGraph) -> str:
    n = G.n
    if n >= 258048:
        raise GraphError("graph too large for this encoder")
    adj = set()
    for u, v in G.edges:
        if u == v or (min(u, v), max(u, v)) in adj:
            raise GraphError("graph6 encodes simple graphs only")
        adj.add((min(u, v), max(u, v)))
    out = bytearray()
    if n < 63:
        out.append(n + 63)
    else:
        out += bytes([126] + [((n >> s) & 63) + 63 for s in (12, 6, 0)])
    bits = [1 if (i, j) in adj else 0 for j in range(1, n) for i in range(j)]
    bits += [0] * (-len(bits) % 6)
    for i in range(0, len(bits), 6):
        v = 0
        for b in bits[i : i + 6]:
            v = (v << 1) | b
        out.append(v + 63)
    return out.decode()


def parse_adjacency(text: str) -> TerminalGraph:
    """Parse ``v: w1 w2 ...`` lines (``#`` starts a comment)."""
    nbrs: dict[int, list[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise GraphParseError(f"line {lineno}", "missing ':'")
        try:
            v = int(head)
            ws = [int(w) for w in rest.split()]
        except ValueError as exc:
            raise GraphParseError(f"line {lineno}", str(exc)) from None
        if v in nbrs:
            raise GraphParseError(f"line {lineno}", f"vertex {v} listed twice")
        nbrs[v] = ws
    n = len(nbrs)
    if sorted(nbrs) != list(range(n)):
        raise GraphParseError("adjacency", "vertices are not 0..n-1")
    edges = set()
    for v, ws in nbrs.items():
        for w in ws:
            if w not in nbrs or v not in nbrs[w]:
                raise GraphParseError("adjacency", f"edge {v}-{w} is not listed symmetrically")
            edges.add((min(v, w), max(v, w)))
    return TerminalGraph([False] * n, sorted(edges))


def _data_file(name: str, ext: str) -> str | None:
    f = resources.files(__package__).joinpath("data").joinpath(f"{name}.{ext}")
    return f.read_text() if f.is_file() else None


def get(name: str) -> NamedGraph:
    if name not in _ENTRIES:
        raise CatalogError(f"unknown base graph {name!r}; known: {', '.join(_ENTRIES)}")
    expected, source = _ENTRIES[name]
    adj, g6 = _data_file(name, "adj"), _data_file(name, "g6")
    if adj is None or g6 is None:
        raise CatalogError(
            f"no verified adjacency data is shipped for {name!r}; "
            f"add data/{name}.adj and data/{name}.g6"
        )
    g = parse_adjacency(adj)
    if g != parse_graph6(g6):
        raise CatalogError(f"stored adjacency and graph6 for {name!r} disagree")
    labels = [f"v{v}" for v in range(g.n)]
    g = TerminalGraph(g.terminal, g.edges, labels=labels)
    return NamedGraph(name, g, expected, source)


def graph_from_edges(n: int, edges: Sequence[tuple[int, int]]) -> TerminalGraph:
    return TerminalGraph([False] * n, edges, labels=[f"v{v}" for v in range(n)])


# -- verification --------------------------------------------------------------


def two_colouring(g: TerminalGraph) -> list[int] | None:
    """Proper 2-colouring with vertex 0's component starting in colour 0, or None."""
    col = [-1] * g.n
    for s in range(g.n):
        if col[s] >= 0:
            continue
        col[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in g.neighbours(u):
                if col[w] < 0:
                    col[w] = 1 - col[u]
                    stack.append(w)
                elif col[w] == col[u]:
                    return None
    return col


@dataclass
class BaseReport:
    n: int
    m: int
    cubic: bool
    bipartite: bool
    three_connected: bool
    X: tuple[int, ...] = ()
    Y: tuple[int, ...] = ()
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.cubic and self.bipartite and self.three_connected

    def as_dict(self) -> dict:
        return {
            "vertices": self.n,
            "edges": self.m,
            "cubic": self.cubic,
            "bipartite": self.bipartite,
            "three_connected": self.three_connected,
            "X": list(self.X),
            "Y": list(self.Y),
            "failures": list(self.failures),
        }


def verify_base(g: TerminalGraph) -> BaseReport:
    """Check cubic, bipartite (X = colour class of vertex 0) and 3-connected."""
    failures = []
    bad = [v for v in range(g.n) if g.degree(v) != 3]
    cubic = not bad
    if bad:
        failures.append(f"vertex {bad[0]} has degree {g.degree(bad[0])}")
    simple = len({(min(u, v), max(u, v)) for u, v in g.edges}) == g.m
    if not simple:
        failures.append("graph has parallel edges")
    col = two_colouring(g)
    bip = col is not None
    X = Y = ()
    if bip:
        X = tuple(v for v in range(g.n) if col[v] == 0)
        Y = tuple(v for v in range(g.n) if col[v] == 1)
    else:
        failures.append("graph has an odd cycle")
    conn = simple and is_k_vertex_connected(g, 3)
    if not conn:
        failures.append("graph is not 3-connected")
    return BaseReport(g.n, g.m, cubic, bip, conn, X, Y, failures)


# -- hamiltonicity -------------------------------------------------------------

UND, IN, OUT = 0, 1, 2


class BudgetExceeded(Exception):
    pass


@dataclass
class HamiltonResult:
    status: str  # "found", "none" or "budget"
    cycle: list[int] | None  # vertex order
    cycle_edges: list[int] | None
    nodes: int
    seconds: float


class _HamSearch:
    """Edge-state search: every edge is undecided, in the cycle, or out of it.

    Propagation enforces exactly two cycle edges per vertex and forbids closing
    a cycle before it covers every vertex; every search node also checks that
    the non-excluded edges still form a connected spanning subgraph.
    """

    def __init__(self, g: TerminalGraph, budget: int, stop_at: float | None = None):
        self.stop_at = stop_at
        self.n, self.m = g.n, g.m
        self.edges = g.edges
        self.inc = g.incidence
        self.budget = budget
        self.nodes = 0

    def propagate(self, st, deg_in, deg_av, end, nin, queue) -> int:
        edges, inc, n = self.edges, self.inc, self.n
        while queue:
            e, s = queue.pop()
            if st[e] == s:
                continue
            if st[e] != UND:
                return -1
            u, v = edges[e]
            st[e] = s
            if s == OUT:
                for w in (u, v):
                    deg_av[w] -= 1
                    if deg_av[w] < 2:
                        return -1
                    if deg_av[w] == 2 and deg_in[w] < 2:
                        queue.extend((f, IN) for f in inc[w] if st[f] == UND)
                continue
            nin += 1
            a, b = end[u], end[v]
            if a == v:
                if nin != n:
                    return -1
                continue
            end[a], end[b] = b, a
            for w in (u, v):
                deg_in[w] += 1
                if deg_in[w] > 2:
                    return -1
                if deg_in[w] == 2:
                    queue.extend((f, OUT) for f in inc[w] if st[f] == UND)
            if nin < n - 1:
                # the edge a-b would close a short cycle
                queue.extend((f, OUT) for f in inc[a] if st[f] == UND and b in edges[f])
        return nin

    def connected(self, st) -> bool:
        seen = [False] * self.n
        seen[0] = True
        stack, cnt = [0], 1
        edges, inc = self.edges, self.inc
        while stack:
            x = stack.pop()
            for f in inc[x]:
                if st[f] != OUT:
                    u, v = edges[f]
                    y = v if u == x else u
                    if not seen[y]:
                        seen[y] = True
                        cnt += 1
                        stack.append(y)
        return cnt == self.n

    def run(self) -> list[int] | None:
        n = self.n
        if n < 3:
            return None
        st = [UND] * self.m
        deg_in = [0] * n
        deg_av = [len(self.inc[v]) for v in range(n)]
        end = list(range(n))
        queue = []
        for v in range(n):
            if deg_av[v] < 2:
                return None
            if deg_av[v] == 2:
                queue.extend((f, IN) for f in self.inc[v])
        nin = self.propagate(st, deg_in, deg_av, end, 0, queue)
        if nin < 0:
            return None
        return self._rec(st, deg_in, deg_av, end, nin)

    def _rec(self, st, deg_in, deg_av, end, nin):
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded
        if self.stop_at is not None and self.nodes & 1023 == 0 and time.perf_counter() > self.stop_at:
            raise BudgetExceeded
        if not self.connected(st):
            return None
        if nin == self.n:
            return [e for e in range(self.m) if st[e] == IN]
        inc = self.inc
        best, bestc = None, None
        # lowest-id path end with the fewest undecided edges; else lowest-id untouched vertex
        for v in range(self.n):
            if deg_in[v] == 1:
                c = sum(1 for f in inc[v] if st[f] == UND)
                if bestc is None or c < bestc:
                    best, bestc = v, c
        if best is None:
            best = next(v for v in range(self.n) if deg_in[v] == 0)
        e = next(f for f in inc[best] if st[f] == UND)
        for s in (IN, OUT):
            st2, di2, da2, en2 = st[:], deg_in[:], deg_av[:], end[:]
            nin2 = self.propagate(st2, di2, da2, en2, nin, [(e, s)])
            if nin2 >= 0:
                r = self._rec(st2, di2, da2, en2, nin2)
                if r is not None:
                    return r
        return None


def cycle_order(g: TerminalGraph, cycle_edges: Sequence[int]) -> list[int]:
    """Vertex order of a cycle given by its edge ids, starting at its least vertex."""
    inc: dict[int, list[int]] = {}
    for e in cycle_edges:
        for w in g.edges[e]:
            inc.setdefault(w, []).append(e)
    start = min(inc)
    order, prev_e, cur = [start], None, start
    while True:
        nxt = [f for f in inc[cur] if f != prev_e]
        f = min(nxt) if prev_e is None else nxt[0]
        cur = g.other(f, cur)
        prev_e = f
        if cur == start:
            break
        order.append(cur)
    return order


def is_hamilton_cycle(g: TerminalGraph, cycle_edges: Sequence[int]) -> bool:
    """Independent check: edges form one cycle through every vertex exactly once."""
    if len(cycle_edges) != g.n or len(set(cycle_edges)) != g.n or g.n < 3:
        return False
    deg = [0] * g.n
    for e in cycle_edges:
        if not 0 <= e < g.m:
            return False
        u, v = g.edges[e]
        deg[u] += 1
        deg[v] += 1
    if any(d != 2 for d in deg):
        return False
    sub = TerminalGraph(g.terminal, [g.edges[e] for e in cycle_edges])
    return len(components(sub)) == 1


def find_hamiltonian_cycle(g: TerminalGraph, budget: int = 10**7, seconds: float | None = None) -> HamiltonResult:
    """Complete search; ``status == "none"`` is returned only after exhausting it.

    ``budget`` caps search nodes and ``seconds`` wall time; hitting either gives
    ``status == "budget"``.
    """
    t0 = time.perf_counter()
    search = _HamSearch(g, budget, None if seconds is None else t0 + seconds)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * g.m + 1000))
    try:
        found = search.run()
    except BudgetExceeded:
        return HamiltonResult("budget", None, None, search.nodes, time.perf_counter() - t0)
    finally:
        sys.setrecursionlimit(old)
    dt = time.perf_counter() - t0
    if found is None:
        return HamiltonResult("none", None, None, search.nodes, dt)
    return HamiltonResult("found", cycle_order(g, found), sorted(found), search.nodes, dt)
