"""Multigraphs with terminals.

Vertices and edges are dense integer ids (``0..n-1`` and ``0..m-1``).  Edges
are first-class objects so that parallel edges can be told apart by
bijections, certificates and provenance records.  Graph values are treated as
immutable; every operation returns a new graph.
"""

from __future__ import annotations

import json
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

# (stage tag, copy path, id in the source graph of that stage)
Origin = tuple  # tuple[str, tuple[str, ...], int]


class GraphError(ValueError):
    """Invalid input to a graph operation (unknown id, bad precondition)."""


class StructureError(GraphError):
    """The graph does not have the shape an operation is defined on."""


class GraphParseError(GraphError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


class EdgeClass(Enum):
    A = "A"
    B = "B"
    C = "C"
    UNCLASSIFIED = None

    def to_json(self):
        return self.value


class TerminalGraph:
    """A multigraph together with a set of terminals.

    ``terminal[v]`` is the kind flag of vertex ``v``; ``edges[e]`` is the
    unordered endpoint pair of edge ``e``.  ``classes`` assigns an
    :class:`EdgeClass` to every edge (``UNCLASSIFIED`` unless the edge is
    incident with the root).  ``vertex_origin`` and ``edge_origin`` record
    where each element came from during a construction.
    """

    __slots__ = (
        "terminal",
        "edges",
        "root",
        "classes",
        "labels",
        "vertex_origin",
        "edge_origin",
        "__dict__",
    )

    def __init__(
        self,
        terminal: Sequence[bool],
        edges: Sequence[tuple[int, int]],
        root: int | None = None,
        classes: Sequence[EdgeClass] | None = None,
        labels: Sequence[str] | None = None,
        vertex_origin: Sequence[Origin] | None = None,
        edge_origin: Sequence[tuple[Origin, ...]] | None = None,
        allow_loops: bool = False,
    ):
        n = len(terminal)
        self.terminal = tuple(bool(t) for t in terminal)
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        for e, (u, v) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge {e} references unknown vertex")
            if u == v and not allow_loops:
                raise GraphError(f"edge {e} is a loop at vertex {u}")
        if root is not None:
            if not 0 <= root < n:
                raise GraphError(f"root {root} is not a vertex")
            if not self.terminal[root]:
                raise GraphError(f"root {root} is not a terminal")
        self.root = root
        m = len(self.edges)
        self.classes = (
            tuple(classes) if classes is not None else (EdgeClass.UNCLASSIFIED,) * m
        )
        self.labels = tuple(labels) if labels is not None else tuple(str(v) for v in range(n))
        self.vertex_origin = tuple(vertex_origin) if vertex_origin is not None else (None,) * n
        self.edge_origin = tuple(edge_origin) if edge_origin is not None else ((),) * m
        if not (len(self.classes) == m == len(self.edge_origin)):
            raise GraphError("per-edge data has the wrong length")
        if not (len(self.labels) == n == len(self.vertex_origin)):
            raise GraphError("per-vertex data has the wrong length")

    # -- basic queries ---------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.terminal)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def terminals(self) -> tuple[int, ...]:
        return tuple(v for v, t in enumerate(self.terminal) if t)

    @cached_property
    def nonterminals(self) -> tuple[int, ...]:
        return tuple(v for v, t in enumerate(self.terminal) if not t)

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for e, (u, v) in enumerate(self.edges):
            inc[u].append(e)
            if v != u:
                inc[v].append(e)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def label_index(self) -> dict[str, int]:
        return {lab: v for v, lab in enumerate(self.labels)}

    def vertex(self, label: str) -> int:
        try:
            return self.label_index[label]
        except KeyError:
            raise GraphError(f"no vertex labelled {label!r}") from None

    def other(self, e: int, v: int) -> int:
        u, w = self.edges[e]
        return w if u == v else u

    def degree(self, v: int) -> int:
        return sum(2 if self.edges[e][0] == self.edges[e][1] else 1 for e in self.incidence[v])

    def neighbours(self, v: int) -> list[int]:
        return sorted({self.other(e, v) for e in self.incidence[v]})

    def multiplicity(self, u: int, v: int) -> int:
        return sum(1 for e in self.incidence[u] if self.other(e, u) == v)

    def edges_between(self, u: int, v: int) -> list[int]:
        return [e for e in self.incidence[u] if self.other(e, u) == v]

    def root_edges(self, cls: EdgeClass | None = None) -> list[int]:
        if self.root is None:
            raise GraphError("graph has no root")
        return [e for e in self.incidence[self.root] if cls is None or self.classes[e] is cls]

    def class_sizes(self) -> dict[str, int]:
        out = {"A": 0, "B": 0, "C": 0}
        for e in self.root_edges():
            c = self.classes[e]
            if c is not EdgeClass.UNCLASSIFIED:
                out[c.value] += 1
        return out

    def check_vertices(self, X: Iterable[int]) -> frozenset[int]:
        X = frozenset(X)
        for v in X:
            if not (isinstance(v, int) and 0 <= v < self.n):
                raise GraphError(f"unknown vertex id {v!r}")
        return X

    # -- equality / canonical form -----------------------------------------

    def canonical(self) -> tuple:
        return (
            self.terminal,
            self.edges,
            self.root,
            tuple(c.value for c in self.classes),
            self.labels,
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, TerminalGraph) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def __repr__(self) -> str:
        return (
            f"TerminalGraph(n={self.n}, m={self.m}, terminals={len(self.terminals)}, "
            f"root={self.root})"
        )


class GraphBuilder:
    """Mutable, single-owner helper for assembling a :class:`TerminalGraph`."""

    def __init__(self):
        self._terminal: list[bool] = []
        self._labels: list[str] = []
        self._edges: list[tuple[int, int]] = []
        self._classes: list[EdgeClass] = []

    def add_vertex(self, label: str, terminal: bool = False) -> int:
        self._terminal.append(terminal)
        self._labels.append(label)
        return len(self._terminal) - 1

    def add_edge(self, u: int, v: int, cls: EdgeClass = EdgeClass.UNCLASSIFIED) -> int:
        if u == v:
            raise GraphError("self-loops are not allowed")
        self._edges.append((u, v))
        self._classes.append(cls)
        return len(self._edges) - 1

    def add_edges(self, u: int, v: int, count: int, cls=EdgeClass.UNCLASSIFIED) -> list[int]:
        if count < 0:
            raise GraphError(f"negative multiplicity {count}")
        return [self.add_edge(u, v, cls) for _ in range(count)]

    def build(self, root: int | None = None, stage: str | None = None) -> TerminalGraph:
        n, m = len(self._terminal), len(self._edges)
        vo = [(stage, (), v) for v in range(n)] if stage else None
        eo = [((stage, (), e),) for e in range(m)] if stage else None
        return TerminalGraph(self._terminal, self._edges, root, self._classes, self._labels, vo, eo)


# -- set queries ------------------------------------------------------------


def boundary(G: TerminalGraph, X: Iterable[int]) -> list[int]:
    """Edges with exactly one endvertex in ``X`` (parallel edges counted individually)."""
    X = G.check_vertices(X)
    out = set()
    for v in X:
        for e in G.incidence[v]:
            a, b = G.edges[e]
            if (a in X) != (b in X):
                out.add(e)
    return sorted(out)


def degree(G: TerminalGraph, X: Iterable[int]) -> int:
    return len(boundary(G, X))


def induced_edge_set(G: TerminalGraph, X: Iterable[int]) -> list[int]:
    X = G.check_vertices(X)
    out = set()
    for v in X:
        for e in G.incidence[v]:
            a, b = G.edges[e]
            if a in X and b in X:
                out.add(e)
    return sorted(out)


def subgraph_edges(G: TerminalGraph, keep: Iterable[int]) -> TerminalGraph:
    """Spanning subgraph keeping only the edges in ``keep`` (renumbered in id order)."""
    keep = sorted(set(keep))
    for e in keep:
        if not 0 <= e < G.m:
            raise GraphError(f"unknown edge id {e!r}")
    return TerminalGraph(
        G.terminal,
        [G.edges[e] for e in keep],
        G.root,
        [G.classes[e] for e in keep],
        G.labels,
        G.vertex_origin,
        [G.edge_origin[e] for e in keep],
    )


# -- contraction and suppression -----------------------------------------------


def contract_many(
    G: TerminalGraph, groups: Sequence[Iterable[int]], labels: Sequence[str] | None = None
) -> tuple[TerminalGraph, list[int], list[int | None]]:
    """Identify each vertex group to a single vertex.

    Parallel edges are kept and loops discarded.  Returns the new graph, the
    new vertex id of every group, and a map from old edge ids to new edge ids
    (``None`` for discarded loops).  A merged vertex is a terminal if its group
    contains one; it becomes the root if the group contains the root.
    """
    owner: dict[int, int] = {}
    groups = [G.check_vertices(g) for g in groups]
    for i, g in enumerate(groups):
        if not g:
            raise GraphError(f"contraction group {i} is empty")
        for v in g:
            if v in owner:
                raise GraphError(f"vertex {v} is in two contraction groups")
            owner[v] = i
    first = {i: min(g) for i, g in enumerate(groups)}
    vmap: dict[int, int] = {}
    terminal, vlabels, vorigin = [], [], []
    group_vertex = [0] * len(groups)
    for v in range(G.n):
        i = owner.get(v)
        if i is not None and first[i] != v:
            continue
        vmap_id = len(terminal)
        if i is None:
            vmap[v] = vmap_id
            terminal.append(G.terminal[v])
            vlabels.append(G.labels[v])
            vorigin.append(G.vertex_origin[v])
        else:
            g = groups[i]
            group_vertex[i] = vmap_id
            for w in g:
                vmap[w] = vmap_id
            terminal.append(any(G.terminal[w] for w in g))
            vlabels.append(labels[i] if labels is not None else G.labels[first[i]])
            vorigin.append(None)
    edges, classes, eorigin = [], [], []
    emap: list[int | None] = []
    for e, (u, v) in enumerate(G.edges):
        a, b = vmap[u], vmap[v]
        if a == b:
            emap.append(None)
            continue
        emap.append(len(edges))
        edges.append((a, b))
        classes.append(G.classes[e])
        eorigin.append(G.edge_origin[e])
    root = vmap[G.root] if G.root is not None else None
    H = TerminalGraph(terminal, edges, root, classes, vlabels, vorigin, eorigin)
    return H, group_vertex, emap


def contract(G: TerminalGraph, X: Iterable[int], label: str | None = None) -> tuple[TerminalGraph, int]:
    H, (v,), _ = contract_many(G, [X], None if label is None else [label])
    return H, v


def suppress_and_clean(G: TerminalGraph) -> TerminalGraph:
    """Suppress degree-2 non-terminals and delete isolated ones.

    Terminals are untouched.  A non-terminal of degree 1 or at least 3 makes
    the input malformed for this operation and raises :class:`StructureError`.
    """
    for v in G.nonterminals:
        d = G.degree(v)
        if d == 1 or d >= 3:
            raise StructureError(f"non-terminal {v} ({G.labels[v]}) has degree {d}")
    # walk maximal chains of degree-2 non-terminals
    edges: list[tuple[int, int]] = []
    origins: list[tuple] = []
    classes: list[EdgeClass] = []
    seen_edge = [False] * G.m

    def passes(v: int) -> bool:
        return not G.terminal[v]

    for e in range(G.m):
        if seen_edge[e]:
            continue
        u, v = G.edges[e]
        # extend the chain in both directions from e
        chain = [e]
        seen_edge[e] = True
        ends = []
        closed = False
        for start, nxt in ((u, v), (v, u)):
            cur, prev_e = start, e
            while passes(cur):
                nexts = [f for f in G.incidence[cur] if f != prev_e]
                if not nexts:
                    break
                f = nexts[0]
                if seen_edge[f]:
                    closed = True  # chain is a cycle of non-terminals
                    break
                seen_edge[f] = True
                chain.append(f)
                prev_e = f
                cur = G.other(f, cur)
            ends.append(cur)
            if closed:
                break
        if closed or ends[0] == ends[1]:
            continue  # becomes a loop or an isolated cycle: discarded
        if passes(ends[0]) or passes(ends[1]):
            raise StructureError("chain ends in a non-terminal")  # unreachable with the degree check
        edges.append((ends[0], ends[1]))
        origins.append(tuple(o for f in sorted(chain) for o in G.edge_origin[f]))
        cls = [G.classes[f] for f in chain if G.classes[f] is not EdgeClass.UNCLASSIFIED]
        classes.append(cls[0] if len(cls) == 1 else EdgeClass.UNCLASSIFIED)
    keep = list(G.terminals)
    vmap = {v: i for i, v in enumerate(keep)}
    return TerminalGraph(
        [True] * len(keep),
        [(vmap[a], vmap[b]) for a, b in edges],
        vmap.get(G.root) if G.root is not None else None,
        classes,
        [G.labels[v] for v in keep],
        [G.vertex_origin[v] for v in keep],
        origins,
    )


# -- serialization ------------------------------------------------------------------


def to_json_dict(G: TerminalGraph) -> dict:
    return {
        "vertices": [
            {"id": v, "kind": "terminal" if G.terminal[v] else "nonterminal", "label": G.labels[v]}
            for v in range(G.n)
        ],
        "edges": [
            {"id": e, "u": u, "v": v, "class": G.classes[e].value}
            for e, (u, v) in enumerate(G.edges)
        ],
        "root": G.root,
    }


def serialize(G: TerminalGraph) -> bytes:
    return json.dumps(to_json_dict(G), separators=(",", ":")).encode()


def _field(obj, key, where, types):
    if not isinstance(obj, dict) or key not in obj:
        raise GraphParseError(where, f"missing field {key!r}")
    val = obj[key]
    if not isinstance(val, types) or (isinstance(val, bool) and types is int):
        raise GraphParseError(f"{where}.{key}", f"unexpected value {val!r}")
    return val


def from_json_dict(data) -> TerminalGraph:
    if not isinstance(data, dict):
        raise GraphParseError("$", "expected a JSON object")
    verts = _field(data, "vertices", "$", list)
    edges = _field(data, "edges", "$", list)
    vs = sorted(verts, key=lambda x: x.get("id", -1) if isinstance(x, dict) else -1)
    terminal, labels = [], []
    for i, rec in enumerate(vs):
        where = f"$.vertices[{i}]"
        vid = _field(rec, "id", where, int)
        if vid != i:
            raise GraphParseError(where, f"vertex ids must be 0..n-1, got {vid}")
        kind = _field(rec, "kind", where, str)
        if kind not in ("terminal", "nonterminal"):
            raise GraphParseError(f"{where}.kind", f"unknown kind {kind!r}")
        terminal.append(kind == "terminal")
        labels.append(str(rec.get("label", vid)))
    es = sorted(edges, key=lambda x: x.get("id", -1) if isinstance(x, dict) else -1)
    pairs, classes = [], []
    for i, rec in enumerate(es):
        where = f"$.edges[{i}]"
        eid = _field(rec, "id", where, int)
        if eid != i:
            raise GraphParseError(where, f"edge ids must be 0..m-1, got {eid}")
        u = _field(rec, "u", where, int)
        v = _field(rec, "v", where, int)
        if not (0 <= u < len(terminal) and 0 <= v < len(terminal)):
            raise GraphParseError(where, "endpoint is not a vertex")
        cls = rec.get("class")
        if cls not in ("A", "B", "C", None):
            raise GraphParseError(f"{where}.class", f"unknown class {cls!r}")
        pairs.append((u, v))
        classes.append(EdgeClass(cls))
    root = data.get("root")
    if root is not None and not isinstance(root, int):
        raise GraphParseError("$.root", f"unexpected value {root!r}")
    try:
        return TerminalGraph(terminal, pairs, root, classes, labels)
    except GraphError as exc:
        raise GraphParseError("$", str(exc)) from None


def deserialize(blob: bytes | str) -> TerminalGraph:
    if isinstance(blob, bytes):
        try:
            blob = blob.decode()
        except UnicodeDecodeError as exc:
            raise GraphParseError(f"byte {exc.start}", "not UTF-8") from None
    try:
        data = json.loads(blob)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return from_json_dict(data)


def to_dot(G: TerminalGraph, name: str = "G") -> str:
    """Graphviz rendering; parallel edges are merged into one labelled edge."""
    lines = [f"graph {json.dumps(name)} {{"]
    for v in range(G.n):
        if G.terminal[v]:
            attrs = "shape=circle, style=filled, fillcolor=black, fontcolor=white"
            if v == G.root:
                attrs += ", peripheries=2"
        else:
            attrs = "shape=square"
        lines.append(f"  {v} [label={json.dumps(G.labels[v])}, {attrs}];")
    bundles: dict[tuple[int, int, str], int] = {}
    for e, (u, v) in enumerate(G.edges):
        key = (min(u, v), max(u, v), G.classes[e].value or "")
        bundles[key] = bundles.get(key, 0) + 1
    for (u, v, cls), mult in sorted(bundles.items()):
        label = f"{mult}" if mult > 1 else ""
        if cls:
            label = f"{cls}:{label}" if label else cls
        attr = f" [label={json.dumps(label)}]" if label else ""
        lines.append(f"  {u} -- {v}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
