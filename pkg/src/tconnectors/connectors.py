"""T-paths, T-connector certificates, exact packing search, projections and audits."""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .catalog import is_hamilton_cycle
from .connectivity import components
from .families import Assembly, registered_aligned_sets, registered_basic_cuts
from .multigraph import (
    EdgeClass,
    GraphError,
    GraphParseError,
    StructureError,
    TerminalGraph,
    boundary,
    contract_many,
    subgraph_edges,
    suppress_and_clean,
)


@dataclass(frozen=True)
class TPath:
    vertices: tuple[int, ...]
    edges: tuple[int, ...]

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": list(self.edges)}

    @property
    def ends(self) -> tuple[int, int]:
        return self.vertices[0], self.vertices[-1]


@dataclass(frozen=True)
class ConnectorCertificate:
    connectors: tuple[tuple[TPath, ...], ...]

    @property
    def k(self) -> int:
        return len(self.connectors)

    def edge_sets(self) -> list[set[int]]:
        return [{e for p in c for e in p.edges} for c in self.connectors]

    def all_edges(self) -> set[int]:
        return set().union(*self.edge_sets()) if self.connectors else set()

    def to_json(self) -> dict:
        return {"connectors": [[p.to_json() for p in c] for c in self.connectors]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))


def certificate_from_json(data) -> ConnectorCertificate:
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise GraphParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    if not isinstance(data, dict) or not isinstance(data.get("connectors"), list):
        raise GraphParseError("$", "expected an object with a 'connectors' list")
    conns = []
    for i, c in enumerate(data["connectors"]):
        if not isinstance(c, list):
            raise GraphParseError(f"$.connectors[{i}]", "expected a list of paths")
        paths = []
        for j, p in enumerate(c):
            where = f"$.connectors[{i}][{j}]"
            if not isinstance(p, dict):
                raise GraphParseError(where, "expected an object")
            vs, es = p.get("vertices"), p.get("edges")
            ok = isinstance(vs, list) and isinstance(es, list)
            ok = ok and all(isinstance(x, int) and not isinstance(x, bool) for x in vs + es)
            if not ok:
                raise GraphParseError(where, "'vertices' and 'edges' must be integer lists")
            paths.append(TPath(tuple(vs), tuple(es)))
        conns.append(tuple(paths))
    return ConnectorCertificate(tuple(conns))


# -- shortcutting and validation -------------------------------------------------------


def check_tpath(G: TerminalGraph, P: TPath, T: set[int] | None = None) -> tuple[str, str] | None:
    """Return ``(clause, message)`` for the first defect of ``P``, or ``None``."""
    T = set(G.terminals) if T is None else T
    vs, es = P.vertices, P.edges
    if not es or len(vs) != len(es) + 1:
        return "malformed-path", f"{len(vs)} vertices and {len(es)} edges"
    for v in vs:
        if not 0 <= v < G.n:
            return "malformed-path", f"unknown vertex {v}"
    for i, e in enumerate(es):
        if not 0 <= e < G.m:
            return "malformed-path", f"unknown edge {e}"
        if set(G.edges[e]) != {vs[i], vs[i + 1]}:
            return "malformed-path", f"edge {e} does not join {vs[i]} and {vs[i + 1]}"
    if len(set(vs)) != len(vs):
        return "repeated-vertex", f"path revisits a vertex: {vs}"
    if vs[0] not in T or vs[-1] not in T:
        return "endpoint-not-terminal", f"endpoints {vs[0]}, {vs[-1]}"
    inner = [v for v in vs[1:-1] if v in T]
    if inner:
        return "internal-terminal", f"path passes through terminal {inner[0]}"
    return None


def shortcut(G: TerminalGraph, P: TPath) -> TerminalGraph:
    """Remove the edges of ``P`` and add one edge joining its ends (appended last)."""
    bad = check_tpath(G, P)
    if bad:
        raise GraphError(f"{bad[0]}: {bad[1]}")
    drop = set(P.edges)
    keep = [e for e in range(G.m) if e not in drop]
    H = subgraph_edges(G, keep)
    a, b = P.ends
    return TerminalGraph(
        H.terminal,
        list(H.edges) + [(a, b)],
        H.root,
        list(H.classes) + [EdgeClass.UNCLASSIFIED],
        H.labels,
        H.vertex_origin,
        list(H.edge_origin) + [tuple(o for e in P.edges for o in G.edge_origin[e])],
    )


@dataclass(frozen=True)
class Violation:
    clause: str
    message: str
    connector: int | None = None
    path: int | None = None
    witness: tuple = ()

    def to_json(self) -> dict:
        return {
            "clause": self.clause,
            "message": self.message,
            "connector": self.connector,
            "path": self.path,
            "witness": list(self.witness),
        }


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_json() for v in self.violations]}


class _DSU:
    def __init__(self, items: Iterable[int]):
        self.p = {x: x for x in items}

    def find(self, x: int) -> int:
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        if b < a:
            a, b = b, a
        self.p[b] = a
        return True

    def count(self) -> int:
        return sum(1 for x in self.p if self.p[x] == x)


def validate_certificate(
    G: TerminalGraph, T: Iterable[int] | None, cert: ConnectorCertificate
) -> ValidationReport:
    """Check path validity, global edge-disjointness and per-connector connectivity."""
    T = set(G.terminals if T is None else T)
    rep = ValidationReport()
    for i, c in enumerate(cert.connectors):
        for j, P in enumerate(c):
            bad = check_tpath(G, P, T)
            if bad:
                rep.violations.append(Violation(bad[0], bad[1], i, j, P.vertices))
    if rep.violations:
        return rep
    owner: dict[int, tuple[int, int]] = {}
    for i, c in enumerate(cert.connectors):
        for j, P in enumerate(c):
            for e in P.edges:
                if e in owner:
                    a = owner[e]
                    rep.violations.append(
                        Violation("shared-edge", f"edge {e} is used by paths {a} and {(i, j)}", i, j, (e,))
                    )
                else:
                    owner[e] = (i, j)
    for i, c in enumerate(cert.connectors):
        d = _DSU(T)
        for P in c:
            d.union(*P.ends)
        if d.count() > 1 and T:
            root = d.find(min(T))
            cut_off = sorted(t for t in T if d.find(t) != root)
            rep.violations.append(
                Violation(
                    "connector-disconnected",
                    f"shortcut graph of connector {i} has {d.count()} components on T",
                    i,
                    None,
                    tuple(cut_off),
                )
            )
    return rep


# -- exact packing --------------------------------------------------------------------


class PackBudget(Exception):
    pass


@dataclass
class PackResult:
    status: str  # "found", "none" or "budget"
    certificate: ConnectorCertificate | None
    nodes: int


def _tpaths_from(
    G: TerminalGraph, sources: set[int], targets_ok, used: Sequence[bool], T: set[int]
) -> list[TPath]:
    """All T-paths from a vertex of ``sources`` to a terminal accepted by ``targets_ok``."""
    out = []
    inc, edges = G.incidence, G.edges
    for s in sorted(sources):
        vs, es = [s], []
        on = {s}

        def dfs(u):
            for e in inc[u]:
                if used[e]:
                    continue
                a, b = edges[e]
                w = b if a == u else a
                if w in on:
                    continue
                if w in T:
                    if targets_ok(w):
                        out.append(TPath(tuple(vs) + (w,), tuple(es) + (e,)))
                    continue
                vs.append(w)
                es.append(e)
                on.add(w)
                dfs(w)
                on.discard(w)
                vs.pop()
                es.pop()

        dfs(s)
    out.sort(key=lambda p: (len(p.edges), p.edges, p.vertices))
    return out


def pack_exact(
    G: TerminalGraph, T: Iterable[int] | None, k: int, budget: int = 10**6, seconds: float | None = None
) -> PackResult:
    """Complete search for ``k`` edge-disjoint T-connectors.

    Each connector is grown as a tree of T-paths.  The branch always joins the
    component of the least terminal to another component, so every minimal
    packing is reachable; ``"none"`` is only returned after the search space is
    exhausted.  ``budget`` caps search nodes and ``seconds`` wall time.
    """
    stop_at = None if seconds is None else time.perf_counter() + seconds
    T = sorted(set(G.terminals if T is None else T))
    if k < 1:
        raise GraphError("k must be positive")
    if len(T) <= 1:
        return PackResult("found", ConnectorCertificate(tuple(() for _ in range(k))), 0)
    Tset = set(T)
    used = [False] * G.m
    chosen: list[list[TPath]] = [[] for _ in range(k)]
    nodes = [0]

    def comps(i: int) -> _DSU:
        d = _DSU(T)
        for P in chosen[i]:
            d.union(*P.ends)
        return d

    def feasible(d: _DSU) -> bool:
        # the unused edges must still connect the current components
        reach = {min(T)}
        stack = [min(T)]
        roots = {d.find(min(T))}
        seen = {min(T)}
        while stack:
            u = stack.pop()
            group = [u]
            if u in Tset:
                group = [t for t in T if d.find(t) == d.find(u)]
            for x in group:
                if x not in seen:
                    seen.add(x)
                for e in G.incidence[x]:
                    if used[e]:
                        continue
                    w = G.other(e, x)
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
                        if w in Tset:
                            roots.add(d.find(w))
            reach.update(group)
        return all(d.find(t) in roots for t in T)

    def rec() -> bool:
        nodes[0] += 1
        if nodes[0] > budget:
            raise PackBudget
        if stop_at is not None and time.perf_counter() > stop_at:
            raise PackBudget
        ds = [comps(i) for i in range(k)]
        open_ = [i for i in range(k) if ds[i].count() > 1]
        if not open_:
            return True
        i = min(open_, key=lambda j: (ds[j].count(), j))
        d = ds[i]
        if not all(feasible(ds[j]) for j in open_):
            return False
        r0 = d.find(T[0])
        comp0 = {t for t in T if d.find(t) == r0}
        for P in _tpaths_from(G, comp0, lambda w: d.find(w) != r0, used, Tset):
            for e in P.edges:
                used[e] = True
            chosen[i].append(P)
            if rec():
                return True
            chosen[i].pop()
            for e in P.edges:
                used[e] = False
        return False

    try:
        ok = rec()
    except PackBudget:
        return PackResult("budget", None, nodes[0])
    if not ok:
        return PackResult("none", None, nodes[0])
    return PackResult("found", ConnectorCertificate(tuple(tuple(c) for c in chosen)), nodes[0])


# -- Hamilton cycles, projections -----------------------------------------------------


def _base_edge_index(N: TerminalGraph) -> dict[frozenset, int]:
    return {frozenset(e): i for i, e in enumerate(N.edges)}


def lift_hamilton_cycle(asm: Assembly, cycle: Sequence[int]) -> ConnectorCertificate:
    """Turn a Hamilton cycle of the base graph into a T-connector of ``G_0`` (``k = 1``).

    ``cycle`` is the vertex order of the cycle.  Inside the atom of each
    ``X``-vertex the walk enters through one non-terminal, visits both
    terminals via the third non-terminal, and leaves through the remaining one.
    """
    if asm.params.k != 1:
        raise GraphError("lifting is implemented for k = 1 only")
    emb, G = asm.emb, asm.graph
    N = emb.base
    n = N.n
    cyc = list(cycle)
    if len(cyc) != n or sorted(cyc) != list(range(n)):
        raise GraphError("cycle must list every base vertex exactly once")
    eidx = _base_edge_index(N)
    ring = []
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        e = eidx.get(frozenset((a, b)))
        if e is None:
            raise GraphError(f"{a}-{b} is not an edge of the base graph")
        ring.append(e)
    if not is_hamilton_cycle(N, ring):
        raise GraphError("input is not a Hamilton cycle")
    Xs = set(emb.base_X)
    # rotate so that the walk starts at an X-vertex
    s = next(i for i, v in enumerate(cyc) if v in Xs)
    cyc = cyc[s:] + cyc[:s]
    ring = ring[s:] + ring[:s]
    by_copy = asm.registry.by_copy()

    def atom_of_base(x):
        return asm.registry.atoms[by_copy[(f"x{x}",)]]

    def the_edge(u, v):
        es = G.edges_between(u, v)
        if len(es) != 1:
            raise StructureError(f"expected one edge between {u} and {v}, found {len(es)}")
        return es[0]

    L = len(cyc)
    hops = []  # per X position: (entering final edge, leaving final edge)
    for i in range(0, L, 2):
        e_in = emb.base_fibres[ring[i - 1]][0]
        e_out = emb.base_fibres[ring[i]][0]
        hops.append((cyc[i], e_in, e_out))
    paths = []
    entries = []
    for x, e_in, e_out in hops:
        atom = atom_of_base(x)
        sa = next(v for v in G.edges[e_in] if v in atom.vertices)
        sb = next(v for v in G.edges[e_out] if v in atom.vertices)
        sc = next(v for v in atom.nonterminals if v not in (sa, sb))
        t1, t2 = atom.terminals
        paths.append(TPath((t1, sc, t2), (the_edge(t1, sc), the_edge(sc, t2))))
        entries.append((sa, sb, t1, t2, e_in, e_out))
    for j, (sa, sb, t1, t2, e_in, e_out) in enumerate(entries):
        na, _, nt1, _, ne_in, _ = entries[(j + 1) % len(entries)]
        y = next(v for v in G.edges[e_out] if v != sb)
        paths.append(
            TPath((t2, sb, y, na, nt1), (the_edge(t2, sb), e_out, ne_in, the_edge(na, nt1)))
        )
    return ConnectorCertificate((tuple(paths),))


def project_to_atom_graph(G: TerminalGraph, registry, Qi: Iterable[int]) -> TerminalGraph:
    """Contract every atom of ``(V(G), Qi)`` to one vertex, then suppress non-terminals."""
    H = subgraph_edges(G, Qi)
    groups = [a.vertices for a in registry.atoms]
    H, _, _ = contract_many(H, groups, [a.name for a in registry.atoms])
    return suppress_and_clean(H)


class HalfFibre(GraphError):
    def __init__(self, base_edge: int, present: Sequence[int], missing: Sequence[int]):
        super().__init__(
            f"base edge {base_edge}: {len(present)} of {len(present) + len(missing)} fibre edges in Q"
        )
        self.base_edge = base_edge
        self.present = tuple(present)
        self.missing = tuple(missing)


@dataclass
class BaseProjection:
    edges: tuple[int, ...]  # base edge ids
    degrees: tuple[int, ...]
    two_regular: bool
    connected: bool
    hamilton: bool
    cycle: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {
            "edges": list(self.edges),
            "two_regular": self.two_regular,
            "connected": self.connected,
            "hamilton": self.hamilton,
            "cycle": list(self.cycle),
        }


def project_to_base(asm: Assembly, Q: Iterable[int]) -> BaseProjection:
    """``Q_N``: the base edges whose whole fibre lies in ``Q``; a partial fibre raises :class:`HalfFibre`."""
    Q = set(Q)
    N = asm.emb.base
    keep = []
    for be, fib in enumerate(asm.emb.base_fibres):
        present = [e for e in fib if e in Q]
        if present and len(present) != len(fib):
            raise HalfFibre(be, present, [e for e in fib if e not in Q])
        if present:
            keep.append(be)
    deg = [0] * N.n
    for be in keep:
        for v in N.edges[be]:
            deg[v] += 1
    sub = TerminalGraph(N.terminal, [N.edges[e] for e in keep])
    connected = len(components(sub)) == 1
    ham = is_hamilton_cycle(N, keep)
    cyc = ()
    if ham:
        from .catalog import cycle_order

        cyc = tuple(cycle_order(N, keep))
    return BaseProjection(tuple(keep), tuple(deg), all(d == 2 for d in deg), connected, ham, cyc)


# -- audit ----------------------------------------------------------------------------


@dataclass
class AuditCheck:
    kind: str
    name: str
    expected: str
    observed: int | str
    ok: bool
    witness: tuple = ()

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "expected": self.expected,
            "observed": self.observed,
            "ok": self.ok,
            "witness": list(self.witness),
        }


@dataclass
class PackingAudit:
    checks: list[AuditCheck] = field(default_factory=list)
    observations: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    projection: BaseProjection | None = None
    projection_error: str | None = None

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed(self, kind: str | None = None) -> list[AuditCheck]:
        return [c for c in self.checks if not c.ok and (kind is None or c.kind == kind)]

    def summary(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for c in self.checks:
            s = out.setdefault(c.kind, {"passed": 0, "failed": 0})
            s["passed" if c.ok else "failed"] += 1
        return out

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "summary": self.summary(),
            "failed": [c.to_json() for c in self.checks if not c.ok],
            "observations": self.observations,
            "warnings": self.warnings,
            "projection": self.projection.to_json() if self.projection else None,
            "projection_error": self.projection_error,
        }


def sample_aligned_sets(asm: Assembly, count: int, seed: int, avoid: Iterable[int] = ()) -> list[frozenset[int]]:
    """Random aligned sets grown from a random atom by absorbing whole atoms.

    Every sampled set contains at least one atom, hence a terminal.
    """
    G, reg = asm.graph, asm.registry
    avoid = set(avoid)
    rng = random.Random(seed)
    ok_atoms = [i for i, a in enumerate(reg.atoms) if not (a.vertices & avoid)]
    out = []
    if not ok_atoms:
        return out
    nbrs = [G.neighbours(v) for v in range(G.n)]
    for _ in range(count):
        a0 = rng.choice(ok_atoms)
        S = set(reg.atoms[a0].vertices)
        target = rng.randint(len(S), max(len(S), G.n // 2))
        frontier = sorted({w for v in S for w in nbrs[v] if w not in S})
        while len(S) < target and frontier:
            w = frontier[rng.randrange(len(frontier))]
            add = reg.atoms[reg.atom_of[w]].vertices if w in reg.atom_of else {w}
            if add & avoid:
                frontier.remove(w)
                continue
            S |= add
            frontier = sorted({u for v in add for u in nbrs[v] if u not in S} | set(frontier) - S)
        out.append(frozenset(S))
    return out


def _connected_without(G: TerminalGraph, edges: set[int], r: int) -> tuple[bool, int]:
    verts = {v for e in edges for v in G.edges[e]} - {r}
    if not verts:
        return True, 0
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for e in edges:
        a, b = G.edges[e]
        if a != r and b != r:
            adj[a].append(b)
            adj[b].append(a)
    start = min(verts)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(verts), len(verts) - len(seen)


def audit_packing(
    asm: Assembly, cert: ConnectorCertificate, r: int, seed: int = 0, samples: int = 200
) -> PackingAudit:
    """Measure the cut properties a packing with properties (i)-(iii) must have."""
    G, emb, k = asm.graph, asm.emb, asm.params.k
    aud = PackingAudit()
    Q = cert.all_edges()
    Qs = cert.edge_sets()
    for rc in registered_basic_cuts(asm):
        c = sum(1 for e in rc.cut if e in Q)
        aud.checks.append(AuditCheck("basic-cut", rc.name, f"== {2 * k}", c, c == 2 * k, rc.cut))
    sets = [(n, S) for n, S in registered_aligned_sets(asm) if r not in S]
    sets += [(f"sample {i}", S) for i, S in enumerate(sample_aligned_sets(asm, samples, seed, [r]))]
    for name, S in sets:
        c = sum(1 for e in boundary(G, S) if e in Q)
        aud.checks.append(AuditCheck("aligned-set", name, f">= {2 * k}", c, c >= 2 * k, tuple(sorted(S))))
    for i, Qi in enumerate(Qs):
        ok, lost = _connected_without(G, Qi, r)
        aud.checks.append(AuditCheck("connector-minus-r", f"Q_{i + 1} - r", "connected", "connected" if ok else f"{lost} vertices cut off", ok))
    for key in emb.gadget_copies():
        stage, path = key
        src = emb.sources[stage]
        pre = "/".join(path) or "(top)"
        if stage not in ("F0", "Fl"):
            C = [emb.edge(key, e) for e in src.root_edges() if src.classes[e].value == "C"]
            c = sum(1 for e in C if e in Q)
            aud.checks.append(AuditCheck("output-fibre", f"{pre} ({stage})", f"0 or {len(C)}", c, c in (0, len(C)), tuple(C)))
            obs = {"copy": pre, "stage": stage}
            for j in (1, 2):
                for lab in ("vp", "vpp", "uB"):
                    obs[f"|delta_Q({lab}{j})|"] = sum(1 for e in emb.copy_delta(key, [f"{lab}{j}"]) if e in Q)
                obs[f"|eps_Q(vp{j},vpp{j})|"] = sum(1 for e in emb.copy_epsilon(key, [f"vp{j}", f"vpp{j}"]) if e in Q)
            aud.observations.append(obs)
        elif stage == "Fl":
            for pq in ("12", "13", "23"):
                C = emb.copy_epsilon(key, ["r", f"f{pq}"]) + emb.copy_epsilon(key, ["r", f"f{pq[::-1]}"])
                c = sum(1 for e in C if e in Q)
                aud.checks.append(AuditCheck("output-fibre", f"{pre} r-f{pq}/f{pq[::-1]}", f"0 or {len(C)}", c, c in (0, len(C)), tuple(C)))
    for be, fib in enumerate(emb.base_fibres):
        c = sum(1 for e in fib if e in Q)
        aud.checks.append(AuditCheck("base-fibre", f"base edge {be}", f"0 or {len(fib)}", c, c in (0, len(fib)), tuple(fib)))
    qdeg: dict[int, int] = {}
    for e in Q:
        for v in G.edges[e]:
            qdeg[v] = qdeg.get(v, 0) + 1
    odd = [v for v in G.nonterminals if qdeg.get(v, 0) not in (0, 2)]
    if odd:
        aud.warnings.append(f"{len(odd)} non-terminals have Q-degree other than 0 or 2, first {G.labels[odd[0]]}")
    if not aud.failed("basic-cut") and not aud.failed("base-fibre"):
        try:
            aud.projection = project_to_base(asm, Q)
        except HalfFibre as exc:
            aud.projection_error = str(exc)
    return aud
