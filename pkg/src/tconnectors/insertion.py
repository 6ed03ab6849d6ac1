"""Insertion of one graph with terminals into another.

``insert(G1, t1, G2, t2, h)`` deletes the equal-degree terminals ``t1`` and
``t2`` and, for every edge ``e`` at ``t1``, joins the far end of ``e`` to the
far end of ``h(e)``.  Several insertions into the same host can be performed
in one pass with :func:`insert_many`; the result equals doing them one by one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .multigraph import EdgeClass, GraphError, TerminalGraph


class InsertionError(GraphError):
    pass


@dataclass(frozen=True)
class EdgeBijection:
    host_terminal: int
    guest_terminal: int
    pairing: tuple[tuple[int, int], ...]  # (host edge at t1, guest edge at t2)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairing)


@dataclass(frozen=True)
class InsertionJob:
    host_terminal: int
    guest: TerminalGraph
    h: EdgeBijection
    copy: tuple[str, ...] = ()


@dataclass
class InsertionMaps:
    """Where every surviving host/guest element ended up."""

    host_vertex: dict[int, int]
    host_edge: list[int]
    guest_vertex: list[dict[int, int]]
    guest_edge: list[dict[int, int]]


def _check_job(host: TerminalGraph, job: InsertionJob) -> None:
    t1, G2, h = job.host_terminal, job.guest, job.h
    t2 = h.guest_terminal
    if h.host_terminal != t1:
        raise InsertionError("bijection was built for a different host terminal")
    if not (0 <= t1 < host.n) or not host.terminal[t1]:
        raise InsertionError(f"host vertex {t1} is not a terminal")
    if not (0 <= t2 < G2.n) or not G2.terminal[t2]:
        raise InsertionError(f"guest vertex {t2} is not a terminal")
    d1, d2 = host.degree(t1), G2.degree(t2)
    if d1 != d2:
        raise InsertionError(f"degree mismatch: host terminal has {d1}, guest terminal has {d2}")
    src = [a for a, _ in h.pairing]
    dst = [b for _, b in h.pairing]
    if sorted(src) != sorted(host.incidence[t1]) or len(set(src)) != len(src):
        raise InsertionError("bijection domain is not the edge set at the host terminal")
    if sorted(dst) != sorted(G2.incidence[t2]) or len(set(dst)) != len(dst):
        raise InsertionError("bijection is not onto the edge set at the guest terminal")


def _prefix(origin, copy):
    if origin is None or not copy:
        return origin
    stage, path, sid = origin
    return (stage, tuple(copy) + tuple(path), sid)


def insert_many(
    host: TerminalGraph, jobs: Sequence[InsertionJob]
) -> tuple[TerminalGraph, InsertionMaps]:
    """Perform several insertions at distinct host terminals.

    Ids are assigned deterministically: surviving host vertices first, then
    each guest's vertices in job order.  Host edges keep their relative order
    (an edge at an insertion point becomes the corresponding bridge edge);
    guest edges not at the guest terminal follow in job order.
    """
    at: dict[int, int] = {}
    for j, job in enumerate(jobs):
        _check_job(host, job)
        if job.host_terminal in at:
            raise InsertionError(f"two insertions at host terminal {job.host_terminal}")
        at[job.host_terminal] = j

    terminal: list[bool] = []
    labels: list[str] = []
    vorigin: list = []
    host_vertex: dict[int, int] = {}
    for v in range(host.n):
        if v in at:
            continue
        host_vertex[v] = len(terminal)
        terminal.append(host.terminal[v])
        labels.append(host.labels[v])
        vorigin.append(host.vertex_origin[v])
    guest_vertex: list[dict[int, int]] = []
    for job in jobs:
        G2, t2 = job.guest, job.h.guest_terminal
        pre = "/".join(job.copy)
        vm = {}
        for v in range(G2.n):
            if v == t2:
                continue
            vm[v] = len(terminal)
            terminal.append(G2.terminal[v])
            labels.append(f"{pre}/{G2.labels[v]}" if pre else G2.labels[v])
            vorigin.append(_prefix(G2.vertex_origin[v], job.copy))
        guest_vertex.append(vm)

    hmaps = [job.h.as_dict() for job in jobs]
    edges: list[tuple[int, int]] = []
    classes: list[EdgeClass] = []
    eorigin: list[tuple] = []
    host_edge: list[int] = []
    guest_edge: list[dict[int, int]] = [{} for _ in jobs]
    for e, (u, v) in enumerate(host.edges):
        ends = []
        origin = list(host.edge_origin[e])
        for x in (u, v):
            j = at.get(x)
            if j is None:
                ends.append(host_vertex[x])
                continue
            job = jobs[j]
            g = hmaps[j][e]
            ends.append(guest_vertex[j][job.guest.other(g, job.h.guest_terminal)])
            guest_edge[j][g] = len(edges)
            origin.extend(_prefix(o, job.copy) for o in job.guest.edge_origin[g])
        if ends[0] == ends[1]:
            raise InsertionError(f"insertion would create a loop from host edge {e}")
        host_edge.append(len(edges))
        edges.append((ends[0], ends[1]))
        classes.append(host.classes[e])
        eorigin.append(tuple(origin))
    for j, job in enumerate(jobs):
        G2, t2 = job.guest, job.h.guest_terminal
        for g, (a, b) in enumerate(G2.edges):
            if a == t2 or b == t2:
                continue
            guest_edge[j][g] = len(edges)
            edges.append((guest_vertex[j][a], guest_vertex[j][b]))
            classes.append(EdgeClass.UNCLASSIFIED)
            eorigin.append(tuple(_prefix(o, job.copy) for o in G2.edge_origin[g]))

    root = host_vertex.get(host.root) if host.root is not None else None
    if root is None:
        classes = [EdgeClass.UNCLASSIFIED] * len(edges)
    G = TerminalGraph(terminal, edges, root, classes, labels, vorigin, eorigin)
    return G, InsertionMaps(host_vertex, host_edge, guest_vertex, guest_edge)


def insert(
    G1: TerminalGraph,
    t1: int,
    G2: TerminalGraph,
    t2: int,
    h: EdgeBijection | None = None,
    copy: Sequence[str] = (),
) -> TerminalGraph:
    """Insert ``G2`` into ``G1`` at ``t1`` via ``h`` (canonical bijection if omitted)."""
    if h is None:
        h = canonical_bijection(G1, t1, G2, t2)
    elif h.guest_terminal != t2:
        raise InsertionError("bijection was built for a different guest terminal")
    G, _ = insert_many(G1, [InsertionJob(t1, G2, h, tuple(copy))])
    return G


def canonical_bijection(host: TerminalGraph, t1: int, guest: TerminalGraph, t2: int) -> EdgeBijection:
    a, b = sorted(host.incidence[t1]), sorted(guest.incidence[t2])
    if len(a) != len(b):
        raise InsertionError(f"degree mismatch: {len(a)} != {len(b)}")
    return EdgeBijection(t1, t2, tuple(zip(a, b)))


def make_class_bijection(
    host: TerminalGraph,
    t1: int,
    guest: TerminalGraph,
    groups: Sequence[tuple[Iterable[int], EdgeClass | Iterable[int]]],
) -> EdgeBijection:
    """Bijection from the edges at ``t1`` to the guest root's edges, group by group.

    Each group pairs a set of host edges with either a guest edge class or an
    explicit set of guest edges at the root.  Inside a group the pairing is by
    increasing id.
    """
    if guest.root is None:
        raise InsertionError("guest has no root")
    pairing: list[tuple[int, int]] = []
    used_host: set[int] = set()
    used_guest: set[int] = set()
    at_root = set(guest.incidence[guest.root])
    for gi, (hset, gspec) in enumerate(groups):
        hs = sorted(set(hset))
        if isinstance(gspec, EdgeClass):
            gs = sorted(guest.root_edges(gspec))
            name = f"group {gi} (class {gspec.value})"
        else:
            gs = sorted(set(gspec))
            name = f"group {gi}"
            if not set(gs) <= at_root:
                raise InsertionError(f"{name}: guest edges are not at the guest root")
        if len(hs) != len(gs):
            raise InsertionError(f"{name}: {len(hs)} host edges but {len(gs)} guest edges")
        if used_host & set(hs) or used_guest & set(gs):
            raise InsertionError(f"{name}: overlaps an earlier group")
        used_host |= set(hs)
        used_guest |= set(gs)
        pairing.extend(zip(hs, gs))
    if used_host != set(host.incidence[t1]):
        raise InsertionError("host groups do not partition the edges at the host terminal")
    if used_guest != at_root:
        raise InsertionError("guest groups do not partition the edges at the guest root")
    return EdgeBijection(t1, guest.root, tuple(sorted(pairing)))
