"""Gadget generators and the assembled graphs ``G_l`` with their registries.

Stage tags used in provenance records:

``F0``, ``F1``, ... the gadgets ``F_i``; ``Fl`` the top gadget ``F_l``; ``N'``
the blown-up base graph; ``K`` the rooted ``K_{3,3k}`` inserted at every
terminal in the last step.  A copy path lists the labels of the terminals at
which the enclosing gadgets were inserted, outermost first, so the ``F_1``
copy inserted at ``f12`` of the top gadget at base vertex ``x4`` has copy path
``("x4", "f12")`` and its vertex ``uA1`` ends up labelled ``x4/f12/uA1``.
"""

from __future__ import annotations

import random

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .catalog import verify_base
from .connectivity import CutCertificate, NotBasicCut, is_basic_cut, is_k_vertex_connected
from .insertion import EdgeBijection, InsertionJob, canonical_bijection, insert_many, make_class_bijection
from .multigraph import EdgeClass, GraphBuilder, GraphError, TerminalGraph, boundary, induced_edge_set


class FamilyError(GraphError):
    pass


@dataclass(frozen=True)
class ConstructionParams:
    k: int
    ell: int
    x: int

    @property
    def half(self) -> int:
        return self.k // 2


def params_for(k: int) -> ConstructionParams:
    """``l = ceil(log2 k)`` and ``x = 2**(l-1) - k/2``; only ``k = 1`` and even ``k``."""
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise FamilyError(f"k must be a positive integer, got {k!r}")
    if k == 1:
        return ConstructionParams(1, 0, 0)
    if k % 2:
        raise FamilyError(f"no construction for odd k = {k} (only k = 1 or even k)")
    ell = (k - 1).bit_length()
    return ConstructionParams(k, ell, 2 ** (ell - 1) - k // 2)


def check_degrees(G: TerminalGraph, k: int) -> list[str]:
    """Terminals must have degree 3k and non-terminals degree 3."""
    bad = []
    for v in range(G.n):
        want = 3 * k if G.terminal[v] else 3
        if G.degree(v) != want:
            bad.append(f"{G.labels[v]}: degree {G.degree(v)} != {want}")
    return bad


def _assert_degrees(G: TerminalGraph, k: int, what: str) -> None:
    bad = check_degrees(G, k)
    if bad:
        raise FamilyError(f"{what}: {len(bad)} degree violations, first {bad[0]}")


def expected_classes(k: int, i: int) -> dict[str, int]:
    return {"A": 3 * k // 2, "B": 3 * k // 2 - 2**i, "C": 2**i}


# -- gadgets ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def build_F0(k: int) -> TerminalGraph:
    """Two terminals joined by ``3k`` parallel edges; the first is the root.

    Classes follow edge order: ``3k/2`` of class A, ``3k/2 - 1`` of class B and
    the output edge last.  For ``k = 1`` no split exists and edges stay
    unclassified.
    """
    params_for(k)
    b = GraphBuilder()
    r = b.add_vertex("r", True)
    t = b.add_vertex("t", True)
    if k == 1:
        b.add_edges(r, t, 3)
    else:
        h = 3 * k // 2
        b.add_edges(r, t, h, EdgeClass.A)
        b.add_edges(r, t, h - 1, EdgeClass.B)
        b.add_edge(r, t, EdgeClass.C)
    return b.build(root=r, stage="F0")


def fi_square_sizes(k: int, i: int) -> dict[str, int]:
    """Sizes of the four independent sets of non-terminals at the root of ``F_i``."""
    m = 2 ** (i - 1)
    lo, hi = 3 * k // 4, -(-3 * k // 4)
    return {"PA": hi, "PpA": lo, "PB": lo - m, "PpB": hi - m}


@lru_cache(maxsize=None)
def build_Fi(k: int, i: int) -> TerminalGraph:
    """The gadget ``F_i`` for ``i >= 1``.

    Any ``i`` with ``2**(i-1) <= floor(3k/4)`` is accepted, which includes the
    chain range ``1 <= i <= l - 1`` and a few larger values where the gadget is
    still well defined.
    """
    p = params_for(k)
    if k == 1:
        raise FamilyError("F_i needs even k")
    if not isinstance(i, int) or i < 1 or 2 ** (i - 1) > 3 * k // 4:
        raise FamilyError(f"i = {i} out of range for k = {k}")
    m = 2 ** (i - 1)
    h = 3 * k // 2
    sq = fi_square_sizes(k, i)
    b = GraphBuilder()
    r = b.add_vertex("r", True)
    side = []
    for j in (1, 2):
        side.append({name: b.add_vertex(f"{name}{j}", True) for name in ("f", "uA", "uB", "v", "vp", "vpp")})
    s1, s2 = side
    blocks = [
        ("PA", sq["PA"], EdgeClass.A, "v"),
        ("PpA", sq["PpA"], EdgeClass.A, "vp"),
        ("PB", sq["PB"], EdgeClass.B, "v"),
        ("PpB", sq["PpB"], EdgeClass.B, "vp"),
        ("CF", m, EdgeClass.C, "f"),
        ("CU", m, EdgeClass.C, "uB"),
    ]
    nts = []
    for name, size, cls, term in blocks:
        for t in range(size):
            nts.append((b.add_vertex(f"{name}.{t}", False), cls, term))
    for v, cls, term in nts:
        b.add_edge(r, v, cls)
        b.add_edge(v, s1[term])
        b.add_edge(v, s2[term])
    for s in side:
        b.add_edges(s["f"], s["uA"], h)
        b.add_edges(s["f"], s["uB"], h - m)
        b.add_edges(s["uB"], s["vpp"], h)
        b.add_edges(s["vpp"], s["vp"], h)
        b.add_edges(s["v"], s["uA"], h)
        b.add_edges(s["v"], s["vp"], m)
    G = b.build(root=r, stage=f"F{i}")
    _assert_degrees(G, k, f"F_{i}")
    return G


@lru_cache(maxsize=None)
def build_Fstar(k: int, i: int) -> TerminalGraph:
    """``F*_0 = F_0``; ``F*_i`` is ``F_i`` with ``F*_{i-1}`` inserted at ``f1`` and ``f2``."""
    if i == 0:
        return build_F0(k)
    host = build_Fi(k, i)
    guest = build_Fstar(k, i - 1)
    jobs = []
    for j in (1, 2):
        f = host.vertex(f"f{j}")
        uA, uB = host.vertex(f"uA{j}"), host.vertex(f"uB{j}")
        at_f = host.incidence[f]
        to_uA = [e for e in at_f if host.other(e, f) == uA]
        to_uB = [e for e in at_f if host.other(e, f) == uB]
        rest = [e for e in at_f if e not in set(to_uA) | set(to_uB)]
        h = make_class_bijection(
            host, f, guest, [(to_uA, EdgeClass.A), (to_uB, EdgeClass.B), (rest, EdgeClass.C)]
        )
        jobs.append(InsertionJob(f, guest, h, (f"f{j}",)))
    G, _ = insert_many(host, jobs)
    _assert_degrees(G, k, f"F*_{i}")
    return G


FL_PAIRS = ("12", "21", "23", "32", "31", "13")


@lru_cache(maxsize=None)
def build_Flevel(k: int) -> TerminalGraph:
    """The top gadget ``F_l``: root ``r``, ``w1..w3`` and ``f_pq`` for ordered pairs."""
    p = params_for(k)
    if p.ell < 1:
        raise FamilyError("F_l needs even k")
    half = k // 2
    b = GraphBuilder()
    r = b.add_vertex("r", True)
    w = {q: b.add_vertex(f"w{q}", True) for q in "123"}
    f = {pq: b.add_vertex(f"f{pq}", True) for pq in FL_PAIRS}
    for pq in FL_PAIRS:
        b.add_edges(r, f[pq], half)
    for pq in ("12", "23", "31"):
        b.add_edges(f[pq], f[pq[::-1]], k)
    for pq in FL_PAIRS:
        b.add_edges(f[pq], w[pq[0]], 3 * k // 2)
    G = b.build(root=r, stage="Fl")
    _assert_degrees(G, k, "F_l")
    return G


@lru_cache(maxsize=None)
def build_Fstar_top(k: int) -> TerminalGraph:
    """``F_l`` with a copy of ``F*_{l-1}`` inserted at every ``f_pq``.

    At ``f_pq`` the ``w_p`` edges go to class A, the ``f_qp`` edges to class B
    together with the first ``x`` class-C edges (by id), and the root edges to
    the remaining class-C edges.
    """
    p = params_for(k)
    host = build_Flevel(k)
    guest = build_Fstar(k, p.ell - 1)
    r = host.root
    gC = sorted(guest.root_edges(EdgeClass.C))
    gB = sorted(guest.root_edges(EdgeClass.B))
    X, notX = gC[: p.x], gC[p.x :]
    jobs = []
    for pq in FL_PAIRS:
        f = host.vertex(f"f{pq}")
        wp = host.vertex(f"w{pq[0]}")
        fqp = host.vertex(f"f{pq[::-1]}")
        at = host.incidence[f]
        groups = [
            ([e for e in at if host.other(e, f) == wp], EdgeClass.A),
            ([e for e in at if host.other(e, f) == fqp], gB + X),
            ([e for e in at if host.other(e, f) == r], notX),
        ]
        jobs.append(InsertionJob(f, guest, make_class_bijection(host, f, guest, groups), (f"f{pq}",)))
    G, _ = insert_many(host, jobs)
    _assert_degrees(G, k, "F*_l")
    return G


@lru_cache(maxsize=None)
def build_atom_gadget(k: int) -> TerminalGraph:
    """``K_{3,3k}`` with the three degree-``3k`` vertices as terminals, ``a0`` the root."""
    b = GraphBuilder()
    a = [b.add_vertex(f"a{t}", True) for t in range(3)]
    s = [b.add_vertex(f"s{j}", False) for j in range(3 * k)]
    for t in range(3):
        for v in s:
            b.add_edge(a[t], v)
    return b.build(root=a[0], stage="K")


def build_Nprime(N: TerminalGraph, k: int, X: Sequence[int] | None = None) -> tuple[TerminalGraph, list[list[int]]]:
    """Blow every ``y`` in ``Y`` up into ``k`` non-terminals ``y.0 .. y.(k-1)``.

    Returns the graph and, per base edge, the ids of its ``k`` edges (the fibre).
    ``X`` defaults to the colour class of vertex 0.
    """
    rep = verify_base(N)
    if not rep.cubic or not rep.bipartite:
        raise FamilyError(f"base graph must be cubic and bipartite: {rep.failures}")
    Xs = set(rep.X if X is None else X)
    b = GraphBuilder()
    vid: dict[int, list[int]] = {}
    for v in range(N.n):
        if v in Xs:
            vid[v] = [b.add_vertex(f"x{v}", True)]
        else:
            vid[v] = [b.add_vertex(f"y{v}.{j}", False) for j in range(k)]
    fibres = []
    for u, v in N.edges:
        x, y = (u, v) if u in Xs else (v, u)
        if x not in Xs or y in Xs:
            raise FamilyError(f"edge {u}-{v} does not join X to Y")
        fibres.append([b.add_edge(vid[x][0], yj) for yj in vid[y]])
    return b.build(stage="N'"), fibres


# -- provenance ---------------------------------------------------------------------


@dataclass
class Atom:
    name: str
    copy: tuple[str, ...]
    terminals: tuple[int, ...]
    nonterminals: tuple[int, ...]
    vertices: frozenset[int]


@dataclass
class AtomRegistry:
    atoms: list[Atom]
    atom_of: dict[int, int]

    def by_copy(self) -> dict[tuple[str, ...], int]:
        return {a.copy: i for i, a in enumerate(self.atoms)}

    def as_dict(self) -> dict:
        return {
            "atoms": [
                {"name": a.name, "terminals": list(a.terminals), "nonterminals": list(a.nonterminals)}
                for a in self.atoms
            ]
        }


def atom_registry(G: TerminalGraph) -> AtomRegistry:
    """Collect atoms from ``K``-stage provenance."""
    groups: dict[tuple, list[int]] = {}
    for v, o in enumerate(G.vertex_origin):
        if o is not None and o[0] == "K":
            groups.setdefault(o[1], []).append(v)
    atoms = []
    atom_of = {}
    for copy in sorted(groups):
        vs = sorted(groups[copy])
        a = Atom(
            "/".join(copy),
            copy,
            tuple(v for v in vs if G.terminal[v]),
            tuple(v for v in vs if not G.terminal[v]),
            frozenset(vs),
        )
        for v in vs:
            atom_of[v] = len(atoms)
        atoms.append(a)
    return AtomRegistry(atoms, atom_of)


CopyKey = tuple  # (stage, copy path)


@dataclass
class EmbeddingMap:
    """Where every element of every gadget copy ended up in the final graph."""

    k: int
    sources: dict[str, TerminalGraph]
    edge_index: dict[tuple, int]
    vertex_index: dict[tuple, int]
    copies: list[CopyKey]
    stage_at: dict[tuple[str, ...], str]
    below: dict[tuple[str, ...], list[int]]
    base: TerminalGraph | None = None
    base_X: tuple[int, ...] = ()
    base_fibres: list[list[int]] = field(default_factory=list)  # final edge ids per base edge
    nprime_nonterminals: tuple[int, ...] = ()

    @classmethod
    def from_graph(cls, G: TerminalGraph, k: int, sources: dict[str, TerminalGraph]) -> "EmbeddingMap":
        eidx, vidx = {}, {}
        copies = set()
        for e, origins in enumerate(G.edge_origin):
            for o in origins:
                eidx[o] = e
                copies.add((o[0], o[1]))
        below: dict[tuple[str, ...], list[int]] = {}
        for v, o in enumerate(G.vertex_origin):
            if o is None:
                continue
            vidx[o] = v
            copies.add((o[0], o[1]))
            path = o[1]
            for d in range(1, len(path) + 1):
                below.setdefault(path[:d], []).append(v)
        stage_at = {}
        for stage, path in copies:
            if stage != "N'":
                stage_at[path] = stage
        return cls(k, sources, eidx, vidx, sorted(copies), stage_at, below)

    def source(self, key: CopyKey) -> TerminalGraph:
        try:
            return self.sources[key[0]]
        except KeyError:
            raise FamilyError(f"unknown stage {key[0]!r}") from None

    def gadget_copies(self) -> list[CopyKey]:
        return [c for c in self.copies if c[0] not in ("K", "N'")]

    def _ids(self, key: CopyKey, X) -> list[int]:
        src = self.source(key)
        return sorted(src.vertex(x) if isinstance(x, str) else x for x in X)

    def edge(self, key: CopyKey, e: int) -> int:
        try:
            return self.edge_index[(key[0], tuple(key[1]), e)]
        except KeyError:
            raise FamilyError(f"edge {e} of copy {key} does not occur in the final graph") from None

    def copy_delta(self, key: CopyKey, X) -> list[int]:
        src = self.source(key)
        return sorted(self.edge(key, e) for e in boundary(src, self._ids(key, X)))

    def copy_epsilon(self, key: CopyKey, X) -> list[int]:
        src = self.source(key)
        return sorted(self.edge(key, e) for e in induced_edge_set(src, self._ids(key, X)))

    def lift_vertices(self, key: CopyKey, S) -> frozenset[int]:
        """Final vertices standing for the source vertices ``S`` of a copy.

        A terminal that was replaced by an insertion lifts to everything inserted
        in its place (recursively, including atoms).
        """
        stage, path = key[0], tuple(key[1])
        src = self.source(key)
        out: set[int] = set()
        for z in self._ids(key, S):
            v = self.vertex_index.get((stage, path, z))
            if v is not None:
                out.add(v)
                continue
            sub = self.below.get(path + (src.labels[z],))
            if not sub:
                raise FamilyError(f"vertex {src.labels[z]} of copy {key} has no image (deleted root)")
            out.update(sub)
        return frozenset(out)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "copies": [{"stage": s, "copy": list(c)} for s, c in self.copies],
            "base_X": list(self.base_X),
            "base_fibres": self.base_fibres,
        }


@dataclass
class Assembly:
    graph: TerminalGraph
    emb: EmbeddingMap
    registry: AtomRegistry
    params: ConstructionParams


def assemble_G(
    N: TerminalGraph, k: int, X: Sequence[int] | None = None, check: bool = True, seed: int | None = None
) -> Assembly:
    """Steps 5 and 6 on the base graph ``N``.

    The bijections used for the atom insertions are arbitrary; with ``seed``
    they are drawn from ``random.Random(seed)``, otherwise paired by id.
    """
    p = params_for(k)
    Np, nfibres = build_Nprime(N, k, X)
    sources: dict[str, TerminalGraph] = {"N'": Np, "K": build_atom_gadget(k)}
    G = Np
    if p.ell >= 1:
        top = build_Fstar_top(k)
        sources["Fl"] = build_Flevel(k)
        sources["F0"] = build_F0(k)
        for i in range(1, p.ell):
            sources[f"F{i}"] = build_Fi(k, i)
        fl = sources["Fl"]
        r = top.root
        pq_groups = []
        for p_, q_ in ((1, 2), (1, 3), (2, 3)):
            ends = {fl.vertex(f"f{p_}{q_}"), fl.vertex(f"f{q_}{p_}")}
            # a root edge of F*_l remembers its F_l edge as its first origin
            pq_groups.append(
                sorted(e for e in top.incidence[r] if fl.other(top.edge_origin[e][0][2], fl.root) in ends)
            )
        fibre_of = {}
        for be, fib in enumerate(nfibres):
            for e in fib:
                fibre_of[e] = be
        jobs = []
        for x in Np.terminals:
            by_base: dict[int, list[int]] = {}
            for e in Np.incidence[x]:
                by_base.setdefault(fibre_of[e], []).append(e)
            if len(by_base) != 3:
                raise FamilyError(f"terminal {Np.labels[x]} does not have three base neighbours")
            groups = [(by_base[be], pq_groups[t]) for t, be in enumerate(sorted(by_base))]
            h = make_class_bijection(Np, x, top, groups)
            jobs.append(InsertionJob(x, top, h, (Np.labels[x],)))
        G, _ = insert_many(Np, jobs)
    else:
        sources["F0"] = build_F0(k)
    K = sources["K"]
    rng = random.Random(seed) if seed is not None else None
    jobs = []
    for t in G.terminals:
        h = canonical_bijection(G, t, K, K.root)
        if rng is not None:
            guest_side = [b for _, b in h.pairing]
            rng.shuffle(guest_side)
            h = EdgeBijection(t, K.root, tuple(zip((a for a, _ in h.pairing), guest_side)))
        jobs.append(InsertionJob(t, K, h, tuple(G.labels[t].split("/"))))
    G, _ = insert_many(G, jobs)
    if check:
        _assert_degrees(G, k, "G")
    emb = EmbeddingMap.from_graph(G, k, sources)
    emb.base = N
    emb.base_X = tuple(v for v in range(N.n) if f"x{v}" in Np.label_index)
    emb.base_fibres = [[emb.edge(("N'", ()), e) for e in fib] for fib in nfibres]
    emb.nprime_nonterminals = tuple(
        sorted(emb.vertex_index[("N'", (), v)] for v in Np.nonterminals)
    )
    return Assembly(G, emb, atom_registry(G), p)


# -- registered cuts and aligned sets ----------------------------------------------------


@dataclass(frozen=True)
class RegisteredCut:
    name: str
    cut: tuple[int, ...]
    X0: frozenset[int]


def _x0_for(asm: Assembly, stage: str, path: tuple[str, ...], z: int) -> frozenset[int]:
    emb, reg = asm.emb, asm.registry
    src = emb.sources[stage]
    if stage == "F0" and z == src.root:
        z = next(v for v in src.terminals if v != src.root)
    if z == src.root:
        if stage == "Fl":
            return frozenset(emb.nprime_nonterminals)
        return frozenset(emb.vertex_index[(stage, path, v)] for v in src.nonterminals)
    child = path + (src.labels[z],)
    cstage = emb.stage_at.get(child)
    if cstage == "K":
        return frozenset(reg.atoms[reg.by_copy()[child]].nonterminals)
    if cstage is None:
        raise FamilyError(f"nothing was inserted at {'/'.join(child)}")
    csrc = emb.sources[cstage]
    return _x0_for(asm, cstage, child, csrc.root)


def registered_basic_cuts(asm: Assembly) -> list[RegisteredCut]:
    """Atom boundaries, ``delta(z)`` for every terminal of every gadget copy, and ``delta(x)`` in ``N'``.

    Duplicates (the same edge set reached twice) are listed once under the first name.
    """
    G, emb, reg = asm.graph, asm.emb, asm.registry
    out: dict[tuple[int, ...], RegisteredCut] = {}
    for a in reg.atoms:
        cut = tuple(boundary(G, a.vertices))
        out.setdefault(cut, RegisteredCut(f"atom {a.name}", cut, frozenset(a.nonterminals)))
    keys = [("N'", ())] + emb.gadget_copies()
    for stage, path in keys:
        src = emb.sources[stage]
        for z in src.terminals:
            cut = tuple(emb.copy_delta((stage, path), [z]))
            if cut in out:
                continue
            name = f"delta({'/'.join(path + (src.labels[z],))}) in {stage}"
            out[cut] = RegisteredCut(name, cut, _x0_for(asm, stage, path, z))
    return list(out.values())


@dataclass
class CutCheck:
    name: str
    ok: bool
    size: int
    reason: str = ""
    certificate: CutCertificate | None = None


def check_registered_cuts(asm: Assembly, cuts: Iterable[RegisteredCut] | None = None) -> list[CutCheck]:
    """Run :func:`is_basic_cut` on every registered cut (results cached per ``X0``)."""
    G, k = asm.graph, asm.params.k
    cache: dict[frozenset, dict | str] = {}
    res = []
    for rc in registered_basic_cuts(asm) if cuts is None else cuts:
        got = cache.get(rc.X0)
        if got is None:
            try:
                got = {c.cut: c for c in is_basic_cut(G, asm.registry, rc.X0, k)}
            except NotBasicCut as exc:
                got = str(exc)
            cache[rc.X0] = got
        if isinstance(got, str):
            res.append(CutCheck(rc.name, False, len(rc.cut), got))
        elif rc.cut not in got:
            res.append(CutCheck(rc.name, False, len(rc.cut), "cut is not the boundary of a component"))
        else:
            res.append(CutCheck(rc.name, True, len(rc.cut), "", got[rc.cut]))
    return res


_FI_SETS = [("vp", "vpp"), ("vpp", "uB"), ("f", "uA"), ("uA", "uB"), ("f", "uB"), ("v", "uA"), ("v", "vp")]


def registered_aligned_sets(asm: Assembly) -> list[tuple[str, frozenset[int]]]:
    """Aligned sets from the counting arguments, lifted to the final graph."""
    emb = asm.emb
    out: list[tuple[str, frozenset[int]]] = []
    seen = set()

    def add(name, key, labels):
        S = emb.lift_vertices(key, labels)
        if S not in seen:
            seen.add(S)
            out.append((name, S))

    for key in emb.gadget_copies():
        stage, path = key
        src = emb.sources[stage]
        pre = "/".join(path)
        if stage.startswith("F") and stage not in ("F0", "Fl"):
            for j in (1, 2):
                for a, b in _FI_SETS:
                    add(f"{pre}:{{{a}{j},{b}{j}}}", key, [f"{a}{j}", f"{b}{j}"])
                add(f"{pre}:side{j}", key, [f"{t}{j}" for t in ("f", "uA", "uB", "v", "vp", "vpp")])
        elif stage == "Fl":
            for pq in FL_PAIRS:
                add(f"{pre}:{{w{pq[0]},f{pq}}}", key, [f"w{pq[0]}", f"f{pq}"])
            for pq in ("12", "23", "31"):
                add(f"{pre}:{{f{pq},f{pq[::-1]}}}", key, [f"f{pq}", f"f{pq[::-1]}"])
        for z in src.terminals:
            if z != src.root:
                add(f"{pre}:{{{src.labels[z]}}}", key, [z])
    return out


# -- cut harness ----------------------------------------------------------------


def build_lemma_harness(H: TerminalGraph, G: TerminalGraph, r: int, k: int) -> tuple[TerminalGraph, dict[int, frozenset[int]]]:
    """``kH`` with a copy of ``(G, T)`` inserted at every vertex via ``r``.

    Returns the graph and, for every vertex ``w`` of ``H``, the vertex set of
    the copy ``G^w`` (which replaces ``w``).
    """
    if H.n <= 2 * k:
        raise FamilyError(f"H needs more than 2k = {2 * k} vertices, has {H.n}")
    if any(H.degree(v) != 3 for v in range(H.n)) or not is_k_vertex_connected(H, 3):
        raise FamilyError("H must be a 3-connected cubic graph")
    if not G.terminal[r] or G.degree(r) != 3 * k:
        raise FamilyError(f"r must be a terminal of degree {3 * k}")
    b = GraphBuilder()
    for v in range(H.n):
        b.add_vertex(f"h{v}", True)
    for u, v in H.edges:
        b.add_edges(u, v, k)
    kH = b.build(stage="kH")
    Gr = TerminalGraph(G.terminal, G.edges, r, None, G.labels, G.vertex_origin, G.edge_origin)
    jobs = [InsertionJob(w, Gr, canonical_bijection(kH, w, Gr, r), (f"h{w}",)) for w in range(H.n)]
    out, maps = insert_many(kH, jobs)
    copies = {w: frozenset(maps.guest_vertex[j].values()) for j, w in enumerate(range(H.n))}
    return out, copies
