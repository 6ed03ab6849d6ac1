"""Command-line front end.

Structured results go to standard output as JSON; a one-line human summary
goes to standard error.  Exit codes: 0 all checks pass, 1 a verified
violation (the JSON carries the witness), 2 usage or input error, 3 budget
exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .catalog import (
    CatalogError,
    find_hamiltonian_cycle,
    get as get_named,
    names as catalog_names,
    available as catalog_available,
    to_graph6,
    two_colouring,
    verify_base,
)
from .connectivity import is_aligned, steiner_edge_connectivity
from .connectors import (
    HalfFibre,
    audit_packing,
    certificate_from_json,
    lift_hamilton_cycle,
    pack_exact,
    project_to_base,
    validate_certificate,
)
from .families import (
    FamilyError,
    assemble_G,
    build_atom_gadget,
    build_F0,
    build_Fi,
    build_Flevel,
    build_Fstar,
    build_Fstar_top,
    build_Nprime,
    check_degrees,
    check_registered_cuts,
    expected_classes,
    registered_aligned_sets,
)
from .multigraph import GraphError, GraphParseError, deserialize, serialize, to_dot

OK, VIOLATION, USAGE, BUDGET = 0, 1, 2, 3

FAMILIES = ("F0", "Fi", "Fstar", "Fl", "Fstar-top", "K", "Nprime", "G")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    family: str | None = None
    k: int | None = None
    i: int | None = None
    base: str | None = None
    seed: int | None = None
    budget_ms: int | None = None
    budget_nodes: int | None = None
    jobs: int = 1
    out: str | None = None
    figure: str | None = None
    table: str | None = None

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(**{f: getattr(ns, f, None) for f in cls.__dataclass_fields__ if hasattr(ns, f)})

    @property
    def seconds(self) -> float | None:
        return None if self.budget_ms is None else self.budget_ms / 1000.0


# -- helpers -------------------------------------------------------------------------


def _emit(report: dict, out=None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_table(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _need(cfg: RunConfig, *fields: str) -> None:
    missing = [f for f in fields if getattr(cfg, f) is None]
    if missing:
        raise UsageError(f"{cfg.command}: missing --{missing[0].replace('_', '-')}")


def build_family(cfg: RunConfig):
    """Return ``(graph, assembly_or_None, description)`` for the family flags."""
    _need(cfg, "family", "k")
    fam, k = cfg.family, cfg.k
    if fam == "F0":
        return build_F0(k), None, f"F_0 (k={k})"
    if fam in ("Fi", "Fstar"):
        _need(cfg, "i")
        if fam == "Fi":
            return build_Fi(k, cfg.i), None, f"F_{cfg.i} (k={k})"
        return build_Fstar(k, cfg.i), None, f"F*_{cfg.i} (k={k})"
    if fam == "Fl":
        return build_Flevel(k), None, f"F_l (k={k})"
    if fam == "Fstar-top":
        return build_Fstar_top(k), None, f"F*_l (k={k})"
    if fam == "K":
        return build_atom_gadget(k), None, f"K_(3,{3 * k})"
    _need(cfg, "base")
    N = get_named(cfg.base).graph
    if fam == "Nprime":
        return build_Nprime(N, k)[0], None, f"N' of {cfg.base} (k={k})"
    asm = assemble_G(N, k, seed=cfg.seed)
    return asm.graph, asm, f"G for {cfg.base} (k={k}, seed={cfg.seed})"


def _shape(G) -> dict:
    return {
        "vertices": G.n,
        "edges": G.m,
        "terminals": len(G.terminals),
        "classes": G.class_sizes() if G.root is not None else None,
        "sha256": hashlib.sha256(serialize(G)).hexdigest(),
    }


def _load_graph(path: str):
    try:
        return deserialize(Path(path).read_bytes())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_cert(path: str):
    try:
        return certificate_from_json(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


# -- commands -----------------------------------------------------------------------


def cmd_build(cfg: RunConfig) -> int:
    G, asm, desc = build_family(cfg)
    if cfg.out:
        Path(cfg.out).write_bytes(serialize(G))
    rep = {"family": cfg.family, "k": cfg.k, "i": cfg.i, "base": cfg.base, "seed": cfg.seed, **_shape(G)}
    if asm is not None:
        rep["atoms"] = len(asm.registry.atoms)
        rep["params"] = {"ell": asm.params.ell, "x": asm.params.x}
    _emit(rep)
    _say(f"built {desc}: {G.n} vertices, {G.m} edges" + (f" -> {cfg.out}" if cfg.out else ""))
    return OK


def _check_classes(G, cfg: RunConfig) -> dict | None:
    if G.root is None or cfg.family not in ("F0", "Fi", "Fstar") or cfg.k == 1:
        return None
    i = 0 if cfg.family == "F0" else cfg.i
    want = expected_classes(cfg.k, i)
    got = G.class_sizes()
    return {"expected": want, "observed": got, "ok": all(got.get(c, 0) == n for c, n in want.items())}


def cmd_check(cfg: RunConfig) -> int:
    G, asm, desc = build_family(cfg)
    what = cfg.what
    rep: dict = {"family": cfg.family, "k": cfg.k, "i": cfg.i, "base": cfg.base, "what": what, **_shape(G)}
    ok = True
    rows = []
    if what in ("degrees", "all"):
        v = check_degrees(G, cfg.k)
        rep["degrees"] = {"violations": v, "ok": not v}
        rows.append(["degrees", len(v), not v])
        ok &= not v
        cls = _check_classes(G, cfg)
        if cls is not None:
            rep["classes"] = cls
            rows.append(["classes", json.dumps(cls["observed"], sort_keys=True), cls["ok"]])
            ok &= cls["ok"]
    if what in ("connectivity", "all"):
        t0 = time.perf_counter()
        res = steiner_edge_connectivity(G, jobs=cfg.jobs)
        good = res.value == 3 * cfg.k
        rep["connectivity"] = {**res.as_dict(), "expected": 3 * cfg.k, "ok": good}
        rows.append(["connectivity", res.value, good])
        ok &= good
        _say(f"connectivity {res.value} (expected {3 * cfg.k}) in {time.perf_counter() - t0:.1f}s")
        if cfg.figure:
            from .plotting import connectivity_figure

            connectivity_figure(res.flows, 3 * cfg.k, cfg.figure, desc)
    if what == "basic-cuts" or (what == "all" and asm is not None):
        if asm is None:
            raise UsageError("basic-cuts needs --family G")
        checks = check_registered_cuts(asm)
        bad = [c for c in checks if not c.ok or c.size != 3 * cfg.k]
        rep["basic_cuts"] = {
            "registered": len(checks),
            "failed": [{"name": c.name, "size": c.size, "reason": c.reason} for c in bad],
            "ok": not bad,
        }
        rows.append(["basic-cuts", f"{len(checks) - len(bad)}/{len(checks)}", not bad])
        ok &= not bad
    if what == "aligned" or (what == "all" and asm is not None):
        if asm is None:
            raise UsageError("aligned needs --family G")
        sets = registered_aligned_sets(asm)
        bad = [n for n, S in sets if not is_aligned(asm.registry, S)]
        rep["aligned_sets"] = {"registered": len(sets), "failed": bad, "ok": not bad}
        rows.append(["aligned", f"{len(sets) - len(bad)}/{len(sets)}", not bad])
        ok &= not bad
    rep["ok"] = ok
    if cfg.table:
        _write_table(cfg.table, ["check", "observed", "ok"], rows)
    _emit(rep, cfg.out)
    _say(f"check {what} on {desc}: {'pass' if ok else 'FAIL'}")
    return OK if ok else VIOLATION


def cmd_catalog(cfg: RunConfig) -> int:
    if cfg.action == "list":
        have = set(catalog_available())
        rep = {"graphs": [{"name": n, "data": n in have} for n in catalog_names()]}
        _emit(rep)
        return OK
    if not cfg.name:
        raise UsageError("catalog verify: missing graph name")
    ng = get_named(cfg.name)
    g = ng.graph
    base = verify_base(g)
    ham = find_hamiltonian_cycle(g, budget=cfg.budget_nodes or 10**8, seconds=cfg.seconds)
    exp = ng.expected
    observed = {
        "cubic": base.cubic,
        "bipartite": base.bipartite,
        "three_connected": base.three_connected,
        "hamiltonian": {"found": True, "none": False}.get(ham.status),
    }
    expected = {
        "cubic": exp.cubic,
        "bipartite": exp.bipartite,
        "three_connected": exp.three_connected,
        "hamiltonian": exp.hamiltonian,
    }
    rep = {
        "name": ng.name,
        "source": ng.source,
        "vertices": g.n,
        "edges": g.m,
        "graph6": to_graph6(g),
        "expected": expected,
        "observed": observed,
        "search": {"status": ham.status, "nodes": ham.nodes, "cycle": ham.cycle},
        "failures": base.failures,
    }
    _say(f"{ng.name}: {observed} ({ham.nodes} search nodes, {ham.seconds:.2f}s)")
    if cfg.figure:
        from .plotting import base_figure

        base_figure(g, ham.cycle_edges or (), cfg.figure, ng.name, two_colouring(g))
    if ham.status == "budget":
        rep["ok"] = None
        _emit(rep, cfg.out)
        return BUDGET
    rep["ok"] = observed == expected
    _emit(rep, cfg.out)
    return OK if rep["ok"] else VIOLATION


def cmd_pack(cfg: RunConfig) -> int:
    G = _load_graph(cfg.graph)
    _need(cfg, "k")
    res = pack_exact(G, None, cfg.k, budget=cfg.budget_nodes or 10**6, seconds=cfg.seconds)
    rep = {"k": cfg.k, "status": res.status, "nodes": res.nodes}
    if res.certificate is not None:
        rep["certificate"] = res.certificate.to_json()
        if cfg.out:
            Path(cfg.out).write_text(res.certificate.dumps() + "\n")
    _emit(rep)
    _say(f"pack k={cfg.k}: {res.status} after {res.nodes} nodes")
    return {"found": OK, "none": VIOLATION, "budget": BUDGET}[res.status]


def cmd_validate(cfg: RunConfig) -> int:
    G = _load_graph(cfg.graph)
    cert = _load_cert(cfg.cert)
    rep = validate_certificate(G, None, cert)
    _emit(rep.to_json(), cfg.out)
    if rep.ok:
        _say(f"certificate ok: {cert.k} connectors")
        return OK
    v = rep.first
    _say(f"certificate rejected: {v.clause}: {v.message}")
    return VIOLATION


def _assembly_and_cert(cfg: RunConfig):
    _need(cfg, "k", "base")
    ng = get_named(cfg.base)
    asm = assemble_G(ng.graph, cfg.k, seed=cfg.seed)
    if cfg.cert:
        return asm, _load_cert(cfg.cert)
    if cfg.k != 1:
        raise UsageError("without --cert a certificate is lifted from a Hamilton cycle, which needs --k 1")
    ham = find_hamiltonian_cycle(ng.graph, budget=cfg.budget_nodes or 10**8, seconds=cfg.seconds)
    if ham.status == "budget":
        return asm, "budget"
    if ham.status == "none":
        return asm, None
    return asm, lift_hamilton_cycle(asm, ham.cycle)


def _root(cfg: RunConfig, asm) -> int:
    if cfg.root is None:
        return asm.graph.terminals[0]
    try:
        return asm.graph.vertex(cfg.root)
    except GraphError:
        raise UsageError(f"unknown root label {cfg.root!r}") from None


def cmd_audit(cfg: RunConfig) -> int:
    asm, cert = _assembly_and_cert(cfg)
    if cert == "budget":
        _emit({"ok": None, "reason": "hamilton search budget exceeded"})
        return BUDGET
    if cert is None:
        _emit({"ok": False, "reason": f"{cfg.base} has no Hamilton cycle to lift"})
        return VIOLATION
    val = validate_certificate(asm.graph, None, cert)
    if not val.ok:
        _emit({"ok": False, "validation": val.to_json()}, cfg.out)
        _say(f"certificate rejected: {val.first.clause}")
        return VIOLATION
    r = _root(cfg, asm)
    aud = audit_packing(asm, cert, r, seed=cfg.seed or 0, samples=cfg.samples)
    rep = {"base": cfg.base, "k": cfg.k, "seed": cfg.seed, "root": asm.graph.labels[r], **aud.to_json()}
    if cfg.table:
        _write_table(
            cfg.table,
            ["kind", "name", "expected", "observed", "ok"],
            [[c.kind, c.name, c.expected, c.observed, c.ok] for c in aud.checks],
        )
    if cfg.figure:
        from .plotting import audit_figure

        audit_figure(aud, cfg.k, cfg.figure, f"{cfg.base}, k={cfg.k}")
    _emit(rep, cfg.out)
    _say(f"audit: {'pass' if aud.ok else 'FAIL'} {aud.summary()}")
    return OK if aud.ok else VIOLATION


def cmd_project(cfg: RunConfig) -> int:
    asm, cert = _assembly_and_cert(cfg)
    if cert == "budget":
        _emit({"ok": None, "reason": "hamilton search budget exceeded"})
        return BUDGET
    if cert is None:
        _emit({"ok": False, "reason": f"{cfg.base} has no Hamilton cycle to lift"})
        return VIOLATION
    try:
        proj = project_to_base(asm, cert.all_edges())
    except HalfFibre as exc:
        _emit(
            {
                "ok": False,
                "violation": "half-fibre",
                "base_edge": exc.base_edge,
                "present": list(exc.present),
                "missing": list(exc.missing),
            },
            cfg.out,
        )
        _say(str(exc))
        return VIOLATION
    rep = {"base": cfg.base, "k": cfg.k, "ok": proj.hamilton, **proj.to_json()}
    if cfg.figure:
        from .plotting import base_figure

        N = asm.emb.base
        base_figure(N, proj.edges, cfg.figure, f"Q_N on {cfg.base}", two_colouring(N))
    _emit(rep, cfg.out)
    _say(f"projection: {len(proj.edges)} base edges, hamilton={proj.hamilton}")
    return OK if proj.hamilton else VIOLATION


def cmd_export(cfg: RunConfig) -> int:
    G, _, desc = build_family(cfg)
    fmt = cfg.format
    if fmt == "json":
        data = serialize(G)
    elif fmt == "dot":
        data = to_dot(G, cfg.family or "G").encode()
    else:
        if any(G.multiplicity(u, v) > 1 for u, v in G.edges):
            raise UsageError("graph6 cannot encode parallel edges")
        data = (to_graph6(G) + "\n").encode()
    if cfg.out:
        Path(cfg.out).write_bytes(data)
        _say(f"wrote {desc} as {fmt} to {cfg.out}")
    else:
        sys.stdout.buffer.write(data)
    return OK


# -- argument parsing ---------------------------------------------------------------


def _family_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--family", choices=FAMILIES, required=required)
    p.add_argument("--k", type=int, required=required)
    p.add_argument("--i", type=int)
    p.add_argument("--base")
    p.add_argument("--seed", type=int)


def _budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget-ms", type=int, help="wall-time limit in milliseconds")
    p.add_argument("--budget-nodes", type=int, help="search-node limit")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tconnectors", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a gadget or G and write it as JSON")
    _family_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("check", help="verify degrees, classes, connectivity or basic cuts")
    _family_flags(p)
    p.add_argument("--what", choices=("degrees", "connectivity", "basic-cuts", "aligned", "all"), default="all")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--figure")
    p.add_argument("--table")

    p = sub.add_parser("catalog", help="list or verify base graphs")
    p.add_argument("action", choices=("list", "verify"))
    p.add_argument("name", nargs="?")
    _budget_flags(p)
    p.add_argument("--out")
    p.add_argument("--figure")

    p = sub.add_parser("pack", help="exact search for k edge-disjoint T-connectors")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    _budget_flags(p)
    p.add_argument("--out", help="write the certificate here")

    p = sub.add_parser("validate", help="validate a connector certificate")
    p.add_argument("--graph", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--out")

    for name, helptext in (
        ("audit", "audit a packing on G against the cut properties"),
        ("project", "project a packing on G to the base graph"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--base", required=True)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--cert", help="certificate JSON; default lifts a Hamilton cycle (k = 1)")
        _budget_flags(p)
        p.add_argument("--out")
        p.add_argument("--figure")
        if name == "audit":
            p.add_argument("--root", help="label of the terminal r (default: first terminal)")
            p.add_argument("--samples", type=int, default=200)
            p.add_argument("--table")

    p = sub.add_parser("export", help="write a graph as JSON, DOT or graph6")
    _family_flags(p)
    p.add_argument("--format", choices=("json", "dot", "graph6"), default="json")
    p.add_argument("--out")
    return ap


_COMMANDS = {
    "build": cmd_build,
    "check": cmd_check,
    "catalog": cmd_catalog,
    "pack": cmd_pack,
    "validate": cmd_validate,
    "audit": cmd_audit,
    "project": cmd_project,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    ns = make_parser().parse_args(argv)
    cfg = RunConfig.from_args(ns)
    for extra in ("what", "action", "name", "graph", "cert", "format", "root", "samples"):
        setattr(cfg, extra, getattr(ns, extra, None))
    try:
        return _COMMANDS[ns.command](cfg)
    except (UsageError, CatalogError, FamilyError, GraphParseError) as exc:
        _say(f"error: {exc}")
        return USAGE
    except GraphError as exc:
        _say(f"error: {exc}")
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
