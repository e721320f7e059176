"""Command-line entry point: ``structree <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

from .bass_serre import GroupAction, cut_orbits, quotient_graph_of_groups
from .cuts import CutUniverse, enumerate_k_cuts, min_cuts_for_ray, optimal_cuts, witness_rays
from .errors import InputError, StructreeError
from .fixtures import FIXTURES, get_fixture
from .grammar import (
    build_grammar,
    derivation_constant,
    emit_presentation,
    language_equality_bounded,
    qis_constant,
)
from .graph_core import CayleySource, GraphWindow, build_window, geodesic_ray_pair
from .group_oracle import GroupOracle, load_group_file, parse_word
from .structure_tree import TreeSet, all_blocks, block_end_estimate, build_structure_tree, compute_kappa
from .treewidth import ball_decomposition, normalize, otto_properties, structure_tree_decomposition, validate
from .verify import verify_fixture

SUBCOMMANDS = ("ball", "cuts", "structure-tree", "blocks", "tree-decomp", "grammar", "wp", "graph-of-groups", "verify")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # reported by run() as a single line with exit code 1
        raise _UsageError(message)


@dataclass
class RunConfig:
    fixture: str | None
    group_file: str | None
    radius: int
    k: int | None
    tau: int
    seed_vertex: str | None
    rays: str
    fmt: str

    def validate(self) -> None:
        if self.radius < 2:
            raise InputError(f"radius must be at least 2, got {self.radius}")
        if self.tau < 1:
            raise InputError(f"tau must be at least 1, got {self.tau}")
        if self.k is not None and self.k < 1:
            raise InputError(f"k must be at least 1, got {self.k}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="structree", description="Cuts, structure trees and word problems on graph windows.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        src = s.add_mutually_exclusive_group()
        src.add_argument("--fixture", choices=sorted(FIXTURES), help="named example graph or group")
        src.add_argument("--group-file", help="YAML/JSON group specification")
        s.add_argument("--radius", type=int, default=4)
        s.add_argument("--k", type=int, default=None, help="cut weight bound / grammar constant")
        s.add_argument("--tau", type=int, default=3, help="ray tail depth")
        s.add_argument("--seed-vertex", default=None)
        s.add_argument("--rays", choices=("auto", "explicit"), default="auto")
        s.add_argument("--format", dest="fmt", choices=("text", "json", "dot"), default="text")
        if name == "structure-tree":
            s.add_argument("--emit-blocks", action="store_true")
        if name == "tree-decomp":
            s.add_argument("--method", choices=("ball", "structure"), default="ball")
        if name == "grammar":
            s.add_argument("--presentation", action="store_true", help="print the finite presentation")
            s.add_argument("--check", type=int, default=None, metavar="N",
                           help="compare with the word problem on all words up to length N")
    return p


def _oracle(cfg: RunConfig) -> GroupOracle | None:
    if cfg.group_file:
        return load_group_file(cfg.group_file)
    fx = get_fixture(cfg.fixture or "f2")
    return fx.oracle() if fx.oracle else None


def _window(cfg: RunConfig) -> tuple[GraphWindow, int]:
    if cfg.group_file:
        oracle = load_group_file(cfg.group_file)
        return build_window(CayleySource(oracle), cfg.radius), cfg.k or 1
    fx = get_fixture(cfg.fixture or "f2")
    return build_window(fx.make_source(), cfg.radius), cfg.k or fx.k


def _rays(cfg: RunConfig, window: GraphWindow, universe: CutUniverse):
    if cfg.rays == "auto":
        return witness_rays(universe)
    v0 = window.index.get(cfg.seed_vertex, None) if cfg.seed_vertex else 0
    if v0 is None:
        raise InputError(f"seed vertex {cfg.seed_vertex!r} is not in the window")
    return [geodesic_ray_pair(window, v0)]


def _emit(out: TextIO, cfg: RunConfig, data: dict, text_lines: list[str], dot: str | None = None) -> None:
    if cfg.fmt == "json":
        out.write(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    elif cfg.fmt == "dot":
        if dot is None:
            raise InputError("dot output is not available for this subcommand")
        out.write(dot + "\n")
    else:
        out.write("\n".join(text_lines) + "\n")


def _structure(cfg: RunConfig):
    window, k = _window(cfg)
    universe = CutUniverse(window, k)
    opt = optimal_cuts(universe, _rays(cfg, window, universe), cfg.tau)
    if not opt:
        raise StructreeError("no optimal cuts in this window (try a larger radius)")
    tree = build_structure_tree(TreeSet(window, opt))
    kappa = compute_kappa(tree.treeset)
    blocks = all_blocks(tree, kappa.kappa)
    return window, k, universe, opt, tree, kappa, blocks


# ---------------------------------------------------------------------------


def cmd_ball(cfg: RunConfig, out: TextIO, args) -> int:
    window, _ = _window(cfg)
    per_depth = [bin(m).count("1") for m in window.depth_masks]
    data = {
        "radius": window.radius,
        "vertices": window.n,
        "edges": len(window.edges),
        "per_depth": per_depth,
        "frontier": window.ids_of(window.frontier),
        "adjacency": window.adjacency_listing(),
    }
    lines = [f"radius {window.radius}: {window.n} vertices, {len(window.edges)} edges",
             f"vertices per depth: {' '.join(map(str, per_depth))}"]
    lines += [f"{v}: {' '.join(n)}" for v, n in sorted(window.adjacency_listing().items())]
    _emit(out, cfg, data, lines, window.to_dot())
    return 0


def cmd_cuts(cfg: RunConfig, out: TextIO, args) -> int:
    window, k = _window(cfg)
    if cfg.seed_vertex:
        cuts = enumerate_k_cuts(window, [cfg.seed_vertex], k)
        data = {"k": k, "seed": cfg.seed_vertex, "cuts": [c.to_dict() for c in cuts]}
        lines = [f"{len(cuts)} cuts of weight ≤ {k} with a boundary vertex at {cfg.seed_vertex}"]
        lines += [f"weight {c.weight}: {_fmt_edges(c.boundary_ids())}" for c in cuts]
        highlight = [e for c in cuts for e in c.edge_boundary]
    else:
        universe = CutUniverse(window, k)
        rays = _rays(cfg, window, universe)
        opt = {c.side for c in optimal_cuts(universe, rays, cfg.tau)}
        data = {"k": k, "certified_cuts": [], "rays": [r.describe(window) for r in rays]}
        lines = [f"{len(universe.cuts)} certified cuts of weight ≤ {k}; {len(opt)} optimal (marked *)"]
        for c in universe.cuts:
            m = universe.m(c)
            d = c.to_dict(m)
            d["optimal"] = c.side in opt
            data["certified_cuts"].append(d)
            mark = "*" if c.side in opt else " "
            lines.append(f"{mark} weight {c.weight} m {m}: {_fmt_edges(c.boundary_ids())}")
        if cfg.rays == "explicit":
            for r in rays:
                found = min_cuts_for_ray(universe, r, cfg.tau)
                lines.append(f"ray {r.describe(window)}: min weight {found[0].weight if found else 'none'}")
        highlight = [e for c in universe.cuts if c.side in opt for e in c.edge_boundary]
    _emit(out, cfg, data, lines, window.to_dot(highlight))
    return 0


def _fmt_edges(edges) -> str:
    return ", ".join(f"{u} -- {v}" for u, v in edges)


def cmd_structure_tree(cfg: RunConfig, out: TextIO, args) -> int:
    window, k, universe, opt, tree, kappa, blocks = _structure(cfg)
    data = {
        "k": k,
        "kappa": kappa.kappa,
        "kappa_reliable": kappa.reliable,
        "vertices": [{"id": v, "class_size": len(c)} for v, c in enumerate(tree.classes)],
        "edges": [list(e) for e in tree.edges],
    }
    lines = [f"structure tree: {tree.n_vertices} vertices, {len(tree.edges)} edges, κ = {kappa.kappa}"
             + ("" if kappa.reliable else " (neighbourhoods touch the frontier)")]
    for v in range(tree.n_vertices):
        lines.append(f"[{v}] class size {len(tree.classes[v])}, neighbours {tree.neighbors(v)}")
    if args.emit_blocks:
        data["blocks"] = [_block_dict(window, b) for b in blocks]
        lines += [_block_line(window, b) for b in blocks]
    sizes = {b.tree_vertex: b.size for b in blocks if not b.open}
    _emit(out, cfg, data, lines, tree.to_dot(sizes))
    return 0


def _block_dict(window, b) -> dict:
    d = {"tree_vertex": b.tree_vertex, "size": b.size, "ell": b.ell, "open": b.open, "connected": b.connected}
    if not b.open:
        d["vertices"] = window.ids_of(b.vertices)
        est = block_end_estimate(b.vertices, window, max(1, window.radius - 2))
        d["ends"] = est.label()
        d["ends_stable"] = est.stable
    return d


def _block_line(window, b) -> str:
    if b.open:
        return f"block [{b.tree_vertex}]: open class ({b.size} window vertices)"
    est = block_end_estimate(b.vertices, window, max(1, window.radius - 2))
    return (f"block [{b.tree_vertex}]: {b.size} vertices, ℓ = {b.ell}, ends {est.label()}"
            f"{'' if est.stable else ' (unstable)'}: {' '.join(window.ids_of(b.vertices))}")


def cmd_blocks(cfg: RunConfig, out: TextIO, args) -> int:
    window, k, universe, opt, tree, kappa, blocks = _structure(cfg)
    data = {"kappa": kappa.kappa, "blocks": [_block_dict(window, b) for b in blocks]}
    lines = [f"κ = {kappa.kappa}"] + [_block_line(window, b) for b in blocks]
    _emit(out, cfg, data, lines)
    return 0


def cmd_tree_decomp(cfg: RunConfig, out: TextIO, args) -> int:
    if args.method == "ball":
        window, _ = _window(cfg)
        decomp = ball_decomposition(window)
        extra = {"max_bag_per_level": decomp.max_bag_size_per_level()}
    else:
        window, k, universe, opt, tree, kappa, blocks = _structure(cfg)
        sd = structure_tree_decomposition(tree, blocks)
        decomp = sd.decomposition
        extra = {"excluded_open_classes": sd.excluded, "checked_radius": sd.interior_radius}
    rep = validate(decomp)
    otto = otto_properties(normalize(decomp)) if rep.valid else None
    data = {
        "method": args.method,
        "nodes": len(decomp.nodes),
        "width": rep.width,
        "T1": rep.t1, "T2": rep.t2, "T3": rep.t3,
        "witnesses": rep.witnesses,
        "normalized_properties_hold": otto.all_hold if otto else None,
        **{k: (v if not isinstance(v, dict) else {str(a): b for a, b in v.items()}) for k, v in extra.items()},
    }
    lines = [f"{args.method} decomposition: {len(decomp.nodes)} nodes, width {rep.width}",
             f"T1 {'pass' if rep.t1 else 'FAIL'}, T2 {'pass' if rep.t2 else 'FAIL'}, T3 {'pass' if rep.t3 else 'FAIL'}"]
    lines += [f"{k}: {v}" for k, v in rep.witnesses.items()]
    lines += [f"{k}: {v}" for k, v in extra.items()]
    _emit(out, cfg, data, lines, decomp.to_dot())
    return 0 if rep.valid else 2


def cmd_grammar(cfg: RunConfig, out: TextIO, args) -> int:
    oracle = _oracle(cfg)
    if oracle is None:
        raise InputError("the grammar needs a group fixture or group file")
    k = cfg.k or qis_constant(oracle).k
    g = build_grammar(oracle, k)
    lines = g.format_productions()
    data = {"k": k, "variables": g.variables, "productions": lines, "derivation_constant": derivation_constant(g)}
    if args.presentation:
        p = emit_presentation(g)
        data["presentation"] = {"generators": p.generators, "relations": p.relations, "deficiency": p.deficiency}
        lines = [str(p), f"deficiency {p.deficiency}"]
    status = 0
    if args.check is not None:
        rep = language_equality_bounded(g, oracle, args.check)
        data["check"] = {"n": rep.n, "kernel_counts": rep.kernel_counts, "passed": rep.passed,
                         "counterexample": rep.counterexample}
        lines.append(f"check up to length {rep.n}: {'pass' if rep.passed else 'FAIL at ' + str(rep.counterexample)}"
                     f", kernel counts {rep.kernel_counts}")
        status = 0 if rep.passed else 2
    _emit(out, cfg, data, lines)
    return status


def cmd_wp(cfg: RunConfig, out: TextIO, args, stdin: TextIO) -> int:
    oracle = _oracle(cfg)
    if oracle is None:
        raise InputError("the word problem needs a group fixture or group file")
    results = []
    for line in stdin:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        nf = oracle.normal_form(parse_word(line))
        verdict = "ACCEPT" if nf.is_identity else "REJECT"
        results.append({"word": line, "verdict": verdict, "normal_form": nf.pair()})
    lines = [f"{r['verdict']} {r['normal_form']}" for r in results]
    _emit(out, cfg, {"results": results}, lines)
    return 0


def cmd_graph_of_groups(cfg: RunConfig, out: TextIO, args) -> int:
    window, k, universe, opt, tree, kappa, blocks = _structure(cfg)
    oracle = _oracle(cfg)
    if oracle is None or not isinstance(window.source, CayleySource):
        raise InputError("graph of groups needs a Cayley fixture or group file")
    action = GroupAction(window.source.oracle, window)
    q = quotient_graph_of_groups(tree, blocks, action)
    orbits = cut_orbits(opt, action)
    data = q.to_dict()
    data["cut_orbits"] = len(orbits.orbits)
    data["cut_orbits_stable"] = orbits.stable
    lines = [f"quotient: {len(q.vertices)} vertices, {len(q.edges)} edges, {q.inversions} inverted edge orbits subdivided"]
    for i, v in enumerate(q.vertices):
        lines.append(f"vertex {i} ({v.name}{', midpoint' if v.subdivision else ''}): order {v.order} {{{', '.join(v.group)}}}")
    for e in q.edges:
        lines.append(f"edge {e.source}-{e.target}: order {e.order} {{{', '.join(e.group)}}}; "
                     f"inclusions {e.inclusions[0]} / {e.inclusions[1]}")
    lines += [f"note: {n}" for n in q.notes]
    _emit(out, cfg, data, lines, q.to_dot())
    return 0


def cmd_verify(cfg: RunConfig, out: TextIO, args) -> int:
    name = cfg.fixture or "pgl"
    rows = verify_fixture(name, cfg.radius, cfg.k)
    width = max(len(r.check) for r in rows)
    lines = [f"verify {name} at radius {cfg.radius}"]
    lines += [f"{'PASS' if r.passed else 'FAIL'}  {r.check.ljust(width)}  {r.detail}" for r in rows]
    data = {"fixture": name, "radius": cfg.radius,
            "rows": [{"check": r.check, "passed": r.passed, "detail": r.detail} for r in rows]}
    _emit(out, cfg, data, lines)
    return 0 if all(r.passed for r in rows) else 2


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None,
        stdin: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    stdin = stdin or sys.stdin
    try:
        args = _parser().parse_args(argv)
    except _UsageError as exc:
        err.write(f"error: usage: {exc}\n")
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    cfg = RunConfig(args.fixture, args.group_file, args.radius, args.k, args.tau, args.seed_vertex, args.rays, args.fmt)
    try:
        cfg.validate()
        if args.command == "wp":
            return cmd_wp(cfg, out, args, stdin)
        handler = {
            "ball": cmd_ball,
            "cuts": cmd_cuts,
            "structure-tree": cmd_structure_tree,
            "blocks": cmd_blocks,
            "tree-decomp": cmd_tree_decomp,
            "grammar": cmd_grammar,
            "graph-of-groups": cmd_graph_of_groups,
            "verify": cmd_verify,
        }[args.command]
        return handler(cfg, out, args)
    except StructreeError as exc:
        message = str(exc).replace("\n", " ")
        err.write(f"error: {type(exc).__name__}: {message}\n")
        return exc.exit_code


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
