"""Command-line interface over the fan, polytope and classification toolkit.

Exit codes: 0 on success, 1 on validation or verification failure, 2 on
usage errors.  All output is deterministic for fixed inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .classify import (
    canonical_key,
    f_closure,
    fano_seeds,
    load_graph,
    named_fano_4folds,
    projective_space_fan,
    spot_check_table1,
    table1_rows,
    verify_table1_edges,
)
from .fan import Fan
from .polytope import (
    LatticePolytope,
    convex_hull,
    crepant_resolution,
    gorenstein_class_of,
    is_reflexive,
    polar_dual,
    unimodularly_equivalent,
)
from .primitive import (
    is_fano,
    is_pseudo_symmetric,
    is_splitting_fan,
    is_weak_fano,
    primitive_relations,
)
from .surgery import blow_down, blow_down_candidates, blow_up, flop


class CommandError(Exception):
    pass


def _load_fan(path: str) -> Fan:
    try:
        return Fan.load(path)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CommandError(f"cannot read fan file {path}: {exc}") from exc


def _load_polytope(path: str) -> LatticePolytope:
    try:
        return LatticePolytope.load(path)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CommandError(f"cannot read polytope file {path}: {exc}") from exc


def _emit_fan(fan: Fan, out: str | None) -> None:
    if out:
        fan.save(out)
    else:
        sys.stdout.write(fan.to_json())


def _emit_polytope(p: LatticePolytope, out: str | None) -> None:
    if out:
        p.save(out)
    else:
        sys.stdout.write(p.to_json())


def cmd_validate(args) -> int:
    fan = _load_fan(args.fan)
    problems = fan.validate()
    if problems:
        for p in problems:
            print(p)
        return 1
    print("valid")
    return 0


def cmd_analyze(args) -> int:
    fan = _load_fan(args.fan)
    problems = fan.validate()
    if problems:
        for p in problems:
            print(p)
        return 1
    print(f"dim {fan.dim}, {fan.n_rays} rays, picard number {fan.picard_number}")
    for i, ray in enumerate(fan.rays):
        print(f"  x{i} = {tuple(ray)}")
    rels = primitive_relations(fan)
    print(f"{len(rels)} primitive relations:")
    for rel in rels:
        print(f"  {rel}   degree {rel.degree}")
    flags = []
    fano = is_fano(fan)
    flags.append("Fano" if fano else ("weak Fano" if is_weak_fano(fan) else "not weak Fano"))
    if is_pseudo_symmetric(fan):
        flags.append("pseudo-symmetric")
    if is_splitting_fan(fan):
        flags.append("splitting")
    print("; ".join(flags))
    return 0


def cmd_blowup(args) -> int:
    fan = _load_fan(args.fan)
    cone = tuple(int(i) for i in args.cone.split(","))
    _emit_fan(blow_up(fan, cone), args.out)
    return 0


def cmd_blowdown(args) -> int:
    fan = _load_fan(args.fan)
    candidates = blow_down_candidates(fan)
    if not 0 <= args.relation < len(candidates):
        raise CommandError(
            f"relation index {args.relation} out of range; "
            f"{len(candidates)} candidates: " + "; ".join(map(str, candidates))
        )
    _emit_fan(blow_down(fan, candidates[args.relation], verified=True), args.out)
    return 0


def cmd_flop(args) -> int:
    fan = _load_fan(args.fan)
    from .primitive import primitive_collections

    pcs = primitive_collections(fan)
    if not 0 <= args.collection < len(pcs):
        raise CommandError(f"collection index {args.collection} out of range")
    _emit_fan(flop(fan, pcs[args.collection]), args.out)
    return 0


def cmd_polar(args) -> int:
    p = _load_polytope(args.polytope)
    dual = polar_dual(p)
    if dual.is_lattice:
        _emit_polytope(convex_hull(dual.vertices), args.out)
    else:
        if args.out:
            raise CommandError("polar is not a lattice polytope; no file written")
        for v in dual.vertices:
            print("(" + ", ".join(str(c) for c in v) + ")")
    return 0


def cmd_reflexive(args) -> int:
    cert = is_reflexive(_load_polytope(args.polytope))
    if cert.reflexive:
        print("reflexive")
    else:
        normal, offset = cert.witness
        print(f"not reflexive: facet normal {normal} has offset {offset}")
    return 0


def cmd_resolve(args) -> int:
    _emit_fan(crepant_resolution(_load_polytope(args.polytope)), args.out)
    return 0


def cmd_gorenstein_class(args) -> int:
    _emit_polytope(gorenstein_class_of(_load_fan(args.fan)), args.out)
    return 0


def cmd_iso(args) -> int:
    from .classify import are_isomorphic

    f1, f2 = _load_fan(args.fan1), _load_fan(args.fan2)
    if are_isomorphic(f1, f2, verify=True):
        print("isomorphic")
        return 0
    print("not isomorphic")
    return 1


def cmd_enumerate(args) -> int:
    if args.dim not in (2, 3, 4):
        raise CommandError("enumeration supports dimensions 2, 3 and 4")
    checkpoint = args.checkpoint
    if checkpoint is None and args.dim == 4 and args.out:
        checkpoint = os.path.join(args.out, "checkpoint.json")
    seeds = fano_seeds(args.dim)
    graph = f_closure(
        seeds,
        args.dim,
        "weak" if args.mode == "weak" else "fano",
        threads=args.threads,
        checkpoint=checkpoint,
        checkpoint_interval=args.checkpoint_interval,
    )
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "graph.txt"), "w") as fh:
            fh.write(graph.to_lines())
        with open(os.path.join(args.out, "graph.dot"), "w") as fh:
            fh.write(graph.to_dot())
        fans_dir = os.path.join(args.out, "fans")
        os.makedirs(fans_dir, exist_ok=True)
        for key in graph.sorted_keys():
            graph.nodes[key].fan.save(os.path.join(fans_dir, key + ".json"))
    if args.format == "lines":
        sys.stdout.write(graph.to_lines())
    print(f"classes: {len(graph.nodes)}")
    return 0


def cmd_gorenstein_surfaces(args) -> int:
    graph = f_closure([projective_space_fan(2)], 2, "weak")
    polytopes = [
        gorenstein_class_of(graph.nodes[k].fan) for k in graph.sorted_keys()
    ]
    classes: list[LatticePolytope] = []
    for p in polytopes:
        if not any(unimodularly_equivalent(p, q) for q in classes):
            classes.append(p)
    classes.sort(key=lambda p: (len(p.vertices), sorted(p.vertices)))
    for i, p in enumerate(classes, 1):
        verts = " ".join(f"({v[0]},{v[1]})" for v in sorted(p.vertices))
        print(f"{i}: {verts}")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            p.save(os.path.join(args.out, f"polygon{i:02d}.json"))
    print(f"classes: {len(classes)}")
    return 0


def cmd_verify_table1(args) -> int:
    graph = load_graph(args.graph)
    rows = table1_rows()
    failed = False
    for row, ok, detail in spot_check_table1(graph):
        print(f"row ({row}): {'pass' if ok else 'FAIL'} - {detail}")
        failed |= not ok
    if args.full:
        report = verify_table1_edges(graph, rows)
        for line in report:
            print(line)
        mismatched = [line for line in report if "edge" in line]
        ok = not mismatched
        print(f"full table: {'pass' if ok else 'FAIL'} ({len(mismatched)} edge differences)")
        failed |= not ok
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="toricfan",
        description="Exact toolkit for complete simplicial fans and toric Fano classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, help="check a fan file for structural problems")
    p.add_argument("fan")

    p = add("analyze", cmd_analyze, help="print rays, primitive relations and flags")
    p.add_argument("fan")

    p = add("blowup", cmd_blowup, help="equivariant blow-up along a cone")
    p.add_argument("fan")
    p.add_argument("--cone", required=True, help="comma-separated ray indices")
    p.add_argument("--out")

    p = add("blowdown", cmd_blowdown, help="blow down an exceptional relation")
    p.add_argument("fan")
    p.add_argument("--relation", type=int, required=True, help="candidate index")
    p.add_argument("--out")

    p = add("flop", cmd_flop, help="flop an extremal degree-0 relation")
    p.add_argument("fan")
    p.add_argument("--collection", type=int, required=True)
    p.add_argument("--out")

    p = add("polar", cmd_polar, help="polar dual of a polytope")
    p.add_argument("polytope")
    p.add_argument("--out")

    p = add("reflexive", cmd_reflexive, help="reflexivity certificate")
    p.add_argument("polytope")

    p = add("resolve", cmd_resolve, help="crepant resolution of a reflexive polytope")
    p.add_argument("polytope")
    p.add_argument("--out")

    p = add("gorenstein-class", cmd_gorenstein_class, help="reflexive polytope of a weak Fano fan")
    p.add_argument("fan")
    p.add_argument("--out")

    p = add("iso", cmd_iso, help="test two fans for isomorphism")
    p.add_argument("fan1")
    p.add_argument("fan2")

    p = add("enumerate", cmd_enumerate, help="closure enumeration of Fano classes")
    p.add_argument("--dim", type=int, required=True, choices=(2, 3, 4))
    p.add_argument("--mode", choices=("fano", "weak"), default="fano")
    p.add_argument("--threads", type=int, default=int(os.environ.get("TORICFAN_THREADS", "1")))
    p.add_argument("--checkpoint")
    p.add_argument("--checkpoint-interval", type=int, default=25)
    p.add_argument("--out")
    p.add_argument("--format", choices=("summary", "lines"), default="summary")

    p = add("gorenstein-surfaces", cmd_gorenstein_surfaces, help="reflexive polygons via the weak surface closure")
    p.add_argument("--out")

    p = add("verify-table1", cmd_verify_table1, help="verify 4-fold blow-up relations against a closure graph")
    p.add_argument("--graph", required=True, help="checkpoint file from enumerate --dim 4")
    p.add_argument("--full", action="store_true", help="also match every table row")

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
