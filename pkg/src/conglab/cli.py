"""Command-line entry point.

Every subcommand is a thin wrapper over the library and prints either a
human-readable summary or canonical JSON (--json).  Exit codes: 0 for
success / all checks hold, 1 for a check that failed with a witness, 2 for
usage, input, or budget errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .budgets import BudgetError
from .deduction import classify_system, deducible_decreasing_pairs
from .digraph import build_digraph, check_claim1, check_claim2, check_claim3, to_dot
from .partitions import (
    OrbitModel,
    build_group_partition,
    build_orbit_partition,
    verify_group_partition,
)
from .sphere import certify_ball_freeness, standard_generators
from .simulator import check_invariants, init, snapshot, snapshot_json, step
from .svgout import render_svg
from .systems import DslError, format_system, mask_indices, parse_system
from .transform import (
    generate_partition_system,
    reduce_inconsistent,
    transform_to_weak_plus_selfcomp,
)
from .words import IDENTITY, Presentation, format_word, parse_word


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _emit(payload: dict, as_json: bool, human: str) -> None:
    if as_json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human, end="" if human.endswith("\n") else "\n")


def _cmd_classify(args) -> int:
    system = parse_system(_read_source(args.file))
    report = classify_system(system)
    payload = report.to_dict()
    if args.pairs:
        payload["decreasing_pairs"] = [
            [list(mask_indices(a)), list(mask_indices(b))]
            for a, b in deducible_decreasing_pairs(system)
        ]
    lines = [f"r={system.r} m={system.m}"]
    for name in ("weak", "consistent", "nonredundant"):
        prop = payload[name]
        lines.append(f"{name:13s} {'yes' if prop['ok'] else 'NO'}"
                     + ("" if prop["ok"] else f"  witness: {json.dumps(prop['witness'])}"))
    _emit(payload, args.json, "\n".join(lines))
    ok = report.weak.ok and report.consistent.ok and report.nonredundant.ok
    return 0 if ok else 1


def _cmd_reduce(args) -> int:
    system = parse_system(_read_source(args.file))
    result = reduce_inconsistent(system)
    if args.json:
        _emit(result.to_dict(), True, "")
    elif result.empty:
        print(f"# everything deleted: indices {list(result.deleted)}")
    else:
        if result.deleted:
            print(f"# deleted indices: {list(result.deleted)}")
        print(format_system(result.system), end="")
    return 0


def _cmd_transform(args) -> int:
    system = parse_system(_read_source(args.file))
    result = transform_to_weak_plus_selfcomp(system)
    if args.json:
        _emit(result.to_dict(), True, "")
    else:
        print(f"# m_bar = {result.m_bar}; self-complement congruences: "
              f"{list(result.self_complement_indices)}")
        print(format_system(result.system), end="")
    return 0


def _cmd_gen(args) -> int:
    system, table = generate_partition_system(args.n)
    if args.json:
        _emit({
            "r": system.r,
            "m": system.m,
            "sequences": [list(s) for s in table],
            "congruences": [[list(mask_indices(a)), list(mask_indices(b))]
                            for a, b in system.congruences],
        }, True, "")
    else:
        print(f"# generated system, n={args.n}, r={system.r}, m={system.m}")
        print(format_system(system), end="")
    return 0


def _cmd_graph(args) -> int:
    system = parse_system(_read_source(args.file))
    m_bar = args.m_bar
    if args.variant == "s4" and m_bar is None:
        result = transform_to_weak_plus_selfcomp(system)
        system, m_bar = result.system, result.m_bar
    graph = build_digraph(system, args.variant, m_bar)
    wanted = [int(c) for c in args.claims.split(",") if c]
    reports = {}
    for claim in wanted:
        if claim == 1:
            reports["claim1"] = check_claim1(graph)
        elif claim == 2:
            reports["claim2"] = check_claim2(graph)
        elif claim == 3:
            reports["claim3"] = check_claim3(graph, args.path_bound)
        else:
            raise ValueError(f"unknown claim {claim}")
    if args.dot:
        Path(args.dot).write_text(to_dot(graph))
    payload = {
        "variant": graph.variant,
        "vertices": len(graph.vertices),
        "edges": len(graph.edges),
        "path_bound": graph.path_bound() if args.path_bound is None else args.path_bound,
        **{name: rep.to_dict() for name, rep in reports.items()},
    }
    lines = [f"variant={graph.variant} vertices={len(graph.vertices)} edges={len(graph.edges)}"]
    for name, rep in reports.items():
        lines.append(f"{name}: {'holds' if rep.ok else 'FAILS'}"
                     + ("" if rep.ok else f"  witness: {json.dumps(rep.witness)}"))
    _emit(payload, args.json, "\n".join(lines))
    return 0 if all(rep.ok for rep in reports.values()) else 1


def _prepare_partition(args):
    system = parse_system(_read_source(args.file))
    result = transform_to_weak_plus_selfcomp(system)
    pres = Presentation(result.system.m, result.m_bar)
    anchor = parse_word(args.w, pres) if args.w else IDENTITY
    part = build_group_partition(result.system, result.m_bar, pres, anchor)
    return result, pres, anchor, part


def _cmd_partition(args) -> int:
    result, pres, anchor, part = _prepare_partition(args)
    report = verify_group_partition(part, args.verify_depth)
    payload = {
        "m_bar": result.m_bar,
        "anchor": format_word(anchor, pres),
        "anchor_piece": part.assign(anchor),
        "identity_piece": part.assign(IDENTITY),
        "verified": report.to_dict(),
    }
    if args.dump_depth:
        payload["assignments"] = {
            format_word(w, pres): piece
            for w, piece in part.assignment_table(args.dump_depth).items()
        }
    human = (f"m_bar={result.m_bar} anchor={payload['anchor']} "
             f"piece(1)={payload['identity_piece']} piece(w)={payload['anchor_piece']}\n"
             f"verified depth {args.verify_depth}: "
             f"{'pass' if report.ok else 'FAIL ' + json.dumps(report.violation)} "
             f"({report.words_checked} words)")
    _emit(payload, args.json, human)
    return 0 if report.ok else 1


def _cmd_orbit_partition(args) -> int:
    result, pres, anchor, part = _prepare_partition(args)
    orbit = OrbitModel(anchor, pres) if anchor else None
    reps, check = build_orbit_partition(orbit, part, args.verify_depth)
    payload = {
        "m_bar": result.m_bar,
        "fixed_word": format_word(anchor, pres),
        "representatives": {format_word(w, pres): piece for w, piece in sorted(
            reps.items(), key=lambda kv: (len(kv[0].syllables), kv[0].syllables))},
        "verified": check.to_dict(),
    }
    human = (f"orbit of fixed word {payload['fixed_word']}: {len(reps)} representatives, "
             f"verify {'pass' if check.ok else 'FAIL ' + json.dumps(check.violation)}")
    _emit(payload, args.json, human)
    return 0 if check.ok else 1


def _cmd_certify(args) -> int:
    from .sphere import mat_json

    pres = Presentation(args.m, args.mbar)
    real = standard_generators(pres)
    result = certify_ball_freeness(real, args.depth)
    payload = {
        "generators": args.m,
        "infinite": args.mbar,
        "depth": args.depth,
        "certified": result.certified,
        "words_checked": result.words_checked,
        "matrices": [mat_json(m) for m in real.generator_matrices],
        "zeta_composed": list(real.zeta_composed),
        "counterexample": None if result.counterexample is None
        else format_word(result.counterexample, pres),
    }
    human = (f"certified to depth {args.depth}: {result.certified} "
             f"({result.words_checked} words)"
             + ("" if result.certified else f"; counterexample {payload['counterexample']}"))
    _emit(payload, args.json, human)
    return 0 if result.certified else 1


def _cmd_simulate(args) -> int:
    system = parse_system(_read_source(args.file))
    if args.variant == "s4":
        result = transform_to_weak_plus_selfcomp(system)
        system, m_bar = result.system, result.m_bar
    else:
        m_bar = system.m
    pres = Presentation(system.m, m_bar)
    real = standard_generators(pres)
    certify_ball_freeness(real, args.cert_depth)
    state = init(system, m_bar, real, args.variant, min_certificate_depth=args.cert_depth)
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    all_ok = True
    for n in range(args.steps):
        step(state)
        report = check_invariants(state, since_stage=n)
        all_ok = all_ok and report.ok
        if not args.json:
            print(f"stage {n}: placements={state.history[-1].placements} "
                  f"k_bar={state.history[-1].k_bar} tracked={len(state.tracked)} "
                  f"invariants={'ok' if report.ok else 'FAIL'}")
        if not report.ok:
            print(json.dumps(report.failures, indent=2, sort_keys=True))
            return 1
        if out_dir and args.snapshot_every and (n + 1) % args.snapshot_every == 0:
            (out_dir / f"stage{n + 1:04d}.json").write_text(snapshot_json(state))
            if args.svg:
                (out_dir / f"stage{n + 1:04d}.svg").write_text(render_svg(snapshot(state)))
    final = check_invariants(state)
    payload = {
        "stages": state.stage,
        "link_radius": state.link_radius,
        "patches": state.patch_count(),
        "tracked": len(state.tracked),
        "invariants": final.to_dict(),
    }
    if out_dir:
        (out_dir / "final.json").write_text(snapshot_json(state))
        if args.svg:
            (out_dir / "final.svg").write_text(render_svg(snapshot(state)))
    _emit(payload, args.json,
          f"completed {state.stage} stages: patches={payload['patches']} "
          f"tracked={payload['tracked']} invariants={'ok' if final.ok else 'FAIL'}")
    return 0 if final.ok and all_ok else 1


def _cmd_render(args) -> int:
    snap = json.loads(_read_source(args.snapshot))
    svg = render_svg(snap, axis=args.axis, overlay=args.overlay)
    if args.out:
        Path(args.out).write_text(svg)
    else:
        print(svg, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conglab",
        description="classify congruence systems, check the digraph claims, build "
                    "free-product partitions, certify rotation realizations, and run "
                    "the stage-wise open-set construction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="weak/consistent/nonredundant classification")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--pairs", action="store_true",
                   help="also list all deducible size-decreasing pairs")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("reduce", help="iterated deletion of inconsistent indices")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("transform", help="equivalent weak + self-complement form")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("gen-cor22", help="generated system over index sequences")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("graph", help="build the labeled digraph and check the claims")
    p.add_argument("file")
    p.add_argument("--variant", choices=("s2", "s4"), default="s2")
    p.add_argument("--claims", default="1,2,3")
    p.add_argument("--m-bar", type=int, default=None,
                   help="transformed-shape split for s4 (default: transform the input)")
    p.add_argument("--path-bound", type=int, default=None)
    p.add_argument("--dot", help="write DOT export here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("partition", help="build and verify a group partition")
    p.add_argument("file")
    p.add_argument("--w", default="", help="anchor word, e.g. 's1^2' (default identity)")
    p.add_argument("--verify-depth", type=int, default=8)
    p.add_argument("--dump-depth", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("orbit-partition", help="partition an orbit with a fixed word")
    p.add_argument("file")
    p.add_argument("--w", required=True, help="fixed word, e.g. 't1^2'")
    p.add_argument("--verify-depth", type=int, default=6)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_orbit_partition)

    p = sub.add_parser("certify-free", help="ball-freeness certificate for the committed rotations")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mbar", type=int, required=True)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("simulate", help="run the stage-wise construction")
    p.add_argument("file")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--variant", choices=("s2", "s4"), default="s2")
    p.add_argument("--snapshot-every", type=int, default=0)
    p.add_argument("--out", help="snapshot directory")
    p.add_argument("--svg", action="store_true")
    p.add_argument("--cert-depth", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("render", help="render a snapshot JSON to SVG")
    p.add_argument("snapshot")
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--overlay", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DslError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
