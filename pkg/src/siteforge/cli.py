"""Command line front end.

Every command loads a JSON bundle, prints a JSON document on stdout and
exits 0 on success, 1 when a check fails mathematically, 2 on malformed
input.  Output is deterministic: keys sorted, two-space indent, LF.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import render
from .enough import (
    NotPosetal,
    closed_subtopology,
    enough_points_report,
    locale_points,
    oracle_enumerate_points,
    transfer_points,
)
from .fincat import FinCatError, UnknownObject
from .figures import chain_dot, enough_csv, enough_figure, synthesis_figure
from .improve import synthesize_point
from .point import Evaluation, check_projectivity
from .presheaf import Presheaf, sheafify
from .sites import DepthExceeded, SizeBudgetExceeded
from .specfile import BundleInvalid, SiteBundle, SpecError, chain_doc, load_bundle, parse_chain


def _print(doc) -> None:
    sys.stdout.write(render.dumps(doc))


def _object(bundle: SiteBundle, name: str):
    try:
        return bundle.cat.obj_index(name)
    except UnknownObject:
        raise SpecError(f"no object named {name!r} in bundle {bundle.name!r}") from None


def _section(x: Presheaf, o, label: str) -> int:
    try:
        return x.index(o, label)
    except KeyError:
        raise SpecError(
            f"presheaf {x.name!r} has no section {label!r} at {x.cat.obj_names[o]!r}"
        ) from None


def _cmd_validate(args) -> int:
    bundle = load_bundle(args.bundle)
    _print(
        {
            "ok": True,
            "name": bundle.name,
            "objects": bundle.cat.n_objects,
            "morphisms": bundle.cat.n_morphisms,
            "presheaves": sorted(bundle.presheaves),
            "maps": sorted(bundle.maps),
            "subterminals": sorted(bundle.subterminals),
        }
    )
    return 0


def _cmd_saturate(args) -> int:
    bundle = load_bundle(args.bundle)
    site = bundle.site()
    doc = {"name": bundle.name}
    doc.update(render.topology_doc(bundle.cat, site.topology))
    _print(doc)
    return 0


def _cmd_sheafify(args) -> int:
    bundle = load_bundle(args.bundle)
    site = bundle.site()
    x = bundle.presheaf(args.presheaf)
    res = sheafify(bundle.cat, site.topology, x)
    doc = {"name": bundle.name, "presheaf": args.presheaf}
    doc.update(render.sheafify_doc(res))
    _print(doc)
    return 0


def _cmd_point_synth(args) -> int:
    bundle = load_bundle(args.bundle)
    site = bundle.site()
    cat = bundle.cat
    x = bundle.presheaf(args.presheaf)
    at = _object(bundle, args.at)
    xi = _section(x, at, args.x)
    yi = _section(x, at, args.y)
    if xi == yi:
        raise SpecError("the two sections must differ")
    result = synthesize_point(
        cat,
        site.topology,
        site.warp,
        x,
        at,
        xi,
        yi,
        max_steps=args.max_steps,
        max_period=args.max_period,
    )
    if args.dot:
        if result.point is not None:
            Path(args.dot).write_text(chain_dot(cat, result.point, site.warp))
        else:
            Path(args.dot).write_text("digraph chain {\n  /* no point synthesized */\n}\n")
    if args.fig:
        synthesis_figure(cat, result, args.fig)
    doc = {"name": bundle.name, "presheaf": args.presheaf}
    doc.update(render.synthesis_doc(cat, result))
    _print(doc)
    return 0 if result.ok else 1


def _cmd_point_check(args) -> int:
    bundle = load_bundle(args.bundle)
    site = bundle.site()
    cat = bundle.cat
    raw = args.chain
    if raw.lstrip().startswith("{"):
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as e:
            raise SpecError(f"chain is not valid JSON: {e}") from None
    else:
        try:
            doc = json.loads(Path(raw).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise SpecError(f"cannot read chain from {raw}: {e}") from None
    chain = parse_chain(cat, doc)
    report = check_projectivity(cat, site.topology, chain)
    values = {
        name: render.evaluation_doc(Evaluation(cat, chain, x))
        for name, x in sorted(bundle.presheaves.items())
    }
    _print(
        {
            "name": bundle.name,
            "chain": chain_doc(cat, chain),
            "projectivity": render.projectivity_doc(cat, report),
            "values": values,
        }
    )
    return 0 if report.ok else 1


def _cmd_enough(args) -> int:
    bundle = load_bundle(args.bundle)
    site = bundle.site()
    cat = bundle.cat
    report = enough_points_report(
        cat,
        site.topology,
        site.warp,
        sorted(bundle.presheaves.items()),
        max_steps=args.max_steps,
        max_period=args.max_period,
    )
    if args.csv:
        Path(args.csv).write_text(enough_csv(cat, report))
    if args.fig:
        enough_figure(cat, report, args.fig)
    doc = {"name": bundle.name}
    doc.update(render.enough_doc(cat, report))
    _print(doc)
    return 0 if report.ok else 1


def _cmd_oracle(args) -> int:
    bundle = load_bundle(args.bundle)
    site = bundle.site()
    cat = bundle.cat
    points = oracle_enumerate_points(
        cat, site.topology, max_len=args.max_len, max_period=args.max_period
    )
    try:
        locale = render.locale_doc(cat, locale_points(cat, site.topology))
    except NotPosetal:
        locale = None
    _print(
        {
            "name": bundle.name,
            "count": len(points),
            "points": render.points_doc(cat, points),
            "locale": locale,
        }
    )
    return 0


def _cmd_closed(args) -> int:
    bundle = load_bundle(args.bundle)
    site = bundle.site()
    cat = bundle.cat
    sub = bundle.subterminal(args.subterminal)
    closed = closed_subtopology(cat, site.topology, sub)
    points = oracle_enumerate_points(
        cat, site.topology, max_len=args.max_len, max_period=args.max_period
    )
    kept, dropped = transfer_points(cat, points, sub)
    doc = {
        "name": bundle.name,
        "subterminal": args.subterminal,
        "closed": render.topology_doc(cat, closed),
        "points": render.transfer_doc(cat, kept, dropped),
    }
    _print(doc)
    return 0


def _budget_flags(sp: argparse.ArgumentParser, steps: bool = True) -> None:
    if steps:
        sp.add_argument("--max-steps", type=int, default=32)
        sp.add_argument("--max-period", type=int, default=8)
    else:
        sp.add_argument("--max-len", type=int, default=3)
        sp.add_argument("--max-period", type=int, default=2)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="site-forge",
        description="Finite sites, sheaves and separating chain points.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn, help_text: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("bundle", help="path to a JSON site bundle")
        sp.set_defaults(func=fn)
        return sp

    add("validate", _cmd_validate, "check a bundle against all the laws")
    add("saturate", _cmd_saturate, "print the topology generated by the warp")

    sp = add("sheafify", _cmd_sheafify, "sheafify a presheaf from the bundle")
    sp.add_argument("--presheaf", required=True)

    sp = add("point-synth", _cmd_point_synth, "synthesize a point separating two sections")
    sp.add_argument("--presheaf", required=True)
    sp.add_argument("--at", required=True, help="object carrying the two sections")
    sp.add_argument("--x", required=True, help="first section label")
    sp.add_argument("--y", required=True, help="second section label")
    _budget_flags(sp)
    sp.add_argument("--dot", help="write a DOT collage of the result here")
    sp.add_argument("--fig", help="write a figure of the result here")

    sp = add("point-check", _cmd_point_check, "check projectivity of a chain")
    sp.add_argument("--chain", required=True, help="inline JSON or a path to it")

    sp = add("enough", _cmd_enough, "separate all section pairs of the bundled sheaves")
    _budget_flags(sp)
    sp.add_argument("--csv", help="write the per-pair table here")
    sp.add_argument("--fig", help="write the per-pair figure here")

    sp = add("oracle", _cmd_oracle, "enumerate points by brute force")
    _budget_flags(sp, steps=False)

    sp = add("closed", _cmd_closed, "closed complement of a subterminal")
    sp.add_argument("--subterminal", required=True)
    _budget_flags(sp, steps=False)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except BundleInvalid as e:
        _print({"ok": False, "violations": e.report})
        return 1
    except SpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (FinCatError, NotPosetal, SizeBudgetExceeded, DepthExceeded, ValueError) as e:
        _print({"ok": False, "error": f"{type(e).__name__}: {e}"})
        return 1


def app() -> None:
    sys.exit(main(sys.argv[1:]))
