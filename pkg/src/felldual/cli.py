"""Command-line front end.

    felldual validate <file>
    felldual duality <file|--demo NAME>... [--tol X] [--json PATH]
                     [--timings] [--parallel]
    felldual demo NAME [--emit PATH]
    felldual list-demos

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
JSON reports omit wall times unless --timings is given, so identical inputs
produce bitwise-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from .bundles import BundleError, load_bundle, save_bundle
from .demos import DEMOS, demo_bundle
from .duality import verify_duality_pipeline
from .groupoids import GroupoidError
from .linalg import LinalgError

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2

MAX_TOL = 1e-3


def _load_or_demo(target: str):
    """A target is a demo name when prefixed or when it names a demo."""
    if target.startswith("demo:"):
        return demo_bundle(target[5:])
    if target in DEMOS:
        return demo_bundle(target)
    bundle, report = load_bundle(target)
    if not report.all_passed:
        failing = "; ".join(f"{c.name} ({c.detail})" for c in report.failing())
        raise BundleError(f"{target}: bundle fails validation: {failing}")
    return bundle


def cmd_validate(args) -> int:
    try:
        bundle, report = load_bundle(args.path)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {args.path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BundleError, GroupoidError, LinalgError, ValueError) as exc:
        print(f"error: malformed bundle file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"bundle {bundle.name}: {bundle.base.n_arrows} arrows, "
          f"ambient {bundle.ambient_dim}, "
          f"total fiber dim {bundle.total_fiber_dim()}")
    print(report)
    return EXIT_OK if report.all_passed else EXIT_VERIFICATION


def _run_one_duality(target: str, tol: float):
    bundle = _load_or_demo(target)
    return verify_duality_pipeline(bundle, tol)


def cmd_duality(args) -> int:
    if not (0.0 < args.tol <= MAX_TOL):
        print(f"error: --tol must lie in (0, {MAX_TOL}]", file=sys.stderr)
        return EXIT_USAGE
    targets = args.targets + [f"demo:{d}" for d in args.demo]
    if not targets:
        print("error: no bundle file or --demo given", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.parallel and len(targets) > 1:
            with ThreadPoolExecutor() as pool:
                reports = list(pool.map(
                    lambda t: _run_one_duality(t, args.tol), targets))
        else:
            reports = [_run_one_duality(t, args.tol) for t in targets]
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BundleError, GroupoidError, LinalgError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    for report in reports:
        print(report)
        print()
    if args.json:
        payload = [r.to_json_dict(include_timings=args.timings)
                   for r in reports]
        doc = payload[0] if len(payload) == 1 else payload
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFICATION


def cmd_demo(args) -> int:
    try:
        bundle = demo_bundle(args.name)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    group_order = bundle.base.n_arrows
    dims = [bundle.fiber(x).dim for x in range(bundle.base.n_arrows)]
    print(f"demo {args.name}: |G| = {group_order}, "
          f"fiber dims {dims}, total fiber dim D = {bundle.total_fiber_dim()}, "
          f"ambient {bundle.ambient_dim}")
    if args.emit:
        save_bundle(bundle, args.emit)
        print(f"wrote {args.emit}")
    return EXIT_OK


def cmd_list_demos(_args) -> int:
    from .demos import EXPECTED_TOTAL_DIM
    for name in sorted(DEMOS):
        print(f"{name:<10} D = {EXPECTED_TOTAL_DIM[name]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="felldual",
        description="Finite-model verification of Fell-bundle "
                    "crossed-product duality.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a bundle JSON file")
    p_validate.add_argument("path")
    p_validate.set_defaults(func=cmd_validate)

    p_duality = sub.add_parser(
        "duality", help="run the duality verification pipeline")
    p_duality.add_argument("targets", nargs="*",
                           help="bundle JSON files or demo names")
    p_duality.add_argument("--demo", action="append", default=[],
                           metavar="NAME", help="built-in demo bundle")
    p_duality.add_argument("--tol", type=float, default=1e-9)
    p_duality.add_argument("--json", metavar="PATH",
                           help="write the JSON report here")
    p_duality.add_argument("--timings", action="store_true",
                           help="include wall times in the JSON report")
    p_duality.add_argument("--parallel", action="store_true",
                           help="verify independent targets concurrently")
    p_duality.set_defaults(func=cmd_duality)

    p_demo = sub.add_parser("demo", help="materialize a built-in bundle")
    p_demo.add_argument("name")
    p_demo.add_argument("--emit", metavar="PATH",
                        help="write the bundle JSON here")
    p_demo.set_defaults(func=cmd_demo)

    p_list = sub.add_parser("list-demos", help="list built-in demo bundles")
    p_list.set_defaults(func=cmd_list_demos)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
