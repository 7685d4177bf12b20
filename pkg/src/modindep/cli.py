"""Command line front end: ``modindep run | list | sweep | show``."""

from __future__ import annotations

import argparse
import json
import sys

from . import scenarios
from .config import load_default_config
from .errors import ModIndepError, ScenarioError

EXIT_OK, EXIT_EXPECTATIONS, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modindep", description="Independence checks for matrix C*-modules.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a built-in scenario or a scenario file")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="built-in scenario name (see 'list')")
    src.add_argument("--file", help="path to a scenario JSON file")
    run.add_argument("--seed", type=int)
    run.add_argument("--tol", type=float)
    run.add_argument("--max-iter", type=int)
    run.add_argument("--restarts", type=int)
    run.add_argument("--json-out", help="write the full report as JSON")
    run.add_argument("--quiet", action="store_true", help="print only the summary line")

    sub.add_parser("list", help="list built-in scenarios")

    sw = sub.add_parser("sweep", help="run a one-parameter family over a grid")
    sw.add_argument("--family", required=True, help=f"one of: {', '.join(scenarios.FAMILIES)}")
    sw.add_argument("--grid", required=True, help="a:b:n, n evenly spaced points")
    sw.add_argument("--plot", help="write an SVG plot of the gap against t")
    sw.add_argument("--json-out", help="write the rows as JSON")

    show = sub.add_parser("show", help="print a built-in scenario as JSON")
    show.add_argument("name")
    return parser


def _print_report(report: scenarios.RunReport, quiet: bool) -> None:
    if not quiet:
        for c in report.checks:
            marks = [e["passed"] for e in c.expectations]
            tag = "ERROR" if c.error else ("PASS" if all(marks) else "FAIL")
            if c.error:
                summary = c.error
            else:
                res = c.result
                summary = next((f"{k}={res[k]}" for k in ("kind", "status", "screen", "passes", "inner_norm", "dim") if k in res), "")
            print(f"[{tag:5}] #{c.index} {c.op}: {summary} ({c.seconds:.2f}s)")
            for e in c.expectations:
                if not e["passed"]:
                    print(f"        expected {e['path']}: got {e['actual']!r}")
    met = sum(e["passed"] for c in report.checks for e in c.expectations)
    total = sum(len(c.expectations) for c in report.checks)
    print(f"{report.name}: {len(report.checks)} checks, {met}/{total} expectations met, "
          f"{len(report.errors)} errors -> exit {report.exit_code}")


def _run(args) -> int:
    overrides = {"seed": args.seed, "tol": args.tol, "max_iter": args.max_iter, "restarts": args.restarts}
    scenario = scenarios.builtin(args.scenario) if args.scenario else scenarios.load(args.file)
    report = scenarios.run(scenario, load_default_config(), overrides)
    _print_report(report, args.quiet)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(report.dumps())
    return report.exit_code


def _sweep(args) -> int:
    rows = scenarios.sweep(args.family, scenarios.parse_grid(args.grid), load_default_config())
    sys.stdout.write(scenarios.format_table(rows))
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(rows, fh, indent=1)
    if args.plot:
        scenarios.plot_gaps(rows, args.plot)
    return EXIT_INTERNAL if any(r["error"] for r in rows) else EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list":
            for name, summary in scenarios.list_scenarios():
                print(f"{name:30} {summary}")
            return EXIT_OK
        if args.command == "show":
            sys.stdout.write(scenarios.serialize(scenarios.builtin(args.name)))
            return EXIT_OK
        if args.command == "run":
            return _run(args)
        return _sweep(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModIndepError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
