"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 Monte Carlo verification
failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .analysis import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    checks_to_dict,
    evaluate,
    parse_scenario,
    report,
    reproduce_section6,
    verify,
    write_json,
)
from .config import load_json
from .errors import MrfError, NumericalError, ValidationError
from .model import sample

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_VERIFY_FAILED = 3
EXIT_NUMERICAL = 4


def _emit(data: dict, out_dir: str | None, name: str) -> None:
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_json(os.path.join(out_dir, name), data)
    else:
        json.dump(data, sys.stdout, indent=2)
        sys.stdout.write("\n")


def _load(args):
    if not args.config:
        raise ValidationError("--config is required for this command")
    raw = load_json(args.config)
    p, queries, settings = parse_scenario(raw)
    if args.tol is not None:
        if not args.tol > 0:
            raise ValidationError("--tol must be positive")
        settings["tolerance"] = args.tol
    if args.seed is not None:
        settings["seed"] = args.seed
    if args.samples is not None:
        settings["samples"] = args.samples
    out = args.out or settings["output"]
    return raw, p, queries, settings, out


def cmd_eval(args) -> int:
    raw, p, queries, settings, out = _load(args)
    results = evaluate(p, queries, settings["tolerance"])
    body = {"portfolio": p.to_dict(), "results": results}
    _emit(report("eval", raw, body), out, "eval.json")
    return EXIT_OK


def cmd_verify(args) -> int:
    raw, p, queries, settings, out = _load(args)
    checks = verify(p, queries, settings["samples"], settings["seed"], settings["tolerance"])
    passed = all(c.passed for c in checks)
    body = {"samples": settings["samples"], "seed": settings["seed"], "passed": passed,
            "checks": checks_to_dict(checks)}
    _emit(report("verify", raw, body), out, "verify.json")
    for c in checks:
        flag = "PASS" if c.passed else "FAIL"
        print(f"{flag} {c.id}: analytic={c.analytic!r} mc={c.mc!r} se={c.std_error!r}",
              file=sys.stderr)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def cmd_sample(args) -> int:
    raw, p, queries, settings, out = _load(args)
    count = args.samples if args.samples is not None else queries.sample_count
    batch = sample(p, count, settings["seed"])
    if out:
        os.makedirs(out, exist_ok=True)
        batch.to_csv(os.path.join(out, "samples.csv"))
        write_json(os.path.join(out, "portfolio.json"), p.to_dict())
    else:
        batch.to_csv(sys.stdout)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    out = args.out or "case_study_out"
    samples = args.samples if args.samples is not None else DEFAULT_SAMPLES
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    summary = reproduce_section6(out, samples, seed)
    write_json(os.path.join(out, "summary.json"), report("reproduce-section6", summary, summary))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario or portfolio JSON file")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--tol", type=float, help="relative tolerance for series evaluation")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="closed-form analytics").set_defaults(func=cmd_eval)
    sub.add_parser("verify", parents=[common],
                   help="analytics against Monte Carlo oracles").set_defaults(func=cmd_verify)
    sub.add_parser("sample", parents=[common], help="export sampled default times") \
        .set_defaults(func=cmd_sample)
    sub.add_parser("reproduce-section6", parents=[common],
                   help="two-obligor case study tables and curves").set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MrfError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
