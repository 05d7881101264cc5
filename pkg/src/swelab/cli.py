"""Command-line runner: one subcommand per experiment family.

Exit codes: 0 study ran and passed its declared thresholds (or none declared),
1 thresholds declared and failed, 2 configuration problem, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import traceback

import yaml

from .config import config_from_dict, validate
from .errors import ConfigurationError, LabError
from .studies import run_study

__all__ = ["main"]

_SUBCOMMAND_KINDS = {
    "simulate": ("simulate",),
    "qv": ("qv-time", "qv-space", "ladder"),
    "clt": ("clt",),
    "lil": ("lil",),
    "mart": ("mart",),
    "linearize": ("linearize",),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swelab",
        description="Monte Carlo lab for a singular wave equation: quadratic "
                    "variation, fluctuation probes, and linearization contrasts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="YAML experiment config")
    common.add_argument("--seed", type=int, default=None,
                        help="override base_seed")
    common.add_argument("--replicates", type=int, default=None,
                        help="override replicate count")
    common.add_argument("--workers", type=int, default=None,
                        help="override worker count")
    common.add_argument("--out-dir", default=None,
                        help="override output directory")
    common.add_argument("-v", "--verbose", action="store_true",
                        help="print every aggregated statistic")

    helps = {
        "simulate": "solve fields, probe moments and increment scaling",
        "qv": "quadratic variation studies (qv-time, qv-space, ladder configs)",
        "clt": "standardized short-time increments vs the normal law",
        "lil": "iterated-logarithm scaling probe",
        "mart": "martingale + remainder split of short-time increments",
        "linearize": "frozen-coefficient defect, wave or heat",
    }
    for name, kinds in _SUBCOMMAND_KINDS.items():
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        sp.set_defaults(func=_cmd_run, kinds=kinds)
        if name == "qv":
            sp.add_argument("--t", type=float, default=None)
            sp.add_argument("--x", type=float, default=None)
            sp.add_argument("--x-lo", type=float, default=None)
            sp.add_argument("--x-hi", type=float, default=None)
            sp.add_argument("--pieces", default=None,
                            help="partition count, or comma ladder for ladder configs")
            sp.add_argument("--sigma", default=None,
                            help="override noise coefficient, e.g. linear:1.0")
        if name == "linearize":
            sp.add_argument("--equation", choices=("wave", "heat"), default=None)
        if name == "simulate":
            sp.add_argument("--snapshot", action="store_true",
                            help="write field/noise snapshots for the base seed")

    rp = sub.add_parser("report", help="re-read a stored JSON report, print pass/fail")
    rp.add_argument("path", help="path to a *_report.json file")
    rp.set_defaults(func=_cmd_report)
    return parser


def _load_raw(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} must be a YAML mapping")
    return raw


def _apply_overrides(raw: dict, args: argparse.Namespace) -> dict:
    if args.seed is not None:
        raw["base_seed"] = args.seed
    if args.replicates is not None:
        raw["replicates"] = args.replicates
    if args.workers is not None:
        raw["workers"] = args.workers
    if args.out_dir is not None:
        raw["out_dir"] = args.out_dir
    if getattr(args, "sigma", None) is not None:
        raw["sigma"] = args.sigma
    if getattr(args, "equation", None) is not None:
        raw["equation"] = args.equation
    params = dict(raw.get("params", {}) or {})
    for key, name in (("t", "t"), ("x", "x"), ("x_lo", "x_lo"), ("x_hi", "x_hi")):
        value = getattr(args, key, None)
        if value is not None:
            params[name] = value
    pieces = getattr(args, "pieces", None)
    if pieces is not None:
        values = [int(v) for v in str(pieces).split(",") if v.strip()]
        if not values:
            raise ConfigurationError(f"--pieces {pieces!r} has no counts")
        if raw.get("kind") == "ladder":
            params["counts"] = values
        elif len(values) == 1:
            params["n_pieces"] = values[0]
        else:
            raise ConfigurationError(
                "--pieces with several counts requires a ladder config"
            )
    if getattr(args, "snapshot", False):
        params["snapshot"] = True
    if params:
        raw["params"] = params
    return raw


def _print_checks(checks: list[dict]) -> None:
    for c in checks:
        lo = "-inf" if c["min"] is None else f"{c['min']:g}"
        hi = "+inf" if c["max"] is None else f"{c['max']:g}"
        status = "PASS" if c["passed"] else "FAIL"
        print(f"  check {c['stat']} = {c['value']:.6g} in [{lo}, {hi}] .. {status}")


def _cmd_run(args: argparse.Namespace) -> int:
    raw = _apply_overrides(_load_raw(args.config), args)
    cfg = config_from_dict(raw)
    if cfg.kind not in args.kinds:
        raise ConfigurationError(
            f"subcommand {args.command!r} accepts kinds {args.kinds}, "
            f"but the config declares {cfg.kind!r}"
        )
    _, notes = validate(cfg)
    if args.verbose:
        for note in notes:
            print(f"  note: {note}")
    out = run_study(cfg)
    rep = out.report
    print(f"{cfg.label}: kind={cfg.kind} sigma={cfg.sigma.label()} "
          f"replicates={cfg.replicates} base_seed={cfg.base_seed}")
    if args.verbose:
        for name, value in rep["stats"].items():
            print(f"  stat {name} = {value:.8g}")
    _print_checks(rep["checks"])
    for path in out.files:
        print(f"  wrote {path}")
    if rep["passed"] is None:
        print("done (no thresholds declared)")
        return 0
    print("PASS" if rep["passed"] else "FAIL")
    return 0 if rep["passed"] else 1


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        with open(args.path) as fh:
            rep = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read report {args.path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{args.path} is not valid JSON: {exc}") from exc
    config = rep.get("config", {})
    print(f"{config.get('label', '?')}: kind={config.get('kind', '?')} "
          f"sigma={config.get('sigma', '?')} replicates={config.get('replicates', '?')}")
    _print_checks(rep.get("checks", []))
    passed = rep.get("passed")
    if passed is None:
        print("no thresholds declared")
        return 0
    print("PASS" if passed else "FAIL")
    return 0 if passed else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except LabError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
