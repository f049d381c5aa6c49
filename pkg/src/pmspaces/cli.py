"""Command line entry point ``pmspaces``.

Single-task subcommands build a one-task config from flags; ``run`` reads a
JSON config.  Exit status: 0 ok, 2 config error, 3 solver error, 4 theorem
violation.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import catalog
from .errors import ConfigError, PMSpaceError
from .runner import exit_code, load_config, parse_config, run


def _value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {item!r}", "--param")
        out[key] = _value(val)
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}", "--p") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise ConfigError(f"bad level list {text!r}", "--levels") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="random seed (default 0, or the config value)")
    p.add_argument("--mode", choices=["float", "rational"], default=None, help="numeric mode")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--jobs", type=int, default=None, help="parallel workers")


def _space_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--space", choices=sorted(catalog.BUILDERS), help="catalog builder")
    src.add_argument("--file", help="space in the interchange format")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="builder parameter (JSON value)")
    p.add_argument("--omega", default=None, help="comma-separated point ids of the domain")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmspaces", description="Cheeger constants and spectra on finite perimeter-measure spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("axioms", help="check the perimeter axioms")
    _space_args(p)
    _common(p)

    p = sub.add_parser("cheeger", help="N-Cheeger constant and certificate")
    _space_args(p)
    p.add_argument("-N", type=int, default=1)
    _common(p)

    p = sub.add_parser("kappa-scan", help="scan P - kappa m over a kappa grid")
    _space_args(p)
    p.add_argument("--step", default=None, help="grid step (number or p/q)")
    p.add_argument("--upper", default=None, help="grid upper end")
    _common(p)

    p = sub.add_parser("spectral", help="first 1- and p-eigenvalues")
    _space_args(p)
    p.add_argument("--p", default="", help="comma-separated exponents above 1")
    p.add_argument("--samples", type=int, default=1000)
    _common(p)

    p = sub.add_parser("torsion", help="p-torsion functions and bounds")
    _space_args(p)
    p.add_argument("--p", default="2", help="comma-separated exponents above 1")
    _common(p)

    p = sub.add_parser("converge", help="refinement study over a catalog family")
    p.add_argument("--family", required=True, choices=sorted(catalog.BUILDERS))
    p.add_argument("--levels", required=True, help="comma-separated refinement levels")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="fixed family parameter")
    p.add_argument("--p", type=float, default=None, help="add p-eigenvalue and torsion columns")
    _common(p)

    p = sub.add_parser("run", help="run a JSON config")
    p.add_argument("config")
    _common(p)
    return parser


def _task_from_args(args) -> dict:
    if args.command == "axioms":
        return {"axioms": {}}
    if args.command == "cheeger":
        return {"cheeger": {"N": args.N}}
    if args.command == "kappa-scan":
        params = {}
        if args.step is not None:
            params["step"] = args.step
        if args.upper is not None:
            params["upper"] = args.upper
        return {"kappa-scan": params}
    if args.command == "spectral":
        return {"spectral": {"p": _floats(args.p), "samples": args.samples}}
    if args.command == "torsion":
        return {"torsion": {"p": _floats(args.p)}}
    params = {"family": args.family, "levels": _ints(args.levels)}
    fixed = _params(args.param)
    if fixed:
        params["fixed"] = fixed
    if args.p is not None:
        params["p"] = args.p
    return {"converge": params}


def _config_from_args(args):
    doc = {"schema": 1, "tasks": [_task_from_args(args)], "seed": 0 if args.seed is None else args.seed,
           "mode": args.mode or "float", "out": args.out or "results"}
    if args.command != "converge":
        if args.space:
            space = {"builder": args.space, "params": _params(args.param)}
        else:
            space = {"file": args.file}
        if args.omega:
            space["omega"] = [_value(v) if v.strip().isdigit() else v.strip() for v in args.omega.split(",")]
        doc["space"] = space
    return parse_config(doc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            if args.seed is not None:
                config.seed = args.seed
            if args.mode is not None:
                config.mode = args.mode
        else:
            config = _config_from_args(args)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("jobs must be a positive integer", "--jobs")
        manifest = run(config, out=args.out, jobs=args.jobs)
    except PMSpaceError as exc:
        code = exit_code(exc)
        print(f"pmspaces: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    print(f"{manifest.out / 'manifest.json'}: {len(manifest.tasks)} task(s), status ok")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


__all__ = ["build_parser", "main"]
