"""Command line entry point.

Exit codes: 0 all checks pass, 1 a check fails, 2 usage or config error,
3 numerical construction error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .report import FORMATS, curves_to_csv, emit_report
from .scenarios import DEFAULT_SEED, REGISTRY, _echo, resolve_params, run_scenario

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qfluct", description="Run fluctuation-relation scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("scenario", nargs="?", help="scenario name (may come from --config)")
    run.add_argument("--param", action="append", default=[], metavar="K=V", help="override a parameter")
    run.add_argument("--config", type=Path, help="JSON file with scenario, params, seed, format, out")
    run.add_argument("--out", type=Path, help="write the report here instead of stdout")
    run.add_argument("--format", choices=FORMATS, help="report format (default json)")
    run.add_argument("--seed", type=int, help=f"seed for randomized probes (default {DEFAULT_SEED})")
    sub.add_parser("list", help="list scenarios with their defaults")
    return ap


def _load_config(path: Path | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        cfg = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    extra = set(cfg) - {"scenario", "params", "seed", "format", "out"}
    if extra:
        raise UsageError(f"unknown config keys: {', '.join(sorted(extra))}")
    return cfg


def _parse_overrides(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects K=V, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _settings(args: argparse.Namespace) -> tuple[str, dict[str, Any], int, str, Path | None]:
    cfg = _load_config(args.config)
    name = args.scenario or cfg.get("scenario")
    if name is None:
        raise UsageError("no scenario given")
    if name not in REGISTRY:
        raise UsageError(f"unknown scenario {name!r}; choose from {', '.join(REGISTRY)}")
    params = dict(cfg.get("params", {}))
    params.update(_parse_overrides(args.param))
    try:
        resolve_params(name, params)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(str(exc).strip("'\"")) from exc
    seed = args.seed if args.seed is not None else int(cfg.get("seed", DEFAULT_SEED))
    fmt = args.format or cfg.get("format", "json")
    if fmt not in FORMATS:
        raise UsageError(f"format must be one of {FORMATS}")
    out = args.out or (Path(cfg["out"]) if cfg.get("out") else None)
    return name, params, seed, fmt, out


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _list() -> None:
    for sc in REGISTRY.values():
        print(f"{sc.name}: {sc.summary}")
        for k, v in sc.defaults.items():
            print(f"    {k} = {_echo(v)}")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        _list()
        return EXIT_PASS
    try:
        name, params, seed, fmt, out = _settings(args)
    except UsageError as exc:
        print(f"qfluct: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run_scenario(name, params, seed)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"qfluct: {name}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        _write(emit_report(report, fmt), out)
        if fmt == "csv" and report.curves:
            curves = curves_to_csv(report.curves)
            if out is None:
                _write("\n" + curves, None)
            else:
                _write(curves, out.with_name(out.stem + "_curves.csv"))
    except UsageError as exc:
        print(f"qfluct: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
