"""Command-line driver: ``gon run|validate|version``.

Exit codes: 0 success, 2 invalid config, 3 numerical failure (budget
exceeded), 4 a checked invariant failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, EnumerationBudget, InvariantViolation, SearchSpaceTooLarge
from .experiments import execute, validate
from .io import csv_text, json_text, atomic_write
from .plot import render_svg

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ASSERT = 0, 2, 3, 4


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None


def _resolve(p: str, outdir: Path | None) -> Path:
    p = Path(p)
    if outdir is not None and not p.is_absolute():
        return outdir / p
    return p


def write_outputs(cfg: dict, outcome, outdir: Path | None = None) -> list[Path]:
    outs = cfg.get("outputs", {})
    written = []
    if "csv" in outs:
        written.append(atomic_write(_resolve(outs["csv"], outdir),
                                    csv_text(outcome.header, outcome.rows)))
    if "json" in outs:
        doc = {"kind": cfg["kind"], "seed": cfg.get("seed"), "checks": outcome.checks,
               "ok": outcome.ok, "report": outcome.report}
        written.append(atomic_write(_resolve(outs["json"], outdir), json_text(doc)))
    if "svg" in outs:
        if outcome.profile is None:
            raise ConfigError(f"kind {cfg['kind']!r} produces no plot; remove outputs.svg")
        written.append(atomic_write(_resolve(outs["svg"], outdir), render_svg(outcome.profile)))
    return written


def run(config_path, outdir=None) -> int:
    """Execute one experiment; prints a one-line summary and returns the exit code."""
    outdir = Path(outdir) if outdir is not None else None
    try:
        cfg = validate(load_config(config_path))
        outcome = execute(cfg, Path(config_path).resolve().parent)
        written = write_outputs(cfg, outcome, outdir)
    except ConfigError as exc:
        print(f"gon: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EnumerationBudget, SearchSpaceTooLarge) as exc:
        print(f"gon: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvariantViolation as exc:
        print(f"gon: invariant violated: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    failed = [k for k, v in outcome.checks.items() if not v]
    status = "ok" if not failed else "FAILED " + ",".join(failed)
    dest = f" -> {', '.join(str(p) for p in written)}" if written else ""
    print(f"{outcome.summary} [{status}]{dest}")
    return EXIT_OK if not failed else EXIT_ASSERT


def validate_only(config_path) -> int:
    try:
        cfg = validate(load_config(config_path))
    except ConfigError as exc:
        print(f"gon: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{config_path}: valid {cfg['kind']} config")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gon", description="Geometry-of-numbers experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--outdir", help="directory for relative output paths (default: cwd)")
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    sub.add_parser("version", help="print the package version")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run(args.config, args.outdir)
    if args.command == "validate":
        return validate_only(args.config)
    print(__version__)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
