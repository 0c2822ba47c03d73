"""Command-line entry point ``relay-energy-opt``.

Usage::

    relay-energy-opt run <experiment> --out DIR [--seed N] [--mc-symbols N]
                         [--config FILE] [--<key> VALUE]...

Exit status: 0 on success, 2 on a configuration error, 3 when some rows
hit an accuracy error (those rows are still written, flagged infeasible).
"""
from __future__ import annotations

import argparse
import sys

from .experiments import (EXPERIMENTS, KEYS, ConfigError, normalize_key, read_config_file,
                          resolve_config, run_experiment)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ACCURACY = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relay-energy-opt", allow_abbrev=False,
        description="Energy-efficient decode-and-forward relaying experiments.",
        epilog="Experiment keys: " + ", ".join(sorted(KEYS)),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a named experiment", allow_abbrev=False,
                         epilog="Any configuration key may be given as --key VALUE; "
                                "list values are comma separated.")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--out", "--output-dir", dest="out", required=True, help="output directory")
    run.add_argument("--seed", type=int, help="Monte Carlo seed")
    run.add_argument("--mc-symbols", type=int, help="Monte Carlo symbols per point (0 disables)")
    run.add_argument("--config", help="flat key = value configuration file")
    sub.add_parser("list", help="list experiments")
    return parser


def parse_overrides(tokens: list[str]) -> dict:
    """Turn ``--key value`` / ``--key=value`` tokens into a dict."""
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        if "=" in tok:
            key, val = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for {tok}")
            key, val = tok[2:], tokens[i + 1]
            i += 2
        key = normalize_key(key)
        if key not in KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        out[key] = val
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "list":
        print("\n".join(EXPERIMENTS))
        return EXIT_OK
    try:
        overrides = parse_overrides(extra)
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.mc_symbols is not None:
            overrides["mc_symbols"] = args.mc_symbols
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(args.experiment, file_values, overrides)
    except (ConfigError, OSError) as exc:
        print(f"relay-energy-opt: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = run_experiment(args.experiment, cfg, args.out)
    print(f"wrote {len(out.rows)} rows to {args.out}")
    if out.accuracy_errors:
        print(f"relay-energy-opt: {out.accuracy_errors} rows hit accuracy errors", file=sys.stderr)
        return EXIT_ACCURACY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
