"""Experiment command-line interface.

Usage: povm-shadows <table1|fig3|fig4|compare|norm|simulate|optimize>
       [--config path] [--seed N] [--out dir] [--format csv|json]

Exit codes: 0 success, 2 validation error, 3 IO error.  Thread count for
independent experiment points comes from POVM_SHADOWS_WORKERS.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import RUNNERS

EXIT_VALIDATION = 2
EXIT_IO = 3


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    text = p.read_bytes()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text.decode())
    return json.loads(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="povm-shadows",
        description="Shadow process tomography experiments",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="TOML or JSON parameter file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), dest="fmt",
                       help="output format (tabular experiments only)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    runner, default_fmt = RUNNERS[args.experiment]

    try:
        params = load_config(args.config)
        if not isinstance(params, dict):
            raise ValueError("config file must hold a table/object at top level")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    seed = args.seed if args.seed is not None else int(params.pop("seed", 0))
    fmt = args.fmt or default_fmt

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        path = runner(params, seed, out_dir, fmt)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
