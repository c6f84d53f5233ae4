"""plot <fig3|fig4> --in <csv> --out <png>"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import SCHEMAS, PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plot",
                                     description="render experiment CSVs")
    parser.add_argument("kind", choices=sorted(SCHEMAS))
    parser.add_argument("--in", dest="csv_path", required=True,
                        help="input CSV emitted by the experiments CLI")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(kind=args.kind, csv_path=Path(args.csv_path),
                    out_path=Path(args.out_path))
    try:
        series = render(spec)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{spec.out_path} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
