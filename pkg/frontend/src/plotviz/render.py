"""CSV parsing and figure rendering."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

SCHEMAS = {
    "fig3": {
        "columns": ("n_observables", "series", "kappa_sq"),
        "xlabel": "number of observables",
        "ylabel": r"$\kappa^2$",
        "title": "optimal squared shadow norm vs family size",
        "logx": True,
    },
    "fig4": {
        "columns": ("n_qubits", "series", "log2_kappa_sq_per_n"),
        "xlabel": "number of qubits n",
        "ylabel": r"$\log_2(\kappa^2)/n$",
        "title": "per-qubit squared shadow norm scaling",
        "logx": True,
    },
}

REFERENCE_SERIES = "PUM"


class SchemaError(ValueError):
    """CSV does not match the expected experiment schema."""


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    csv_path: Path
    out_path: Path


def load_series(kind: str, csv_path: Path):
    """Parse a figure CSV into {series name: sorted [(x, y), ...]}.

    Comment lines ("# key=value") carry run metadata and are skipped.
    Raises SchemaError on a missing/unexpected header, an empty table, or
    unparseable records.
    """
    if kind not in SCHEMAS:
        raise SchemaError(f"unknown figure kind {kind!r}; expected {sorted(SCHEMAS)}")
    expected = SCHEMAS[kind]["columns"]
    lines = [
        line for line in Path(csv_path).read_text().splitlines()
        if line.strip() and not line.startswith("#")
    ]
    if not lines:
        raise SchemaError(f"{csv_path}: no header row found")
    reader = csv.reader(lines)
    header = tuple(next(reader))
    if header != expected:
        raise SchemaError(
            f"{csv_path}: header {header} does not match {expected}"
        )
    series: dict[str, list] = {}
    for row in reader:
        if len(row) != 3:
            raise SchemaError(f"{csv_path}: malformed record {row!r}")
        try:
            x = float(row[0])
            y = float(row[2])
        except ValueError as exc:
            raise SchemaError(f"{csv_path}: non-numeric record {row!r}") from exc
        series.setdefault(row[1], []).append((x, y))
    if not series:
        raise SchemaError(f"{csv_path}: no data records")
    return {name: sorted(points) for name, points in sorted(series.items())}


def render(spec: PlotSpec) -> dict:
    """Render the figure and return {series name: points} as drawn."""
    schema = SCHEMAS[spec.kind]
    series = load_series(spec.kind, spec.csv_path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, points in series.items():
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        if name == REFERENCE_SERIES and len(set(ys)) == 1:
            ax.axhline(ys[0], linestyle="--", color="gray",
                       label=f"{name} bound ({ys[0]:g})")
        else:
            ax.plot(xs, ys, marker="o", label=name)
    if schema["logx"]:
        ax.set_xscale("log", base=2)
    ax.set_xlabel(schema["xlabel"])
    ax.set_ylabel(schema["ylabel"])
    ax.set_title(schema["title"])
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=150, metadata={"Software": "plotviz"})
    plt.close(fig)
    return series
