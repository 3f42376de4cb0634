#!/usr/bin/env python3
"""Render sweep CSVs into per-method comparison charts.

Reads the experiment harness CSV (one row per method/grid-value/run, rows
with a nonempty ``error`` column are skipped), aggregates runs to mean with
optional error bars, and writes both PNG and SVG next to the requested
output stem.  A ``--dump`` mode prints the aggregated series instead, so
identical inputs can be byte-compared without an image diff.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "aauc-plot"

import matplotlib.pyplot as plt


@dataclass
class PlotSpec:
    csv_path: str
    x_column: str
    y_column: str
    group_column: str
    output_path: str
    y_error_column: str | None = None


class ColumnError(ValueError):
    pass


def read_rows(spec: PlotSpec) -> list[dict]:
    with open(spec.csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        needed = [spec.x_column, spec.y_column, spec.group_column]
        if spec.y_error_column:
            needed.append(spec.y_error_column)
        for col in needed:
            if col not in header:
                raise ColumnError(
                    f"column {col!r} not found in {spec.csv_path} "
                    f"(header: {', '.join(header)})")
        rows = [r for r in reader if not r.get("error")]
    return rows


def aggregate(spec: PlotSpec, rows: list[dict]) -> dict:
    """Per-group sorted series: x -> (mean y, error bar).

    Error bars are the standard error of the mean over runs; a lone run
    falls back to the row's own error column when one is named.
    """
    groups: dict[str, dict[float, list]] = {}
    for row in rows:
        g = row[spec.group_column]
        x = float(row[spec.x_column])
        y = float(row[spec.y_column])
        e = float(row[spec.y_error_column]) if spec.y_error_column else 0.0
        groups.setdefault(g, {}).setdefault(x, []).append((y, e))
    out = {}
    for g in sorted(groups):
        series = []
        for x in sorted(groups[g]):
            ys = [y for y, _ in groups[g][x]]
            mean = sum(ys) / len(ys)
            if len(ys) > 1:
                var = sum((y - mean) ** 2 for y in ys) / (len(ys) - 1)
                err = math.sqrt(var / len(ys))
            else:
                err = groups[g][x][0][1]
            series.append((x, mean, err))
        out[g] = series
    return out


def render_sweep(spec: PlotSpec) -> tuple[str, str]:
    """Write <stem>.png and <stem>.svg; returns the two paths."""
    rows = read_rows(spec)
    series = aggregate(spec, rows)
    if not series:
        raise ColumnError(f"no plottable rows in {spec.csv_path}")

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, pts in series.items():
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        es = [p[2] for p in pts]
        if spec.y_error_column:
            ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=name)
        else:
            ax.plot(xs, ys, marker="o", label=name)
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel(spec.y_column)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()

    stem = spec.output_path
    for suffix in (".png", ".svg"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
    png = stem + ".png"
    svg = stem + ".svg"
    fig.savefig(png, dpi=120, metadata={"Software": None})
    fig.savefig(svg, metadata={"Date": None})
    plt.close(fig)
    return png, svg


def dump_series(spec: PlotSpec) -> str:
    series = aggregate(spec, read_rows(spec))
    lines = []
    for name, pts in series.items():
        for x, y, e in pts:
            lines.append(f"{name},{x!r},{y!r},{e!r}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aauc-plot",
        description="Render a sweep CSV into a per-method line chart")
    parser.add_argument("--csv", required=True, dest="csv_path")
    parser.add_argument("--x", default="grid_value", dest="x_column")
    parser.add_argument("--y", default="secrecy_mc", dest="y_column")
    parser.add_argument("--group", default="method", dest="group_column")
    parser.add_argument("--out", default="sweep_plot", dest="output_path")
    parser.add_argument("--yerr", default=None, dest="y_error_column")
    parser.add_argument("--dump", action="store_true",
                        help="print aggregated series instead of plotting")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    spec = PlotSpec(csv_path=args.csv_path, x_column=args.x_column,
                    y_column=args.y_column, group_column=args.group_column,
                    output_path=args.output_path,
                    y_error_column=args.y_error_column)
    try:
        if args.dump:
            print(dump_series(spec))
        else:
            png, svg = render_sweep(spec)
            print(f"wrote {png} and {svg}")
    except ColumnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
