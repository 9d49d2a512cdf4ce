"""Render sum-spectral-efficiency curves from a simulator results CSV.

One errorbar line per method, x = sweep value, y = mean sum-SE. The input
is the delimited report written by the simulator CLI; rendering never
modifies it.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

REQUIRED_COLUMNS = ("sweep_var", "sweep_value", "method", "mean_sum_se", "stderr")

METHOD_STYLES = {
    "proposed": {"color": "tab:blue", "marker": "o", "linestyle": "-"},
    "perfect_limit": {"color": "tab:green", "marker": "^", "linestyle": "--"},
    "no_doppler": {"color": "tab:orange", "marker": "s", "linestyle": "-"},
    "ZF": {"color": "tab:red", "marker": "v", "linestyle": "-."},
    "MRT": {"color": "tab:purple", "marker": "d", "linestyle": ":"},
}
FALLBACK_STYLE = {"marker": "x", "linestyle": "-"}

X_LABELS = {
    "kappa": "Rician factor [dB]",
    "power": "slot power [dBm]",
    "speed": "user speed [m/s]",
    "q": "codebook size",
}
Y_LABEL = "sum spectral efficiency [bits/s/Hz]"


class SchemaError(ValueError):
    """The CSV does not match the simulator's report schema."""


@dataclass
class PlotSpec:
    """Input/output paths plus axis labels and per-method line styles."""

    csv_path: str
    out_path: str
    x_label: str | None = None
    y_label: str = Y_LABEL
    styles: dict = field(default_factory=lambda: dict(METHOD_STYLES))


def read_rows(csv_path: str) -> list[dict]:
    """Parse and validate the report CSV; raises SchemaError on violations."""
    try:
        with open(csv_path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            if header is None:
                raise SchemaError(f"{csv_path}: empty file, no header row")
            for column in REQUIRED_COLUMNS:
                if column not in header:
                    raise SchemaError(f"{csv_path}: missing required column '{column}'")
            rows = []
            for lineno, raw in enumerate(reader, start=2):
                row = {"method": raw["method"], "sweep_var": raw["sweep_var"]}
                for column in ("sweep_value", "mean_sum_se", "stderr"):
                    try:
                        row[column] = float(raw[column])
                    except (TypeError, ValueError):
                        raise SchemaError(
                            f"{csv_path}:{lineno}: column '{column}' is not numeric "
                            f"({raw[column]!r})"
                        )
                rows.append(row)
    except OSError as exc:
        raise SchemaError(f"cannot read '{csv_path}': {exc}") from exc
    if not rows:
        raise SchemaError(f"{csv_path}: no data rows")
    return rows


def render(csv_path: str, out_path: str, spec: PlotSpec | None = None) -> list[str]:
    """Draw one curve per method and save the figure (format by extension).

    Returns the list of plotted method names in legend order.
    """
    spec = spec or PlotSpec(csv_path=csv_path, out_path=out_path)
    rows = read_rows(csv_path)

    methods: list[str] = []
    for row in rows:
        if row["method"] not in methods:
            methods.append(row["method"])

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for method in methods:
        points = sorted(
            ((r["sweep_value"], r["mean_sum_se"], r["stderr"]) for r in rows
             if r["method"] == method),
            key=lambda p: p[0],
        )
        x, y, err = (list(c) for c in zip(*points))
        style = spec.styles.get(method, FALLBACK_STYLE)
        ax.errorbar(x, y, yerr=err, label=method, capsize=3, markersize=4,
                    linewidth=1.2, **style)
    sweep_var = rows[0]["sweep_var"]
    ax.set_xlabel(spec.x_label or X_LABELS.get(sweep_var, sweep_var))
    ax.set_ylabel(spec.y_label)
    ax.grid(True, alpha=0.3, linestyle=":")
    ax.legend()
    fig.tight_layout()
    try:
        fig.savefig(out_path)
    except OSError as exc:
        raise SchemaError(f"cannot write '{out_path}': {exc}") from exc
    finally:
        plt.close(fig)
    return methods


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_results",
        description="Plot sum-spectral-efficiency sweep curves from a "
        "simulator results CSV",
    )
    parser.add_argument("csv", help="input results CSV")
    parser.add_argument("out", help="output image (.png/.svg/.pdf by extension)")
    args = parser.parse_args(argv)
    try:
        methods = render(args.csv, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out} ({len(methods)} curves: {', '.join(methods)})")
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
