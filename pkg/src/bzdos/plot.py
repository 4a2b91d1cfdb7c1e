"""Static log-log SVG plots of convergence CSV files."""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .wannier import ParseError  # noqa: E402

SVG_RC = {"svg.fonttype": "none", "svg.hashsalt": "bzdos", "path.simplify": False}


def read_series(path, x="nevals", y="rel_error"):
    """Columns ``x`` and ``y`` of a CSV file as float lists (blank cells skipped)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ParseError(f"{path}: empty file", 1)
        header = [h.strip() for h in header]
        for col in (x, y):
            if col not in header:
                raise ParseError(f"{path}: missing column {col!r}", 1)
        ix, iy = header.index(x), header.index(y)
        xs, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: expected {len(header)} fields", lineno)
            if not row[ix].strip() or not row[iy].strip():
                continue
            try:
                xs.append(float(row[ix]))
                ys.append(float(row[iy]))
            except ValueError:
                raise ParseError(f"{path}: non-numeric value", lineno) from None
    return xs, ys


def emit_plot(csv_paths, out, x="nevals", y="rel_error", labels=None, title=None):
    """Write a log-log plot of ``y`` against ``x`` for each CSV to ``out`` (SVG).

    Non-positive points are dropped since they have no place on log axes.
    Output is byte-identical for identical inputs.
    """
    labels = labels or [Path(p).stem for p in csv_paths]
    if len(labels) != len(csv_paths):
        raise ValueError("one label per CSV file")
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        n_points = 0
        for path, label in zip(csv_paths, labels):
            xs, ys = read_series(path, x, y)
            pts = [(a, b) for a, b in zip(xs, ys) if a > 0 and b > 0]
            ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=label)
            n_points += len(pts)
        if n_points == 0:  # log axes need some positive range
            ax.set_xlim(1, 10)
            ax.set_ylim(1e-16, 1)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        if title:
            ax.set_title(title)
        if csv_paths:
            ax.legend()
        fig.tight_layout()
        fig.savefig(out, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    return Path(out)
