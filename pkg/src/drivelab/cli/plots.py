"""Plot emission: simple line/bar charts from experiment CSV tables."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def plot_curve(
    xs,
    ys,
    xlabel: str,
    ylabel: str,
    out_path: str | Path,
    yerr=None,
    title: str | None = None,
) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if yerr is not None:
        ax.errorbar(xs, ys, yerr=yerr, marker="o", capsize=3)
    else:
        ax.plot(xs, ys, marker="o")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def plot_bars(labels, values, ylabel: str, out_path: str | Path, title: str | None = None) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.bar(range(len(labels)), values)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.4)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def plot_table_column(
    table_csv: str | Path,
    x_col: str,
    y_col: str,
    out_path: str | Path,
) -> Path:
    """Plot one metric column of a matrix/baselines CSV against an axis column."""
    lines = Path(table_csv).read_text().splitlines()
    cols = lines[0].split(",")
    xi, yi = cols.index(x_col), cols.index(y_col)
    xs, ys = [], []
    for ln in lines[1:]:
        vals = ln.split(",")
        xs.append(vals[xi])
        ys.append(float(vals[yi]))
    try:
        xs_num = [float(x) for x in xs]
        return plot_curve(xs_num, ys, x_col, y_col, out_path)
    except ValueError:
        return plot_bars(xs, ys, y_col, out_path)
