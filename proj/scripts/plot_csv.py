"""Plot an nvzeno CSV file: a line plot for one axis, a heat map for two.

    nvzeno run --config ratio.json --out ratio.csv
    python scripts/plot_csv.py ratio.csv --out ratio.png
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def read(path):
    meta = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
    return meta, pd.read_csv(path, comment="#")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--out", default="plot.png")
    ap.add_argument("--value", help="column to plot (default: last column)")
    args = ap.parse_args()

    meta, df = read(args.csv)
    value = args.value or df.columns[-1]
    axes = [c for c in df.columns if df[c].nunique() > 1 and c != value]
    fig, ax = plt.subplots(figsize=(6, 4))
    if len(axes) >= 2:
        grid = df.pivot_table(index=axes[0], columns=axes[1], values=value)
        mesh = ax.pcolormesh(grid.columns, grid.index, grid.values, shading="auto")
        fig.colorbar(mesh, ax=ax, label=value)
        ax.set_xlabel(axes[1])
        ax.set_ylabel(axes[0])
    else:
        x = axes[0] if axes else df.columns[0]
        for col in df.columns:
            if col != x and col not in axes:
                ax.plot(df[x], df[col], label=col)
        ax.set_xlabel(x)
        ax.legend()
    ax.set_title(f"{meta.get('experiment', '')} ({meta.get('figure', '')})")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
