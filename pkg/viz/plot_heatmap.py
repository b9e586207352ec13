#!/usr/bin/env python3
"""Infection-order heatmap from a grid.csv (columns bx, by, rank).

Boxes absent from the CSV render white; the footer reports the Spearman
correlation between box rank and distance from the earliest box."""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from vizcommon import (add_common_args, apply_style, read_csv_columns,
                       save_deterministic)


def grid_from_csv(path, boxes=None):
    cols = read_csv_columns(path)
    bx = cols["bx"].astype(int)
    by = cols["by"].astype(int)
    rank = cols["rank"]
    if boxes is None:
        boxes = int(max(bx.max(), by.max())) + 1
    grid = np.full((boxes, boxes), np.nan)
    grid[bx, by] = rank
    return grid, bx, by, rank


def rank_distance_spearman(bx, by, rank):
    from scipy.stats import spearmanr

    origin = np.argmin(rank)
    dist = np.hypot(bx - bx[origin], by - by[origin])
    if dist.size < 3:
        return float("nan")
    return float(spearmanr(dist, rank).statistic)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("grid", help="grid.csv from `spreadlab simulate`")
    ap.add_argument("--boxes", type=int, default=None,
                    help="boxes per side (default: inferred)")
    add_common_args(ap)
    args = ap.parse_args(argv)
    apply_style(args.style)

    import matplotlib.pyplot as plt
    from matplotlib import colormaps

    grid, bx, by, rank = grid_from_csv(args.grid, args.boxes)
    cmap = colormaps["plasma_r"].copy()
    cmap.set_bad("white")

    fig, ax = plt.subplots(figsize=(4.6, 4.6))
    im = ax.imshow(grid.T, origin="lower", cmap=cmap, vmin=0.0, vmax=1.0,
                   interpolation="nearest")
    fig.colorbar(im, ax=ax, label="infection order (normalized)")
    rho = rank_distance_spearman(bx, by, rank)
    ax.set_title(f"rank-distance Spearman rho = {rho:.3f}", fontsize=9)
    ax.set_xlabel("box x")
    ax.set_ylabel("box y")
    save_deterministic(fig, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
