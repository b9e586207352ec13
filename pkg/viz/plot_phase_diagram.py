#!/usr/bin/env python3
"""Phase diagram from a pd.csv (columns x, y, phase, region, exponent,
boundary) produced by `spreadlab phase-diagram`."""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from vizcommon import (add_common_args, apply_style, read_csv_columns,
                       save_deterministic)

REGION_COLOURS = {
    "A": "#f5e663",  # explosive
    "B": "#7aa6f0",  # weak-tie quasi-exponential
    "C": "#7ce8e8",  # hub quasi-exponential
    "D": "#ef7ad0",  # weak-tie polynomial
    "E": "#b37af0",  # hybrid polynomial
    "F": "#f0807a",  # hub polynomial
    "G": "#9be87a",  # geometric
}
REGION_ORDER = "ABCDEFG"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("diagram", help="pd.csv from `spreadlab phase-diagram`")
    ap.add_argument("--xlabel", default="x")
    ap.add_argument("--ylabel", default="y")
    add_common_args(ap)
    args = ap.parse_args(argv)
    apply_style(args.style)

    import matplotlib.pyplot as plt
    from matplotlib.colors import ListedColormap
    from matplotlib.patches import Patch

    cols = read_csv_columns(args.diagram)
    xs = np.unique(cols["x"])
    ys = np.unique(cols["y"])
    idx = {r: i for i, r in enumerate(REGION_ORDER)}
    field = np.full((ys.size, xs.size), np.nan)
    xi = np.searchsorted(xs, cols["x"])
    yi = np.searchsorted(ys, cols["y"])
    field[yi, xi] = [idx[r] for r in cols["region"]]

    fig, ax = plt.subplots()
    cmap = ListedColormap([REGION_COLOURS[r] for r in REGION_ORDER])
    ax.pcolormesh(xs, ys, field, cmap=cmap, vmin=-0.5, vmax=6.5,
                  shading="nearest")
    present = sorted(set(cols["region"]), key=REGION_ORDER.index)
    ax.legend(handles=[Patch(color=REGION_COLOURS[r], label=r)
                       for r in present],
              loc="upper right", frameon=True, fontsize=8)
    ax.set_xlabel(args.xlabel)
    ax.set_ylabel(args.ylabel)
    save_deterministic(fig, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
