#!/usr/bin/env python3
"""Epidemic-curve panel from a curves.csv (columns run, count, time):
median line with the 25-75% band across runs, optional regression overlay
over a log10-count window."""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from vizcommon import (add_common_args, apply_style, read_csv_columns,
                       save_deterministic)


def load_runs(path):
    cols = read_csv_columns(path)
    runs = {}
    for r in np.unique(cols["run"].astype(int)):
        mask = cols["run"].astype(int) == r
        order = np.argsort(cols["count"][mask])
        runs[int(r)] = (cols["count"][mask][order],
                        cols["time"][mask][order])
    counts0 = next(iter(runs.values()))[0]
    for counts, _ in runs.values():
        if counts.shape != counts0.shape or np.any(counts != counts0):
            raise SystemExit("error: runs sampled on different count grids")
    times = np.vstack([t for _, t in runs.values()])
    return counts0, times


def fit_window(counts, med_times, lo_exp, hi_exp, scale):
    keep = ((counts >= 10.0 ** lo_exp) & (counts <= 10.0 ** hi_exp)
            & (med_times > 0))
    if keep.sum() < 2:
        return None
    y = np.log10(counts[keep])
    x = np.log10(med_times[keep]) if scale == "loglog" else med_times[keep]
    slope, intercept = np.polyfit(x, y, 1)
    return x, slope * x + intercept, slope


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("curves", help="curves.csv from `spreadlab simulate`")
    ap.add_argument("--scale", choices=["loglinear", "loglog"],
                    default="loglinear")
    ap.add_argument("--fit", default=None,
                    help="log10-count window lo:hi for a regression overlay")
    add_common_args(ap)
    args = ap.parse_args(argv)
    apply_style(args.style)

    import matplotlib.pyplot as plt

    counts, times = load_runs(args.curves)
    med = np.median(times, axis=0)
    q25 = np.quantile(times, 0.25, axis=0)
    q75 = np.quantile(times, 0.75, axis=0)

    fig, ax = plt.subplots()
    ax.fill_betweenx(counts, q25, q75, alpha=0.3, color="#4878cf",
                     linewidth=0, label="25-75%")
    ax.plot(med, counts, color="#2f4b7c", linewidth=1.4,
            label=f"median of {times.shape[0]} runs")
    ax.set_yscale("log")
    if args.scale == "loglog":
        ax.set_xscale("log")
    if args.fit:
        lo, hi = (float(v) for v in args.fit.split(":"))
        res = fit_window(counts, med, lo, hi, args.scale)
        if res is not None:
            x, yhat, slope = res
            tvals = 10.0 ** x if args.scale == "loglog" else x
            ax.plot(tvals, 10.0 ** yhat, color="#d62728", linewidth=1.2,
                    label=f"slope {slope:.2f}")
    ax.set_xlabel("time")
    ax.set_ylabel("infected count")
    ax.legend(loc="lower right", frameon=False)
    save_deterministic(fig, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
