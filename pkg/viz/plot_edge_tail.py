#!/usr/bin/env python3
"""Edge-length tail overlay: empirical CSV vs theory CSV (columns L plus a
tail column), log-log axes.  Mismatched L grids are resampled in log space
with a warning."""

import argparse
import os
import sys
import warnings

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from vizcommon import (add_common_args, apply_style, read_csv_columns,
                       save_deterministic)


def _tail_column(cols):
    for name in ("fbar", "count_per_node", "value"):
        if name in cols:
            return cols[name]
    raise SystemExit("error: no tail column (fbar/count_per_node/value)")


def load_tail(path):
    cols = read_csv_columns(path)
    if "L" not in cols:
        raise SystemExit(f"error: {path} lacks an L column")
    return cols["L"], _tail_column(cols)


def align(l_emp, f_emp, l_thy, f_thy):
    if l_emp.shape == l_thy.shape and np.allclose(l_emp, l_thy):
        return l_thy, f_thy
    warnings.warn("L grids differ; resampling theory onto the empirical "
                  "grid in log space")
    keep = f_thy > 0
    logf = np.interp(np.log(l_emp), np.log(l_thy[keep]),
                     np.log(f_thy[keep]))
    return l_emp, np.exp(logf)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("empirical", help="CSV with columns L, fbar")
    ap.add_argument("theory", help="CSV from `spreadlab edge-tail`")
    add_common_args(ap)
    args = ap.parse_args(argv)
    apply_style(args.style)

    import matplotlib.pyplot as plt

    l_emp, f_emp = load_tail(args.empirical)
    l_thy, f_thy = load_tail(args.theory)
    l_thy, f_thy = align(l_emp, f_emp, l_thy, f_thy)

    fig, ax = plt.subplots()
    ax.loglog(l_emp, np.maximum(f_emp, 1e-300), "o", markersize=3,
              color="#2f4b7c", label="empirical")
    ax.loglog(l_thy, np.maximum(f_thy, 1e-300), "--", color="#d62728",
              label="theory")
    ax.set_xlabel("edge length L")
    ax.set_ylabel("tail")
    ax.legend(frameon=False)
    save_deterministic(fig, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
