"""Shared plotting setup for the figure scripts.

Rendering is pinned so that identical CSV inputs and style files produce
bit-identical image files.
"""

import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

BASE_STYLE = {
    "figure.figsize": [5.0, 3.6],
    "figure.dpi": 130,
    "savefig.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "svg.hashsalt": "spreadlab-viz",
}


def apply_style(style_path=None):
    style = dict(BASE_STYLE)
    if style_path:
        with open(style_path) as fh:
            style.update(json.load(fh))
    plt.rcParams.update(style)


def save_deterministic(fig, out_path):
    """Write the figure without environment-dependent metadata."""
    ext = os.path.splitext(out_path)[1].lower()
    meta = {"Software": "spreadlab-viz"}
    if ext == ".svg":
        meta = {"Date": None}
    fig.savefig(out_path, metadata=meta)
    plt.close(fig)


def read_csv_columns(path):
    """Header-led CSV -> dict of numpy arrays (floats where possible)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if not header or header == [""]:
        raise SystemExit(f"error: {path} is empty")
    raw = np.genfromtxt(path, delimiter=",", skip_header=1, dtype=str,
                        ndmin=2)
    if raw.size == 0:
        raise SystemExit(f"error: {path} has no data rows")
    cols = {}
    for k, name in enumerate(header):
        col = raw[:, k]
        try:
            cols[name] = col.astype(float)
        except ValueError:
            cols[name] = col
    return cols


def add_common_args(parser):
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--style", default=None,
                        help="JSON file of matplotlib rcParams overrides")
