import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir))

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


@pytest.fixture
def curves_csv(tmp_path):
    """Three synthetic runs on one count grid; exact decimal times."""
    counts = [1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 16, 20, 24, 32, 40, 48, 64,
              80, 96, 128]
    lines = ["run,count,time"]
    for run, scale in ((0, 1.0), (1, 1.25), (2, 0.8)):
        for c in counts:
            t = scale * (c ** 0.5)
            lines.append(f"{run},{c},{t:.17g}")
    path = tmp_path / "curves.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def grid_csv(tmp_path):
    """Radial infection-order pattern on a 12x12 grid with gaps."""
    lines = ["bx,by,rank"]
    pts = []
    for bx in range(12):
        for by in range(12):
            if (bx * 7 + by * 3) % 5 == 0:
                continue  # empty boxes
            pts.append((bx, by, np.hypot(bx - 6, by - 6)))
    top = max(p[2] for p in pts)
    for bx, by, r in pts:
        lines.append(f"{bx},{by},{r / top:.17g}")
    path = tmp_path / "grid.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def tail_csvs(tmp_path):
    ls = np.geomspace(10.0, 200.0, 25)
    f = ls ** -0.4 - 200.0 ** -0.4
    f = f / f[0]
    emp = tmp_path / "emp.csv"
    emp.write_text("L,fbar\n" + "\n".join(
        f"{l:.17g},{v:.17g}" for l, v in zip(ls, f)) + "\n")
    thy = tmp_path / "thy.csv"
    thy.write_text("L,fbar,count_per_node\n" + "\n".join(
        f"{l:.17g},{v:.17g},{10 * v:.17g}" for l, v in zip(ls, f)) + "\n")
    return emp, thy


@pytest.fixture
def pd_csv(tmp_path):
    lines = ["x,y,phase,region,exponent,boundary"]
    regions = ["A", "B", "D", "G"]
    for i, x in enumerate(np.linspace(0, 3, 8)):
        for j, y in enumerate(np.linspace(0, 0.5, 6)):
            r = regions[(i + j) % 4]
            lines.append(f"{x:.17g},{y:.17g},phase,{r},1.5,0")
    path = tmp_path / "pd.csv"
    path.write_text("\n".join(lines) + "\n")
    return path
