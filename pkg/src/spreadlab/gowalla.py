"""Ingestion of the SNAP Gowalla dataset into a located friendship graph.

Each user with at least one check-in gets a single home location: the most
frequent exact login coordinate inside their most frequent quarter-degree
box, ties broken uniformly at random under a caller-provided seed.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .core_graph import EARTH_RADIUS_KM, METRIC_HAVERSINE, SpatialGraph, haversine_km
from .errors import DataError, ValidationError

SNAP_EDGES_URL = "https://snap.stanford.edu/data/loc-gowalla_edges.txt.gz"
SNAP_CHECKINS_URL = ("https://snap.stanford.edu/data/"
                     "loc-gowalla_totalCheckins.txt.gz")


def parse_checkins(path):
    """Group check-in rows (user, timestamp, lat, lon, location-id) by user.

    Malformed rows are counted and skipped; more than 1% malformed is a
    hard error.
    """
    logins = defaultdict(list)
    bad = 0
    total = 0
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        for line in fh:
            if not line.strip():
                continue
            total += 1
            parts = line.split()
            try:
                user = int(parts[0])
                lat = float(parts[2])
                lon = float(parts[3])
                if abs(lat) > 90 or abs(lon) > 180:
                    raise ValueError
            except (IndexError, ValueError):
                bad += 1
                continue
            logins[user].append((lat, lon))
    if total and bad / total > 0.01:
        raise DataError(f"{bad}/{total} malformed check-in rows (> 1%)")
    return dict(logins)


def _quarter_box(coord):
    # nearest multiple of 0.25, half-up for determinism
    return (int(np.floor(coord[0] / 0.25 + 0.5)),
            int(np.floor(coord[1] / 0.25 + 0.5)))


def modal_home_location(logins, tie_rng):
    """Most frequent exact coordinate within the most frequent 0.25-degree
    box; all ties broken uniformly at random with the supplied Generator."""
    if not logins:
        raise ValidationError("user has no logins")
    boxes = Counter(_quarter_box(c) for c in logins)
    top = max(boxes.values())
    best_boxes = sorted(b for b, k in boxes.items() if k == top)
    box = best_boxes[int(tie_rng.integers(len(best_boxes)))] \
        if len(best_boxes) > 1 else best_boxes[0]
    inside = Counter(c for c in logins if _quarter_box(c) == box)
    top = max(inside.values())
    best = sorted(c for c, k in inside.items() if k == top)
    if len(best) > 1:
        return best[int(tie_rng.integers(len(best)))]
    return best[0]


def parse_edges(path):
    """Read a SNAP edge list (tab-separated pairs, either orientation)."""
    try:
        raw = np.loadtxt(path, dtype=np.int64, ndmin=2)
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"{path}: malformed edge list: {exc}") from exc
    if raw.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if raw.shape[1] != 2:
        raise DataError(f"{path}: expected two columns")
    return raw


@dataclass(frozen=True)
class GowallaGraph:
    graph: SpatialGraph
    external_ids: np.ndarray  # external_ids[dense id] = SNAP user id
    tie_seed: int


def build_gowalla_graph(edges_path, checkins_path, tie_seed=1) -> GowallaGraph:
    """Located friendship graph: users with check-ins only, deduplicated
    undirected edges, Haversine metric."""
    logins = parse_checkins(checkins_path)
    users = np.array(sorted(logins), dtype=np.int64)
    index = {int(u): i for i, u in enumerate(users)}
    rng = np.random.default_rng(tie_seed)
    positions = np.empty((users.size, 2), dtype=float)
    for i, u in enumerate(users):
        positions[i] = modal_home_location(logins[int(u)], rng)

    raw = parse_edges(edges_path)
    keep = np.array([(int(a) in index and int(b) in index and a != b)
                     for a, b in raw], dtype=bool)
    mapped = np.array([(index[int(a)], index[int(b)])
                       for a, b in raw[keep]], dtype=np.int64) \
        if keep.any() else np.zeros((0, 2), dtype=np.int64)
    if mapped.size:
        u = np.minimum(mapped[:, 0], mapped[:, 1])
        v = np.maximum(mapped[:, 0], mapped[:, 1])
        mapped = np.unique(np.column_stack((u, v)), axis=0)
    g = SpatialGraph(positions, mapped, None, METRIC_HAVERSINE,
                     EARTH_RADIUS_KM, check=False)
    return GowallaGraph(g, users, tie_seed)


def find_seed_node(g: SpatialGraph, lat, lon):
    """Node nearest to the query in Haversine distance, ties by id."""
    if g.n == 0:
        raise ValidationError("graph is empty")
    dists = haversine_km(g.positions, np.array([lat, lon]))
    return int(np.argmin(dists))  # argmin takes the first = smallest id


def download_dataset(dest_dir, urls=(SNAP_EDGES_URL, SNAP_CHECKINS_URL),
                     timeout=120):
    """Fetch and decompress the SNAP files, recording checksums in a
    lockfile next to them."""
    import gzip
    from pathlib import Path

    import requests

    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    lock = {}
    paths = []
    for url in urls:
        name = url.rsplit("/", 1)[-1]
        out = dest / name.removesuffix(".gz")
        resp = requests.get(url, timeout=timeout)
        resp.raise_for_status()
        data = resp.content
        if name.endswith(".gz"):
            data = gzip.decompress(data)
        out.write_bytes(data)
        lock[out.name] = {"url": url,
                          "sha256": hashlib.sha256(data).hexdigest()}
        paths.append(out)
    (dest / "gowalla.lock.json").write_text(json.dumps(lock, indent=2))
    return paths
