"""Command-line interface: every operation as a subcommand, each
artifact-producing run writing a manifest that can be replayed."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core_graph import (connected_components, degree_stats,
                         load_sgraph, save_sgraph)
from .errors import DataError, SpreadlabError, ValidationError
from .estimate import (empirical_truncated_tail, estimate_tau, fit_alpha,
                       fit_growth_exponent)
from .girg import GirgParams, sample_girg
from .gowalla import build_gowalla_graph, find_seed_node
from .rewire import mixing_diagnostic, switch_rewire
from .spread import (EpidemicCurve, PenaltyParams, assign_costs,
                     epidemic_curve, heatmap_grid, spread_from)
from .theory import ModelPoint, classify, edge_tail_theory, phase_diagram_grid

_FMT = "%.17g"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(args, argv, inputs, outputs, seed=None):
    outputs = [str(o) for o in outputs]
    manifest = {
        "version": __version__,
        "command": argv[0] if argv else "",
        "argv": list(argv),
        "seed": seed,
        "inputs": {str(p): _sha256(p) for p in inputs if os.path.exists(p)},
        "outputs": outputs,
    }
    path = getattr(args, "manifest", None)
    if path is None:
        base = Path(outputs[0]).parent if outputs else Path(".")
        path = base / "manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(path, header, columns):
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        if cols and cols[0].size:
            rows = len(cols[0])
            out = []
            for i in range(rows):
                cells = []
                for c in cols:
                    v = c[i]
                    if np.issubdtype(np.asarray(v).dtype, np.integer):
                        cells.append(str(int(v)))
                    elif isinstance(v, (str, np.str_)):
                        cells.append(str(v))
                    else:
                        cells.append(_FMT % float(v))
                out.append(",".join(cells))
            fh.write("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args, argv):
    params = GirgParams(n=args.n, d=args.d, tau=args.tau,
                        alpha=math.inf if args.alpha == "inf"
                        else float(args.alpha),
                        c=args.c, seed=args.seed)
    g = sample_girg(params)
    save_sgraph(g, args.out)
    stats = degree_stats(g)
    print(f"sampled GIRG: {g.n} nodes, {g.m} edges, "
          f"mean degree {stats.mean:.3f}")
    _write_manifest(args, argv, [], [args.out], seed=args.seed)
    return 0


def _resolve_source(g, spec):
    if "," in spec:
        coords = [float(x) for x in spec.split(",")]
        if len(coords) != g.dim:
            raise ValidationError("--source coordinates must match the "
                                  "graph dimension")
        if g.metric == "haversine":
            return find_seed_node(g, coords[0], coords[1])
        d = g.pair_distance(g.positions, np.asarray(coords))
        return int(np.argmin(d))
    return int(spec)


def _cmd_simulate(args, argv):
    g = load_sgraph(args.graph)
    params = PenaltyParams(mu=args.mu, zeta=args.zeta, nu=args.nu,
                           beta=args.beta, penalty_base=args.base)
    source = _resolve_source(g, args.source)
    threads = int(os.environ.get("SPREADLAB_THREADS", "1"))
    run_ids = list(range(args.runs))
    seeds = [int(np.random.SeedSequence(args.seed, spawn_key=(k,))
                 .generate_state(1)[0]) for k in run_ids]

    def one_run(k):
        costs = assign_costs(g, params, seeds[k])
        return spread_from(g, costs, source)

    if threads > 1 and args.runs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_run, run_ids))
    else:
        results = [one_run(k) for k in run_ids]

    outputs = []
    if args.curves_out:
        run_col, cnt_col, t_col = [], [], []
        for k, r in enumerate(results):
            c = epidemic_curve(r)
            run_col.append(np.full(c.counts.size, k))
            cnt_col.append(c.counts)
            t_col.append(c.times)
        _write_csv(args.curves_out, ["run", "count", "time"],
                   [np.concatenate(run_col), np.concatenate(cnt_col),
                    np.concatenate(t_col)])
        outputs.append(args.curves_out)
    if args.times_out:
        run_col, node_col, t_col, rank_col = [], [], [], []
        for k, r in enumerate(results):
            reached = r.reached
            run_col.append(np.full(reached.size, k))
            node_col.append(reached)
            t_col.append(r.times[reached])
            rank_col.append(r.order[reached])
        _write_csv(args.times_out, ["run", "node", "time", "rank"],
                   [np.concatenate(run_col), np.concatenate(node_col),
                    np.concatenate(t_col), np.concatenate(rank_col)])
        outputs.append(args.times_out)
    if args.heatmap_out:
        crop = None
        if args.crop:
            lon1, lat1, lon2, lat2 = [float(x) for x in args.crop.split(",")]
            if g.metric == "haversine":
                # positions are stored (lat, lon)
                crop = (min(lat1, lat2), min(lon1, lon2),
                        max(lat1, lat2), max(lon1, lon2))
            else:
                crop = (min(lon1, lon2), min(lat1, lat2),
                        max(lon1, lon2), max(lat1, lat2))
        grid = heatmap_grid(results[0], g, args.grid, crop)
        bx, by, rank = grid.nonempty()
        _write_csv(args.heatmap_out, ["bx", "by", "rank"], [bx, by, rank])
        outputs.append(args.heatmap_out)
    reached = sum(int(np.isfinite(r.times).sum()) for r in results)
    print(f"{args.runs} run(s) from source {source}; "
          f"mean reached {reached / args.runs:.1f}")
    if outputs:
        _write_manifest(args, argv, [args.graph], outputs, seed=args.seed)
    return 0


def _cmd_classify(args, argv):
    m = ModelPoint(d=args.d, tau=args.tau,
                   alpha=math.inf if args.alpha == "inf"
                   else float(args.alpha),
                   mu=args.mu, zeta=args.zeta, nu=args.nu)
    rep = classify(m)
    payload = {
        "phase": rep.phase, "region": rep.region, "phi": rep.phi,
        "psi": rep.psi, "eta_star": rep.eta_star,
        "s_star": (None if rep.s_star is None
                   else ("inf" if math.isinf(rep.s_star) else rep.s_star)),
        "boundary": rep.boundary, "flags": list(rep.flags),
    }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        extras = []
        if rep.phi is not None:
            extras.append(f"phi={rep.phi:.6g}")
        if rep.psi is not None:
            extras.append(f"psi={rep.psi:.6g}")
        if rep.boundary:
            extras.append("boundary")
        print(f"phase {rep.phase}, region {rep.region}"
              + (": " + ", ".join(extras) if extras else ""))
    return 0


def _cmd_phase_diagram(args, argv):
    fixed = {}
    for item in args.fix.split(","):
        key, val = item.split("=")
        fixed[key.strip()] = float(val)
    if "d" in fixed:
        fixed["d"] = int(fixed["d"])

    def parse_axis(spec):
        name, lo, hi, k = spec.split(":")
        return (name, float(lo), float(hi), int(k))

    rows = phase_diagram_grid(fixed, parse_axis(args.x), parse_axis(args.y))
    _write_csv(args.out, ["x", "y", "phase", "region", "exponent",
                          "boundary"],
               [[r["x"] for r in rows], [r["y"] for r in rows],
                [r["phase"] for r in rows], [r["region"] for r in rows],
                [r["exponent"] for r in rows],
                [int(r["boundary"]) for r in rows]])
    print(f"phase diagram: {len(rows)} grid cells -> {args.out}")
    _write_manifest(args, argv, [], [args.out])
    return 0


def _cmd_estimate_tau(args, argv):
    g = load_sgraph(args.graph)
    res = estimate_tau(g.degrees)
    print(f"kappa {res.kappa}, gamma_hat {res.gamma_hat:.6g}, "
          f"tau_hat {res.tau_hat:.6g}")
    return 0


def _cmd_estimate_alpha(args, argv):
    g = load_sgraph(args.graph)
    tail = empirical_truncated_tail(g, args.lmin, args.lmax)
    fit = fit_alpha(tail, args.lmax, g.dim)
    print(f"alpha_hat {fit.estimate:.6g} over window "
          f"[{args.lmin}, {args.lmax}] ({fit.points_used} points, "
          f"sse {fit.residual_sse:.3g})")
    if args.tail_out:
        _write_csv(args.tail_out, ["L", "fbar"], [tail[0], tail[1]])
        _write_manifest(args, argv, [args.graph], [args.tail_out])
    return 0


def _cmd_fit_curve(args, argv):
    data = np.genfromtxt(args.curves, delimiter=",", names=True)
    runs = np.unique(data["run"].astype(int))
    slopes = []
    for k in runs:
        rows = data[data["run"].astype(int) == k]
        curve = EpidemicCurve(rows["count"].astype(np.int64), rows["time"],
                              int(rows["count"].max()))
        fit = fit_growth_exponent(curve, 10.0 ** args.ilow,
                                  10.0 ** args.ihigh, args.mode)
        slopes.append(fit.estimate)
        print(f"run {k}: slope {fit.estimate:.4f} "
              f"(R^2 {fit.r_squared:.4f}, {fit.points_used} pts)")
    print(f"median slope {np.median(slopes):.4f} over {len(slopes)} run(s)")
    return 0


def _cmd_rewire(args, argv):
    g = load_sgraph(args.graph)
    rewired = switch_rewire(g, sweeps=args.sweeps, seed=args.seed)
    save_sgraph(rewired, args.out)
    diag = mixing_diagnostic(g, rewired)
    print(f"rewired {g.m} edges: jaccard {diag.edge_jaccard:.4f}, "
          f"mean length ratio {diag.mean_len_ratio:.3f}, "
          f"degrees equal {diag.degree_seq_equal}")
    _write_manifest(args, argv, [args.graph], [args.out], seed=args.seed)
    return 0


def _cmd_ingest_gowalla(args, argv):
    res = build_gowalla_graph(args.edges, args.checkins, args.tie_seed)
    g = res.graph
    save_sgraph(g, args.out)
    outputs = [args.out]
    if args.idmap:
        _write_csv(args.idmap.replace("\t", ""), ["dense_id", "external_id"],
                   [np.arange(g.n), res.external_ids])
        outputs.append(args.idmap)
    stats = degree_stats(g)
    comp = connected_components(g)
    lcc = int(comp.sizes[comp.largest_label]) if comp.sizes.size else 0
    print(f"located graph: n={g.n}, m={g.m}, mean degree {stats.mean:.2f}, "
          f"largest component {lcc}")
    _write_manifest(args, argv, [args.edges, args.checkins], outputs,
                    seed=args.tie_seed)
    return 0


def _cmd_edge_tail(args, argv):
    grid = np.geomspace(args.l1, args.l2, args.grid)
    per_node = np.array([
        edge_tail_theory(L, args.l2, args.d, args.tau, args.alpha,
                         args.c, M=args.m_cap).expected_per_node
        if L < args.l2 else 0.0
        for L in grid])
    total = edge_tail_theory(args.l1, args.l2, args.d, args.tau, args.alpha,
                             args.c, M=args.m_cap).expected_per_node
    fbar = per_node / total if total > 0 else per_node
    _write_csv(args.out, ["L", "fbar", "count_per_node"],
               [grid, fbar, per_node])
    print(f"theory tail over [{args.l1}, {args.l2}]: "
          f"{total:.6g} edges per node -> {args.out}")
    _write_manifest(args, argv, [], [args.out])
    return 0


def _cmd_replay(args, argv):
    with open(args.manifest_file, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    return run(manifest["argv"])


# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="spreadlab", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("sample", help="sample a GIRG to an .sgraph file")
    sp.add_argument("--n", type=float, required=True)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser("simulate", help="run SI spreading on a graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--nu", type=float, default=None)
    sp.add_argument("--zeta", type=float, required=True)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--base", choices=["weight", "degree"], required=True)
    sp.add_argument("--source", required=True,
                    help="node id or comma-separated coordinates")
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--curves-out", dest="curves_out")
    sp.add_argument("--times-out", dest="times_out")
    sp.add_argument("--heatmap-out", dest="heatmap_out")
    sp.add_argument("--grid", type=int, default=400)
    sp.add_argument("--crop", help="lon1,lat1,lon2,lat2")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("classify", help="phase classification")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--zeta", type=float, required=True)
    sp.add_argument("--nu", type=float, default=None)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("phase-diagram", help="classify over a grid")
    sp.add_argument("--fix", required=True, help="e.g. tau=2.78,alpha=1.2,d=2")
    sp.add_argument("--x", required=True, help="name:lo:hi:points")
    sp.add_argument("--y", required=True, help="name:lo:hi:points")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_phase_diagram)

    sp = sub.add_parser("estimate-tau", help="Hill tail estimate of tau")
    sp.add_argument("--graph", required=True)
    sp.set_defaults(func=_cmd_estimate_tau)

    sp = sub.add_parser("estimate-alpha", help="truncated-tail alpha fit")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--lmin", type=float, default=10.0)
    sp.add_argument("--lmax", type=float, default=175.0)
    sp.add_argument("--km", action="store_true",
                    help="window is in km (informational; lengths follow "
                         "the graph metric)")
    sp.add_argument("--tail-out", dest="tail_out")
    sp.set_defaults(func=_cmd_estimate_alpha)

    sp = sub.add_parser("fit-curve", help="growth-exponent regression")
    sp.add_argument("--curves", required=True)
    sp.add_argument("--ilow", type=float, default=2.17,
                    help="log10 of the lower count bound")
    sp.add_argument("--ihigh", type=float, default=3.70)
    sp.add_argument("--mode", choices=["loglog", "loglinear"],
                    default="loglog")
    sp.set_defaults(func=_cmd_fit_curve)

    sp = sub.add_parser("rewire", help="degree-preserving switch chain")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--sweeps", type=int, default=10)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_rewire)

    sp = sub.add_parser("ingest-gowalla", help="build the located graph")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--checkins", required=True)
    sp.add_argument("--tie-seed", dest="tie_seed", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--idmap")
    sp.set_defaults(func=_cmd_ingest_gowalla)

    sp = sub.add_parser("edge-tail", help="theoretical edge-length tail")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--l1", type=float, required=True)
    sp.add_argument("--l2", type=float, required=True)
    sp.add_argument("--m-cap", dest="m_cap", type=float, default=None)
    sp.add_argument("--grid", type=int, default=60)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_edge_tail)

    sp = sub.add_parser("replay", help="re-run a recorded manifest")
    sp.add_argument("manifest_file")
    sp.set_defaults(func=_cmd_replay)
    return p


def run(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, list(argv))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpreadlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
