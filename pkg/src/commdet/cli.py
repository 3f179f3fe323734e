"""Command-line driver for single runs, iterated runs, and guarantee audits."""

from __future__ import annotations

import argparse
import sys

from .benchgen import BenchmarkSpec, generate_planted, resolution_for_mu
from .graph import load_edge_list, write_edge_list
from .harness import iterate_until_asymptotic
from .leiden import LeidenConfig
from .louvain import LouvainConfig
from .partition import write_partition
from .quality import QualityConfig, prepare_graph
from .verify import audit as run_audit


def _parse_bench(spec: str, default_seed: int) -> BenchmarkSpec:
    fields = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"bad benchmark field {part!r} (expected key=value)")
        key, val = part.split("=", 1)
        fields[key.strip()] = val.strip()
    known = {"n": int, "size": int, "k": float, "mu": float, "seed": int}
    unknown = set(fields) - set(known)
    if unknown:
        raise ValueError(f"unknown benchmark fields: {sorted(unknown)}")
    if "n" not in fields:
        raise ValueError("benchmark spec needs n=<nodes>")
    return BenchmarkSpec(
        n=int(fields["n"]),
        community_size=int(fields.get("size", 50)),
        mean_degree=float(fields.get("k", 10)),
        mu=float(fields.get("mu", 0.3)),
        seed=int(fields.get("seed", default_seed)))


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="commdet",
        description="Community detection with verifiable guarantees")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="edge-list file ('u v' or 'u v w', '#' comments)")
    src.add_argument("--bench", metavar="SPEC",
                     help="planted benchmark, e.g. 'n=1000,size=50,k=10,mu=0.3'")
    p.add_argument("--algorithm", choices=["louvain", "leiden"], default="leiden")
    p.add_argument("--quality", choices=["cpm", "modularity"], default="cpm")
    p.add_argument("--resolution", type=float, default=None,
                   help="resolution; defaults to 1.0, or to the planted-density "
                        "midpoint for CPM benchmark runs")
    p.add_argument("--theta", type=float, default=0.01,
                   help="refinement randomness (leiden)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", default="1",
                   help="positive integer, 'until-stable' or 'until-asymptotic'")
    p.add_argument("--max-iterations", type=int, default=100,
                   help="iteration cap for the until-* modes")
    p.add_argument("--patience", type=int, default=3,
                   help="consecutive stable iterations required by until-asymptotic")
    p.add_argument("--audit", choices=["none", "fast", "full"], default="none",
                   help="verify guarantees of the final partition")
    p.add_argument("--output", help="report path (JSON lines; CSV written alongside)")
    p.add_argument("--partition-out", help="final partition file (node TAB community)")
    p.add_argument("--graph-out", help="write the benchmark edge list here")
    p.add_argument("--truth-out", help="write the planted ground truth here")
    return p


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _run(args) -> int:
    truth = None
    if args.bench is not None:
        spec = _parse_bench(args.bench, args.seed)
        g, truth = generate_planted(spec)
        if args.graph_out:
            write_edge_list(g, args.graph_out)
        if args.truth_out:
            write_partition(truth, args.truth_out)
    else:
        with open(args.input) as fh:
            g = load_edge_list(fh)
        spec = None

    resolution = args.resolution
    if resolution is None:
        if args.quality == "cpm" and spec is not None:
            resolution = resolution_for_mu(spec)
        else:
            resolution = 1.0
    if args.quality == "modularity":
        q = QualityConfig.modularity(resolution, g)
    else:
        q = QualityConfig.cpm(resolution)
    g_run = prepare_graph(g, q)

    if args.algorithm == "louvain":
        cfg = LouvainConfig(quality=q, seed=args.seed)
    else:
        cfg = LeidenConfig(quality=q, theta=args.theta, seed=args.seed)

    raw_iters = args.iterations.strip()
    if raw_iters in ("until-stable", "until-asymptotic"):
        mode = raw_iters
        max_iters = args.max_iterations
    else:
        try:
            max_iters = int(raw_iters)
        except ValueError:
            raise ValueError(
                f"--iterations must be an integer, 'until-stable' or "
                f"'until-asymptotic', got {raw_iters!r}") from None
        if max_iters < 1:
            raise ValueError("--iterations must be positive")
        mode = "fixed"

    meta = {
        "algorithm": args.algorithm,
        "quality": args.quality,
        "resolution": resolution,
        "theta": args.theta if args.algorithm == "leiden" else None,
        "seed": args.seed,
        "iterations_mode": mode,
        "graph": {"nodes": g.n, "total_edge_weight": g.edge_weight_total},
        "benchmark": None if spec is None else {
            "n": spec.n, "community_size": spec.community_size,
            "mean_degree": spec.mean_degree, "mu": spec.mu, "seed": spec.seed},
        "input": args.input,
    }
    report, final = iterate_until_asymptotic(
        g_run, args.algorithm, cfg, q, max_iters=max_iters,
        patience=args.patience, mode=mode, truth=truth, meta=meta)

    if args.audit != "none":
        ga = run_audit(g_run, final, q, level=args.audit)
        report.audit = ga.to_dict()

    if args.output:
        report.write(args.output)
    if args.partition_out:
        write_partition(final, args.partition_out)

    s = report.summary()
    print(f"{args.algorithm} finished: {s['iterations']} iteration(s), "
          f"quality={s['final_quality']:.6f}, "
          f"communities={s['final_communities']}")
    if report.audit is not None:
        print(f"audit: gamma_separated={report.audit['gamma_separated']} "
              f"all_connected={report.audit['all_connected']} "
              f"all_gamma_connected={report.audit['all_gamma_connected']}")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
