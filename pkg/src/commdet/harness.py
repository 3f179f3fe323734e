"""Experiment driver: iterated runs, reports, and the bad-connectivity study."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import Graph, connected_components, induced_subgraph
from .leiden import LeidenConfig, leiden_iteration
from .louvain import LouvainConfig, louvain_iteration
from .partition import Partition
from .quality import QualityConfig, quality, quality_per_2m
from .runinfo import RunResult
from .verify import detect_badly_connected

REPORT_FORMAT = "commdet-report"
REPORT_VERSION = 1

THREADS_ENV = "COMMUNITY_DETECT_THREADS"


@dataclass
class IterationRecord:
    iteration: int
    quality: float
    quality_per_2m: float
    communities: int
    node_visits: int
    refine_visits: int
    moves: int
    stable: bool
    elapsed_s: float
    pct_disconnected: float | None = None
    pct_badly_connected: float | None = None
    recovered_planted: bool | None = None


@dataclass
class ExperimentReport:
    meta: dict
    records: list[IterationRecord] = field(default_factory=list)
    converged: bool = False
    audit: dict | None = None

    def summary(self) -> dict:
        last = self.records[-1] if self.records else None
        return {
            "iterations": len(self.records),
            "converged": self.converged,
            "final_quality": None if last is None else last.quality,
            "final_quality_per_2m": None if last is None else last.quality_per_2m,
            "final_communities": None if last is None else last.communities,
            "total_node_visits": sum(r.node_visits for r in self.records),
            "total_moves": sum(r.moves for r in self.records),
        }

    def to_lines(self) -> list[str]:
        header = {"format": REPORT_FORMAT, "version": REPORT_VERSION, "meta": self.meta}
        lines = [json.dumps(header, sort_keys=True)]
        for rec in self.records:
            lines.append(json.dumps({"record": asdict(rec)}, sort_keys=True))
        if self.audit is not None:
            lines.append(json.dumps({"audit": self.audit}, sort_keys=True))
        lines.append(json.dumps({"summary": self.summary()}, sort_keys=True))
        return lines

    def write(self, path: str) -> None:
        """Write the line-delimited report plus a plot-ready CSV alongside."""
        with open(path, "w") as fh:
            fh.write("\n".join(self.to_lines()) + "\n")
        csv_path = path + ".csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([
                "iteration", "quality", "quality_per_2m", "communities",
                "node_visits", "refine_visits", "moves", "stable", "pct_disconnected",
                "pct_badly_connected", "recovered_planted", "elapsed_s"])
            for r in self.records:
                writer.writerow([
                    r.iteration, repr(r.quality), repr(r.quality_per_2m),
                    r.communities, r.node_visits, r.refine_visits, r.moves, int(r.stable),
                    "" if r.pct_disconnected is None else repr(r.pct_disconnected),
                    "" if r.pct_badly_connected is None else repr(r.pct_badly_connected),
                    "" if r.recovered_planted is None else int(r.recovered_planted),
                    repr(r.elapsed_s)])


def determinism_digest(report: ExperimentReport) -> str:
    """Digest of the report with timing stripped; equal runs hash equally."""

    def strip(obj):
        if isinstance(obj, dict):
            return {k: strip(v) for k, v in sorted(obj.items()) if k != "elapsed_s"}
        if isinstance(obj, list):
            return [strip(x) for x in obj]
        return obj

    payload = json.dumps(
        [strip(json.loads(line)) for line in report.to_lines()],
        sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _run_once(g: Graph, p: Partition | None, algorithm: str, cfg,
              rng: np.random.Generator) -> RunResult:
    if algorithm == "louvain":
        return louvain_iteration(g, p, cfg, rng=rng)
    if algorithm == "leiden":
        return leiden_iteration(g, p, cfg, rng=rng)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def pct_disconnected(g: Graph, p: Partition) -> float:
    bad = 0
    comms = p.communities().tolist()
    for c in comms:
        members = p.members(c)
        if len(members) == 1:
            continue
        sub, _ = induced_subgraph(g, members)
        if len(connected_components(sub)) > 1:
            bad += 1
    return 100.0 * bad / max(len(comms), 1)


def iterate_until_asymptotic(g: Graph, algorithm: str, cfg, q: QualityConfig,
                             max_iters: int = 100, patience: int = 3,
                             mode: str = "until-asymptotic",
                             rng: np.random.Generator | None = None,
                             truth: Partition | None = None,
                             measure_disconnected: bool = True,
                             measure_badly_connected: bool = False,
                             meta: dict | None = None
                             ) -> tuple[ExperimentReport, Partition]:
    """Feed each iteration's partition into the next until a stopping rule.

    ``mode="fixed"`` runs exactly ``max_iters`` iterations.  ``until-stable``
    stops at the first unchanged iteration.  ``until-asymptotic`` requires
    ``patience`` consecutive unchanged iterations, since one stable
    iteration of the randomized algorithm does not imply the next one will
    be stable too; a stable deterministic (louvain) iteration always will
    be, so one suffices there.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    report = ExperimentReport(meta or {})
    p: Partition | None = None
    streak = 0
    for it in range(1, max_iters + 1):
        t0 = time.perf_counter()
        res = _run_once(g, p, algorithm, cfg, rng)
        elapsed = time.perf_counter() - t0
        stable = p is not None and res.partition == p
        p = res.partition
        rec = IterationRecord(
            iteration=it,
            quality=quality(g, p, q),
            quality_per_2m=quality_per_2m(g, p, q),
            communities=p.n_communities,
            node_visits=res.counters.local_visits,
            refine_visits=res.counters.refine_visits,
            moves=res.counters.local_moves + res.counters.refine_merges,
            stable=stable,
            elapsed_s=elapsed)
        if measure_disconnected:
            rec.pct_disconnected = pct_disconnected(g, p)
        if measure_badly_connected:
            bc = detect_badly_connected(g, p, q, rng=np.random.default_rng(cfg.seed + it))
            rec.pct_badly_connected = bc.pct_badly_connected
            rec.pct_disconnected = bc.pct_disconnected
        if truth is not None:
            rec.recovered_planted = bool(p == truth)
        report.records.append(rec)
        if mode == "fixed":
            continue
        if stable:
            streak += 1
            if algorithm == "louvain" or mode == "until-stable" or streak >= patience:
                report.converged = True
                break
        else:
            streak = 0
    if mode == "fixed":
        report.converged = True
    return report, p


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


@dataclass
class BadlyConnectedRow:
    algorithm: str
    replication: int
    iteration: int
    pct_disconnected: float
    pct_badly_connected: float
    quality: float


def badly_connected_experiment(g: Graph, q: QualityConfig, replications: int = 10,
                               iterations: int = 10, seed: int = 0,
                               theta: float = 0.01,
                               algorithms: tuple[str, ...] = ("louvain", "leiden"),
                               ) -> list[BadlyConnectedRow]:
    """Per-iteration connectivity health of both algorithms, replicated.

    After every iteration of every replication the partition is re-examined
    with the subnetwork splitting test.  Replications run concurrently
    (bounded by the COMMUNITY_DETECT_THREADS environment variable) with
    independent seeds; row order is deterministic.
    """

    def one(algorithm: str, rep: int) -> list[BadlyConnectedRow]:
        if algorithm == "louvain":
            cfg = LouvainConfig(quality=q, seed=seed + rep)
        else:
            cfg = LeidenConfig(quality=q, theta=theta, seed=seed + rep)
        rng = np.random.default_rng(cfg.seed)
        rows = []
        p = None
        for it in range(1, iterations + 1):
            res = _run_once(g, p, algorithm, cfg, rng)
            p = res.partition
            bc = detect_badly_connected(
                g, p, q, rng=np.random.default_rng(10_000 * rep + it))
            rows.append(BadlyConnectedRow(
                algorithm, rep, it, bc.pct_disconnected, bc.pct_badly_connected,
                quality(g, p, q)))
        return rows

    jobs = [(a, r) for a in algorithms for r in range(replications)]
    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda ar: one(*ar), jobs))
    else:
        results = [one(*ar) for ar in jobs]
    out: list[BadlyConnectedRow] = []
    for rows in results:
        out.extend(rows)
    return out


def write_badly_connected_csv(rows: list[BadlyConnectedRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "replication", "iteration",
                         "pct_disconnected", "pct_badly_connected", "quality"])
        for r in rows:
            writer.writerow([r.algorithm, r.replication, r.iteration,
                             repr(r.pct_disconnected), repr(r.pct_badly_connected),
                             repr(r.quality)])
