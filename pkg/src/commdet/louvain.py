"""Two-phase local moving plus aggregation, with injectable visit order.

Each iteration repeats full randomized sweeps until a sweep moves nothing,
aggregates the graph by the resulting partition, and continues on the
aggregate until every community is a single node.  Only strictly positive
moves are performed, so quality increases monotonically.  Output communities
may be internally disconnected; that failure mode is intentional here and
is what the refinement-based algorithm in :mod:`commdet.leiden` removes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import Graph, aggregate
from .partition import Hierarchy, Level, Partition
from .quality import QualityConfig
from .runinfo import RunCounters, RunResult


@dataclass
class LouvainConfig:
    """Run configuration; a fixed seed makes the run fully deterministic.

    ``visit_order_override`` supplies explicit per-sweep node orders for the
    base level (testing hook); missing sweeps fall back to the run RNG.
    """

    quality: QualityConfig
    seed: int = 0
    max_levels: int | None = None
    visit_order_override: Sequence[Sequence[int]] | None = None


def move_nodes(g: Graph, p: Partition, cfg: LouvainConfig,
               rng: np.random.Generator | None = None,
               orders: Sequence[Sequence[int]] | None = None,
               counters: RunCounters | None = None,
               kernels=None) -> Partition:
    """Repeat full local-move sweeps over ``p`` until one makes no move.

    Each sweep visits every node in a fresh random order (or the supplied
    explicit order) and moves it to the strictly best community among its
    current one, its neighbors' communities and a new empty community.
    The result is optimal with respect to single-node moves.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    k = kernels or _kernels
    ge = cfg.quality.gamma_eff
    sweep = 0
    while True:
        if orders is not None and sweep < len(orders):
            order = np.asarray(orders[sweep], dtype=np.int64)
            if sorted(order.tolist()) != list(range(g.n)):
                raise ValueError("visit order must be a permutation of all nodes")
        else:
            order = rng.permutation(g.n).astype(np.int64)
        moves, _gain = k.sweep_nodes(
            g.indptr, g.indices, g.weights, g.self_loop, g.node_size,
            p.community_of, p.comm_size, p.comm_internal, p.comm_members,
            p._free, p._meta, ge, order)
        if counters is not None:
            counters.local_visits += g.n
            counters.local_moves += moves
        sweep += 1
        if moves == 0:
            return p


def louvain_iteration(g: Graph, p0: Partition | None, cfg: LouvainConfig,
                      rng: np.random.Generator | None = None,
                      kernels=None) -> RunResult:
    """One full iteration: sweep, aggregate, repeat; returns the flat result.

    ``p0`` defaults to the singleton partition; iterated runs pass the
    previous flat result to keep improving it.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    counters = RunCounters()
    hierarchy = Hierarchy(g)
    cur_g = g
    cur_p = Partition.singleton(g) if p0 is None else Partition.from_labels(g, p0.community_of)
    level = 0
    while True:
        orders = cfg.visit_order_override if level == 0 else None
        move_nodes(cur_g, cur_p, cfg, rng=rng, orders=orders,
                   counters=counters, kernels=kernels)
        counters.levels += 1
        done = cur_p.n_communities == cur_g.n
        if done or (cfg.max_levels is not None and level + 1 >= cfg.max_levels):
            hierarchy.levels.append(Level(cur_g, cur_p))
            break
        agg_g, lift = aggregate(cur_g, cur_p)
        hierarchy.levels.append(Level(cur_g, cur_p, lift=lift))
        cur_g = agg_g
        cur_p = Partition.singleton(agg_g)
        level += 1
    return RunResult(hierarchy.flatten(), hierarchy, counters)
