"""Queue-based fast local move, randomized refinement, aggregation on the
refinement.

Each iteration moves nodes with a visit queue (only nodes whose neighborhood
changed are revisited), refines the resulting partition by randomized
well-connected merges inside each community, aggregates the graph by the
refined partition, and carries the unrefined partition onto the aggregate.
Every output community is connected; iterated to a fixed point, the output
is subset optimal.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import Graph, aggregate
from .partition import Hierarchy, Level, Partition, lift_partition
from .quality import QualityConfig
from .runinfo import RunCounters, RunResult

THETA_SANE_RANGE = (0.0005, 0.1)

# Refinement is randomized; a level that neither moves nor merges anything is
# retried with fresh randomness.  This bound is effectively unreachable.
_STALL_LIMIT = 256


@dataclass
class LeidenConfig:
    """Run configuration; ``theta`` sets the refinement randomness."""

    quality: QualityConfig
    theta: float = 0.01
    seed: int = 0
    max_levels: int | None = None

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        lo, hi = THETA_SANE_RANGE
        if not lo <= self.theta <= hi:
            warnings.warn(
                f"theta={self.theta} is outside the recommended range [{lo}, {hi}]",
                stacklevel=2)


def move_nodes_fast(g: Graph, p: Partition, cfg: LeidenConfig,
                    rng: np.random.Generator | None = None,
                    counters: RunCounters | None = None,
                    kernels=None) -> Partition:
    """Queue-driven local move over ``p``; mutates and returns ``p``.

    All nodes enter the queue in random order.  A popped node moves to its
    strictly best community; its neighbors outside that community re-enter
    the queue.  A node whose own community merely grew around it is not
    revisited, so single-pass output need not be node optimal; node
    optimality is guaranteed once a whole iteration leaves the partition
    unchanged.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    k = kernels or _kernels
    order = rng.permutation(g.n).astype(np.int64)
    visits, moves, _gain = k.queue_moves(
        g.indptr, g.indices, g.weights, g.self_loop, g.node_size,
        p.community_of, p.comm_size, p.comm_internal, p.comm_members,
        p._free, p._meta, cfg.quality.gamma_eff, order)
    if counters is not None:
        counters.local_visits += visits
        counters.local_moves += moves
    return p


def _run_refinement(g: Graph, p_refined: Partition, member_slices, subset_sizes,
                    cfg: LeidenConfig, rng: np.random.Generator,
                    kernels=None) -> tuple[list[tuple[int, int]], int]:
    """Drive the merge kernel over the given subsets of still-singleton nodes."""
    k = kernels or _kernels
    sizes = [len(s) for s in member_slices]
    members = (np.concatenate(member_slices).astype(np.int64)
               if member_slices else np.empty(0, dtype=np.int64))
    offsets = np.zeros(len(member_slices) + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    # Bulk-drawn randomness: one uniform per member plus one sort key per
    # member; sorting keys within each slice yields its visit permutation.
    uniforms = rng.random(len(members))
    keys = rng.random(len(members))
    slice_ids = np.repeat(np.arange(len(sizes)), sizes)
    visit_order = np.lexsort((keys, slice_ids)).astype(np.int64)
    perms = visit_order - np.repeat(offsets[:-1], sizes).astype(np.int64)
    return k.refine_level(
        g.indptr, g.indices, g.weights, g.self_loop, g.node_size,
        p_refined.community_of, p_refined.comm_size, p_refined.comm_internal,
        p_refined.comm_members, p_refined._free, p_refined._meta,
        cfg.quality.gamma_eff, cfg.theta,
        members, offsets, np.asarray(subset_sizes, dtype=np.float64),
        perms, uniforms)


def merge_nodes_subset(g: Graph, p_refined: Partition, members: np.ndarray,
                       subset_size: float, cfg: LeidenConfig,
                       rng: np.random.Generator,
                       kernels=None) -> tuple[list[tuple[int, int]], int]:
    """Randomized merges of the still-singleton members of one subset.

    ``members`` are the nodes of one community of the unrefined partition
    and ``subset_size`` their total node size.  Returns the (node, community)
    join events performed and the number of nodes evaluated.
    """
    members = np.asarray(members, dtype=np.int64)
    return _run_refinement(g, p_refined, [members], [float(subset_size)],
                           cfg, rng, kernels=kernels)


def refine_partition(g: Graph, p: Partition, cfg: LeidenConfig,
                     rng: np.random.Generator | None = None,
                     counters: RunCounters | None = None,
                     kernels=None) -> tuple[Partition, dict[int, list[int]]]:
    """Refine ``p`` by merging nodes inside each of its communities.

    Starts from the singleton partition and runs the merge pass for every
    community of ``p`` (ascending id), so each refined community lies wholly
    inside one community of ``p``.  Returns the refinement and, per
    multi-node refined community, the order in which nodes joined it (a
    connectivity witness).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    refined = Partition.singleton(g)
    order = np.argsort(p.community_of, kind="stable")
    labels_sorted = p.community_of[order]
    starts = np.concatenate([[0], np.flatnonzero(np.diff(labels_sorted)) + 1,
                             [g.n]]).astype(np.int64)
    member_slices = []
    subset_sizes = []
    for i in range(len(starts) - 1):
        lo, hi = starts[i], starts[i + 1]
        if hi - lo < 2:
            continue
        member_slices.append(order[lo:hi])
        subset_sizes.append(float(p.comm_size[labels_sorted[lo]]))
    events, visits = _run_refinement(g, refined, member_slices, subset_sizes,
                                     cfg, rng, kernels=kernels)
    if counters is not None:
        counters.refine_visits += visits
        counters.refine_merges += len(events)
    merge_orders: dict[int, list[int]] = {}
    for v, target in events:
        merge_orders.setdefault(target, [target]).append(v)
    return refined, merge_orders


def leiden_iteration(g: Graph, p0: Partition | None, cfg: LeidenConfig,
                     rng: np.random.Generator | None = None,
                     kernels=None) -> RunResult:
    """One full iteration: fast local move, refine, aggregate, repeat.

    ``p0`` defaults to the singleton partition; iterated runs pass the
    previous flat result.  The unrefined partition is maintained across
    aggregation as the starting partition of the next level.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    counters = RunCounters()
    hierarchy = Hierarchy(g)
    cur_g = g
    cur_p = Partition.singleton(g) if p0 is None else Partition.from_labels(g, p0.community_of)
    level = 0
    stalled = 0
    while True:
        before_moves = counters.local_moves
        move_nodes_fast(cur_g, cur_p, cfg, rng=rng, counters=counters, kernels=kernels)
        counters.levels += 1
        done = cur_p.n_communities == cur_g.n
        if done or (cfg.max_levels is not None and level + 1 >= cfg.max_levels):
            hierarchy.levels.append(Level(cur_g, cur_p))
            break
        refined, merge_orders = refine_partition(
            cur_g, cur_p, cfg, rng=rng, counters=counters, kernels=kernels)
        if counters.local_moves == before_moves and refined.n_communities == cur_g.n:
            stalled += 1
            if stalled >= _STALL_LIMIT:
                raise RuntimeError("refinement stalled; no progress possible")
        else:
            stalled = 0
        agg_g, lift = aggregate(cur_g, refined)
        hierarchy.levels.append(Level(cur_g, cur_p, refined=refined,
                                      merge_orders=merge_orders, lift=lift))
        cur_p = lift_partition(cur_p, agg_g, lift)
        cur_g = agg_g
        level += 1
    return RunResult(hierarchy.flatten(), hierarchy, counters)
