"""Mutable node partitions with O(1) community aggregates, plus hierarchies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, aggregate

# Move target representing a fresh empty community.
NEW_COMMUNITY = -1


class Partition:
    """Assignment of every node of a graph to exactly one community.

    Per-community aggregates (size sum, internal edge weight, member count)
    are maintained incrementally under :meth:`move_node`.  Community ids are
    recycled integers in ``[0, n)``; an id is active iff it has members.
    """

    __slots__ = ("graph", "community_of", "comm_size", "comm_internal",
                 "comm_members", "_free", "_meta")

    def __init__(self, graph: Graph, community_of, comm_size, comm_internal,
                 comm_members, free, meta):
        self.graph = graph
        self.community_of = community_of
        self.comm_size = comm_size
        self.comm_internal = comm_internal
        self.comm_members = comm_members
        self._free = free
        # meta[0] = free-stack top, meta[1] = active community count
        self._meta = meta

    # -- constructors ------------------------------------------------------

    @classmethod
    def singleton(cls, graph: Graph) -> "Partition":
        """Each node in its own community; internal weights are self-loops."""
        n = graph.n
        return cls(
            graph,
            np.arange(n, dtype=np.int64),
            graph.node_size.copy(),
            graph.self_loop.copy(),
            np.ones(n, dtype=np.int64),
            np.empty(n, dtype=np.int64),
            np.array([0, n], dtype=np.int64),
        )

    @classmethod
    def from_labels(cls, graph: Graph, labels) -> "Partition":
        """Build a partition from an arbitrary per-node label array.

        Labels are renumbered densely by first appearance; aggregates are
        recomputed from scratch.
        """
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (graph.n,):
            raise ValueError("label array must have one entry per node")
        _, first_pos, inv = np.unique(labels, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first_pos))
        community_of = order[inv].astype(np.int64)
        r = int(community_of.max()) + 1 if graph.n else 0
        n = graph.n
        comm_size = np.zeros(n)
        np.add.at(comm_size, community_of, graph.node_size)
        comm_members = np.bincount(community_of, minlength=n).astype(np.int64)
        comm_internal = np.zeros(n)
        np.add.at(comm_internal, community_of, graph.self_loop)
        src = np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.indptr))
        same = community_of[src] == community_of[graph.indices]
        np.add.at(comm_internal, community_of[src[same]], graph.weights[same] / 2.0)
        free = np.empty(n, dtype=np.int64)
        top = n - r
        free[:top] = np.arange(n - 1, r - 1, -1, dtype=np.int64)
        meta = np.array([top, r], dtype=np.int64)
        return cls(graph, community_of, comm_size, comm_internal, comm_members, free, meta)

    def copy(self) -> "Partition":
        return Partition(self.graph, self.community_of.copy(), self.comm_size.copy(),
                         self.comm_internal.copy(), self.comm_members.copy(),
                         self._free.copy(), self._meta.copy())

    # -- queries -----------------------------------------------------------

    @property
    def n_communities(self) -> int:
        return int(self._meta[1])

    def communities(self) -> np.ndarray:
        """Active community ids, ascending."""
        return np.flatnonzero(self.comm_members > 0)

    def members(self, c: int) -> np.ndarray:
        if not (0 <= c < self.graph.n) or self.comm_members[c] == 0:
            raise ValueError(f"community {c} is not active")
        return np.flatnonzero(self.community_of == c)

    def community_weight_to(self, v: int) -> dict[int, float]:
        """Edge weight from node v to each adjacent community (self-loop excluded)."""
        ids, w = self.graph.neighbors(v)
        out: dict[int, float] = {}
        for u, wt in zip(ids, w):
            c = int(self.community_of[u])
            out[c] = out.get(c, 0.0) + float(wt)
        return out

    # -- mutation ----------------------------------------------------------

    def spawn_community(self) -> int:
        """Reserve a fresh empty community id (for moves to a new community)."""
        if self._meta[0] == 0:
            raise RuntimeError("no free community ids")
        self._meta[0] -= 1
        return int(self._free[self._meta[0]])

    def move_node(self, v: int, target: int) -> int:
        """Move node v to ``target`` (or ``NEW_COMMUNITY``); returns the id moved to.

        All cached aggregates are updated incrementally in O(deg v).
        """
        g = self.graph
        g._check_node(v)
        old = int(self.community_of[v])
        if target == NEW_COMMUNITY:
            if self.comm_members[old] == 1:
                return old
            target = self.spawn_community()
            self._meta[1] += 1
        elif not (0 <= target < g.n) or self.comm_members[target] == 0:
            raise ValueError(f"target community {target} is not active")
        if target == old:
            return old
        ids, w = g.neighbors(v)
        labels = self.community_of[ids]
        w_old = float(w[labels == old].sum())
        w_new = float(w[labels == target].sum())
        size_v = g.node_size[v]
        loop_v = g.self_loop[v]
        self.community_of[v] = target
        self.comm_size[old] -= size_v
        self.comm_size[target] += size_v
        self.comm_members[old] -= 1
        self.comm_members[target] += 1
        self.comm_internal[old] -= w_old + loop_v
        self.comm_internal[target] += w_new + loop_v
        if self.comm_members[old] == 0:
            self.comm_size[old] = 0.0
            self.comm_internal[old] = 0.0
            self._free[self._meta[0]] = old
            self._meta[0] += 1
            self._meta[1] -= 1
        return target

    # -- canonical form ----------------------------------------------------

    def canonical_labels(self) -> np.ndarray:
        """Communities renumbered 0..r-1 by ascending smallest member."""
        return canonical_labels(self.community_of)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.canonical_labels(), other.canonical_labels())

    def __hash__(self):
        return hash(self.canonical_labels().tobytes())

    def check_consistency(self, tol: float = 0.0) -> None:
        """Compare cached aggregates against a recomputation from scratch."""
        ref = Partition.from_labels(self.graph, self.community_of)
        mine = canonical_labels(self.community_of)
        for name, a, b in (
            ("size", self.comm_size, ref.comm_size),
            ("internal", self.comm_internal, ref.comm_internal),
        ):
            got = _by_canonical(mine, self.community_of, a)
            want = _by_canonical(ref.canonical_labels(), ref.community_of, b)
            if not np.allclose(got, want, rtol=0.0, atol=tol):
                raise AssertionError(f"cached community {name} diverged from recompute")
        got_m = _by_canonical(mine, self.community_of, self.comm_members.astype(float))
        want_m = _by_canonical(ref.canonical_labels(), ref.community_of,
                               ref.comm_members.astype(float))
        if not np.array_equal(got_m, want_m):
            raise AssertionError("cached member counts diverged from recompute")


def canonical_labels(community_of: np.ndarray) -> np.ndarray:
    """Dense labels ordered by first appearance (== ascending smallest member)."""
    community_of = np.asarray(community_of, dtype=np.int64)
    _, first_pos, inv = np.unique(community_of, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first_pos))
    return order[inv].astype(np.int64)


def _by_canonical(canon, raw, values):
    """Per-community values keyed by canonical label."""
    r = int(canon.max()) + 1
    out = np.zeros(r)
    seen = np.zeros(r, dtype=bool)
    for v in range(len(canon)):
        c = canon[v]
        if not seen[c]:
            out[c] = values[raw[v]]
            seen[c] = True
    return out


@dataclass
class Level:
    """One aggregation level of an algorithm run.

    ``partition`` is the partition of ``graph`` after local moving.  For
    refinement-based runs ``refined`` holds the refinement actually used for
    aggregation and ``merge_orders`` the per-refined-community node join
    order (a connectivity witness usable by the verifiers).  ``lift`` maps
    each node of ``graph`` to its node in the next level's graph (None at
    the top level).
    """

    graph: Graph
    partition: Partition
    refined: Partition | None = None
    merge_orders: dict[int, list[int]] | None = None
    lift: np.ndarray | None = None


@dataclass
class Hierarchy:
    """Ordered list of levels produced during one algorithm run."""

    base_graph: Graph
    levels: list[Level] = field(default_factory=list)

    def flatten(self, upto: int | None = None) -> Partition:
        """Project the top (or ``upto``-th) level's partition onto the base graph."""
        if not self.levels:
            raise ValueError("hierarchy has no levels")
        last = len(self.levels) - 1 if upto is None else upto
        node_at = np.arange(self.base_graph.n, dtype=np.int64)
        for lvl in self.levels[:last]:
            if lvl.lift is None:
                raise RuntimeError("inconsistent hierarchy: missing lift map")
            node_at = lvl.lift[node_at]
        labels = self.levels[last].partition.community_of[node_at]
        return Partition.from_labels(self.base_graph, labels)


def flatten(h: Hierarchy) -> Partition:
    """Flat base-graph partition equivalent to the hierarchy's top level."""
    return h.flatten()


def lift_partition(p: Partition, agg_graph: Graph, refined_lift: np.ndarray) -> Partition:
    """Carry partition ``p`` onto the aggregate graph built from its refinement.

    Each aggregate node (one refined community) is assigned to the community
    of ``p`` that contains its members.  Raises if a refined community
    straddles two communities of ``p``.
    """
    lo = np.full(agg_graph.n, np.iinfo(np.int64).max, dtype=np.int64)
    hi = np.full(agg_graph.n, -1, dtype=np.int64)
    np.minimum.at(lo, refined_lift, p.community_of)
    np.maximum.at(hi, refined_lift, p.community_of)
    if np.any(hi < 0):
        raise RuntimeError("aggregate node with no members")
    if np.any(lo != hi):
        raise RuntimeError("refined community straddles two communities")
    return Partition.from_labels(agg_graph, lo)


def write_partition(p: Partition, path_or_stream) -> None:
    """Write one ``node_id<TAB>community_id`` line per node, canonical labels."""
    close = False
    if isinstance(path_or_stream, (str, bytes)):
        fh = open(path_or_stream, "w")
        close = True
    else:
        fh = path_or_stream
    try:
        labels = p.canonical_labels()
        for v, c in enumerate(labels):
            fh.write(f"{v}\t{c}\n")
    finally:
        if close:
            fh.close()


def read_partition(graph: Graph, path_or_stream) -> Partition:
    """Read a partition written by :func:`write_partition`."""
    close = False
    if isinstance(path_or_stream, (str, bytes)):
        fh = open(path_or_stream)
        close = True
    else:
        fh = path_or_stream
    try:
        labels = np.full(graph.n, -1, dtype=np.int64)
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            v_s, c_s = line.split()
            labels[int(v_s)] = int(c_s)
        if np.any(labels < 0):
            raise ValueError("partition file does not cover every node")
        return Partition.from_labels(graph, labels)
    finally:
        if close:
            fh.close()


def aggregate_partition(g: Graph, p: Partition) -> tuple[Graph, np.ndarray]:
    """Alias for :func:`commdet.graph.aggregate` taking a Partition."""
    return aggregate(g, p)
