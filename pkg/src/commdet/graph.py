"""Weighted undirected graphs with per-node sizes, stored in CSR form."""

from __future__ import annotations

from typing import IO, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _sparse_components


class EdgeListParseError(ValueError):
    """Malformed line in an edge-list stream."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class Graph:
    """Immutable weighted undirected graph.

    Adjacency is CSR with every edge stored in both directions.  Self-loops
    are kept out of the CSR arrays and carried in ``self_loop`` with their
    full weight: a self-loop counts once toward internal community weight
    and twice toward a node's degree weight.  Parallel edges are summed into
    a single weight at construction; edges whose combined weight is zero are
    dropped, so adjacency implies positive weight.
    """

    __slots__ = ("n", "indptr", "indices", "weights", "self_loop", "node_size",
                 "node_weight_total", "edge_weight_total")

    def __init__(self, n, indptr, indices, weights, self_loop, node_size):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.self_loop = np.asarray(self_loop, dtype=np.float64)
        self.node_size = np.asarray(node_size, dtype=np.float64)
        if np.any(self.weights < 0) or np.any(self.self_loop < 0):
            raise ValueError("edge weights must be non-negative")
        # Sizes are positive counts under CPM; degree-valued sizes may be
        # zero for isolated nodes, which are quality-neutral everywhere.
        if np.any(self.node_size < 0):
            raise ValueError("node sizes must be non-negative")
        self.node_weight_total = float(self.node_size.sum())
        # Each undirected edge appears twice in the CSR arrays.
        self.edge_weight_total = float(self.weights.sum() / 2.0 + self.self_loop.sum())
        for arr in (self.indptr, self.indices, self.weights, self.self_loop, self.node_size):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], n: int | None = None,
                   node_size: Sequence[float] | None = None) -> "Graph":
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples.

        Duplicate edges (in either direction) have their weights summed.
        ``n`` defaults to ``max id + 1``, preserving isolated nodes.
        """
        us, vs, ws = [], [], []
        for e in edges:
            if len(e) == 2:
                u, v = e
                w = 1.0
            else:
                u, v, w = e
            us.append(u)
            vs.append(v)
            ws.append(w)
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        ws = np.asarray(ws, dtype=np.float64)
        if us.size and (us.min() < 0 or vs.min() < 0):
            raise ValueError("node ids must be non-negative")
        if np.any(ws < 0):
            raise ValueError("edge weights must be non-negative")
        max_id = int(max(us.max(), vs.max())) if us.size else -1
        if n is None:
            n = max_id + 1
        elif max_id >= n:
            raise ValueError(f"node id {max_id} out of range for n={n}")
        return cls._from_pairs(int(n), us, vs, ws, node_size)

    @classmethod
    def _from_pairs(cls, n, us, vs, ws, node_size=None):
        """Deduplicate and symmetrize raw edge arrays into CSR form."""
        self_mask = us == vs
        self_loop = np.zeros(n)
        if self_mask.any():
            np.add.at(self_loop, us[self_mask], ws[self_mask])
            us, vs, ws = us[~self_mask], vs[~self_mask], ws[~self_mask]
        lo = np.minimum(us, vs)
        hi = np.maximum(us, vs)
        key = lo * n + hi
        uniq, inv = np.unique(key, return_inverse=True)
        w_sum = np.zeros(len(uniq))
        np.add.at(w_sum, inv, ws)
        keep = w_sum > 0
        uniq, w_sum = uniq[keep], w_sum[keep]
        lo, hi = uniq // n, uniq % n
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        w2 = np.concatenate([w_sum, w_sum])
        order = np.lexsort((dst, src))
        src, dst, w2 = src[order], dst[order], w2[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        if node_size is None:
            node_size = np.ones(n)
        return cls(n, indptr, dst, w2, self_loop, node_size)

    def with_node_sizes(self, node_size) -> "Graph":
        """Same topology and weights with replaced node sizes."""
        return Graph(self.n, self.indptr, self.indices, self.weights,
                     self.self_loop, node_size)

    def neighbors(self, v: int):
        """Return ``(ids, weights)`` views of v's neighbor row (self-loop excluded)."""
        self._check_node(v)
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def degree_weight(self, v: int) -> float:
        """Sum of incident edge weights, self-loops counted twice."""
        self._check_node(v)
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return float(self.weights[lo:hi].sum() + 2.0 * self.self_loop[v])

    def degree_weights(self) -> np.ndarray:
        """Vector of degree weights for all nodes."""
        row_sums = np.add.reduceat(
            np.append(self.weights, 0.0), self.indptr[:-1]
        ) * (np.diff(self.indptr) > 0)
        return row_sums + 2.0 * self.self_loop

    def _check_node(self, v):
        if not 0 <= v < self.n:
            raise ValueError(f"node id {v} out of range [0, {self.n})")

    def _check_node_set(self, S) -> np.ndarray:
        S = np.asarray(S, dtype=np.int64)
        if S.size and (S.min() < 0 or S.max() >= self.n):
            raise ValueError("node id out of range")
        if len(np.unique(S)) != len(S):
            raise ValueError("duplicate node ids in set")
        return S

    def recomputed_edge_weight_total(self) -> float:
        """Recompute m from adjacency; must match the cached total."""
        return float(self.weights.sum() / 2.0 + self.self_loop.sum())


def load_edge_list(stream: IO[str] | Iterable[str], weighted: bool = True) -> Graph:
    """Parse a whitespace-separated edge list into a :class:`Graph`.

    Lines starting with ``#`` are comments.  Each data line is ``u v`` or,
    when ``weighted`` is true, optionally ``u v w``.  Node ids are
    non-negative integers and every node gets size 1.  Duplicate edges are
    summed; isolated nodes up to the maximum id are preserved.
    """
    us, vs, ws = [], [], []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if weighted:
            if len(fields) not in (2, 3):
                raise EdgeListParseError(lineno, f"expected 2 or 3 fields, got {len(fields)}")
        elif len(fields) != 2:
            raise EdgeListParseError(lineno, f"expected 2 fields, got {len(fields)}")
        try:
            u = int(fields[0])
            v = int(fields[1])
        except ValueError:
            raise EdgeListParseError(lineno, f"bad node id in {fields[:2]}") from None
        if u < 0 or v < 0:
            raise EdgeListParseError(lineno, "node ids must be non-negative")
        if weighted and len(fields) == 3:
            try:
                w = float(fields[2])
            except ValueError:
                raise EdgeListParseError(lineno, f"bad weight {fields[2]!r}") from None
        else:
            w = 1.0
        if w < 0:
            raise ValueError(f"line {lineno}: negative weight {w}")
        us.append(u)
        vs.append(v)
        ws.append(w)
    if not us:
        raise ValueError("edge list is empty")
    return Graph._from_pairs(
        int(max(max(us), max(vs))) + 1,
        np.asarray(us, dtype=np.int64),
        np.asarray(vs, dtype=np.int64),
        np.asarray(ws, dtype=np.float64),
    )


def write_edge_list(g: Graph, path_or_stream) -> None:
    """Write ``g`` in the edge-list format accepted by :func:`load_edge_list`."""
    close = False
    if isinstance(path_or_stream, (str, bytes)):
        fh = open(path_or_stream, "w")
        close = True
    else:
        fh = path_or_stream
    try:
        fh.write(f"# undirected weighted edge list, {g.n} nodes\n")
        for v in range(g.n):
            if g.self_loop[v] > 0:
                fh.write(f"{v} {v} {float(g.self_loop[v])!r}\n")
            ids, w = g.neighbors(v)
            for u, wt in zip(ids.tolist(), w.tolist()):
                if u > v:
                    fh.write(f"{v} {u} {wt!r}\n")
    finally:
        if close:
            fh.close()


def edge_weight_between(g: Graph, S, R) -> float:
    """Total edge weight between node sets S and R.

    With ``S == R`` (same id set) this is the internal weight E(C, C):
    each unordered pair counted once, self-loops included.  Otherwise the
    sets must be disjoint.
    """
    S = g._check_node_set(S)
    R = g._check_node_set(R)
    same = len(S) == len(R) and bool(np.all(np.sort(S) == np.sort(R)))
    in_r = np.zeros(g.n, dtype=bool)
    in_r[R] = True
    total = 0.0
    for v in S:
        ids, w = g.neighbors(int(v))
        total += float(w[in_r[ids]].sum())
    if same:
        return total / 2.0 + float(g.self_loop[S].sum())
    if in_r[S].any():
        raise ValueError("sets must be disjoint or identical")
    return total


def induced_subgraph(g: Graph, S) -> tuple[Graph, np.ndarray]:
    """Subgraph induced by node set S plus the mapping to original ids.

    Keeps exactly the edges with both endpoints in S; node sizes and
    self-loops carry over.  Returns ``(subgraph, orig_ids)`` where node i of
    the subgraph corresponds to ``orig_ids[i]`` in ``g``.
    """
    S = g._check_node_set(S)
    if S.size == 0:
        raise ValueError("node set must be non-empty")
    orig = np.sort(S)
    new_id = np.full(g.n, -1, dtype=np.int64)
    new_id[orig] = np.arange(len(orig))
    us, vs, ws = [], [], []
    for v in orig:
        ids, w = g.neighbors(int(v))
        keep = new_id[ids] >= 0
        us.append(np.full(int(keep.sum()), new_id[v]))
        vs.append(new_id[ids[keep]])
        ws.append(w[keep])
    us = np.concatenate(us) if us else np.empty(0, dtype=np.int64)
    vs = np.concatenate(vs) if vs else np.empty(0, dtype=np.int64)
    ws = np.concatenate(ws) if ws else np.empty(0)
    # Every kept edge appears in both directions; halve to avoid doubling.
    sub = Graph._from_pairs(len(orig), us, vs, ws / 2.0, node_size=g.node_size[orig])
    sub = Graph(sub.n, sub.indptr, sub.indices, sub.weights,
                g.self_loop[orig], g.node_size[orig])
    return sub, orig


def connected_components(g: Graph) -> list[np.ndarray]:
    """Maximal connected node sets, ordered by ascending smallest member."""
    mat = csr_matrix((g.weights, g.indices, g.indptr), shape=(g.n, g.n))
    _, labels = _sparse_components(mat, directed=False)
    comps: dict[int, list[int]] = {}
    for v, lab in enumerate(labels):
        comps.setdefault(int(lab), []).append(v)
    out = [np.asarray(members, dtype=np.int64) for members in comps.values()]
    out.sort(key=lambda a: int(a[0]))
    return out


def aggregate(g: Graph, p) -> tuple[Graph, np.ndarray]:
    """Contract each community of partition ``p`` into one node.

    Returns ``(aggregate_graph, lift)`` where ``lift[v]`` is the aggregate
    node of v's community.  Aggregate nodes are numbered by ascending
    community id.  Aggregate node size is the sum of member sizes;
    intra-community weight (self-loops included) becomes a self-loop, so
    quality is preserved for both quality functions.
    """
    labels = np.asarray(getattr(p, "community_of", p), dtype=np.int64)
    if labels.shape != (g.n,):
        raise ValueError("partition does not cover the graph")
    active = np.unique(labels)
    remap = np.full(int(labels.max()) + 1 if labels.size else 0, -1, dtype=np.int64)
    remap[active] = np.arange(len(active))
    lift = remap[labels]
    r = len(active)

    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.indptr))
    cu = lift[src]
    cv = lift[g.indices]
    inter = cu != cv
    self_w = np.zeros(r)
    # Intra-community CSR weight is double-counted (both directions).
    np.add.at(self_w, cu[~inter], g.weights[~inter] / 2.0)
    np.add.at(self_w, lift, g.self_loop)
    sizes = np.zeros(r)
    np.add.at(sizes, lift, g.node_size)

    key = cu[inter] * r + cv[inter]
    uniq, inv = np.unique(key, return_inverse=True)
    w_sum = np.zeros(len(uniq))
    np.add.at(w_sum, inv, g.weights[inter])
    a_src = (uniq // r).astype(np.int64)
    a_dst = (uniq % r).astype(np.int64)
    indptr = np.zeros(r + 1, dtype=np.int64)
    np.cumsum(np.bincount(a_src, minlength=r), out=indptr[1:])
    agg = Graph(r, indptr, a_dst, w_sum, self_w, sizes)
    return agg, lift
