"""Shared helpers: independent oracles and random-graph generators.

The oracles recompute quantities straight from definitions (edge iteration,
full set-partition enumeration) and stay independent of the incremental
code paths they are used to check.
"""

from __future__ import annotations

import numpy as np
import pytest

from commdet.graph import Graph


def iter_edges(g: Graph):
    """Yield each undirected edge (u, v, w) once, self-loops included."""
    for v in range(g.n):
        if g.self_loop[v] > 0:
            yield v, v, float(g.self_loop[v])
        lo, hi = g.indptr[v], g.indptr[v + 1]
        for u, w in zip(g.indices[lo:hi].tolist(), g.weights[lo:hi].tolist()):
            if u > v:
                yield v, u, w


def oracle_quality(g: Graph, labels, kind: str, gamma: float) -> float:
    """Unified-form quality recomputed from scratch, straight from definitions."""
    labels = np.asarray(labels)
    if kind == "modularity":
        sizes = np.zeros(g.n)
        for v in range(g.n):
            lo, hi = g.indptr[v], g.indptr[v + 1]
            sizes[v] = g.weights[lo:hi].sum() + 2.0 * g.self_loop[v]
        ge = gamma / (2.0 * g.edge_weight_total)
    else:
        sizes = np.asarray(g.node_size, dtype=float)
        ge = gamma
    internal: dict[int, float] = {}
    for u, v, w in iter_edges(g):
        if labels[u] == labels[v]:
            internal[int(labels[u])] = internal.get(int(labels[u]), 0.0) + w
    total = 0.0
    for c in np.unique(labels):
        s = float(sizes[labels == c].sum())
        total += internal.get(int(c), 0.0) - ge * s * (s - 1.0) / 2.0
    return total


def all_partitions(n: int):
    """Every set partition of range(n) as a label array (restricted growth)."""
    labels = [0] * n

    def rec(i: int, k: int):
        if i == n:
            yield np.array(labels)
            return
        for b in range(k + 1):
            labels[i] = b
            yield from rec(i + 1, max(k, b + 1))

    yield from rec(0, 0)


def random_er_graph(rng: np.random.Generator, n: int, p: float,
                    weighted: bool = False) -> Graph:
    """Erdos-Renyi graph; random positive weights when ``weighted``."""
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                w = float(rng.uniform(0.2, 3.0)) if weighted else 1.0
                edges.append((u, v, w))
    if not edges:
        edges.append((0, min(1, n - 1), 1.0))
    return Graph.from_edges(edges, n=n)


def random_labels(rng: np.random.Generator, n: int, max_comms: int | None = None):
    k = int(rng.integers(1, (max_comms or n) + 1))
    return rng.integers(0, k, size=n).astype(np.int64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
