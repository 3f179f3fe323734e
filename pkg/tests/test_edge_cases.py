"""Edge cases and second-order behaviors not covered by the main suites."""

import io

import numpy as np
import pytest

from commdet.benchgen import fixture
from commdet.graph import Graph, connected_components, load_edge_list
from commdet.leiden import LeidenConfig, leiden_iteration
from commdet.partition import Partition
from commdet.quality import QualityConfig, prepare_graph, quality
from commdet.verify import (CheckOutcome, CommunityVerdicts, GuaranteeReport,
                            check_gamma_connectivity,
                            check_uniform_gamma_density, detect_badly_connected,
                            optimality_gap_bound)

from conftest import random_er_graph


def k_clique(k, base=0, w=1.0):
    return [(base + u, base + v, w) for u in range(k) for v in range(u + 1, k)]


def test_empty_edge_list_rejected():
    with pytest.raises(ValueError):
        load_edge_list(io.StringIO("# only comments\n"))


def test_single_node_graph_runs():
    g = Graph.from_edges([(0, 0, 1.5)], n=1)
    q = QualityConfig.cpm(1.0)
    res = leiden_iteration(g, None, LeidenConfig(quality=q, seed=0))
    assert res.partition.n_communities == 1
    assert quality(g, res.partition, q) == 1.5


def test_leiden_max_levels_truncates():
    g = random_er_graph(np.random.default_rng(3), 20, 0.3)
    q = QualityConfig.cpm(0.3)
    res = leiden_iteration(g, None, LeidenConfig(quality=q, seed=1, max_levels=1))
    assert len(res.hierarchy.levels) == 1
    # Truncated runs provide no connectivity witnesses.
    from commdet.verify import connectivity_witnesses
    top = res.hierarchy.levels[-1]
    if top.partition.n_communities != top.graph.n:
        assert connectivity_witnesses(res, q) == {}


def test_sampled_uniform_density_pass_path():
    # A 20-clique is uniformly dense; beyond the exact limit the sampled
    # search finds no violating subset and says so in the method tag.
    g = Graph.from_edges(k_clique(20))
    p = Partition.from_labels(g, np.zeros(20, dtype=np.int64))
    q = QualityConfig.cpm(0.5)
    out = check_uniform_gamma_density(g, p, q, 0, exact_limit=10,
                                      rng=np.random.default_rng(0))
    assert out == (True, "sampled")


def test_sampled_uniform_density_fail_path():
    # Two 10-cliques with one weak tie: half-splits profit from leaving.
    g = Graph.from_edges(k_clique(10) + k_clique(10, base=10) + [(0, 10, 0.1)])
    p = Partition.from_labels(g, np.zeros(20, dtype=np.int64))
    q = QualityConfig.cpm(0.5)
    out = check_uniform_gamma_density(g, p, q, 0, exact_limit=10,
                                      rng=np.random.default_rng(0))
    assert out == (False, "sampled")


def test_gamma_connectivity_exact_limit_zero_still_quick_rejects():
    fx = fixture("disconnect_trap")
    out = check_gamma_connectivity(fx.graph, fx.notes["trapped_community"],
                                   fx.quality, exact_limit=2)
    assert out == (False, "exact")  # disconnected: rigorous at any size


def test_guarantee_report_chain_violation_raises():
    bad = GuaranteeReport(
        gamma_separated=True, separation_violations=[], node_optimal=True,
        node_violations=[],
        communities=[CommunityVerdicts(
            community=0, members=[0, 1], connected=True,
            gamma_connected=CheckOutcome(False, "exact"),
            subpartition_gamma_dense=None,
            uniformly_gamma_dense=CheckOutcome(True, "brute-force"),
            subset_optimal=None)],
        bound=None)
    with pytest.raises(RuntimeError):
        bad.validate_implication_chain()


def test_guarantee_report_sampled_disagreement_tolerated():
    rep = GuaranteeReport(
        gamma_separated=True, separation_violations=[], node_optimal=True,
        node_violations=[],
        communities=[CommunityVerdicts(
            community=0, members=[0, 1], connected=True,
            gamma_connected=CheckOutcome(False, "sampled"),
            subpartition_gamma_dense=None,
            uniformly_gamma_dense=CheckOutcome(True, "brute-force"),
            subset_optimal=None)],
        bound=None)
    rep.validate_implication_chain()  # sampled verdicts cannot contradict


def test_modularity_bound_value():
    g = Graph.from_edges(k_clique(4) + k_clique(4, base=4) + [(0, 4, 1.0)])
    q = QualityConfig.modularity(1.0, g)
    gg = prepare_graph(g, q)
    p = Partition.from_labels(gg, np.array([0] * 4 + [1] * 4))
    rep = optimality_gap_bound(gg, p, q)
    assert rep.variant == "modularity"
    assert rep.inter_weight == 1.0
    assert rep.bound == pytest.approx((1.0 - 1.0 / q.two_m) * 1.0)


def test_subnetwork_normalization_is_whole_graph_consistent():
    # A borderline community: under the frozen whole-graph normalization the
    # subnetwork look-again must behave as if the rest of the graph existed.
    core = k_clique(4) + k_clique(4, base=4) + [(0, 4, 1.2)]
    ballast = k_clique(6, base=8, w=5.0)  # inflates the base total weight
    g = Graph.from_edges(core + ballast)
    q = QualityConfig.modularity(1.0, g)
    gg = prepare_graph(g, q)
    labels = np.array([0] * 8 + [1] * 6)
    p = Partition.from_labels(gg, labels)
    # Whole-graph 2m makes the merge penalty smaller than the bridge, so
    # keeping the two 4-cliques together is genuinely optimal here and the
    # community must not be counted badly connected.
    rep = detect_badly_connected(gg, p, q, rng=np.random.default_rng(0))
    assert rep.badly_connected[0] is False
    # A normalization rebuilt from the subnetwork alone lives at a far
    # coarser resolution scale and would split the same community, which is
    # exactly the inconsistency that freezing the base normalization avoids.
    from commdet.graph import induced_subgraph
    sub, _ = induced_subgraph(gg, np.arange(8))
    q_local = QualityConfig.modularity(1.0, sub)
    assert q_local.gamma_eff > q.gamma_eff
    rng = np.random.default_rng(0)
    cur = None
    for _ in range(20):
        res = leiden_iteration(sub, cur, LeidenConfig(quality=q_local, seed=0),
                               rng=rng)
        if cur is not None and res.partition == cur:
            break
        cur = res.partition
    assert cur.n_communities >= 2


def test_connected_components_all_isolated():
    g = Graph.from_edges([], n=5)
    assert len(connected_components(g)) == 5
    q = QualityConfig.cpm(1.0)
    res = leiden_iteration(g, None, LeidenConfig(quality=q, seed=0))
    assert res.partition.n_communities == 5


def test_duplicate_reversed_edges_sum():
    g = Graph.from_edges([(0, 1, 1.0), (1, 0, 2.0)])
    ids, w = g.neighbors(0)
    assert w.tolist() == [3.0]


def test_weighted_modularity_run_connected_guarantee():
    fx = fixture("disconnect_trap")
    g0 = fx.graph
    q = QualityConfig.modularity(1.0, g0)
    g = prepare_graph(g0, q)
    for seed in range(4):
        res = leiden_iteration(g, None, LeidenConfig(quality=q, seed=seed))
        for c in res.partition.communities().tolist():
            members = res.partition.members(c)
            from commdet.graph import induced_subgraph
            sub, _ = induced_subgraph(g, members)
            assert len(connected_components(sub)) == 1
