import numpy as np
import pytest

from commdet.benchgen import fixture
from commdet.graph import Graph
from commdet.leiden import LeidenConfig, leiden_iteration
from commdet.louvain import LouvainConfig, louvain_iteration
from commdet.partition import Partition
from commdet.quality import QualityConfig, quality
from commdet.verify import (audit, brute_force_optimal, check_gamma_connectivity,
                            check_gamma_separation, check_node_optimality,
                            check_subpartition_gamma_density,
                            check_subset_optimality, check_uniform_gamma_density,
                            connectivity_witnesses, density_witnesses,
                            detect_badly_connected,
                            find_nondecreasing_build_sequence,
                            greedy_sweep_fixed_point, optimality_gap_bound)

from conftest import all_partitions, oracle_quality, random_er_graph


def k_clique(k, base=0, w=1.0):
    return [(base + u, base + v, w) for u in range(k) for v in range(u + 1, k)]


# -- gamma separation --------------------------------------------------------

def test_separation_louvain_output_passes(rng):
    for seed in range(5):
        g = random_er_graph(rng, 15, 0.3)
        q = QualityConfig.cpm(0.5)
        res = louvain_iteration(g, None, LouvainConfig(quality=q, seed=seed))
        assert check_gamma_separation(g, res.partition, q).passed


def test_separation_catches_mergeable_pair():
    edges = k_clique(3) + k_clique(3, base=3)
    edges += [(u, v) for u in range(3) for v in range(3, 6)]  # 9 cross edges
    g = Graph.from_edges(edges)
    p = Partition.from_labels(g, np.array([0, 0, 0, 1, 1, 1]))
    res = check_gamma_separation(g, p, QualityConfig.cpm(0.5))
    assert not res.passed
    assert res.violations[0][2] == pytest.approx(9 - 0.5 * 9)


def test_separation_edgeless_singletons_pass():
    g = Graph.from_edges([], n=4)
    p = Partition.singleton(g)
    assert check_gamma_separation(g, p, QualityConfig.cpm(1.0)).passed


# -- gamma connectivity ------------------------------------------------------

def test_gamma_connectivity_singleton():
    g = Graph.from_edges([(0, 1)])
    out = check_gamma_connectivity(g, [0], QualityConfig.cpm(1.0))
    assert out == (True, "exact")


def test_gamma_connectivity_two_nodes_threshold():
    g = Graph.from_edges([(0, 1, 0.8)])
    assert check_gamma_connectivity(g, [0, 1], QualityConfig.cpm(0.8)).value
    assert not check_gamma_connectivity(g, [0, 1], QualityConfig.cpm(0.81)).value


def test_gamma_connectivity_disconnected_is_false():
    fx = fixture("disconnect_trap")
    out = check_gamma_connectivity(fx.graph, fx.notes["trapped_community"], fx.quality)
    assert out == (False, "exact")


def test_gamma_connectivity_witness_matches_dp(rng):
    # The greedy witness is a sound fast path; on these sizes the DP verdict
    # is the ground truth, so force both paths and compare.
    from commdet.verify import _CommunityTables, _greedy_witness, _split_dp
    q = QualityConfig.cpm(0.6)
    for _ in range(40):
        g = random_er_graph(rng, 8, 0.45, weighted=True)
        members = np.arange(8)
        dp = _split_dp(_CommunityTables(g, members), q.gamma_eff, None)
        wit = _greedy_witness(g, members, q.gamma_eff)
        if wit is not None:
            assert dp
        out = check_gamma_connectivity(g, members, q)
        assert out.value == dp


def test_gamma_connectivity_large_community_tags():
    g = Graph.from_edges(k_clique(20))
    out = check_gamma_connectivity(g, np.arange(20), QualityConfig.cpm(0.3),
                                   exact_limit=14)
    assert out.value and out.method == "certificate"
    # Two 10-cliques with one weak bridge: the sampled search finds the cut.
    edges = k_clique(10) + k_clique(10, base=10) + [(0, 10, 0.05)]
    g2 = Graph.from_edges(edges)
    out2 = check_gamma_connectivity(g2, np.arange(20), QualityConfig.cpm(0.5),
                                    exact_limit=14)
    assert out2 == (False, "sampled")


# -- subpartition gamma density ----------------------------------------------

def test_subpartition_density_single_node():
    g = Graph.from_edges([(0, 1, 2.0)])
    p = Partition.from_labels(g, np.array([0, 1]))
    q = QualityConfig.cpm(1.0)
    out = check_subpartition_gamma_density(g, p, q, 0)
    assert out == (True, "exact")


def test_subpartition_density_weak_leaf_fails_but_connected():
    # Star where one spoke is too weak to stand alone against the rest,
    # yet a recursive split tree avoiding it as an early leaf still exists.
    g = Graph.from_edges([(0, 1, 1.2), (0, 2, 3.0), (0, 3, 3.0)])
    p = Partition.from_labels(g, np.zeros(4, dtype=np.int64))
    q = QualityConfig.cpm(1.0)
    assert check_gamma_connectivity(g, np.arange(4), q).value
    out = check_subpartition_gamma_density(g, p, q, 0)
    assert out == (False, "exact")


def test_subpartition_density_stable_leiden_passes(rng):
    q = QualityConfig.cpm(0.45)
    for seed in range(6):
        g = random_er_graph(rng, 14, 0.35)
        cfg = LeidenConfig(quality=q, seed=seed)
        local = np.random.default_rng(seed)
        p = None
        for _ in range(30):
            res = leiden_iteration(g, p, cfg, rng=local)
            if p is not None and res.partition == p:
                break
            p = res.partition
        for c in p.communities().tolist():
            assert check_subpartition_gamma_density(g, p, q, c).value


# -- node optimality ----------------------------------------------------------

def test_node_optimality_trap_configuration_passes():
    fx = fixture("disconnect_trap")
    labels = np.array([1, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    p = Partition.from_labels(fx.graph, labels)
    ok, violations = check_node_optimality(fx.graph, p, fx.quality)
    assert ok, violations


def test_node_optimality_misplaced_node_fails():
    g = Graph.from_edges(k_clique(3))
    p = Partition.from_labels(g, np.array([0, 0, 1]))
    ok, violations = check_node_optimality(g, p, QualityConfig.cpm(0.5))
    assert not ok
    assert violations[0][0] == 2


# -- uniform density and subset optimality ------------------------------------

def test_greedy_trap_partition_uniformly_dense_and_subset_optimal():
    fx = fixture("greedy_trap")
    g, q = fx.graph, fx.quality
    p = Partition.from_labels(g, np.array(fx.notes["greedy_labels"]))
    for c in p.communities().tolist():
        assert check_uniform_gamma_density(g, p, q, c).value
    out = check_subset_optimality(g, p, q)
    assert out.value and out.method == "brute-force"
    # ... and yet not optimal: a strictly better partition exists.
    best = brute_force_optimal(g, q, n_limit=8)
    assert quality(g, best, q) > quality(g, p, q)


def test_internal_zero_cut_fails_uniform_density():
    g = Graph.from_edges(k_clique(3) + k_clique(3, base=3))
    p = Partition.from_labels(g, np.zeros(6, dtype=np.int64))
    q = QualityConfig.cpm(0.5)
    assert not check_uniform_gamma_density(g, p, q, 0).value


def test_trap_partition_fails_subset_optimality():
    fx = fixture("disconnect_trap")
    labels = np.array([1, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    p = Partition.from_labels(fx.graph, labels)
    out = check_subset_optimality(fx.graph, p, fx.quality)
    assert not out.value


def test_brute_force_optimum_is_subset_optimal(rng):
    q = QualityConfig.cpm(0.5)
    for _ in range(10):
        g = random_er_graph(rng, 9, 0.4)
        best = brute_force_optimal(g, q, n_limit=9)
        assert check_subset_optimality(g, best, q).value


def test_subset_optimality_skip_tag():
    g = Graph.from_edges(k_clique(16))
    p = Partition.from_labels(g, np.zeros(16, dtype=np.int64))
    out = check_subset_optimality(g, p, QualityConfig.cpm(0.5), exact_limit=10)
    assert out.method == "skipped-too-large"


# -- optimality gap bound ------------------------------------------------------

def test_bound_weighted_variant_on_greedy_trap():
    fx = fixture("greedy_trap")
    g, q = fx.graph, fx.quality
    p = Partition.from_labels(g, np.array(fx.notes["greedy_labels"]))
    rep = optimality_gap_bound(g, p, q)
    assert rep.applicable
    assert rep.variant == "weighted"
    assert rep.inter_weight == 9.0
    assert rep.bound == pytest.approx((1 - 1.0 / 3.0) * 9.0)  # = 6
    best = brute_force_optimal(g, q, n_limit=8)
    gap = quality(g, best, q) - quality(g, p, q)
    assert gap == 1.0 <= rep.bound


def test_bound_single_community_zero():
    g = Graph.from_edges(k_clique(3))
    p = Partition.from_labels(g, np.zeros(3, dtype=np.int64))
    rep = optimality_gap_bound(g, p, QualityConfig.cpm(0.5))
    assert rep.applicable and rep.bound == 0.0


def test_bound_unweighted_cap_identity(rng):
    # (1-gamma)m - gamma * missing-internal equals H(p) plus the gap bound.
    q = QualityConfig.cpm(0.5)
    for _ in range(10):
        g = random_er_graph(rng, 10, 0.4)
        res = louvain_iteration(g, None, LouvainConfig(quality=q, seed=1))
        p = res.partition
        rep = optimality_gap_bound(g, p, q)
        assert rep.variant == "unweighted"
        assert rep.optimal_quality_cap == pytest.approx(
            quality(g, p, q) + rep.bound, abs=1e-9)


def test_bound_gamma_ge_one_note():
    g = Graph.from_edges(k_clique(4))
    p = Partition.from_labels(g, np.array([0, 0, 1, 1]))
    rep = optimality_gap_bound(g, p, QualityConfig.cpm(1.5))
    assert rep.bound <= 0
    assert "bound <= 0" in rep.note


def test_bound_not_applicable_when_not_uniformly_dense():
    g = Graph.from_edges(k_clique(3) + k_clique(3, base=3))
    p = Partition.from_labels(g, np.zeros(6, dtype=np.int64))
    rep = optimality_gap_bound(g, p, QualityConfig.cpm(0.5))
    assert not rep.applicable


# -- build sequences -----------------------------------------------------------

def test_build_sequence_on_optimal_partitions(rng):
    q = QualityConfig.cpm(0.5)
    for _ in range(10):
        g = random_er_graph(rng, 9, 0.35)
        best = brute_force_optimal(g, q, n_limit=9)
        out = find_nondecreasing_build_sequence(g, best, q)
        assert out.ok
        assert out.total_steps == g.n - best.n_communities


def test_build_sequence_singleton_trivial():
    g = Graph.from_edges([(0, 1)])
    p = Partition.singleton(g)
    out = find_nondecreasing_build_sequence(g, p, QualityConfig.cpm(1.0))
    assert out.ok and out.total_steps == 0


def test_greedy_sweeps_never_reach_trap_optimum():
    fx = fixture("greedy_trap")
    g, q = fx.graph, fx.quality
    rng = np.random.default_rng(0)
    for _ in range(60):
        order = rng.permutation(g.n)
        p = greedy_sweep_fixed_point(g, q, order)
        assert quality(g, p, q) == 14.0


# -- brute force ----------------------------------------------------------------

def test_brute_force_two_triangles():
    g = Graph.from_edges(k_clique(3) + k_clique(3, base=3))
    q = QualityConfig.cpm(0.5)
    best = brute_force_optimal(g, q, n_limit=6)
    assert quality(g, best, q) == 3.0
    assert best.canonical_labels().tolist() == [0, 0, 0, 1, 1, 1]


def test_brute_force_matches_enumeration_oracle(rng):
    q = QualityConfig.cpm(0.7)
    for _ in range(5):
        g = random_er_graph(rng, 7, 0.5, weighted=True)
        best = brute_force_optimal(g, q, n_limit=7)
        best_val = max(oracle_quality(g, labels, "cpm", 0.7)
                       for labels in all_partitions(7))
        assert quality(g, best, q) == pytest.approx(best_val, abs=1e-9)


def test_brute_force_edgeless_and_limit():
    g = Graph.from_edges([], n=3)
    q = QualityConfig.cpm(1.0)
    best = brute_force_optimal(g, q)
    assert best.n_communities == 3
    assert quality(g, best, q) == 0.0
    with pytest.raises(ValueError):
        brute_force_optimal(random_er_graph(np.random.default_rng(0), 13, 0.2), q)


# -- badly connected -------------------------------------------------------------

def test_detect_badly_connected_clique_fine():
    g = Graph.from_edges(k_clique(5))
    p = Partition.from_labels(g, np.zeros(5, dtype=np.int64))
    rep = detect_badly_connected(g, p, QualityConfig.cpm(0.5))
    assert rep.badly_connected == [False]
    assert rep.pct_badly_connected == 0.0


def test_detect_badly_connected_trap_community():
    fx = fixture("disconnect_trap")
    labels = np.array([1, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    p = Partition.from_labels(fx.graph, labels)
    rep = detect_badly_connected(fx.graph, p, fx.quality)
    # Communities in ascending id order: 0 = hub + clique, 1 = trapped wings.
    assert rep.connected == [True, False]
    assert rep.badly_connected[1] is True
    assert rep.n_disconnected == 1


def test_detect_badly_connected_barbell_connected_but_bad():
    edges = k_clique(5) + k_clique(5, base=5) + [(0, 5, 1.0)]
    g = Graph.from_edges(edges)
    p = Partition.from_labels(g, np.zeros(10, dtype=np.int64))
    q = QualityConfig.cpm(0.6)
    rep = detect_badly_connected(g, p, q)
    assert rep.connected == [True]
    assert rep.badly_connected == [True]
    # Cross-check: splitting is what the exhaustive optimum does too.
    best = brute_force_optimal(g, q, n_limit=10)
    assert best.n_communities == 2


# -- witnesses and audit ----------------------------------------------------------

def test_connectivity_witnesses_cover_leiden_run(rng):
    q = QualityConfig.cpm(0.4)
    for seed in range(4):
        g = random_er_graph(rng, 18, 0.3)
        res = leiden_iteration(g, None, LeidenConfig(quality=q, seed=seed))
        flags = connectivity_witnesses(res, q)
        assert set(flags) == set(res.partition.communities().tolist())
        for c, flag in flags.items():
            assert flag
            exact = check_gamma_connectivity(g, res.partition.members(c), q)
            assert exact.value


def test_density_witnesses_hold_at_stability(rng):
    q = QualityConfig.cpm(0.5)
    g = random_er_graph(rng, 14, 0.35)
    cfg = LeidenConfig(quality=q, seed=5)
    local = np.random.default_rng(5)
    p = None
    res = None
    for _ in range(40):
        nxt = leiden_iteration(g, p, cfg, rng=local)
        if p is not None and nxt.partition == p:
            res = nxt
            break
        p = nxt.partition
    assert res is not None, "no stable iteration reached"
    flags = density_witnesses(res, q)
    for c, flag in flags.items():
        if flag:
            assert check_subpartition_gamma_density(g, p, q, c).value


def test_audit_report_structure_and_chain(rng):
    g = random_er_graph(rng, 12, 0.4)
    q = QualityConfig.cpm(0.5)
    res = leiden_iteration(g, None, LeidenConfig(quality=q, seed=2))
    rep = audit(g, res.partition, q, level="full", run_result=res)
    rep.validate_implication_chain()
    d = rep.to_dict()
    assert d["all_connected"]
    assert d["all_gamma_connected"]
    assert isinstance(d["communities"], list)
    fast = audit(g, res.partition, q, level="fast")
    assert fast.bound is None
    with pytest.raises(ValueError):
        audit(g, res.partition, q, level="everything")
