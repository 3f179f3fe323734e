"""Executable checkers for the partition guarantees and optimality bounds.

Six properties of increasing strength are checked per community:

    connected <= gamma-connected <= subpartition gamma-dense
              <= uniformly gamma-dense <= subset optimal,

with node optimality alongside (implied by subset optimality but not by the
density chain).  Every verdict carries a method tag; exhaustive checks are
limited to communities of at most ``exact_limit`` members, beyond which a
run-produced merge witness or a sampled search is used and tagged as such,
never silently passing.

Verdicts on float data use an absolute slack of 1e-12: a violation smaller
than that is indistinguishable from an exact tie, which the algorithms are
allowed to keep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .graph import Graph, connected_components, induced_subgraph
from .leiden import LeidenConfig, leiden_iteration
from .partition import NEW_COMMUNITY, Partition
from .quality import QualityConfig
from .runinfo import RunResult

DEFAULT_EXACT_LIMIT = 14

# Methods whose verdicts are provably correct.
EXACT_METHODS = ("exact", "brute-force")

_SLACK = 1e-12

_N_SAMPLED_SUBSETS = 10 * 1024


class CheckOutcome(NamedTuple):
    value: bool
    method: str  # exact | brute-force | certificate | sampled | skipped-too-large


# ---------------------------------------------------------------------------
# Per-community subset tables (bitmask DP over one induced community)


class _CommunityTables:
    """Subset sums over one small community: sizes, internal weights, cuts."""

    def __init__(self, g: Graph, members: np.ndarray):
        self.members = np.asarray(members, dtype=np.int64)
        k = len(self.members)
        if k > 24:
            raise ValueError("bitmask tables are limited to 24 members")
        self.k = k
        local = {int(v): i for i, v in enumerate(self.members)}
        sz = g.node_size[self.members].astype(float)
        self.sz = sz
        W = np.zeros((k, k))
        for i, v in enumerate(self.members):
            ids, w = g.neighbors(int(v))
            for u, wt in zip(ids.tolist(), w.tolist()):
                j = local.get(u)
                if j is not None:
                    W[i, j] += wt
        self.W = W
        self.selfw = g.self_loop[self.members].astype(float)
        nmask = 1 << k
        masks = np.arange(nmask)
        size_arr = np.zeros(nmask)
        win = np.zeros(nmask)
        for i in range(k):
            has_i = ((masks >> i) & 1).astype(bool)
            size_arr[has_i] += sz[i]
            win[has_i] += self.selfw[i]
            for j in range(i + 1, k):
                if W[i, j] > 0:
                    both = has_i & (((masks >> j) & 1).astype(bool))
                    win[both] += W[i, j]
        self.size_arr = size_arr
        self.win = win
        self.full = nmask - 1

    def external_cut(self) -> np.ndarray:
        """E(S, C - S) for every subset S of the community."""
        return self.win[self.full] - self.win - self.win[::-1]


def _popcount_order(nmask: int) -> np.ndarray:
    masks = np.arange(nmask)
    pop = np.zeros(nmask, dtype=np.int64)
    m = masks
    while m.any():
        pop += m & 1
        m = m >> 1
    return np.argsort(pop, kind="stable")


def _split_dp(tab: _CommunityTables, ge: float, admit: np.ndarray | None) -> bool:
    """Existence of a recursive bipartition tree with cut >= ge * |R| * |T|.

    ``admit`` adds a per-subset admission condition (used for the density
    variant); None admits every subset.
    """
    k = tab.k
    nmask = 1 << k
    ok = np.zeros(nmask, dtype=bool)
    size_arr = tab.size_arr.tolist()
    win = tab.win.tolist()
    admit_l = admit.tolist() if admit is not None else None
    for m in _popcount_order(nmask).tolist():
        if m == 0:
            continue
        if admit_l is not None and not admit_l[m]:
            continue
        if m & (m - 1) == 0:  # single node
            ok[m] = True
            continue
        wm = win[m]
        sub = (m - 1) & m
        while sub:
            rest = m ^ sub
            if sub < rest and ok[sub] and ok[rest]:
                cut = wm - win[sub] - win[rest]
                if cut >= ge * size_arr[sub] * size_arr[rest] - _SLACK:
                    ok[m] = True
                    break
            sub = (sub - 1) & m
    return bool(ok[tab.full])


# ---------------------------------------------------------------------------
# Greedy build witnesses (sparse; work for communities of any size)


def _community_adjacency(g: Graph, members: np.ndarray):
    """Local index, sizes, and within-community adjacency lists."""
    local = {int(v): i for i, v in enumerate(members)}
    adj: list[list[tuple[int, float]]] = [[] for _ in members]
    for i, v in enumerate(members):
        ids, w = g.neighbors(int(v))
        for u, wt in zip(ids.tolist(), w.tolist()):
            j = local.get(u)
            if j is not None:
                adj[i].append((j, wt))
    return g.node_size[members].astype(float), adj


def _greedy_witness(g: Graph, members: np.ndarray, ge: float,
                    prefix_gate=None) -> list[int] | None:
    """Left-deep build order proving gamma-connectivity, if one is found.

    From each start node, repeatedly add the node with the best connection
    margin among those meeting the gate.  ``prefix_gate(local_ids)``
    optionally adds a per-subset admission condition; in a left-deep tree
    the subsets are the grown prefixes plus each added node as a singleton
    leaf, so both are gated.  A returned order (of local indices) is a
    complete proof; None is inconclusive.
    """
    k = len(members)
    sz, adj = _community_adjacency(g, members)
    if k == 1:
        return [0] if prefix_gate is None or prefix_gate([0]) else None
    if prefix_gate is not None:
        # Every node is a singleton leaf of every split tree, so a single
        # failing leaf means no witness exists at all.
        if not all(prefix_gate([u]) for u in range(k)):
            return None
    for start in range(k):
        order = [start]
        in_cur = [False] * k
        in_cur[start] = True
        size_cur = sz[start]
        conn = [0.0] * k
        for j, wt in adj[start]:
            conn[j] += wt
        while len(order) < k:
            best = -1
            best_margin = 0.0
            for u in range(k):
                if in_cur[u] or conn[u] <= 0.0:
                    continue
                margin = conn[u] - ge * sz[u] * size_cur
                if margin >= -_SLACK and (best == -1 or margin > best_margin):
                    best = u
                    best_margin = margin
            if best >= 0 and prefix_gate is not None and not prefix_gate(order + [best]):
                # Try any other admissible candidate before giving up.
                best = -1
                for u in range(k):
                    if in_cur[u] or conn[u] <= 0.0:
                        continue
                    if conn[u] - ge * sz[u] * size_cur >= -_SLACK and prefix_gate(order + [u]):
                        best = u
                        break
            if best == -1:
                break
            order.append(best)
            in_cur[best] = True
            size_cur += sz[best]
            for j, wt in adj[best]:
                conn[j] += wt
        if len(order) == k:
            return order
    return None


# ---------------------------------------------------------------------------
# Property checkers


@dataclass
class SeparationResult:
    passed: bool
    pair_deltas: dict[tuple[int, int], float]
    violations: list[tuple[int, int, float]]


def check_gamma_separation(g: Graph, p: Partition, q: QualityConfig) -> SeparationResult:
    """Merging any two communities must not increase quality.

    Pairs with no connecting edge have delta ``-ge * |C| * |D| < 0``
    analytically, so only edge-connected pairs are evaluated; one zero-edge
    representative is included in the report when present.
    """
    ge = q.gamma_eff
    inter: dict[tuple[int, int], float] = {}
    comm = p.community_of
    for v in range(g.n):
        ids, w = g.neighbors(v)
        cv = int(comm[v])
        for u, wt in zip(ids.tolist(), w.tolist()):
            cu = int(comm[u])
            if cu > cv:
                key = (cv, cu)
                inter[key] = inter.get(key, 0.0) + wt
    deltas = {}
    violations = []
    for (c, d), e in inter.items():
        delta = e - ge * float(p.comm_size[c]) * float(p.comm_size[d])
        deltas[(c, d)] = delta
        if delta > _SLACK:
            violations.append((c, d, delta))
    active = p.communities().tolist()
    if len(active) <= 64:
        rep = next(((c, d) for i, c in enumerate(active) for d in active[i + 1:]
                    if (c, d) not in inter), None)
        if rep is not None:
            deltas[rep] = -ge * float(p.comm_size[rep[0]]) * float(p.comm_size[rep[1]])
    return SeparationResult(not violations, deltas, violations)


def check_gamma_connectivity(g: Graph, members, q: QualityConfig,
                             exact_limit: int = DEFAULT_EXACT_LIMIT,
                             rng: np.random.Generator | None = None,
                             certified: bool = False) -> CheckOutcome:
    """Recursive-split connectivity of one community at resolution gamma.

    Exact for communities up to ``exact_limit`` members (verified build
    witness, else full bipartition DP).  Beyond that, a verified run witness
    yields a ``certificate`` verdict; otherwise a randomized search for a
    violating split is reported as ``sampled``.
    """
    members = np.asarray(members, dtype=np.int64)
    k = len(members)
    if k == 1:
        return CheckOutcome(True, "exact")
    sub, _ = induced_subgraph(g, members)
    if len(connected_components(sub)) > 1:
        return CheckOutcome(False, "exact")
    ge = q.gamma_eff
    small = k <= exact_limit
    if certified:
        return CheckOutcome(True, "exact" if small else "certificate")
    if _greedy_witness(g, members, ge) is not None:
        return CheckOutcome(True, "exact" if small else "certificate")
    if small:
        return CheckOutcome(_split_dp(_CommunityTables(g, members), ge, None), "exact")
    return CheckOutcome(not _sampled_split_violation(g, members, ge, rng), "sampled")


def check_subpartition_gamma_density(g: Graph, p: Partition, q: QualityConfig,
                                     c: int,
                                     exact_limit: int = DEFAULT_EXACT_LIMIT,
                                     rng: np.random.Generator | None = None,
                                     certified: bool = False) -> CheckOutcome:
    """Recursive-split connectivity where every split part must also be
    unprofitable to break out into a new community."""
    members = p.members(c)
    k = len(members)
    comm_size = float(p.comm_size[c])
    ge = q.gamma_eff
    if k == 1:
        return CheckOutcome(_zero_move_ok(g, p, members.tolist(), ge), "exact")
    # Every node is a singleton leaf of any split tree, so one node failing
    # the move-to-new-community test refutes the property at any size.
    if not all(_zero_move_ok(g, p, [int(v)], ge) for v in members):
        return CheckOutcome(False, "exact")
    small = k <= exact_limit
    if certified:
        return CheckOutcome(True, "exact" if small else "certificate")

    def gate(local_ids):
        return _zero_move_ok(g, p, members[local_ids].tolist(), ge)

    if _greedy_witness(g, members, ge, prefix_gate=gate) is not None:
        return CheckOutcome(True, "exact" if small else "certificate")
    if small:
        tab = _CommunityTables(g, members)
        ext = tab.external_cut()
        admit = ext >= ge * tab.size_arr * (comm_size - tab.size_arr) - _SLACK
        return CheckOutcome(bool(_split_dp(tab, ge, admit)), "exact")
    violation = (_sampled_split_violation(g, members, ge, rng)
                 or _sampled_uniform_violation(g, p, c, ge, rng))
    return CheckOutcome(not violation, "sampled")


def check_node_optimality(g: Graph, p: Partition, q: QualityConfig) -> tuple[bool, list]:
    """No single node can move (to a neighbor community or a new one) with gain.

    Target communities not adjacent to the node are dominated by the
    new-community move and need not be evaluated.
    """
    ge = q.gamma_eff
    comm = p.community_of
    violations = []
    for v in range(g.n):
        cv = int(comm[v])
        ids, w = g.neighbors(v)
        acc: dict[int, float] = {}
        for u, wt in zip(ids.tolist(), w.tolist()):
            cu = int(comm[u])
            acc[cu] = acc.get(cu, 0.0) + wt
        sv = float(g.node_size[v])
        stay = acc.get(cv, 0.0) - ge * sv * (float(p.comm_size[cv]) - sv)
        worst = -stay  # new-community move
        worst_target = NEW_COMMUNITY
        for cu, e in acc.items():
            if cu == cv:
                continue
            d = (e - ge * sv * float(p.comm_size[cu])) - stay
            if d > worst:
                worst = d
                worst_target = cu
        if worst > _SLACK:
            violations.append((v, worst_target, worst))
    return (not violations, violations)


def check_uniform_gamma_density(g: Graph, p: Partition, q: QualityConfig, c: int,
                                exact_limit: int = DEFAULT_EXACT_LIMIT,
                                rng: np.random.Generator | None = None) -> CheckOutcome:
    """No subset of the community profits from moving to a new community."""
    members = p.members(c)
    k = len(members)
    ge = q.gamma_eff
    comm_size = float(p.comm_size[c])
    if k <= exact_limit:
        tab = _CommunityTables(g, members)
        ext = tab.external_cut()
        sizes = tab.size_arr
        ok = ext >= ge * sizes * (comm_size - sizes) - _SLACK
        return CheckOutcome(bool(ok.all()), "brute-force")
    return CheckOutcome(not _sampled_uniform_violation(g, p, c, ge, rng), "sampled")


def check_subset_optimality(g: Graph, p: Partition, q: QualityConfig,
                            c: int | None = None,
                            exact_limit: int = DEFAULT_EXACT_LIMIT) -> CheckOutcome:
    """No subset of any (or one) community can move anywhere with gain.

    Targets are the new community plus every community sharing an edge with
    the checked one; edge-free targets are dominated by the new community.
    Communities larger than ``exact_limit`` are tagged skipped-too-large.
    """
    if c is None:
        method = "brute-force"
        for ci in p.communities().tolist():
            out = check_subset_optimality(g, p, q, ci, exact_limit)
            if not out.value:
                return CheckOutcome(False, out.method)
            if out.method == "skipped-too-large":
                method = "skipped-too-large"
        return CheckOutcome(True, method)
    members = p.members(c)
    k = len(members)
    if k > exact_limit:
        return CheckOutcome(True, "skipped-too-large")
    ge = q.gamma_eff
    comm = p.community_of
    comm_size = float(p.comm_size[c])
    tab = _CommunityTables(g, members)
    ext = tab.external_cut()
    sizes = tab.size_arr
    stay = ext - ge * sizes * (comm_size - sizes)
    if np.any((-stay)[1:] > _SLACK):  # new-community target
        return CheckOutcome(False, "brute-force")
    nmask = 1 << k
    masks = np.arange(nmask)
    targets = set()
    for v in members.tolist():
        ids, _ = g.neighbors(v)
        for u in ids.tolist():
            cu = int(comm[u])
            if cu != c:
                targets.add(cu)
    for d in sorted(targets):
        w_to_d = np.zeros(k)
        for i, v in enumerate(members.tolist()):
            ids, w = g.neighbors(v)
            w_to_d[i] = float(w[comm[ids] == d].sum())
        e_sd = np.zeros(nmask)
        for i in range(k):
            e_sd[((masks >> i) & 1).astype(bool)] += w_to_d[i]
        delta = (e_sd - ge * sizes * float(p.comm_size[d])) - stay
        if np.any(delta[1:] > _SLACK):
            return CheckOutcome(False, "brute-force")
    return CheckOutcome(True, "brute-force")


# ---------------------------------------------------------------------------
# Sampled searches (communities beyond the exact limit)


def _subset_cut_and_size(g: Graph, members_set: set, subset) -> tuple[float, float]:
    """(E(S, M-S), size of S) for a subset S inside member set M."""
    in_s = set(subset)
    e = 0.0
    s_size = 0.0
    for v in in_s:
        s_size += float(g.node_size[v])
        ids, w = g.neighbors(int(v))
        for u, wt in zip(ids.tolist(), w.tolist()):
            if u in members_set and u not in in_s:
                e += wt
    return e, s_size


def _candidate_subsets(g: Graph, members: np.ndarray, rng: np.random.Generator):
    """Single nodes, BFS-grown sets and random subsets (violations in
    practice are connectivity-shaped)."""
    members_l = members.tolist()
    members_set = set(members_l)
    for v in members_l:
        yield [v]
    for start in members_l[: min(len(members_l), 64)]:
        cur = {start}
        frontier = [start]
        while frontier and len(cur) < len(members_l) - 1:
            nxt = []
            for v in frontier:
                ids, _ = g.neighbors(int(v))
                for u in ids.tolist():
                    if u in members_set and u not in cur:
                        cur.add(u)
                        nxt.append(u)
            if nxt:
                yield list(cur)
            frontier = nxt
    k = len(members_l)
    for _ in range(_N_SAMPLED_SUBSETS):
        take = rng.random(k) < rng.uniform(0.05, 0.95)
        if 0 < take.sum() < k:
            yield members[take].tolist()


def _sampled_split_violation(g: Graph, members: np.ndarray, ge: float,
                             rng: np.random.Generator | None) -> bool:
    """Randomized search for a bipartition falling below the split gate."""
    rng = rng or np.random.default_rng(0)
    members_set = set(members.tolist())
    total_size = float(g.node_size[members].sum())
    for subset in _candidate_subsets(g, members, rng):
        e, s_size = _subset_cut_and_size(g, members_set, subset)
        if e < ge * s_size * (total_size - s_size) - _SLACK:
            return True
    return False


def _sampled_uniform_violation(g: Graph, p: Partition, c: int, ge: float,
                               rng: np.random.Generator | None) -> bool:
    rng = rng or np.random.default_rng(0)
    members = p.members(c)
    comm_size = float(p.comm_size[c])
    members_set = set(members.tolist())
    for subset in _candidate_subsets(g, members, rng):
        e, s_size = _subset_cut_and_size(g, members_set, subset)
        if e < ge * s_size * (comm_size - s_size) - _SLACK:
            return True
    return False


def _zero_move_ok(g: Graph, p: Partition, subset, ge: float) -> bool:
    """E(S, C-S) >= ge * |S| * (|C|-|S|) for S inside its community C."""
    in_s = set(subset)
    c = int(p.community_of[subset[0]])
    e = 0.0
    s_size = 0.0
    for v in subset:
        s_size += float(g.node_size[v])
        ids, w = g.neighbors(int(v))
        for u, wt in zip(ids.tolist(), w.tolist()):
            if u not in in_s and int(p.community_of[u]) == c:
                e += wt
    return e >= ge * s_size * (float(p.comm_size[c]) - s_size) - _SLACK


# ---------------------------------------------------------------------------
# Run witnesses (merge trees recorded by the refinement)


def connectivity_witnesses(result: RunResult, q: QualityConfig) -> dict[int, bool]:
    """Per-community flags proving gamma-connectivity from the run's merges.

    Walks the hierarchy: an aggregate node is proven connected when all its
    parts are proven and every recorded join met the connection gate at its
    level (re-checked numerically here).  Keys are community ids of
    ``result.partition``; truncated runs yield no entries.
    """
    return _witnesses(result, q, density=False)


def density_witnesses(result: RunResult, q: QualityConfig) -> dict[int, bool]:
    """Like :func:`connectivity_witnesses`, additionally requiring every join
    prefix, and every level node, to fail the move-to-new-community test.
    Meaningful for stable iterations."""
    return _witnesses(result, q, density=True)


def _witnesses(result: RunResult, q: QualityConfig, density: bool) -> dict[int, bool]:
    ge = q.gamma_eff
    levels = result.hierarchy.levels
    base_n = result.hierarchy.base_graph.n
    flags = np.ones(levels[0].graph.n, dtype=bool)
    for lvl in levels:
        g = lvl.graph
        p = lvl.partition
        if density:
            for v in range(g.n):
                if not _zero_move_ok(g, p, [v], ge):
                    flags[v] = False
        if lvl.lift is None:
            break
        agg_n = int(lvl.lift.max()) + 1
        nxt = np.ones(agg_n, dtype=bool)
        grouped: dict[int, list[int]] = {}
        for v in range(g.n):
            grouped.setdefault(int(lvl.lift[v]), []).append(v)
        orders = lvl.merge_orders or {}
        for a, ms in grouped.items():
            if len(ms) == 1:
                nxt[a] = flags[ms[0]]
                continue
            if lvl.refined is None:
                nxt[a] = False
                continue
            rc = int(lvl.refined.community_of[ms[0]])
            order = orders.get(rc)
            if order is None or len(order) != len(ms):
                nxt[a] = False
                continue
            ok = all(flags[v] for v in ms)
            if density and ok:
                ok = _zero_move_ok(g, p, order[:1], ge)
            cur = {order[0]}
            cur_size = float(g.node_size[order[0]])
            for v in order[1:]:
                if not ok:
                    break
                ids, w = g.neighbors(v)
                e = 0.0
                for u, wt in zip(ids.tolist(), w.tolist()):
                    if u in cur:
                        e += wt
                if e < ge * float(g.node_size[v]) * cur_size - _SLACK:
                    ok = False
                    break
                cur.add(v)
                cur_size += float(g.node_size[v])
                if density and len(cur) < len(ms) and not _zero_move_ok(
                        g, p, sorted(cur), ge):
                    ok = False
            nxt[a] = ok
        flags = nxt
    top = levels[-1]
    if top.partition.n_communities != top.graph.n:
        return {}
    node_at = np.arange(base_n, dtype=np.int64)
    for lvl in levels[:-1]:
        node_at = lvl.lift[node_at]
    out: dict[int, bool] = {}
    comm_of_base = result.partition.community_of
    for c in result.partition.communities().tolist():
        v = int(np.flatnonzero(comm_of_base == c)[0])
        out[c] = bool(flags[node_at[v]])
    return out


# ---------------------------------------------------------------------------
# Badly connected communities


@dataclass
class BadlyConnectedReport:
    connected: list[bool]
    badly_connected: list[bool]
    n_communities: int
    n_disconnected: int
    n_badly_connected: int

    @property
    def pct_disconnected(self) -> float:
        return 100.0 * self.n_disconnected / max(self.n_communities, 1)

    @property
    def pct_badly_connected(self) -> float:
        return 100.0 * self.n_badly_connected / max(self.n_communities, 1)


def detect_badly_connected(g: Graph, p: Partition, q: QualityConfig,
                           leiden_cfg: LeidenConfig | None = None,
                           rng: np.random.Generator | None = None,
                           max_iters: int = 100) -> BadlyConnectedReport:
    """Lower bound on badly connected communities via subnetwork re-clustering.

    A community counts as badly connected when running the refinement
    algorithm to a stable iteration on its induced subgraph splits it (the
    split is then guaranteed not to lower quality), or when it is
    disconnected outright.  The quality config keeps the whole-graph
    normalization so subnetwork optimization stays consistent with
    whole-network optimization.
    """
    if leiden_cfg is None:
        leiden_cfg = LeidenConfig(quality=q)
    if rng is None:
        rng = np.random.default_rng(leiden_cfg.seed)
    connected_flags: list[bool] = []
    badly_flags: list[bool] = []
    for c in p.communities().tolist():
        members = p.members(c)
        if len(members) == 1:
            connected_flags.append(True)
            badly_flags.append(False)
            continue
        sub, _ = induced_subgraph(g, members)
        is_conn = len(connected_components(sub)) == 1
        cur = None
        for _ in range(max_iters):
            res = leiden_iteration(sub, cur, leiden_cfg, rng=rng)
            if cur is not None and res.partition == cur:
                break
            cur = res.partition
        split = cur is not None and cur.n_communities >= 2
        connected_flags.append(is_conn)
        badly_flags.append(split or not is_conn)
    n = len(connected_flags)
    return BadlyConnectedReport(
        connected_flags, badly_flags, n,
        sum(not f for f in connected_flags), sum(badly_flags))


# ---------------------------------------------------------------------------
# Optimality gap bound


@dataclass
class BoundReport:
    applicable: bool
    variant: str  # unweighted | weighted | modularity
    inter_weight: float
    bound: float
    bound_all_pairs: float
    optimal_quality_cap: float | None
    note: str = ""


def optimality_gap_bound(g: Graph, p: Partition, q: QualityConfig,
                         uniform_verified: bool | None = None,
                         exact_limit: int = DEFAULT_EXACT_LIMIT) -> BoundReport:
    """Upper bound on how far ``p`` can be from an optimal partition.

    Valid only for uniformly gamma-dense partitions (verified here unless
    the caller already knows).  The primary bound uses the edge weight
    between distinct communities; the reading that also counts internal
    weight is reported alongside.  For unweighted CPM the equivalent form
    ``(1 - gamma) * m - gamma * (missing internal pair weight)`` caps the
    optimal quality itself.
    """
    if uniform_verified is None:
        uniform_verified = True
        for c in p.communities().tolist():
            out = check_uniform_gamma_density(g, p, q, int(c), exact_limit)
            if out.method not in EXACT_METHODS or not out.value:
                uniform_verified = False
                break
    comm = p.community_of
    inter = 0.0
    internal = 0.0
    for v in range(g.n):
        ids, w = g.neighbors(v)
        same = comm[ids] == comm[v]
        inter += float(w[~same].sum())
        internal += float(w[same].sum())
    inter /= 2.0  # both directions counted above
    internal = internal / 2.0 + float(g.self_loop.sum())
    unweighted = bool(g.weights.size == 0 or
                      (np.all(g.weights == 1.0) and np.all(g.self_loop == 0.0)))
    note = ""
    cap = None
    if q.kind == "modularity":
        variant = "modularity"
        factor = 1.0 - q.gamma / q.two_m
    elif unweighted:
        variant = "unweighted"
        factor = 1.0 - q.gamma
        if q.gamma >= 1.0:
            note = ("resolution >= 1 on an unweighted graph: bound <= 0, so a "
                    "uniformly dense partition is already optimal")
        sizes = p.comm_size[p.comm_members > 0]
        missing = float(np.sum(sizes * (sizes - 1.0) / 2.0)) - internal
        cap = (1.0 - q.gamma) * g.edge_weight_total - q.gamma * missing
    else:
        variant = "weighted"
        w_max = float(g.weights.max()) if g.weights.size else 1.0
        if g.self_loop.size and float(g.self_loop.max()) > w_max:
            w_max = float(g.self_loop.max())
        factor = 1.0 - q.gamma / w_max
    bound = factor * inter
    bound_all = factor * (inter + internal)
    return BoundReport(bool(uniform_verified), variant, inter, bound, bound_all,
                       cap, note)


# ---------------------------------------------------------------------------
# Build sequences, brute force, greedy simulation


@dataclass
class BuildSequenceResult:
    ok: bool
    orders: dict[int, list[int]]
    total_steps: int
    failed_communities: list[int]


def find_nondecreasing_build_sequence(g: Graph, target: Partition,
                                      q: QualityConfig) -> BuildSequenceResult:
    """Per-community node order growing each community by non-negative moves.

    Starting from singletons, each step adds a node whose move into the
    growing set does not decrease quality.  Such an order exists for every
    optimal partition; failure on one is a bug signal.
    """
    ge = q.gamma_eff
    orders: dict[int, list[int]] = {}
    failed: list[int] = []
    total = 0
    for c in target.communities().tolist():
        members = target.members(c)
        local = _greedy_witness(g, members, ge)
        if local is None:
            failed.append(c)
        else:
            orders[c] = [int(members[i]) for i in local]
            total += len(members) - 1
    return BuildSequenceResult(not failed, orders, total, failed)


def brute_force_optimal(g: Graph, q: QualityConfig, n_limit: int = 12) -> Partition:
    """Exact best partition by exhaustive set-partition enumeration.

    Ties break toward the first partition found, which is the one with the
    lexicographically smallest canonical labeling.
    """
    n = g.n
    if n > n_limit:
        raise ValueError(f"graph too large for exhaustive search ({n} > {n_limit})")
    ge = q.gamma_eff
    sz = g.node_size.tolist()
    selfw = g.self_loop.tolist()
    # Edges to lower-numbered nodes only: enough for incremental evaluation.
    back_edges: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for v in range(n):
        ids, w = g.neighbors(v)
        for u, wt in zip(ids.tolist(), w.tolist()):
            if u < v:
                back_edges[v].append((u, wt))
    labels = [0] * n
    block_size = [0.0] * (n + 1)
    best_q = -float("inf")
    best: list[int] | None = None

    def place(i: int, nb: int, acc: float):
        nonlocal best_q, best
        if i == n:
            if acc > best_q:
                best_q = acc
                best = labels.copy()
            return
        w_to = [0.0] * nb
        for u, wt in back_edges[i]:
            w_to[labels[u]] += wt
        si = sz[i]
        base = selfw[i] - ge * si * (si - 1.0) / 2.0
        for b in range(nb):
            labels[i] = b
            dq = base + w_to[b] - ge * si * block_size[b]
            block_size[b] += si
            place(i + 1, nb, acc + dq)
            block_size[b] -= si
        labels[i] = nb
        block_size[nb] = si
        place(i + 1, nb + 1, acc + base)
        block_size[nb] = 0.0

    place(0, 0, 0.0)
    assert best is not None
    return Partition.from_labels(g, np.asarray(best, dtype=np.int64))


def greedy_sweep_fixed_point(g: Graph, q: QualityConfig, order,
                             max_sweeps: int = 1000, kernels=None) -> Partition:
    """Repeat greedy single-node sweeps in a fixed order until nothing moves.

    Every move goes to the strictly best candidate community, so the whole
    run is one greedy move sequence from the singleton partition.
    """
    k = kernels or _kernels
    order = np.asarray(order, dtype=np.int64)
    p = Partition.singleton(g)
    ge = q.gamma_eff
    for _ in range(max_sweeps):
        moves, _ = k.sweep_nodes(
            g.indptr, g.indices, g.weights, g.self_loop, g.node_size,
            p.community_of, p.comm_size, p.comm_internal, p.comm_members,
            p._free, p._meta, ge, order)
        if moves == 0:
            return p
    raise RuntimeError("greedy sweeps did not reach a fixed point")


# ---------------------------------------------------------------------------
# Full audit


@dataclass
class CommunityVerdicts:
    community: int
    members: list[int]
    connected: bool
    gamma_connected: CheckOutcome
    subpartition_gamma_dense: CheckOutcome | None
    uniformly_gamma_dense: CheckOutcome | None
    subset_optimal: CheckOutcome | None


@dataclass
class GuaranteeReport:
    """Per-community verdicts for the six guarantees plus the gap bound."""

    gamma_separated: bool
    separation_violations: list
    node_optimal: bool
    node_violations: list
    communities: list[CommunityVerdicts]
    bound: BoundReport | None
    notes: list[str] = field(default_factory=list)

    @property
    def all_connected(self) -> bool:
        return all(cv.connected for cv in self.communities)

    @property
    def all_gamma_connected(self) -> bool:
        return all(cv.gamma_connected.value for cv in self.communities)

    def validate_implication_chain(self) -> None:
        """Exact verdicts must respect subset-optimal => uniformly-dense =>
        subpartition-dense => gamma-connected => connected."""
        for cv in self.communities:
            chain = [cv.subset_optimal, cv.uniformly_gamma_dense,
                     cv.subpartition_gamma_dense, cv.gamma_connected,
                     CheckOutcome(cv.connected, "exact")]
            known = [c for c in chain if c is not None]
            for i in range(len(known)):
                for j in range(i + 1, len(known)):
                    if (known[i].method in EXACT_METHODS
                            and known[j].method in EXACT_METHODS
                            and known[i].value and not known[j].value):
                        raise RuntimeError(
                            f"implication chain violated for community {cv.community}")

    def to_dict(self) -> dict:
        def enc(out):
            if out is None:
                return None
            return {"value": bool(out.value), "method": out.method}

        return {
            "gamma_separated": self.gamma_separated,
            "separation_violations": [list(v) for v in self.separation_violations],
            "node_optimal": self.node_optimal,
            "all_connected": self.all_connected,
            "all_gamma_connected": self.all_gamma_connected,
            "bound": None if self.bound is None else {
                "applicable": self.bound.applicable,
                "variant": self.bound.variant,
                "inter_community_weight": self.bound.inter_weight,
                "bound": self.bound.bound,
                "bound_all_pairs": self.bound.bound_all_pairs,
                "optimal_quality_cap": self.bound.optimal_quality_cap,
                "note": self.bound.note,
            },
            "notes": self.notes,
            "communities": [
                {
                    "community": cv.community,
                    "members": cv.members,
                    "connected": cv.connected,
                    "gamma_connected": enc(cv.gamma_connected),
                    "subpartition_gamma_dense": enc(cv.subpartition_gamma_dense),
                    "uniformly_gamma_dense": enc(cv.uniformly_gamma_dense),
                    "subset_optimal": enc(cv.subset_optimal),
                }
                for cv in self.communities
            ],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def audit(g: Graph, p: Partition, q: QualityConfig, level: str = "full",
          exact_limit: int = DEFAULT_EXACT_LIMIT,
          rng: np.random.Generator | None = None,
          run_result: RunResult | None = None) -> GuaranteeReport:
    """Run the guarantee checkers over a partition and assemble the report.

    ``level="fast"`` checks separation, connectivity and node optimality;
    ``"full"`` adds the density and subset checks and the gap bound.  When
    ``run_result`` is the run that produced ``p``, its recorded merge orders
    serve as connectivity/density witnesses.
    """
    if level not in ("fast", "full"):
        raise ValueError("audit level must be 'fast' or 'full'")
    rng = rng or np.random.default_rng(0)
    conn_w: dict[int, bool] = {}
    dens_w: dict[int, bool] = {}
    if run_result is not None and run_result.partition == p:
        conn_w = connectivity_witnesses(run_result, q)
        dens_w = density_witnesses(run_result, q)
    sep = check_gamma_separation(g, p, q)
    node_ok, node_viol = check_node_optimality(g, p, q)
    communities = []
    for c in p.communities().tolist():
        members = p.members(c)
        sub, _ = induced_subgraph(g, members)
        connected = len(connected_components(sub)) == 1
        gc = check_gamma_connectivity(g, members, q, exact_limit, rng,
                                      certified=conn_w.get(c, False))
        spd = uni = sub_opt = None
        if level == "full":
            spd = check_subpartition_gamma_density(g, p, q, c, exact_limit, rng,
                                                   certified=dens_w.get(c, False))
            uni = check_uniform_gamma_density(g, p, q, c, exact_limit, rng)
            sub_opt = check_subset_optimality(g, p, q, c, exact_limit)
        communities.append(CommunityVerdicts(
            int(c), members.tolist(), connected, gc, spd, uni, sub_opt))
    bound = None
    if level == "full":
        uniform_ok = all(
            cv.uniformly_gamma_dense.value
            and cv.uniformly_gamma_dense.method in EXACT_METHODS
            for cv in communities)
        bound = optimality_gap_bound(g, p, q, uniform_verified=uniform_ok)
    report = GuaranteeReport(sep.passed, sep.violations, node_ok, node_viol,
                             communities, bound)
    report.validate_implication_chain()
    return report
