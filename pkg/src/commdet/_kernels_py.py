"""Pure-Python local-move kernels (fallback when the compiled core is absent).

These mirror ``commdet._speedups`` operation for operation: given the same
inputs and the same pre-drawn random numbers, both backends perform the same
floating-point arithmetic in the same order and therefore produce identical
partitions.  Keep the two files in sync.

All kernels mutate the partition state arrays in place:

* ``community_of``  int64[n]   node -> community id
* ``comm_size``     float64[n] per-community node-size sum
* ``comm_internal`` float64[n] per-community internal weight (self-loops in)
* ``comm_members``  int64[n]   per-community member count
* ``free`` / ``meta``          recycled-id stack; meta = [stack top, #active]

A move is performed only when it strictly increases quality.  The candidate
set for a node is its current community, the communities of its neighbors
(first-touch order) and a fresh empty community, evaluated in that order
with strictly-greater updates, so the current community wins all ties and
earlier candidates win ties among the rest.
"""

from __future__ import annotations

from math import exp


def sweep_nodes(indptr, indices, weights, self_loop, node_size,
                community_of, comm_size, comm_internal, comm_members,
                free, meta, gamma_eff, order):
    """One full local-move pass over ``order``; returns (n_moves, total_gain)."""
    n = len(community_of)
    ptr = indptr.tolist()
    nbr = indices.tolist()
    wgt = weights.tolist()
    loop_w = self_loop.tolist()
    size = node_size.tolist()
    comm = community_of.tolist()
    csize = comm_size.tolist()
    cint = comm_internal.tolist()
    cmem = comm_members.tolist()
    free_l = free.tolist()
    free_top = int(meta[0])
    n_comms = int(meta[1])
    ge = float(gamma_eff)

    acc = [0.0] * n
    touched: list[int] = []
    moves = 0
    gain = 0.0

    for v in order.tolist():
        cv = comm[v]
        touched.clear()
        for j in range(ptr[v], ptr[v + 1]):
            c = comm[nbr[j]]
            if acc[c] == 0.0:
                touched.append(c)
            acc[c] += wgt[j]
        sv = size[v]
        stay = acc[cv] - ge * sv * (csize[cv] - sv)
        best_delta = 0.0
        best = cv
        for c in touched:
            if c == cv:
                continue
            d = (acc[c] - ge * sv * csize[c]) - stay
            if d > best_delta:
                best_delta = d
                best = c
        d_empty = -stay
        if d_empty > best_delta:
            best_delta = d_empty
            best = -1
        if best_delta > 0.0:
            if best == -1:
                free_top -= 1
                best = free_l[free_top]
                n_comms += 1
            comm[v] = best
            csize[cv] -= sv
            csize[best] += sv
            cmem[cv] -= 1
            cmem[best] += 1
            cint[cv] -= acc[cv] + loop_w[v]
            cint[best] += acc[best] + loop_w[v]
            if cmem[cv] == 0:
                csize[cv] = 0.0
                cint[cv] = 0.0
                free_l[free_top] = cv
                free_top += 1
                n_comms -= 1
            moves += 1
            gain += best_delta
        for c in touched:
            acc[c] = 0.0

    community_of[:] = comm
    comm_size[:] = csize
    comm_internal[:] = cint
    comm_members[:] = cmem
    free[:] = free_l
    meta[0] = free_top
    meta[1] = n_comms
    return moves, gain


def queue_moves(indptr, indices, weights, self_loop, node_size,
                community_of, comm_size, comm_internal, comm_members,
                free, meta, gamma_eff, order):
    """Queue-driven local move; returns (n_visits, n_moves, total_gain).

    The queue starts with all nodes in ``order``.  After a move, neighbors
    of the moved node outside its new community that are not queued are
    appended to the rear.  Terminates when the queue drains.
    """
    n = len(community_of)
    ptr = indptr.tolist()
    nbr = indices.tolist()
    wgt = weights.tolist()
    loop_w = self_loop.tolist()
    size = node_size.tolist()
    comm = community_of.tolist()
    csize = comm_size.tolist()
    cint = comm_internal.tolist()
    cmem = comm_members.tolist()
    free_l = free.tolist()
    free_top = int(meta[0])
    n_comms = int(meta[1])
    ge = float(gamma_eff)

    cap = n + 1
    ring = [0] * cap
    in_queue = [False] * n
    head = 0
    tail = 0
    for v in order.tolist():
        ring[tail] = v
        tail = (tail + 1) % cap
        in_queue[v] = True

    acc = [0.0] * n
    touched: list[int] = []
    visits = 0
    moves = 0
    gain = 0.0

    while head != tail:
        v = ring[head]
        head = (head + 1) % cap
        in_queue[v] = False
        visits += 1
        cv = comm[v]
        touched.clear()
        for j in range(ptr[v], ptr[v + 1]):
            c = comm[nbr[j]]
            if acc[c] == 0.0:
                touched.append(c)
            acc[c] += wgt[j]
        sv = size[v]
        stay = acc[cv] - ge * sv * (csize[cv] - sv)
        best_delta = 0.0
        best = cv
        for c in touched:
            if c == cv:
                continue
            d = (acc[c] - ge * sv * csize[c]) - stay
            if d > best_delta:
                best_delta = d
                best = c
        d_empty = -stay
        if d_empty > best_delta:
            best_delta = d_empty
            best = -1
        if best_delta > 0.0:
            if best == -1:
                free_top -= 1
                best = free_l[free_top]
                n_comms += 1
            comm[v] = best
            csize[cv] -= sv
            csize[best] += sv
            cmem[cv] -= 1
            cmem[best] += 1
            cint[cv] -= acc[cv] + loop_w[v]
            cint[best] += acc[best] + loop_w[v]
            if cmem[cv] == 0:
                csize[cv] = 0.0
                cint[cv] = 0.0
                free_l[free_top] = cv
                free_top += 1
                n_comms -= 1
            moves += 1
            gain += best_delta
            for j in range(ptr[v], ptr[v + 1]):
                u = nbr[j]
                if comm[u] != best and not in_queue[u]:
                    ring[tail] = u
                    tail = (tail + 1) % cap
                    in_queue[u] = True
        for c in touched:
            acc[c] = 0.0

    community_of[:] = comm
    comm_size[:] = csize
    comm_internal[:] = cint
    comm_members[:] = cmem
    free[:] = free_l
    meta[0] = free_top
    meta[1] = n_comms
    return visits, moves, gain


def refine_level(indptr, indices, weights, self_loop, node_size,
                 community_of, comm_size, comm_internal, comm_members,
                 free, meta, gamma_eff, theta,
                 members, offsets, subset_sizes, perms, uniforms):
    """Randomized merges of singleton communities inside each node subset.

    ``members`` concatenates the node sets to refine (one unrefined
    community per slice ``offsets[s]:offsets[s+1]``, total node size
    ``subset_sizes[s]``); the partition state arrays describe the refinement
    under construction, in which every member still starts in a singleton
    community.  ``perms`` holds one local-index permutation per slice and
    ``uniforms`` one draw per member, both aligned with ``members``.

    Only members whose connection to the rest of their subset reaches
    ``gamma_eff * size * (subset_size - size)`` are eligible to move, and
    only communities passing the same gate are eligible targets.  A target
    is drawn with probability proportional to exp(delta / theta) over the
    non-negative-delta candidates; staying put is always a candidate.

    Returns ``(events, visits)`` where ``events`` is the (node, community)
    join sequence actually performed.
    """
    n = len(community_of)
    ptr = indptr.tolist()
    nbr = indices.tolist()
    wgt = weights.tolist()
    loop_w = self_loop.tolist()
    size = node_size.tolist()
    comm = community_of.tolist()
    csize = comm_size.tolist()
    cint = comm_internal.tolist()
    cmem = comm_members.tolist()
    free_l = free.tolist()
    free_top = int(meta[0])
    n_comms = int(meta[1])
    ge = float(gamma_eff)
    th = float(theta)
    mem_all = members.tolist()
    offs = offsets.tolist()
    sizes_s = subset_sizes.tolist()
    perm_all = perms.tolist()
    unif = uniforms.tolist()

    in_subset = [False] * n
    sconn = [0.0] * n
    e_to_s = [0.0] * len(mem_all)
    eligible = [False] * len(mem_all)
    acc = [0.0] * n
    touched: list[int] = []
    cand: list[int] = []
    cand_delta: list[float] = []
    events: list[tuple[int, int]] = []
    visits = 0

    for s in range(len(offs) - 1):
        base = offs[s]
        end = offs[s + 1]
        s_size = sizes_s[s]
        for i in range(base, end):
            in_subset[mem_all[i]] = True
        # Connection of each member to the rest of the subset, and the
        # well-connectedness gate for visiting it at all.
        for i in range(base, end):
            v = mem_all[i]
            e = 0.0
            for j in range(ptr[v], ptr[v + 1]):
                if in_subset[nbr[j]]:
                    e += wgt[j]
            e_to_s[i] = e
            eligible[i] = e >= ge * size[v] * (s_size - size[v])
            sconn[comm[v]] = e

        for pi in range(base, end):
            i = base + perm_all[pi]
            if not eligible[i]:
                continue
            v = mem_all[i]
            cv = comm[v]
            if cmem[cv] != 1:
                continue
            visits += 1
            touched.clear()
            for j in range(ptr[v], ptr[v + 1]):
                u = nbr[j]
                if not in_subset[u]:
                    continue
                c = comm[u]
                if acc[c] == 0.0:
                    touched.append(c)
                acc[c] += wgt[j]
            sv = size[v]
            cand.clear()
            cand_delta.clear()
            # Staying in the own singleton community is always possible.
            cand.append(cv)
            cand_delta.append(0.0)
            dmax = 0.0
            for c in touched:
                if c == cv:
                    continue
                if sconn[c] < ge * csize[c] * (s_size - csize[c]):
                    continue
                d = acc[c] - ge * sv * csize[c]
                if d < 0.0:
                    continue
                cand.append(c)
                cand_delta.append(d)
                if d > dmax:
                    dmax = d
            target = cv
            if len(cand) > 1:
                total = 0.0
                for d in cand_delta:
                    total += exp((d - dmax) / th)
                r = unif[i] * total
                cum = 0.0
                target = cand[-1]
                for c, d in zip(cand, cand_delta):
                    cum += exp((d - dmax) / th)
                    if r < cum:
                        target = c
                        break
            if target != cv:
                comm[v] = target
                csize[cv] = 0.0
                cint[cv] = 0.0
                cmem[cv] = 0
                free_l[free_top] = cv
                free_top += 1
                n_comms -= 1
                csize[target] += sv
                cmem[target] += 1
                cint[target] += acc[target] + loop_w[v]
                sconn[target] += e_to_s[i] - 2.0 * acc[target]
                events.append((v, target))
            for c in touched:
                acc[c] = 0.0

        for i in range(base, end):
            in_subset[mem_all[i]] = False

    community_of[:] = comm
    comm_size[:] = csize
    comm_internal[:] = cint
    comm_members[:] = cmem
    free[:] = free_l
    meta[0] = free_top
    meta[1] = n_comms
    return events, visits
