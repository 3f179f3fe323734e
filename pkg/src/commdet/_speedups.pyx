# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled local-move kernels.

Semantics mirror ``commdet._kernels_py`` operation for operation (same
arithmetic in the same order, same tie-breaking, same consumption of
pre-drawn randomness), so the two backends produce identical partitions.
Keep the two files in sync.
"""

from libc.math cimport exp
from libc.stdint cimport int64_t

import numpy as np


def sweep_nodes(const int64_t[::1] indptr, const int64_t[::1] indices,
                const double[::1] weights, const double[::1] self_loop,
                const double[::1] node_size,
                int64_t[::1] community_of, double[::1] comm_size,
                double[::1] comm_internal, int64_t[::1] comm_members,
                int64_t[::1] free_ids, int64_t[::1] meta,
                double gamma_eff, const int64_t[::1] order):
    """One full local-move pass over ``order``; returns (n_moves, total_gain)."""
    cdef Py_ssize_t n = community_of.shape[0]
    cdef double[::1] acc = np.zeros(n)
    cdef int64_t[::1] touched = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t i, j, t, k
    cdef int64_t v, cv, c, best
    cdef double sv, stay, best_delta, d, d_empty
    cdef double ge = gamma_eff
    cdef int64_t free_top = meta[0]
    cdef int64_t n_comms = meta[1]
    cdef long moves = 0
    cdef double gain = 0.0

    for i in range(order.shape[0]):
        v = order[i]
        cv = community_of[v]
        k = 0
        for j in range(indptr[v], indptr[v + 1]):
            c = community_of[indices[j]]
            if acc[c] == 0.0:
                touched[k] = c
                k += 1
            acc[c] += weights[j]
        sv = node_size[v]
        stay = acc[cv] - ge * sv * (comm_size[cv] - sv)
        best_delta = 0.0
        best = cv
        for t in range(k):
            c = touched[t]
            if c == cv:
                continue
            d = (acc[c] - ge * sv * comm_size[c]) - stay
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
                best = free_ids[free_top]
                n_comms += 1
            community_of[v] = best
            comm_size[cv] -= sv
            comm_size[best] += sv
            comm_members[cv] -= 1
            comm_members[best] += 1
            comm_internal[cv] -= acc[cv] + self_loop[v]
            comm_internal[best] += acc[best] + self_loop[v]
            if comm_members[cv] == 0:
                comm_size[cv] = 0.0
                comm_internal[cv] = 0.0
                free_ids[free_top] = cv
                free_top += 1
                n_comms -= 1
            moves += 1
            gain += best_delta
        for t in range(k):
            acc[touched[t]] = 0.0

    meta[0] = free_top
    meta[1] = n_comms
    return moves, gain


def queue_moves(const int64_t[::1] indptr, const int64_t[::1] indices,
                const double[::1] weights, const double[::1] self_loop,
                const double[::1] node_size,
                int64_t[::1] community_of, double[::1] comm_size,
                double[::1] comm_internal, int64_t[::1] comm_members,
                int64_t[::1] free_ids, int64_t[::1] meta,
                double gamma_eff, const int64_t[::1] order):
    """Queue-driven local move; returns (n_visits, n_moves, total_gain)."""
    cdef Py_ssize_t n = community_of.shape[0]
    cdef double[::1] acc = np.zeros(n)
    cdef int64_t[::1] touched = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t cap = n + 1
    cdef int64_t[::1] ring = np.empty(cap, dtype=np.int64)
    cdef unsigned char[::1] in_queue = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t head = 0, tail = 0
    cdef Py_ssize_t i, j, t, k
    cdef int64_t v, u, cv, c, best
    cdef double sv, stay, best_delta, d, d_empty
    cdef double ge = gamma_eff
    cdef int64_t free_top = meta[0]
    cdef int64_t n_comms = meta[1]
    cdef long visits = 0, moves = 0
    cdef double gain = 0.0

    for i in range(order.shape[0]):
        v = order[i]
        ring[tail] = v
        tail = (tail + 1) % cap
        in_queue[v] = 1

    while head != tail:
        v = ring[head]
        head = (head + 1) % cap
        in_queue[v] = 0
        visits += 1
        cv = community_of[v]
        k = 0
        for j in range(indptr[v], indptr[v + 1]):
            c = community_of[indices[j]]
            if acc[c] == 0.0:
                touched[k] = c
                k += 1
            acc[c] += weights[j]
        sv = node_size[v]
        stay = acc[cv] - ge * sv * (comm_size[cv] - sv)
        best_delta = 0.0
        best = cv
        for t in range(k):
            c = touched[t]
            if c == cv:
                continue
            d = (acc[c] - ge * sv * comm_size[c]) - stay
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
                best = free_ids[free_top]
                n_comms += 1
            community_of[v] = best
            comm_size[cv] -= sv
            comm_size[best] += sv
            comm_members[cv] -= 1
            comm_members[best] += 1
            comm_internal[cv] -= acc[cv] + self_loop[v]
            comm_internal[best] += acc[best] + self_loop[v]
            if comm_members[cv] == 0:
                comm_size[cv] = 0.0
                comm_internal[cv] = 0.0
                free_ids[free_top] = cv
                free_top += 1
                n_comms -= 1
            moves += 1
            gain += best_delta
            for j in range(indptr[v], indptr[v + 1]):
                u = indices[j]
                if community_of[u] != best and not in_queue[u]:
                    ring[tail] = u
                    tail = (tail + 1) % cap
                    in_queue[u] = 1
        for t in range(k):
            acc[touched[t]] = 0.0

    meta[0] = free_top
    meta[1] = n_comms
    return visits, moves, gain


def refine_level(const int64_t[::1] indptr, const int64_t[::1] indices,
                 const double[::1] weights, const double[::1] self_loop,
                 const double[::1] node_size,
                 int64_t[::1] community_of, double[::1] comm_size,
                 double[::1] comm_internal, int64_t[::1] comm_members,
                 int64_t[::1] free_ids, int64_t[::1] meta,
                 double gamma_eff, double theta,
                 const int64_t[::1] members, const int64_t[::1] offsets,
                 const double[::1] subset_sizes,
                 const int64_t[::1] perms, const double[::1] uniforms):
    """Randomized merges of singleton communities inside each node subset.

    See the pure-Python twin for the full contract.  Returns
    ``(events, visits)`` with events as a list of (node, community) joins.
    """
    cdef Py_ssize_t n = community_of.shape[0]
    cdef Py_ssize_t m = members.shape[0]
    cdef unsigned char[::1] in_subset = np.zeros(n, dtype=np.uint8)
    cdef double[::1] e_to_s = np.zeros(m)
    cdef unsigned char[::1] eligible = np.zeros(m, dtype=np.uint8)
    cdef double[::1] sconn = np.zeros(n)
    cdef double[::1] acc = np.zeros(n)
    cdef int64_t[::1] touched = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] cand = np.empty(n + 1, dtype=np.int64)
    cdef double[::1] cand_delta = np.empty(n + 1, dtype=np.float64)
    cdef Py_ssize_t s, i, pi, j, t, k, nc, base, end
    cdef int64_t v, u, cv, c, target
    cdef double e, sv, d, dmax, total, r, cum, s_size
    cdef double ge = gamma_eff
    cdef double th = theta
    cdef int64_t free_top = meta[0]
    cdef int64_t n_comms = meta[1]
    cdef long visits = 0
    events = []

    for s in range(offsets.shape[0] - 1):
        base = offsets[s]
        end = offsets[s + 1]
        s_size = subset_sizes[s]
        for i in range(base, end):
            in_subset[members[i]] = 1
        for i in range(base, end):
            v = members[i]
            e = 0.0
            for j in range(indptr[v], indptr[v + 1]):
                if in_subset[indices[j]]:
                    e += weights[j]
            e_to_s[i] = e
            eligible[i] = e >= ge * node_size[v] * (s_size - node_size[v])
            sconn[community_of[v]] = e

        for pi in range(base, end):
            i = base + perms[pi]
            if not eligible[i]:
                continue
            v = members[i]
            cv = community_of[v]
            if comm_members[cv] != 1:
                continue
            visits += 1
            k = 0
            for j in range(indptr[v], indptr[v + 1]):
                u = indices[j]
                if not in_subset[u]:
                    continue
                c = community_of[u]
                if acc[c] == 0.0:
                    touched[k] = c
                    k += 1
                acc[c] += weights[j]
            sv = node_size[v]
            nc = 0
            cand[nc] = cv
            cand_delta[nc] = 0.0
            nc += 1
            dmax = 0.0
            for t in range(k):
                c = touched[t]
                if c == cv:
                    continue
                if sconn[c] < ge * comm_size[c] * (s_size - comm_size[c]):
                    continue
                d = acc[c] - ge * sv * comm_size[c]
                if d < 0.0:
                    continue
                cand[nc] = c
                cand_delta[nc] = d
                nc += 1
                if d > dmax:
                    dmax = d
            target = cv
            if nc > 1:
                total = 0.0
                for t in range(nc):
                    total += exp((cand_delta[t] - dmax) / th)
                r = uniforms[i] * total
                cum = 0.0
                target = cand[nc - 1]
                for t in range(nc):
                    cum += exp((cand_delta[t] - dmax) / th)
                    if r < cum:
                        target = cand[t]
                        break
            if target != cv:
                community_of[v] = target
                comm_size[cv] = 0.0
                comm_internal[cv] = 0.0
                comm_members[cv] = 0
                free_ids[free_top] = cv
                free_top += 1
                n_comms -= 1
                comm_size[target] += sv
                comm_members[target] += 1
                comm_internal[target] += acc[target] + self_loop[v]
                sconn[target] += e_to_s[i] - 2.0 * acc[target]
                events.append((int(v), int(target)))
            for t in range(k):
                acc[touched[t]] = 0.0

        for i in range(base, end):
            in_subset[members[i]] = 0

    meta[0] = free_top
    meta[1] = n_comms
    return events, visits
