"""Solver backends over a precomputed candidate list.

Every backend returns indices into ``problem.candidates``. Exactness claims
are made by the caller from the returned ``proven`` flag.
"""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linear_sum_assignment, milp
from scipy.sparse.csgraph import maximum_bipartite_matching

from .params import Method
from .problem import MatchingProblem

AGG_TOL = 5e-10  # kept below the verifier's tolerance


def _groups(problem: MatchingProblem) -> List[np.ndarray]:
    """Candidate indices per exposed period, in time order."""
    te = problem.candidates.te
    return [np.flatnonzero(te == t) for t in problem.exposed]


def _times(problem: MatchingProblem, k: int) -> Tuple[int, ...]:
    c = problem.candidates
    return (int(c.te[k]), int(c.u1[k])) + ((int(c.u2[k]),) if c.u2[k] > 0 else ())


def aggregates_ok(problem: MatchingProblem, idx) -> bool:
    """Mean time and mean covariate constraints for a selection."""
    idx = np.asarray(idx, dtype=int)
    n = idx.size
    if n == 0:
        return True
    G, caps = problem.gap_columns()
    return bool(np.all(np.abs(G[idx].sum(axis=0)) <= caps * n + AGG_TOL * n))


def relaxed_upper_bound(problem: MatchingProblem) -> int:
    """Maximum matching between exposed periods and the unexposed periods they can reach.

    Every match uses its exposed period and at least one distinct unexposed
    period, so this bounds the cardinality of every feasible match set.
    """
    c = problem.candidates
    if len(c) == 0:
        return 0
    rows = np.concatenate([c.te, c.te[c.u2 > 0]])
    cols = np.concatenate([c.u1, c.u2[c.u2 > 0]])
    T = problem.covariates.T
    graph = sparse.csr_matrix((np.ones(rows.size), (rows - 1, cols - 1)), shape=(T, T))
    graph.data[:] = 1
    match = maximum_bipartite_matching(graph, perm_type="column")
    return int(np.sum(match >= 0))


# --------------------------------------------------------------------------
# branch and bound


def branch_and_bound(problem: MatchingProblem, node_limit: int = 20000):
    """Depth-first search over exposed periods in time order.

    Each exposed period either takes one of its candidates (in lexicographic
    order) or stays unmatched (tried last). The incumbent is replaced only by
    a strictly better solution under (more matches, smaller total absolute
    time gap), so ties resolve to the lexicographically earliest match list.

    Returns:
        (indices, proven, nodes)
    """
    c = problem.candidates
    groups = [g for g in _groups(problem) if g.size]
    times = [_times(problem, k) for k in range(len(c))]
    absgap = c.absgap
    used = set()
    best = {"count": -1, "gap": math.inf, "sel": []}
    nodes = 0
    aborted = False

    def available(g):
        return any(all(t not in used for t in times[k]) for k in g)

    def visit(i, sel, gap):
        nonlocal nodes, aborted
        nodes += 1
        if nodes > node_limit:
            aborted = True
            return
        count = len(sel)
        remaining = sum(1 for g in groups[i:] if available(g))
        bound = count + remaining
        if bound < best["count"] or (bound == best["count"] and gap >= best["gap"]):
            return
        if i == len(groups):
            if aggregates_ok(problem, sel):
                if count > best["count"] or gap < best["gap"]:
                    best.update(count=count, gap=gap, sel=list(sel))
            return
        for k in groups[i]:
            ts = times[k]
            if any(t in used for t in ts):
                continue
            used.update(ts)
            sel.append(k)
            visit(i + 1, sel, gap + absgap[k])
            sel.pop()
            used.difference_update(ts)
            if aborted:
                return
        visit(i + 1, sel, gap)

    visit(0, [], 0)
    sel = best["sel"] if best["count"] >= 0 else []
    return np.array(sel, dtype=int), not aborted, nodes


# --------------------------------------------------------------------------
# assignment fast path (1-1 only)


def assignment_matching(problem: MatchingProblem) -> np.ndarray:
    """Maximum-cardinality, minimum-total-gap pair matching ignoring aggregates."""
    c = problem.candidates
    if len(c) == 0:
        return np.zeros(0, dtype=int)
    ex = {int(t): r for r, t in enumerate(problem.exposed)}
    un = {int(t): r for r, t in enumerate(problem.unexposed)}
    W = float(c.absgap.max()) + 1.0
    cost = np.zeros((len(ex), len(un)))
    index = -np.ones((len(ex), len(un)), dtype=int)
    pairs = np.flatnonzero(c.u2 == 0)
    r = np.array([ex[int(t)] for t in c.te[pairs]], dtype=int)
    col = np.array([un[int(t)] for t in c.u1[pairs]], dtype=int)
    cost[r, col] = c.absgap[pairs] - W
    index[r, col] = pairs
    rows, cols = linear_sum_assignment(cost)
    chosen = index[rows, cols]
    return np.sort(chosen[chosen >= 0])


# --------------------------------------------------------------------------
# HiGHS


def solve_milp(problem: MatchingProblem, time_limit: float = 60.0, aggregates: bool = True,
               tiebreak: bool = True, tiebreak_limit: float = 10.0):
    """Solve the 0-1 program with HiGHS in two phases.

    Phase one maximizes the number of matches. Phase two (optional) fixes
    that number and minimizes the total absolute time gap; if it runs out of
    time, its best answer (or phase one's) is kept, since cardinality is
    already settled. A single weighted objective proved much slower.

    Returns:
        (indices, proven) or ``None`` when HiGHS produced no solution.
    """
    c = problem.candidates
    n = len(c)
    if n == 0:
        return np.zeros(0, dtype=int), True
    p = problem.params
    T = problem.covariates.T
    rows = np.concatenate([c.te - 1, c.u1 - 1, c.u2[c.u2 > 0] - 1])
    cols = np.concatenate([np.arange(n), np.arange(n), np.flatnonzero(c.u2 > 0)])
    use = sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(T, n))
    use = use[np.flatnonzero(use.getnnz(axis=1) > 1)]
    blocks = [use]
    ub = [np.ones(use.shape[0])]
    if aggregates:
        G, caps = problem.gap_columns()
        agg = [G[:, 0] - caps[0], -G[:, 0] - caps[0]]  # half-integer time gaps are exact
        eta = 1e-7  # keeps HiGHS's feasibility tolerance from leaking past the verifier
        for s in range(1, G.shape[1]):
            agg += [G[:, s] - caps[s] + eta, -G[:, s] - caps[s] + eta]
        blocks.append(sparse.csr_matrix(np.vstack(agg)))
        ub.append(np.zeros(len(agg)))
    A = sparse.vstack(blocks).tocsr()
    ub = np.concatenate(ub)
    opts = {"time_limit": float(time_limit), "mip_rel_gap": 0.0, "disp": False}
    res = milp(-np.ones(n), constraints=[LinearConstraint(A, -np.inf, ub)], integrality=np.ones(n),
               bounds=Bounds(0, 1), options=opts)
    if res.x is None:
        return None
    idx = np.flatnonzero(np.round(res.x) > 0.5)
    proven = res.status == 0
    if not (tiebreak and proven) or idx.size == 0:
        return idx, proven
    count = idx.size
    A2 = sparse.vstack([A, sparse.csr_matrix(np.ones((1, n)))]).tocsr()
    lo = np.concatenate([np.full(ub.size, -np.inf), [count]])
    opts["time_limit"] = float(min(time_limit, tiebreak_limit))
    res2 = milp(c.absgap.astype(float), constraints=[LinearConstraint(A2, lo, np.concatenate([ub, [count]]))],
                integrality=np.ones(n), bounds=Bounds(0, 1), options=opts)
    if res2.x is not None:
        idx2 = np.flatnonzero(np.round(res2.x) > 0.5)
        if idx2.size == count and c.absgap[idx2].sum() <= c.absgap[idx].sum():
            idx = idx2
    return idx, proven


# --------------------------------------------------------------------------
# local-search heuristic


class _Search:
    def __init__(self, problem: MatchingProblem, seed: int):
        self.p = problem
        c = problem.candidates
        self.c = c
        T = problem.covariates.T
        self.group = np.searchsorted(problem.exposed, c.te)
        self.sel = -np.ones(problem.n_exposed, dtype=int)
        self.owner = -np.ones(T + 1, dtype=int)
        self.u2_or0 = c.u2.copy()
        self.contrib, self.bounds = problem.gap_columns()
        floor = np.full(self.bounds.size, 0.01)
        floor[0] = 0.5
        self.weights = 1.0 / np.maximum(self.bounds, floor)
        self.priority = np.random.default_rng(seed).permutation(len(c))

    # state helpers
    def selected(self) -> np.ndarray:
        return self.sel[self.sel >= 0]

    def assign(self, g, k):
        cur = self.sel[g]
        if cur >= 0:
            for t in _times(self.p, cur):
                self.owner[t] = -1
        self.sel[g] = k
        if k >= 0:
            for t in _times(self.p, k):
                self.owner[t] = g

    def violation(self, sums, n):
        excess = np.maximum(0.0, np.abs(sums) - self.bounds[None, :] * n[:, None] - AGG_TOL * np.maximum(1, n)[:, None])
        return excess @ self.weights

    def state(self):
        idx = self.selected()
        sums = self.contrib[idx].sum(axis=0) if idx.size else np.zeros(self.contrib.shape[1])
        return sums, idx.size

    def moves(self, allow_add=True, tabu=None):
        """Score every replace/add move and every drop move.

        Returns arrays (group, new candidate or -1, new violation, new n, gap change).
        """
        c = self.c
        sums, n = self.state()
        cur = self.sel[self.group]
        g = self.group
        free = lambda ts: (self.owner[ts] == -1) | (self.owner[ts] == g)
        ok = free(c.te) & free(c.u1) & np.where(c.u2 > 0, free(np.maximum(c.u2, 0)), True)
        ok &= cur != np.arange(len(c))
        if not allow_add:
            ok &= cur >= 0
        if tabu is not None:
            ok &= ~(tabu[g] & (cur < 0))
        k = np.flatnonzero(ok)
        cur_k = cur[k]
        had = cur_k >= 0
        new_sums = sums[None, :] + self.contrib[k] - np.where(had[:, None], self.contrib[np.maximum(cur_k, 0)], 0.0)
        new_n = n + (~had).astype(int)
        dgap = c.absgap[k] - np.where(had, c.absgap[np.maximum(cur_k, 0)], 0)
        # drops
        dg = np.flatnonzero(self.sel >= 0)
        d_sums = sums[None, :] - self.contrib[self.sel[dg]]
        d_n = np.full(dg.size, n - 1)
        groups = np.concatenate([g[k], dg])
        new = np.concatenate([k, -np.ones(dg.size, dtype=int)])
        all_sums = np.vstack([new_sums, d_sums]) if (k.size or dg.size) else np.zeros((0, sums.size))
        all_n = np.concatenate([new_n, d_n])
        viol = self.violation(all_sums, all_n) if all_n.size else np.zeros(0)
        gap = np.concatenate([dgap, -c.absgap[self.sel[dg]]])
        prio = np.concatenate([self.priority[k], len(c) + dg])
        return groups, new, viol, all_n, gap, prio


def _initial(problem: MatchingProblem, search: _Search):
    c = problem.candidates
    if problem.method is not Method.ONE_TWO:
        for k in assignment_matching(problem):
            search.assign(search.group[k], k)
        if problem.method is Method.ONE_ONE_OR_TWO:
            # upgrade pairs to triples when a free partner on the other side exists
            trip = np.flatnonzero(c.u2 > 0)
            for g in np.flatnonzero(search.sel >= 0):
                k0 = search.sel[g]
                opts = [k for k in trip if search.group[k] == g and (c.u1[k] == c.u1[k0] or c.u2[k] == c.u1[k0])
                        and all(search.owner[t] in (-1, g) for t in _times(problem, k))]
                if opts:
                    best = min(opts, key=lambda k: (c.absgap[k], search.priority[k]))
                    search.assign(g, best)
        return
    order = sorted(range(problem.n_exposed), key=lambda g: (np.sum(search.group == g), g))
    for g in order:
        opts = [k for k in np.flatnonzero(search.group == g)
                if all(search.owner[t] == -1 for t in _times(problem, k))]
        if opts:
            search.assign(g, min(opts, key=lambda k: (c.absgap[k], search.priority[k])))


def local_search(problem: MatchingProblem, seed: int = 0, move_budget: int = 50000, start=None) -> np.ndarray:
    """Repair a maximum matching until every aggregate constraint holds.

    Improving replace/add/drop moves are applied greedily (best violation
    reduction, then more matches, smaller gap, seeded order). When no move
    improves, the least harmful drop is forced and that exposed period is
    barred from re-entry during repair, so the search terminates. Afterwards
    unmatched periods are re-added while feasibility is kept.
    """
    search = _Search(problem, seed)
    if len(problem.candidates) == 0:
        return np.zeros(0, dtype=int)
    if start is None:
        _initial(problem, search)
    else:
        for k in start:
            search.assign(search.group[k], k)
    tabu = np.zeros(problem.n_exposed, dtype=bool)
    moves = 0

    def current_violation():
        sums, n = search.state()
        return float(search.violation(sums[None, :], np.array([n]))[0])

    v = current_violation()
    while v > 0 and moves < move_budget:
        groups, new, viol, n_new, gap, prio = search.moves(tabu=tabu)
        if groups.size == 0:
            break
        order = np.lexsort((prio, gap, -n_new, viol))
        b = order[0]
        if viol[b] < v - 1e-12:
            search.assign(groups[b], new[b])
        else:
            drops = np.flatnonzero(new < 0)
            b = drops[np.lexsort((prio[drops], viol[drops]))[0]]
            search.assign(groups[b], -1)
            tabu[groups[b]] = True
        moves += 1
        v = current_violation()
    if v > 0:
        for g in np.flatnonzero(search.sel >= 0):
            search.assign(g, -1)
    # re-add while staying feasible
    while moves < move_budget:
        groups, new, viol, n_new, gap, prio = search.moves()
        sums, n = search.state()
        add = np.flatnonzero((n_new > n) & (viol <= 0))
        if add.size == 0:
            break
        b = add[np.lexsort((prio[add], gap[add]))[0]]
        search.assign(groups[b], new[b])
        moves += 1
    return np.sort(search.selected())
