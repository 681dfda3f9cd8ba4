from __future__ import annotations

import logging

import numpy as np

from . import backends
from .params import Method
from .problem import MatchingProblem
from .result import MatchSet, verify_feasibility

log = logging.getLogger(__name__)

BACKENDS = ("auto", "exact", "heuristic", "bnb", "milp")
BNB_MAX_EXPOSED = 10  # larger problems go straight to the assignment/HiGHS path


def _to_matchset(problem: MatchingProblem, idx, optimality, backend, upper_bound, unit) -> MatchSet:
    c = problem.candidates
    pairs, triples = [], []
    for k in np.asarray(idx, dtype=int):
        if c.u2[k] > 0:
            triples.append((c.te[k], c.u1[k], c.u2[k]))
        else:
            pairs.append((c.te[k], c.u1[k]))
    if optimality == "proven":
        upper_bound = len(idx)
    ms = MatchSet(pairs, triples, problem.method, problem.params, optimality=optimality,
                  upper_bound=upper_bound, n_exposed=problem.n_exposed, backend=backend, unit=unit)
    ms.report = verify_feasibility(ms, problem)
    return ms


def solve(
    problem: MatchingProblem,
    backend: str = "auto",
    seed: int = 0,
    time_limit: float = 60.0,
    node_limit: int = 2000,
    move_budget: int = 50000,
    tiebreak: bool = True,
    unit=None,
) -> MatchSet:
    """Maximize the number of matches subject to every balance constraint.

    ``auto``/``exact`` first run branch and bound with a node budget; if that
    does not finish, a 1-1 problem tries the assignment relaxation (optimal
    whenever it already satisfies the aggregate constraints) and then HiGHS.
    If HiGHS proves nothing within ``time_limit`` the best solution found is
    returned flagged ``heuristic``; if it finds none, the local search runs.
    ``heuristic`` runs the local search only. The returned set is always
    verified; an infeasible backend answer degrades to the empty set.

    Among maximum-cardinality sets the smallest total time gap is preferred
    (``tiebreak``); branch and bound then also takes the lexicographically
    earliest. Turning ``tiebreak`` off skips the second HiGHS phase, which
    matters for large simulation sweeps.
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    c = problem.candidates
    if len(c) == 0:
        return _to_matchset(problem, [], "proven", "trivial", 0, unit)
    ub = backends.relaxed_upper_bound(problem)

    def heuristic(start=None):
        idx = backends.local_search(problem, seed=seed, move_budget=move_budget, start=start)
        opt = "proven" if len(idx) == ub else "heuristic"
        return _to_matchset(problem, idx, opt, "heuristic", ub, unit)

    result = None
    if backend == "heuristic":
        result = heuristic()
    else:
        small = problem.n_exposed <= BNB_MAX_EXPOSED
        if backend == "bnb" or (backend in ("auto", "exact") and small):
            idx, proven, _ = backends.branch_and_bound(problem, node_limit=node_limit if backend != "bnb" else 10**9)
            if proven:
                result = _to_matchset(problem, idx, "proven", "bnb", ub, unit)
        if result is None and backend != "bnb":
            if problem.method is Method.ONE_ONE and backend != "milp":
                idx = backends.assignment_matching(problem)
                if backends.aggregates_ok(problem, idx):
                    result = _to_matchset(problem, idx, "proven", "assignment", ub, unit)
            if result is None:
                out = backends.solve_milp(problem, time_limit=time_limit, tiebreak=tiebreak)
                if out is None:
                    log.info("HiGHS returned no solution; falling back to local search")
                    result = heuristic()
                else:
                    idx, proven = out
                    result = _to_matchset(problem, idx, "proven" if proven else "heuristic", "highs", ub, unit)
    if not result.report.ok:
        log.warning("backend %s produced an infeasible set (%s); repairing",
                    result.backend, "; ".join(map(str, result.report.violations)))
        result = heuristic()
        if not result.report.ok:
            result = _to_matchset(problem, [], "heuristic", "empty", ub, unit)
    return result
