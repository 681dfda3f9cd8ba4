"""Constrained matching of exposed and unexposed time periods."""

from .params import Method, TuningParams
from .problem import (Candidates, MatchingProblem, NoMatchesPossible, build_problem,
                      enumerate_candidates, expand_auxiliary, problem_from_sets, time_auxiliary)
from .result import BalanceReport, MatchSet, Violation, verify_feasibility
from .solve import BACKENDS, solve

__all__ = [
    "Method", "TuningParams", "Candidates", "MatchingProblem", "NoMatchesPossible",
    "build_problem", "enumerate_candidates", "expand_auxiliary", "problem_from_sets", "time_auxiliary", "BalanceReport",
    "MatchSet", "Violation", "verify_feasibility", "BACKENDS", "solve",
]
