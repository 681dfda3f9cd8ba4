"""Match sets and their constraint audit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .params import Method, TuningParams

TOL = 1e-9


@dataclass
class Violation:
    constraint: str
    detail: str
    value: float = math.nan
    bound: float = math.nan

    def __str__(self) -> str:
        return f"{self.constraint}: {self.detail}"


@dataclass
class BalanceReport:
    """Achieved balance of a match set and every broken constraint.

    ``slack`` maps each aggregate constraint id to ``bound - |value|``; a
    negative slack is a violation.
    """

    n_matches: int
    mean_time_gap: float
    covariate_gaps: Dict[str, float]
    max_time_gap: int
    max_covariate_gap: Dict[str, float]
    slack: Dict[str, float]
    dropped_covariates: List[str]
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "n_matches": self.n_matches,
            "mean_time_gap": self.mean_time_gap,
            "covariate_gaps": dict(self.covariate_gaps),
            "max_time_gap": self.max_time_gap,
            "max_covariate_gap": dict(self.max_covariate_gap),
            "slack": {k: (v if math.isfinite(v) else "inf") for k, v in self.slack.items()},
            "dropped_covariates": list(self.dropped_covariates),
            "violations": [str(v) for v in self.violations],
        }


@dataclass
class MatchSet:
    """Matches for one outcome unit.

    Attributes:
        pairs: ``(t_e, t_u)`` tuples.
        triples: ``(t_e, t_u1, t_u2)`` tuples with ``t_u1 < t_e < t_u2``.
        optimality: ``"proven"`` when the cardinality is certified maximal,
            ``"heuristic"`` otherwise.
        upper_bound: a valid upper bound on the optimal cardinality.
        n_exposed: number of exposed periods that could have been matched.
    """

    pairs: List[Tuple[int, int]]
    triples: List[Tuple[int, int, int]]
    method: Method
    params: TuningParams
    optimality: str = "heuristic"
    upper_bound: Optional[int] = None
    n_exposed: int = 0
    backend: str = ""
    unit: Optional[int] = None
    report: Optional[BalanceReport] = None

    def __post_init__(self):
        self.pairs = sorted((int(a), int(b)) for a, b in self.pairs)
        self.triples = sorted((int(a), int(b), int(c)) for a, b, c in self.triples)
        self.method = Method.parse(self.method)

    def __len__(self) -> int:
        return len(self.pairs) + len(self.triples)

    @property
    def matches(self) -> List[tuple]:
        return sorted(self.pairs + self.triples)

    @property
    def matched_exposed(self) -> List[int]:
        return sorted([p[0] for p in self.pairs] + [t[0] for t in self.triples])

    @property
    def total_abs_gap(self) -> int:
        return sum(abs(a - b) for a, b in self.pairs) + sum(c - b for _, b, c in self.triples)

    @property
    def matched_proportion(self) -> float:
        return len(self) / self.n_exposed if self.n_exposed else 0.0

    def to_dict(self) -> dict:
        return {
            "unit": self.unit,
            "method": str(self.method),
            "pairs": [list(p) for p in self.pairs],
            "triples": [list(t) for t in self.triples],
            "optimality": self.optimality,
            "upper_bound": self.upper_bound,
            "n_exposed": self.n_exposed,
            "backend": self.backend,
            "params": self.params.to_dict(),
            "balance_report": self.report.to_dict() if self.report is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MatchSet":
        return cls(
            pairs=[tuple(p) for p in d.get("pairs", [])],
            triples=[tuple(t) for t in d.get("triples", [])],
            method=d["method"],
            params=TuningParams.from_dict(d["params"]),
            optimality=d.get("optimality", "heuristic"),
            upper_bound=d.get("upper_bound"),
            n_exposed=d.get("n_exposed", 0),
            backend=d.get("backend", ""),
            unit=d.get("unit"),
        )


def verify_feasibility(matchset: MatchSet, problem) -> BalanceReport:
    """Recompute every matching constraint from the problem's raw inputs.

    Constraint ids: ``method_shape``, ``class_membership``, ``order``,
    ``unique_use``, ``max_time_gap``, ``per_match_covariate:<label>``,
    ``mean_time``, ``mean_time:<label>`` (localized time terms) and
    ``mean_covariate:<label>``.
    """
    params = problem.params
    exposed = set(int(t) for t in problem.exposed)
    unexposed = set(int(t) for t in problem.unexposed)
    violations: List[Violation] = []
    cov = problem.covariates
    kept = cov.kept
    labels = cov.kept_labels

    if matchset.method is Method.ONE_TWO and matchset.pairs:
        violations.append(Violation("method_shape", "pairs present under method 1-2"))
    if matchset.method is Method.ONE_ONE and matchset.triples:
        violations.append(Violation("method_shape", "triples present under method 1-1"))

    matches = [(p[0], (p[1],)) for p in matchset.pairs] + [(t[0], (t[1], t[2])) for t in matchset.triples]
    seen: Dict[int, int] = {}
    time_sum = 0.0
    cov_sum = np.zeros(kept.shape[1])
    max_gap = 0
    max_cov = np.zeros(kept.shape[1])
    for te, us in matches:
        if te not in exposed:
            violations.append(Violation("class_membership", f"{te} is not an exposed period"))
        for u in us:
            if u not in unexposed:
                violations.append(Violation("class_membership", f"{u} is not an unexposed period"))
        for t in (te,) + us:
            seen[t] = seen.get(t, 0) + 1
        if len(us) == 2 and not us[0] < te < us[1]:
            violations.append(Violation("order", f"triple {(te,) + us} is not before/after"))
        for u in us:
            gap = abs(te - u)
            max_gap = max(max_gap, gap)
            if gap > params.eps:
                violations.append(Violation("max_time_gap", f"|{te}-{u}| = {gap} > {params.eps}", gap, params.eps))
        time_sum += te - sum(us) / len(us)
        if kept.shape[1] and all(1 <= t <= kept.shape[0] for t in (te,) + us):
            g = kept[te - 1] - np.mean([kept[u - 1] for u in us], axis=0)
            cov_sum += g
            max_cov = np.maximum(max_cov, np.abs(g))
            if params.delta_dprime is not None:
                for s in np.flatnonzero(np.abs(g) > params.delta_dprime + TOL):
                    violations.append(Violation(f"per_match_covariate:{labels[s]}",
                                                f"match {(te,) + us} gap {g[s]:.6g}", abs(g[s]), params.delta_dprime))
    for t, c in seen.items():
        if c > 1:
            violations.append(Violation("unique_use", f"time {t} used {c} times"))

    n = len(matches)
    slack = {"mean_time": params.delta * n - abs(time_sum)}
    if slack["mean_time"] < -TOL * max(1, n):
        violations.append(Violation("mean_time", f"|sum of time gaps| {abs(time_sum):.6g} > {params.delta}*{n}",
                                    abs(time_sum), params.delta * n))
    time_aux = getattr(problem, "time_aux", None)
    if time_aux is not None and n:
        sums = sum((time_aux[te - 1] - np.mean([time_aux[u - 1] for u in us], axis=0) for te, us in matches
                    if all(1 <= t <= time_aux.shape[0] for t in (te,) + us)), np.zeros(time_aux.shape[1]))
        for s, lab in enumerate(problem.time_aux_labels):
            key = f"mean_time:{lab}"
            slack[key] = params.delta * n - abs(sums[s])
            if slack[key] < -TOL * max(1, n):
                violations.append(Violation(key, f"mean imbalance {sums[s] / n:.6g} beyond {params.delta}",
                                            abs(sums[s] / n), params.delta))
    cov_mean = cov_sum / n if n else np.zeros_like(cov_sum)
    for s, lab in enumerate(labels):
        key = f"mean_covariate:{lab}"
        if not params.constrains_covariates:
            slack[key] = math.inf
            continue
        slack[key] = params.delta_prime * n - abs(cov_sum[s])
        if slack[key] < -TOL * max(1, n):
            violations.append(Violation(key, f"mean imbalance {cov_mean[s]:.6g} beyond {params.delta_prime}",
                                        abs(cov_mean[s]), params.delta_prime))
    return BalanceReport(
        n_matches=n,
        mean_time_gap=time_sum / n if n else 0.0,
        covariate_gaps={lab: float(cov_mean[s]) for s, lab in enumerate(labels)},
        max_time_gap=int(max_gap),
        max_covariate_gap={lab: float(max_cov[s]) for s, lab in enumerate(labels)},
        slack=slack,
        dropped_covariates=cov.dropped_labels,
        violations=violations,
    )
