"""Re-run the reference simulation tables at a chosen scale and score them.

Each table id maps to a set of studies plus a list of checks. A check
compares one Monte-Carlo summary against an interval; rows without an
interval are reported for comparison only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional

import pandas as pd

from ..matching import TuningParams
from .generate import ScenarioSpec
from .study import run_global_study, run_study, summarize, summarize_global

MATCHING = ("1-1", "1-1/2", "1-2")
UNADJUSTED = ("U1-1", "U1-1/2", "U1-2")

# medium sparsity, (delta, delta', eps) = (2, 0.05, 6): (bias, mse, cover %, prop %)
TABLE2 = {
    "a": {"naive_t": (-0.01, 0.013, 95.0, None), "naive_j": (0.00, 0.316, 94.8, None),
          "naive_all": (0.00, 0.001, 95.2, None), "1-1": (-0.01, 0.020, 95.4, 100.0),
          "1-1/2": (-0.01, 0.017, 96.2, 100.0), "1-2": (-0.01, 0.016, 95.4, 90.8)},
    "b": {"naive_t": (-0.95, 1.294, 11.8, None), "naive_j": (0.00, 0.054, 93.4, None),
          "naive_all": (-0.94, 0.886, 0.0, None), "1-1": (0.00, 0.024, 92.8, 85.1),
          "1-1/2": (0.00, 0.022, 94.2, 85.1), "1-2": (0.00, 0.024, 95.0, 59.9)},
    "c": {"naive_t": (0.00, 0.023, 94.6, None), "naive_j": (-3.82, 28.191, 81.6, None),
          "naive_all": (-3.55, 13.042, 0.0, None), "1-1": (0.00, 0.037, 95.0, 100.0),
          "1-1/2": (0.01, 0.033, 94.2, 100.0), "1-2": (0.00, 0.032, 94.0, 97.4)},
    "d": {"naive_t": (-1.23, 1.572, 0.0, None), "naive_j": (0.00, 0.042, 94.4, None),
          "naive_all": (-1.24, 1.551, 0.0, None), "1-1": (-0.05, 0.024, 98.4, 85.0),
          "1-1/2": (-0.05, 0.024, 98.2, 85.0), "1-2": (-0.04, 0.025, 97.6, 59.4)},
    "e": {"naive_t": (-2.6, 7.092, 0.0, None), "naive_j": (-1.88, 6.566, 78.6, None),
          "naive_all": (-3.72, 13.869, 0.0, None), "1-1": (-0.06, 0.033, 98.0, 94.1),
          "1-1/2": (-0.06, 0.032, 97.2, 94.1), "1-2": (-0.06, 0.032, 98.6, 71.0)},
}

# unadjusted matching, medium sparsity
TABLE_D1 = {
    "a": {"U1-1": (0.00, 0.02, 94.8, 100.0), "U1-1/2": (0.00, 0.017, 95.0, 100.0), "U1-2": (-0.01, 0.016, 95.4, 90.8)},
    "b": {"U1-1": (0.00, 0.024, 93.6, 85.1), "U1-1/2": (0.00, 0.022, 94.6, 85.1), "U1-2": (0.00, 0.025, 93.6, 59.9)},
    "c": {"U1-1": (0.01, 0.041, 93.6, 100.0), "U1-1/2": (0.01, 0.038, 93.6, 100.0),
          "U1-2": (0.00, 0.030, 92.2, 97.4)},
    "d": {"U1-1": (-0.37, 0.19, 60.8, 86.1), "U1-1/2": (-0.37, 0.19, 59.8, 86.1), "U1-2": (-0.41, 0.235, 59.2, 63.0)},
    "e": {"U1-1": (-0.59, 0.424, 33.0, 94.5), "U1-1/2": (-0.59, 0.414, 36.8, 94.5),
          "U1-2": (-0.64, 0.495, 32.4, 73.7)},
}

# global null, medium sparsity: (estimator mean, mean rate p <= .05, rate min p <= .05, FDR rate)
TABLE3 = {
    "b": {"naive_t": (-0.95, 0.894, 1.0, 1.0), "1-1": (-0.01, 0.053, 1.0, 0.088),
          "1-1/2": (-0.01, 0.054, 1.0, 0.090), "1-2": (0.00, 0.056, 1.0, 0.110)},
    "d": {"naive_t": (-1.26, 0.999, 1.0, 1.0), "1-1": (-0.04, 0.018, 0.966, 0.014),
          "1-1/2": (-0.04, 0.018, 0.970, 0.016), "1-2": (-0.04, 0.014, 0.910, 0.016)},
    "e": {"naive_t": (-2.64, 1.0, 1.0, 1.0), "1-1": (-0.06, 0.015, 0.946, 0.004),
          "1-1/2": (-0.06, 0.016, 0.954, 0.004), "1-2": (-0.06, 0.011, 0.848, 0.002)},
}

# heterogeneous effects: coverage % against the all-period and matched-period targets
TABLE_D5 = {"all": {"naive_t": 2.6, "1-1": 81.2, "1-1/2": 83.0, "1-2": 95.4},
            "matched": {"1-1": 99.2, "1-1/2": 99.4, "1-2": 99.8}}

# autocorrelated noise, rho = 0.8: coverage %
TABLE_D6 = {"1-1": 94.2, "1-1/2": 93.2, "1-2": 94.4}

# within-match balance (delta'' = 0.25) in scenario (d): (bias, matched %)
TABLE_D3 = {"1-1": (-0.08, 19.7), "1-1/2": (-0.10, 30.5), "1-2": (-0.09, 19.9)}

MATCHING_BIAS_TOL = 0.08
MATCHING_COVER = (88.0, 100.0)
# (scenario, estimator, metric) -> accepted interval for the confounded naive estimators
NAIVE_BOUNDS = {
    ("b", "naive_t", "bias"): (-1.15, -0.75), ("b", "naive_t", "cover"): (0.0, 30.0),
    ("c", "naive_all", "bias"): (-4.3, -2.8), ("c", "naive_all", "cover"): (0.0, 0.0),
}


@dataclass
class Check:
    """One scored quantity.

    ``lo``/``hi`` bound the acceptable value (either may be infinite);
    both ``None`` means the row is informational.
    """

    table: str
    setting: str
    estimator: str
    metric: str
    value: float
    reference: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None

    @property
    def checked(self) -> bool:
        return self.lo is not None or self.hi is not None

    @property
    def passed(self) -> Optional[bool]:
        if not self.checked:
            return None
        if self.value is None or math.isnan(self.value):
            return False
        lo = -math.inf if self.lo is None else self.lo
        hi = math.inf if self.hi is None else self.hi
        return lo <= self.value <= hi

    def to_dict(self) -> dict:
        return dict(table=self.table, setting=self.setting, estimator=self.estimator, metric=self.metric,
                    value=self.value, reference=self.reference, lo=self.lo, hi=self.hi,
                    passed=self.passed)


@dataclass
class Reproduction:
    table: str
    summaries: Dict[str, pd.DataFrame]
    checks: List[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.checked)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([c.to_dict() for c in self.checks])


def _get(summary, estimator, column):
    try:
        return float(summary.loc[estimator, column])
    except KeyError:
        return math.nan


def _ref(table, setting, estimator, k):
    row = table.get(setting, {}).get(estimator)
    return None if row is None or row[k] is None else row[k]


def _matching_checks(name, setting, summary, labels, ref_table):
    out = []
    for lab in labels:
        out.append(Check(name, setting, lab, "bias", _get(summary, lab, "bias"), _ref(ref_table, setting, lab, 0),
                         -MATCHING_BIAS_TOL, MATCHING_BIAS_TOL))
        out.append(Check(name, setting, lab, "cover", _get(summary, lab, "cover"), _ref(ref_table, setting, lab, 2),
                         *MATCHING_COVER))
        out.append(Check(name, setting, lab, "mse", _get(summary, lab, "mse"), _ref(ref_table, setting, lab, 1)))
        out.append(Check(name, setting, lab, "prop", _get(summary, lab, "prop"), _ref(ref_table, setting, lab, 3)))
    return out


def table2(reps, seed=0, params=TuningParams(), workers=1, backend="auto", scenarios="abcde",
           records: Optional[Dict[str, pd.DataFrame]] = None) -> Reproduction:
    """Single-unit estimation, medium sparsity, adjusted matching and naive estimators."""
    summaries, checks = {}, []
    for s in scenarios:
        rec = records[s] if records and s in records else run_study(
            ScenarioSpec(s, "medium", seed=seed), reps, params=params, workers=workers, backend=backend)
        summ = summarize(rec)
        summaries[s] = summ
        checks += _matching_checks("2", s, summ, MATCHING, TABLE2)
        for nv in ("naive_t", "naive_j", "naive_all"):
            for k, metric in enumerate(("bias", "mse", "cover")):
                lo, hi = NAIVE_BOUNDS.get((s, nv, metric), (None, None))
                checks.append(Check("2", s, nv, metric, _get(summ, nv, metric), _ref(TABLE2, s, nv, k), lo, hi))
        if s == "a":
            checks.append(Check("2", s, "1-1", "prop>=95", _get(summ, "1-1", "prop"), 100.0, 95.0, None))
    return Reproduction("2", summaries, checks)


def table_d1(reps, seed=0, params=TuningParams(), workers=1, backend="auto", scenarios="bcd",
             records: Optional[Dict[str, pd.DataFrame]] = None) -> Reproduction:
    """Matching without covariate constraints."""
    summaries, checks = {}, []
    for s in scenarios:
        rec = records[s] if records and s in records else run_study(
            ScenarioSpec(s, "medium", seed=seed), reps, params=params, workers=workers, backend=backend,
            unadjusted=True, adjusted=False, naive=False)
        summ = summarize(rec)
        summaries[s] = summ
        for lab in UNADJUSTED:
            bias, cover = _get(summ, lab, "bias"), _get(summ, lab, "cover")
            if s in ("b", "c"):
                checks.append(Check("D1", s, lab, "bias", bias, _ref(TABLE_D1, s, lab, 0),
                                    -MATCHING_BIAS_TOL, MATCHING_BIAS_TOL))
                checks.append(Check("D1", s, lab, "cover", cover, _ref(TABLE_D1, s, lab, 2), 88.0, None))
            elif s == "d":
                checks.append(Check("D1", s, lab, "bias", bias, _ref(TABLE_D1, s, lab, 0), None, -0.25))
                checks.append(Check("D1", s, lab, "cover", cover, _ref(TABLE_D1, s, lab, 2)))
            else:
                checks.append(Check("D1", s, lab, "bias", bias, _ref(TABLE_D1, s, lab, 0)))
                checks.append(Check("D1", s, lab, "cover", cover, _ref(TABLE_D1, s, lab, 2)))
    return Reproduction("D1", summaries, checks)


def table3(reps, seed=0, params=TuningParams(), workers=1, backend="auto", scenarios="b", methods=("1-1",),
           M: int = 200) -> Reproduction:
    """Global null test across ``M`` outcome units with null effects."""
    summaries, checks = {}, []
    for s in scenarios:
        spec = ScenarioSpec(s, "medium", seed=seed, M=M, null_effects=True)
        rec = run_global_study(spec, reps, methods=methods, params=params, workers=workers, backend=backend)
        summ = summarize_global(rec)
        summaries[s] = summ
        for lab in list(methods) + ["naive_t"]:
            min_rate, fdr = _get(summ, lab, "min_p_rate"), _get(summ, lab, "fdr_reject_rate")
            if lab == "naive_t":
                checks.append(Check("3", s, lab, "min_p_rate", min_rate, _ref(TABLE3, s, lab, 2)))
                checks.append(Check("3", s, lab, "fdr_reject_rate", fdr, _ref(TABLE3, s, lab, 3), 1.0, 1.0))
            elif s == "b" and lab == "1-1":
                checks.append(Check("3", s, lab, "min_p_rate", min_rate, _ref(TABLE3, s, lab, 2), 0.95, None))
                checks.append(Check("3", s, lab, "fdr_reject_rate", fdr, _ref(TABLE3, s, lab, 3), 0.02, 0.16))
            else:
                checks.append(Check("3", s, lab, "min_p_rate", min_rate, _ref(TABLE3, s, lab, 2)))
                checks.append(Check("3", s, lab, "fdr_reject_rate", fdr, _ref(TABLE3, s, lab, 3)))
    return Reproduction("3", summaries, checks)


def table_d3(reps, seed=0, params=TuningParams(), workers=1, backend="auto") -> Reproduction:
    """Per-match covariate balance (delta'' = 0.25) against the standard constraints, scenario (d)."""
    spec = ScenarioSpec("d", "medium", seed=seed)
    std = summarize(run_study(spec, reps, params=params, workers=workers, backend=backend, naive=False))
    ext_params = replace(params, delta_dprime=0.25)
    ext = summarize(run_study(spec, reps, params=ext_params, workers=workers, backend=backend, naive=False))
    checks = []
    for lab in MATCHING:
        checks.append(Check("D3", "d", lab, "bias", _get(ext, lab, "bias"), TABLE_D3[lab][0]))
        checks.append(Check("D3", "d", lab, "prop", _get(ext, lab, "prop"), TABLE_D3[lab][1],
                            None, _get(std, lab, "prop")))
    return Reproduction("D3", {"standard": std, "within-match": ext}, checks)


def table_d4(reps, seed=0, params=TuningParams(), workers=1, backend="auto") -> Reproduction:
    """Scenario (a) with a distance-dependent network: naive estimators become biased."""
    spec = ScenarioSpec("a", "medium", seed=seed, network_confounding=True)
    rec = run_study(spec, reps, params=params, workers=workers, backend=backend, unadjusted=True)
    summ = summarize(rec)
    checks = []
    for lab in MATCHING + UNADJUSTED:
        checks.append(Check("D4", "a_net", lab, "bias", _get(summ, lab, "bias"), None,
                            -MATCHING_BIAS_TOL, MATCHING_BIAS_TOL))
    for nv in ("naive_t", "naive_j", "naive_all"):
        checks.append(Check("D4", "a_net", nv, "bias", _get(summ, nv, "bias")))
    return Reproduction("D4", {"a_net": summ}, checks)


def table_d5(reps, seed=0, params=TuningParams(), workers=1, backend="auto", scenarios="d",
             records: Optional[Dict[str, pd.DataFrame]] = None) -> Reproduction:
    """Heterogeneous effects scored against all-period and matched-period targets."""
    summaries, checks = {}, []
    for s in scenarios:
        rec = records[s] if records and s in records else run_study(
            ScenarioSpec(s, "medium", seed=seed, heterogeneous=True), reps, params=params, workers=workers,
            backend=backend)
        s_all, s_matched = summarize(rec, "all"), summarize(rec, "matched")
        summaries[f"{s}/all"], summaries[f"{s}/matched"] = s_all, s_matched
        for lab in MATCHING:
            checks.append(Check("D5", f"{s}/matched", lab, "bias", _get(s_matched, lab, "bias"), None,
                                -MATCHING_BIAS_TOL, MATCHING_BIAS_TOL))
            checks.append(Check("D5", f"{s}/matched", lab, "cover", _get(s_matched, lab, "cover"),
                                TABLE_D5["matched"][lab], 90.0, None))
            checks.append(Check("D5", f"{s}/all", lab, "bias", _get(s_all, lab, "bias"), None, 0.1, None))
            checks.append(Check("D5", f"{s}/all", lab, "cover", _get(s_all, lab, "cover"), TABLE_D5["all"][lab]))
        checks.append(Check("D5", f"{s}/all", "naive_t", "cover", _get(s_all, "naive_t", "cover"),
                            TABLE_D5["all"]["naive_t"]))
    return Reproduction("D5", summaries, checks)


def table_d6(reps, seed=0, params=TuningParams(), workers=1, backend="auto", rho: float = 0.8) -> Reproduction:
    """Scenario (a) with AR(1) outcome noise."""
    spec = ScenarioSpec("a", "medium", seed=seed, ar1_rho=rho)
    summ = summarize(run_study(spec, reps, params=params, workers=workers, backend=backend, naive=False))
    checks = [Check("D6", f"rho={rho}", lab, "cover", _get(summ, lab, "cover"),
                    TABLE_D6[lab] if rho == 0.8 else None, 88.0, 98.0) for lab in MATCHING]
    return Reproduction("D6", {f"rho={rho}": summ}, checks)


TABLES: Dict[str, Callable[..., Reproduction]] = {
    "2": table2, "3": table3, "D1": table_d1, "D3": table_d3, "D4": table_d4, "D5": table_d5, "D6": table_d6,
}


def reproduce(table: str, reps: int, seed: int = 0, **kw) -> Reproduction:
    """Run one table. Raises ``ValueError`` for an unknown id."""
    key = str(table).upper()
    if key not in TABLES:
        raise ValueError(f"unknown table {table!r}; choose from {sorted(TABLES)}")
    return TABLES[key](reps, seed=seed, **kw)
