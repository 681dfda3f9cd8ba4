"""Monte-Carlo driver: replications, per-estimator records and summary tables."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..data import SummaryWeights, balance_covariates
from ..estimate import naive_all, naive_j, naive_t
from ..inference import global_test, naive_wald, wald
from ..matching import Method, NoMatchesPossible, TuningParams, build_problem, solve
from ..estimate import impute_and_estimate
from .generate import ScenarioSpec, SimulatedPanel, simulate_panel

log = logging.getLogger(__name__)

DEFAULT_METHODS = ("1-1", "1-1/2", "1-2")
NAIVE = ("naive_t", "naive_j", "naive_all")
ESTIMANDS = ("all", "exposed", "matched")


def method_label(method, adjust: bool = True) -> str:
    return ("" if adjust else "U") + str(Method.parse(method))


def parse_label(label: str):
    """``"U1-2"`` -> (Method.ONE_TWO, False)."""
    adjust = not label.startswith("U")
    return Method.parse(label[0 if adjust else 1:]), adjust


def unit_covariates(panel: SimulatedPanel, j: int, E_j):
    """Standardized balance covariates used in the studies: W3, W5, W6 and the q-summary of P."""
    ds = panel.dataset
    q = panel.layout.Q[:, j]
    p = ["p1"] if np.any(q != 0) else []
    weights = {"p1": SummaryWeights(q, label="q")} if p else None
    return balance_covariates(ds, j, exposure=E_j, w=["w3", "w5", "w6"], x=[], p=p, q=weights)


def _match_unit(panel, j, labels, params, alpha, backend):
    """Solve, estimate and test every matching configuration for unit ``j``."""
    E_j = panel.E[:, j]
    Y_j = panel.dataset.Y[:, j]
    eff = panel.effect[:, j]
    out = []
    try:
        cov = unit_covariates(panel, j, E_j)
    except ValueError:
        cov = None
    for label in labels:
        method, adjust = parse_label(label)
        rec = dict(estimator=label, tau_hat=math.nan, lo=math.nan, hi=math.nan, p_value=math.nan,
                   n_matched=0, n_exposed=int(E_j.sum()), prop=0.0, optimality="",
                   target_all=float(eff.mean()),
                   target_exposed=float(eff[E_j == 1].mean()) if E_j.any() else math.nan,
                   target_matched=math.nan)
        if cov is not None:
            try:
                problem = build_problem(E_j, cov, replace(params, adjust=adjust), method)
                ms = solve(problem, backend=backend, unit=j, tiebreak=False)
                rec.update(n_matched=len(ms), prop=ms.matched_proportion, optimality=ms.optimality)
                if len(ms):
                    est = impute_and_estimate(ms, Y_j)
                    inf = wald(est, alpha)
                    te = np.array(est.matched_exposed)
                    rec.update(tau_hat=est.tau_hat, lo=inf.lo, hi=inf.hi, p_value=inf.p_value,
                               target_matched=float(eff[te - 1].mean()))
            except NoMatchesPossible:
                pass
        out.append(rec)
    return out


def _naive_records(panel, j, alpha):
    ds = panel.dataset
    E, Y, eff = panel.E, ds.Y, panel.effect
    out = []
    specs = (("naive_t", naive_t, E[:, j], Y[:, j], eff[:, j]),
             ("naive_j", naive_j, E[0], Y[0], eff[0]),
             ("naive_all", naive_all, E, Y, eff))
    for name, fn, e, y, f in specs:
        rec = dict(estimator=name, tau_hat=math.nan, lo=math.nan, hi=math.nan, p_value=math.nan,
                   n_matched=0, n_exposed=int(np.sum(e)), prop=math.nan, optimality="",
                   target_all=float(np.mean(f)),
                   target_exposed=float(np.mean(f[e == 1])) if np.any(e) else math.nan,
                   target_matched=math.nan)
        try:
            est = fn(e, y)
        except ValueError:
            out.append(rec)
            continue
        rec["tau_hat"] = est.tau_hat
        try:
            inf = naive_wald(est, alpha)
            rec.update(lo=inf.lo, hi=inf.hi, p_value=inf.p_value)
        except ValueError:
            pass
        out.append(rec)
    return out


def run_replication(spec: ScenarioSpec, rep: int, labels=DEFAULT_METHODS, params: TuningParams = TuningParams(),
                    alpha: float = 0.05, naive: bool = True, unit: int = 0, backend: str = "auto") -> List[dict]:
    """All estimator records for one replication's target unit."""
    panel = simulate_panel(spec, rep)
    recs = _match_unit(panel, unit, labels, params, alpha, backend)
    if naive:
        recs += _naive_records(panel, unit, alpha)
    for r in recs:
        r["rep"] = rep
    return recs


def _run_many(fn, args: Iterable[tuple], workers: int):
    args = list(args)
    if workers <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args)))


def run_study(spec: ScenarioSpec, reps: int, methods: Sequence[str] = DEFAULT_METHODS,
              params: TuningParams = TuningParams(), alpha: float = 0.05, naive: bool = True,
              unadjusted: bool = False, adjusted: bool = True, workers: int = 1, backend: str = "auto") -> pd.DataFrame:
    """Run ``reps`` replications and return one record per (replication, estimator).

    ``methods`` are match shapes; adjusted (``1-1``) and/or unadjusted
    (``U1-1``) versions are run for each. Replication ``r`` is seeded from
    ``(spec.seed, r)`` alone, so results do not depend on ``workers``.
    Solves skip the total-gap tie-break: it only chooses among sets of equal
    cardinality and roughly doubles the solve time.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    labels = ([method_label(m, True) for m in methods] if adjusted else []) + \
             ([method_label(m, False) for m in methods] if unadjusted else [])
    batches = _run_many(run_replication, [(spec, r, tuple(labels), params, alpha, naive, 0, backend)
                                          for r in range(reps)], workers)
    df = pd.DataFrame([rec for batch in batches for rec in batch])
    return df.sort_values(["rep", "estimator"], kind="stable").reset_index(drop=True)


def summarize(records: pd.DataFrame, estimand: str = "all") -> pd.DataFrame:
    """Bias, MSE, coverage (%) and matched proportion (%) per estimator.

    ``estimand`` picks the target each estimate is scored against: the mean
    effect over all periods, over exposed periods, or over the matched exposed
    periods (matching estimators only; naive rows then use exposed periods).
    Replications without an estimate are excluded, and ``n_reps`` counts the
    rest. Coverage is taken over the estimates that came with an interval.
    """
    if estimand not in ESTIMANDS:
        raise ValueError(f"estimand must be one of {ESTIMANDS}")
    rows = []
    for name, g in records.groupby("estimator", sort=True):
        target = g[f"target_{estimand}"]
        if estimand == "matched" and name in NAIVE:
            target = g["target_exposed"]
        ok = g["tau_hat"].notna()
        err = (g["tau_hat"] - target)[ok]
        has_ci = ok & g["lo"].notna() & g["hi"].notna()
        cover = ((g["lo"] <= target) & (target <= g["hi"]))[has_ci]
        rows.append(dict(
            estimator=name,
            bias=float(err.mean()) if ok.any() else math.nan,
            mse=float((err ** 2).mean()) if ok.any() else math.nan,
            cover=100.0 * float(cover.mean()) if has_ci.any() else math.nan,
            prop=100.0 * float(g["prop"].mean()) if name not in NAIVE else math.nan,
            n_reps=int(ok.sum()),
        ))
    return pd.DataFrame(rows).set_index("estimator")


# --------------------------------------------------------------------------
# global null across outcome units


def run_global_replication(spec: ScenarioSpec, rep: int, labels=("1-1",), params: TuningParams = TuningParams(),
                           alpha: float = 0.05, backend: str = "auto") -> List[dict]:
    """Per-unit p-values for every outcome unit, then the FDR global test per estimator."""
    panel = simulate_panel(spec, rep)
    M = spec.M
    pvals = {lab: {} for lab in list(labels) + ["naive_t"]}
    for j in range(M):
        for rec in _match_unit(panel, j, labels, params, alpha, backend):
            if not math.isnan(rec["p_value"]):
                pvals[rec["estimator"]][j] = rec["p_value"]
        E_j, Y_j = panel.E[:, j], panel.dataset.Y[:, j]
        try:
            pvals["naive_t"][j] = naive_wald(naive_t(E_j, Y_j), alpha).p_value
        except ValueError:
            pass
    out = []
    for lab, pj in pvals.items():
        units = sorted(pj)
        unavailable = [j for j in range(M) if j not in pj]
        if units:
            res = global_test([pj[j] for j in units], alpha, units=units, unavailable=unavailable)
            out.append(dict(rep=rep, estimator=lab, min_p=res.min_p, min_p_reject=res.min_p < alpha,
                            global_reject=res.reject, n_available=len(units), n_affected=len(res.affected)))
        else:
            out.append(dict(rep=rep, estimator=lab, min_p=math.nan, min_p_reject=False, global_reject=False,
                            n_available=0, n_affected=0))
    return out


def run_global_study(spec: ScenarioSpec, reps: int, methods: Sequence[str] = ("1-1",),
                     params: TuningParams = TuningParams(), alpha: float = 0.05, workers: int = 1,
                     backend: str = "auto") -> pd.DataFrame:
    labels = tuple(method_label(m) for m in methods)
    batches = _run_many(run_global_replication, [(spec, r, labels, params, alpha, backend) for r in range(reps)],
                        workers)
    df = pd.DataFrame([rec for batch in batches for rec in batch])
    return df.sort_values(["rep", "estimator"], kind="stable").reset_index(drop=True)


def summarize_global(records: pd.DataFrame) -> pd.DataFrame:
    """Rates of min raw p < alpha and of FDR global rejection, per estimator."""
    g = records.groupby("estimator", sort=True)
    return pd.DataFrame({
        "min_p_rate": g["min_p_reject"].mean(),
        "fdr_reject_rate": g["global_reject"].mean(),
        "available_units": g["n_available"].mean(),
        "n_reps": g.size(),
    })
