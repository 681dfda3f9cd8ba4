"""Wald intervals, pooled two-sample intervals and the FDR global test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

NO_VARIANCE = "no-variance"


@dataclass(frozen=True)
class InferenceResult:
    tau_hat: float
    s_hat: float
    n: int
    alpha: float
    lo: float
    hi: float
    p_value: float
    flag: str = ""
    one_sided: bool = False

    def covers(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def to_dict(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
        return dict(tau_hat=self.tau_hat, s_hat=num(self.s_hat), n=self.n, alpha=self.alpha,
                    ci=[num(self.lo), num(self.hi)], p_value=self.p_value, flag=self.flag,
                    one_sided=self.one_sided)


def z_quantile(alpha: float, one_sided: bool = False) -> float:
    return float(ndtri(1 - alpha if one_sided else 1 - alpha / 2))


def _interval(tau, se, alpha, one_sided, s_hat, n, flag=""):
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    z = z_quantile(alpha, one_sided)
    if se > 0:
        stat = tau / se
        p = float(ndtr(-stat)) if one_sided else float(2 * ndtr(-abs(stat)))
        lo = tau - z * se
        hi = math.inf if one_sided else tau + z * se
    else:
        # zero spread: any nonzero estimate is decisive
        p = 1.0 if tau == 0 or (one_sided and tau < 0) else 0.0
        lo, hi = tau, (math.inf if one_sided else tau)
    return InferenceResult(tau, s_hat, n, alpha, lo, hi, min(1.0, max(0.0, p)), flag, one_sided)


def wald(estimate, alpha: float = 0.05, one_sided: bool = False) -> InferenceResult:
    """Normal interval and p-value from the per-match differences.

    ``s_hat`` is the sample SD of ``D`` (denominator ``n - 1``) and the
    standard error ``s_hat / sqrt(n)``. The one-sided variant tests
    ``tau > 0``. A single match has no variance estimate: the result is
    flagged ``no-variance`` with an unbounded interval and p-value 1.
    """
    D = np.asarray(estimate.D, dtype=float)
    n = D.size
    if n == 0:
        raise ValueError("no differences to base inference on")
    tau = float(D.mean())
    if n == 1:
        return InferenceResult(tau, math.nan, 1, alpha, -math.inf, math.inf, 1.0, NO_VARIANCE, one_sided)
    s = float(np.std(D, ddof=1))
    return _interval(tau, s / math.sqrt(n), alpha, one_sided, s, n)


def naive_wald(estimate, alpha: float = 0.05, n_e: Optional[int] = None, n_u: Optional[int] = None,
               s_e: Optional[float] = None, s_u: Optional[float] = None) -> InferenceResult:
    """Pooled-variance two-sample interval for a difference in class means.

    Class sizes and SDs default to those stored on a ``NaiveEstimate``.

    Raises:
        ValueError: a class has fewer than two observations.
    """
    n_e = estimate.n_e if n_e is None else n_e
    n_u = estimate.n_u if n_u is None else n_u
    s_e = estimate.s_e if s_e is None else s_e
    s_u = estimate.s_u if s_u is None else s_u
    if n_e < 2 or n_u < 2:
        raise ValueError("pooled interval needs at least two observations per class")
    pooled = math.sqrt(((n_e - 1) * s_e ** 2 + (n_u - 1) * s_u ** 2) / (n_e + n_u - 2))
    se = pooled * math.sqrt(1.0 / n_e + 1.0 / n_u)
    return _interval(float(estimate.tau_hat), se, alpha, False, pooled, n_e + n_u)


def bh_adjust(p) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted p-values, in the input order."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("need a nonempty vector of p-values")
    if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = p[order] * m / np.arange(1, m + 1)
    adj = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(adj, 1.0)
    return out


@dataclass
class GlobalTestResult:
    units: List
    p_values: np.ndarray
    adjusted: np.ndarray
    rejected: np.ndarray
    alpha: float
    unavailable: List = field(default_factory=list)

    @property
    def reject(self) -> bool:
        return bool(self.rejected.any())

    @property
    def affected(self) -> List:
        return [u for u, r in zip(self.units, self.rejected) if r]

    @property
    def min_p(self) -> float:
        return float(self.p_values.min())

    def to_dict(self) -> dict:
        return dict(units=list(self.units), p_values=self.p_values.tolist(), adjusted=self.adjusted.tolist(),
                    rejected=self.rejected.tolist(), alpha=self.alpha, global_reject=self.reject,
                    affected=self.affected, unavailable=list(self.unavailable))


def global_test(p, alpha: float = 0.05, units: Optional[Sequence] = None,
                unavailable: Sequence = ()) -> GlobalTestResult:
    """Reject the global null of no effect on any unit if an adjusted p < alpha.

    Units listed in ``unavailable`` (no matches, hence no p-value) are carried
    through for reporting only.
    """
    p = np.asarray(p, dtype=float)
    adj = bh_adjust(p)
    units = list(range(p.size)) if units is None else list(units)
    if len(units) != p.size:
        raise ValueError("one unit label per p-value")
    return GlobalTestResult(units, p, adj, adj < alpha, alpha, list(unavailable))
