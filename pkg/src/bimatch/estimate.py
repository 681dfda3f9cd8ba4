"""Effect estimates from match sets, naive baselines and bias bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .matching.result import MatchSet

TARGET = "target"  # all exposed periods matched
MATCHED_POPULATION = "matched-population"


class NoMatches(ValueError):
    """Raised when estimation is requested from an empty match set."""


@dataclass(frozen=True)
class EffectEstimate:
    """Average contrast between matched exposed outcomes and their imputations.

    Attributes:
        tau_hat: mean of ``D``.
        matched_exposed: the matched exposed periods (1-based).
        D: per-match differences ``Y_te - Y_imputed``, aligned with ``matched_exposed``.
        matched_proportion: matched / available exposed periods.
        method: match shape or naive estimator name.
        estimand: ``"target"`` or ``"matched-population"``.
    """

    tau_hat: float
    matched_exposed: Tuple[int, ...]
    D: np.ndarray
    matched_proportion: float
    method: str
    estimand: str
    unit: Optional[int] = None

    @property
    def n(self) -> int:
        return int(self.D.shape[0])

    def to_dict(self) -> dict:
        return {
            "unit": self.unit,
            "tau_hat": self.tau_hat,
            "n_matched": self.n,
            "prop_matched": self.matched_proportion,
            "method": self.method,
            "estimand": self.estimand,
            "matched_exposed": list(self.matched_exposed),
            "D": self.D.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EffectEstimate":
        return cls(d["tau_hat"], tuple(d["matched_exposed"]), np.asarray(d["D"], float),
                   d["prop_matched"], d["method"], d["estimand"], d.get("unit"))


@dataclass(frozen=True)
class NaiveEstimate:
    """Difference of class means, with what a pooled two-sample interval needs."""

    tau_hat: float
    kind: str
    n_e: int
    n_u: int
    s_e: float
    s_u: float

    def to_dict(self) -> dict:
        return dict(tau_hat=self.tau_hat, method=self.kind, n_e=self.n_e, n_u=self.n_u,
                    s_e=self.s_e, s_u=self.s_u)


def impute_and_estimate(matchset: MatchSet, Y) -> EffectEstimate:
    """Impute each matched exposed period's control outcome and average.

    A pair uses the unexposed outcome directly; a triple uses the mean of its
    two unexposed outcomes. ``Y`` is indexed by time ``1..T``.

    Raises:
        NoMatches: the match set is empty.
    """
    if len(matchset) == 0:
        raise NoMatches("no matched exposed periods; refusing to estimate")
    Y = np.asarray(Y, dtype=float)
    rows = sorted([(te, Y[te - 1] - Y[u - 1]) for te, u in matchset.pairs]
                  + [(te, Y[te - 1] - (Y[a - 1] + Y[b - 1]) / 2.0) for te, a, b in matchset.triples])
    D = np.array([d for _, d in rows])
    D.setflags(write=False)
    prop = matchset.matched_proportion if matchset.n_exposed else 1.0
    return EffectEstimate(
        tau_hat=float(D.mean()),
        matched_exposed=tuple(int(t) for t, _ in rows),
        D=D,
        matched_proportion=prop,
        method=str(matchset.method),
        estimand=TARGET if prop >= 1.0 else MATCHED_POPULATION,
        unit=matchset.unit,
    )


def _difference(y_e, y_u, kind) -> NaiveEstimate:
    y_e = np.asarray(y_e, dtype=float).ravel()
    y_u = np.asarray(y_u, dtype=float).ravel()
    if y_e.size == 0 or y_u.size == 0:
        raise ValueError(f"{kind}: both exposed and unexposed observations are required")
    s_e = float(np.std(y_e, ddof=1)) if y_e.size > 1 else math.nan
    s_u = float(np.std(y_u, ddof=1)) if y_u.size > 1 else math.nan
    return NaiveEstimate(float(y_e.mean() - y_u.mean()), kind, y_e.size, y_u.size, s_e, s_u)


def naive_t(E, Y) -> NaiveEstimate:
    """Exposed minus unexposed mean outcome over time, for one outcome unit."""
    E = np.asarray(E).astype(bool)
    Y = np.asarray(Y, dtype=float)
    return _difference(Y[E], Y[~E], "naive_t")


def naive_j(E, Y) -> NaiveEstimate:
    """Exposed minus unexposed mean outcome across outcome units at one time."""
    E = np.asarray(E).astype(bool)
    Y = np.asarray(Y, dtype=float)
    return _difference(Y[E], Y[~E], "naive_j")


def naive_all(E, Y) -> NaiveEstimate:
    """Exposed minus unexposed mean outcome over the whole ``(T, M)`` panel."""
    E = np.asarray(E).astype(bool)
    Y = np.asarray(Y, dtype=float)
    if E.shape != Y.shape:
        raise ValueError("exposure and outcome panels must have the same shape")
    return _difference(Y[E], Y[~E], "naive_all")


# --------------------------------------------------------------------------
# bias bounds


@dataclass(frozen=True)
class BiasBoundInputs:
    """Inputs of the analytic bias bounds.

    Linear outcome model: ``beta2`` is the time coefficient and ``beta3_l1``,
    ``beta4_l1``, ``beta5_l1`` the l1 norms of the covariate coefficients.
    Smooth outcome model: derivative cap ``c``, order ``K``, interval length
    ``ell``, horizon ``T`` and covariate supports ``[(a_s, b_s), ...]``.
    """

    beta2: float = 0.0
    beta3_l1: float = 0.0
    beta4_l1: float = 0.0
    beta5_l1: float = 0.0
    c: Optional[float] = None
    K: Optional[int] = None
    ell: Optional[float] = None
    T: Optional[int] = None
    supports: Sequence[Tuple[float, float]] = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("beta3_l1", "beta4_l1", "beta5_l1"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative")
        if not math.isfinite(self.beta2):
            raise ValueError("beta2 must be finite")


def linear_bias_bound(delta: float, delta_prime: float, beta2: float,
                      beta3_l1: float = 0.0, beta4_l1: float = 0.0, beta5_l1: float = 0.0) -> float:
    """Worst-case bias of a feasible match set under a linear outcome model."""
    cov = beta3_l1 + beta4_l1 + beta5_l1
    return delta * abs(beta2) + (delta_prime * cov if cov else 0.0)


def smooth_constants(c: float, K: int, ell: float, T: int, supports) -> Tuple[float, float, float]:
    """Return ``(C_T, C_WXP, C_TWXP)`` for the smooth-model bound."""
    if K < 2 or not ell > 0 or T < 1 or c < 0:
        raise ValueError("need K >= 2, ell > 0, T >= 1 and c >= 0")
    widths = [b - a for a, b in supports]
    inv_fact = sum(1.0 / math.factorial(k) for k in range(1, K))
    C_T = (T - 1) * c / ell * inv_fact
    C_WXP = sum(widths) * c / ell * inv_fact
    C_TWXP = 0.5 ** (K - 1) * ((T - 1) * c + sum(widths) * c) / math.factorial(K)
    return C_T, C_WXP, C_TWXP


def smooth_bias_bound(delta: float, delta_prime: float, c: float, K: int, ell: float, T: int,
                      supports) -> float:
    """Worst-case bias under outcome components with derivatives bounded by ``c``."""
    C_T, C_WXP, C_TWXP = smooth_constants(c, K, ell, T, supports)
    return C_T * delta + C_WXP * delta_prime + C_TWXP * ell ** (K - 1)


def bias_bound(inputs: BiasBoundInputs, delta: float, delta_prime: float) -> float:
    """Dispatch on whether smooth-model inputs are present."""
    if inputs.c is None:
        return linear_bias_bound(delta, delta_prime, inputs.beta2, inputs.beta3_l1, inputs.beta4_l1,
                                 inputs.beta5_l1)
    return smooth_bias_bound(delta, delta_prime, inputs.c, inputs.K, inputs.ell, inputs.T, inputs.supports)
