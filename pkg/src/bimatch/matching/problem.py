"""Candidate generation and auxiliary balance variables."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..data import BalanceCovariateSet, standardize
from .params import Method, TuningParams


class NoMatchesPossible(ValueError):
    """Raised when one of the exposure classes is empty."""


@dataclass(frozen=True)
class Candidates:
    """Every match allowed by the per-match constraints.

    ``u2 == 0`` marks a one-to-one match (times start at 1). Rows are sorted
    lexicographically by ``(te, u1, u2)`` with pairs before triples sharing
    the same prefix.
    """

    te: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    tgap: np.ndarray  # signed time imbalance of each match
    absgap: np.ndarray  # total absolute time distance of each match
    cgap: np.ndarray  # (n, K_kept) signed covariate imbalance
    tagap: Optional[np.ndarray] = None  # (n, L) signed imbalance of localized time terms, capped by delta

    def __len__(self) -> int:
        return self.te.shape[0]

    @property
    def is_triple(self) -> np.ndarray:
        return self.u2 > 0

    def key(self, k: int) -> Tuple[int, ...]:
        if self.u2[k] > 0:
            return (int(self.te[k]), int(self.u1[k]), int(self.u2[k]))
        return (int(self.te[k]), int(self.u1[k]))


@dataclass(frozen=True)
class MatchingProblem:
    exposed: np.ndarray
    unexposed: np.ndarray
    covariates: BalanceCovariateSet
    params: TuningParams
    method: Method
    candidates: Candidates
    time_aux: Optional[np.ndarray] = None  # (T, L) localized time terms, present when ell is set
    time_aux_labels: Sequence[str] = ()

    @property
    def n_exposed(self) -> int:
        return int(self.exposed.shape[0])

    @property
    def constrained(self) -> np.ndarray:
        """Scaled covariate columns under mean-balance constraints, ``(T, K)``."""
        if not self.params.constrains_covariates:
            return np.zeros((self.covariates.T, 0))
        return self.covariates.kept

    @property
    def constrained_labels(self):
        return self.covariates.kept_labels if self.params.constrains_covariates else []

    def gap_columns(self) -> Tuple[np.ndarray, np.ndarray]:
        """Per-candidate signed gaps of every mean constraint and their caps.

        Columns: time, localized time terms (cap delta), then constrained
        covariates (cap delta').
        """
        c = self.candidates
        ta = c.tagap if c.tagap is not None else np.zeros((len(c), 0))
        G = np.column_stack([c.tgap.reshape(-1, 1), ta, c.cgap]) if len(c) else \
            np.zeros((0, 1 + ta.shape[1] + c.cgap.shape[1]))
        caps = np.concatenate([np.full(1 + ta.shape[1], self.params.delta),
                               np.full(c.cgap.shape[1], self.params.delta_prime)])
        return G, caps


def expand_auxiliary(
    covariates: BalanceCovariateSet,
    ell: float,
    K: int,
    supports: Optional[Sequence[Tuple[float, float]]] = None,
) -> BalanceCovariateSet:
    """Append localized and polynomial versions of every raw column.

    For a column with support ``[a, b]`` the support is cut into
    ``ceil((b - a) / ell)`` intervals of length ``ell`` with midpoints ``xi``;
    each yields ``(w - xi) * 1{|w - xi| <= ell / 2}``. Powers ``w**k`` for
    ``k = 2..K-1`` follow. New columns are scaled the same way as the input
    set (pooled SD when it is standardized, raw otherwise).
    """
    if not ell > 0:
        raise ValueError("ell must be positive")
    if K < 2:
        raise ValueError("K must be at least 2")
    values = covariates.values
    new_cols, new_labels = [], []
    for s, label in enumerate(covariates.labels):
        col = values[:, s]
        a, b = supports[s] if supports is not None else (float(col.min()), float(col.max()))
        if not b > a:
            warnings.warn(f"covariate {label!r} has degenerate support; no auxiliary columns", stacklevel=2)
            continue
        n_int = max(1, math.ceil((b - a) / ell - 1e-12))
        for r in range(n_int):
            xi = a + (r + 0.5) * ell
            inside = np.abs(col - xi) <= ell / 2
            new_cols.append(np.where(inside, col - xi, 0.0))
            new_labels.append(f"{label}@{xi:g}")
        for k in range(2, K):
            new_cols.append(col ** k)
            new_labels.append(f"{label}^{k}")
    if not new_cols:
        return covariates
    columns = np.column_stack([values] + new_cols)
    labels = list(covariates.labels) + new_labels
    if covariates.standardized:
        return standardize(columns, covariates.exposure, labels)
    out = BalanceCovariateSet.raw(columns, labels)
    # keep the caller's drop decisions for the original columns
    dropped = out.dropped.copy()
    dropped[: values.shape[1]] = covariates.dropped
    return BalanceCovariateSet(out.values, out.labels, out.scale, dropped)


def time_auxiliary(T: int, ell: float, K: int) -> Tuple[np.ndarray, list]:
    """Localized powers of time, ``(t - xi)**k * 1{|t - xi| <= ell / 2}``.

    The time axis ``[1, T]`` is cut into intervals of length ``ell`` with
    midpoints ``xi``; ``k`` runs over ``1..K-1``. Columns that vanish at
    every period are dropped.
    """
    t = np.arange(1, T + 1, dtype=float)
    cols, labels = [], []
    for r in range(max(1, math.ceil((T - 1) / ell - 1e-12))):
        xi = 1 + (r + 0.5) * ell
        d = np.where(np.abs(t - xi) <= ell / 2, t - xi, 0.0)
        for k in range(1, K):
            col = d ** k
            if np.any(col != 0):
                cols.append(col)
                labels.append(f"t@{xi:g}" + ("" if k == 1 else f"^{k}"))
    return (np.column_stack(cols) if cols else np.zeros((T, 0))), labels


def _pair_rows(te, unexposed, eps):
    lo = np.searchsorted(unexposed, te - eps, side="left")
    hi = np.searchsorted(unexposed, te + eps, side="right")
    u = unexposed[lo:hi]
    return [(te, int(x), 0) for x in u]


def _triple_rows(te, unexposed, eps):
    lo = np.searchsorted(unexposed, te - eps, side="left")
    mid = np.searchsorted(unexposed, te, side="left")
    hi = np.searchsorted(unexposed, te + eps, side="right")
    before, after = unexposed[lo:mid], unexposed[mid:hi]
    after = after[after > te]
    return [(te, int(x), int(y)) for x in before for y in after]


def enumerate_candidates(exposed, unexposed, covariates: BalanceCovariateSet,
                         params: TuningParams, method: Method, constrained: np.ndarray,
                         time_aux: Optional[np.ndarray] = None) -> Candidates:
    exposed = np.asarray(exposed, dtype=int)
    unexposed = np.sort(np.asarray(unexposed, dtype=int))
    rows = []
    for te in exposed:
        te = int(te)
        group = []
        if method.allows_pairs:
            group += _pair_rows(te, unexposed, params.eps)
        if method.allows_triples:
            group += _triple_rows(te, unexposed, params.eps)
        rows += sorted(group, key=lambda r: (r[0], r[1], r[2]))
    arr = np.array(rows, dtype=int).reshape(-1, 3)
    te, u1, u2 = arr[:, 0], arr[:, 1], arr[:, 2]
    triple = u2 > 0
    u2_or_u1 = np.where(triple, u2, u1)
    tgap = te - (u1 + u2_or_u1) / 2.0
    absgap = np.abs(te - u1) + np.where(triple, np.abs(u2 - te), 0)

    def gaps(cols):
        if cols.shape[1] == 0 or len(te) == 0:
            return np.zeros((len(te), cols.shape[1]))
        return cols[te - 1] - (cols[u1 - 1] + cols[u2_or_u1 - 1]) / 2.0

    cgap = gaps(constrained)
    tagap = gaps(time_aux) if time_aux is not None else np.zeros((len(te), 0))
    keep = np.ones(len(te), dtype=bool)
    if params.delta_dprime is not None and covariates.kept.shape[1]:
        per_match = gaps(covariates.kept)
        keep &= np.all(np.abs(per_match) <= params.delta_dprime, axis=1)
    return Candidates(te[keep], u1[keep], u2[keep], tgap[keep], absgap[keep], cgap[keep], tagap[keep])


def build_problem(exposure, covariates: Optional[BalanceCovariateSet], params: TuningParams,
                  method) -> MatchingProblem:
    """Set up the matching problem for one outcome unit.

    Args:
        exposure: an ``ExposureSeries`` or a vector over times ``1..T`` with 1
            for exposed, 0 for unexposed and NaN (or any other value) for
            periods whose exposure is not observed.
        covariates: balance covariates over the same times (``None`` for none).
        params: tuning parameters; ``ell``/``kpow`` trigger auxiliary columns.
        method: ``Method`` or its string form.

    Raises:
        NoMatchesPossible: no exposed or no unexposed period.
    """
    E = np.asarray(getattr(exposure, "E", exposure), dtype=float)
    exposed = np.flatnonzero(E == 1) + 1
    unexposed = np.flatnonzero(E == 0) + 1
    if covariates is None:
        covariates = BalanceCovariateSet.empty(E.shape[0])
    if covariates.T != E.shape[0]:
        raise ValueError("covariates and exposure must cover the same times")
    return problem_from_sets(exposed, unexposed, covariates, params, method)


def problem_from_sets(exposed, unexposed, covariates: BalanceCovariateSet, params: TuningParams,
                      method) -> MatchingProblem:
    """Like ``build_problem`` but with explicit exposed/unexposed time sets (1-based)."""
    method = Method.parse(method)
    exposed = np.unique(np.asarray(exposed, dtype=int))
    unexposed = np.unique(np.asarray(unexposed, dtype=int))
    if exposed.size == 0:
        raise NoMatchesPossible("no exposed time periods")
    if unexposed.size == 0:
        raise NoMatchesPossible("no unexposed time periods")
    if np.intersect1d(exposed, unexposed).size:
        raise ValueError("exposed and unexposed periods must be disjoint")
    T = covariates.T
    if exposed.min() < 1 or unexposed.min() < 1 or max(exposed.max(), unexposed.max()) > T:
        raise ValueError(f"time indices must lie in 1..{T}")
    time_aux, time_labels = None, []
    if params.ell is not None:
        covariates = expand_auxiliary(covariates, params.ell, params.kpow)
        time_aux, time_labels = time_auxiliary(T, params.ell, params.kpow)
    constrained = covariates.kept if params.constrains_covariates else np.zeros((T, 0))
    cands = enumerate_candidates(exposed, unexposed, covariates, params, method, constrained, time_aux)
    return MatchingProblem(exposed, unexposed, covariates, params, method, cands, time_aux, time_labels)
