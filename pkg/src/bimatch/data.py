"""Panel containers, validation, covariate summaries and standardization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np


def _frozen(arr, dtype=float):
    if arr is None:
        return None
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PanelDataset:
    """Treatments, network, covariates and outcomes of a bipartite panel.

    Times are the integers ``1..T`` and map to axis-0 positions ``0..T-1``.
    Interventional units are indexed ``0..N-1`` and outcome units ``0..M-1``.

    Attributes:
        A: binary treatments, shape ``(T, N)``.
        G: binary bipartite network, shape ``(T, N, M)``.
        Y: outcomes, shape ``(T, M)``.
        X: interventional-unit time-varying covariates, ``(T, N, p_X)``.
        W: outcome-unit time-varying covariates, ``(T, M, p_W)``.
        P: network time-varying covariates, ``(T, N, M, p_P)``.
        X_static, W_static, P_static: optional time-invariant blocks.
    """

    A: np.ndarray
    G: np.ndarray
    Y: np.ndarray
    X: Optional[np.ndarray] = None
    W: Optional[np.ndarray] = None
    P: Optional[np.ndarray] = None
    X_static: Optional[np.ndarray] = None
    W_static: Optional[np.ndarray] = None
    P_static: Optional[np.ndarray] = None
    x_names: Sequence[str] = ()
    w_names: Sequence[str] = ()
    p_names: Sequence[str] = ()

    def __post_init__(self):
        for name in ("A", "G", "Y", "X", "W", "P", "X_static", "W_static", "P_static"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        T = self.Y.shape[0] if self.Y.ndim >= 1 else 0
        M = self.Y.shape[1] if self.Y.ndim == 2 else 0
        N = self.A.shape[1] if self.A.ndim == 2 else 0
        # empty covariate blocks keep downstream code free of None checks
        if self.X is None:
            object.__setattr__(self, "X", _frozen(np.zeros((T, N, 0))))
        if self.W is None:
            object.__setattr__(self, "W", _frozen(np.zeros((T, M, 0))))
        if self.P is None:
            object.__setattr__(self, "P", _frozen(np.zeros((T, N, M, 0))))
        for attr, block in (("x_names", self.X), ("w_names", self.W), ("p_names", self.P)):
            names = tuple(getattr(self, attr))
            if not names:
                prefix = attr[0]
                names = tuple(f"{prefix}{k + 1}" for k in range(block.shape[-1]))
            object.__setattr__(self, attr, names)

    @property
    def T(self) -> int:
        return self.Y.shape[0]

    @property
    def N(self) -> int:
        return self.A.shape[1]

    @property
    def M(self) -> int:
        return self.Y.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(1, self.T + 1)


@dataclass
class ValidationReport:
    issues: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        if self.ok:
            return "dataset valid"
        return "\n".join(f"- {issue}" for issue in self.issues)


def _is_binary(arr: np.ndarray) -> bool:
    finite = arr[np.isfinite(arr)]
    return bool(np.all((finite == 0) | (finite == 1)))


def validate(dataset: PanelDataset) -> ValidationReport:
    """Check dimensions, binary domains and completeness of a panel.

    Never raises; every problem found is appended to the report.
    """
    issues: List[str] = []
    A, G, Y = dataset.A, dataset.G, dataset.Y
    if Y.ndim != 2:
        issues.append(f"outcomes must be 2-d (T, M), got shape {Y.shape}")
        return ValidationReport(issues)
    T, M = Y.shape
    if A.ndim != 2:
        issues.append(f"treatments must be 2-d (T, N), got shape {A.shape}")
        return ValidationReport(issues)
    N = A.shape[1]

    if A.shape[0] != T:
        issues.append(f"missing treatment slice: {A.shape[0]} time periods vs {T}")
    if G.ndim != 3:
        issues.append(f"network must be 3-d (T, N, M), got shape {G.shape}")
    else:
        if G.shape[0] != T:
            issues.append(f"missing network slice: {G.shape[0]} time periods vs {T}")
        if G.shape[1:] != (N, M):
            issues.append(f"network unit dimensions {G.shape[1:]} do not match (N, M)=({N}, {M})")

    expected = {
        "X": (T, N),
        "W": (T, M),
        "P": (T, N, M),
    }
    for name, lead in expected.items():
        block = getattr(dataset, name)
        if block.shape[:-1] != lead:
            issues.append(f"{name} covariates have shape {block.shape}, expected {lead} + (p,)")
        names = getattr(dataset, f"{name.lower()}_names")
        if len(names) != block.shape[-1]:
            issues.append(f"{name} has {block.shape[-1]} covariates but {len(names)} names")

    if not _is_binary(A):
        issues.append("non-binary treatment")
    if G.ndim == 3 and not _is_binary(G):
        issues.append("non-binary network")

    for name in ("A", "G", "Y", "X", "W", "P"):
        block = getattr(dataset, name)
        if block.size and not np.all(np.isfinite(block)):
            issues.append(f"missing cells in {name}")
    return ValidationReport(issues)


@dataclass(frozen=True)
class SummaryWeights:
    """Weights ``q`` over the N interventional units, used as ``q^T X_t``."""

    q: np.ndarray
    label: str = "mean"

    def __post_init__(self):
        q = _frozen(self.q)
        if q.ndim != 1:
            raise ValueError("summary weights must be a vector")
        if not np.all(np.isfinite(q)):
            raise ValueError("summary weights must be finite")
        if not np.any(q != 0):
            raise ValueError("summary weights need at least one nonzero entry")
        object.__setattr__(self, "q", q)

    @classmethod
    def uniform(cls, n: int) -> "SummaryWeights":
        return cls(np.full(n, 1.0 / n), label="mean")


def summarize(X_t: np.ndarray, q: SummaryWeights) -> np.ndarray:
    """Return ``q^T X_t`` for an ``(N, p)`` covariate matrix."""
    X_t = np.asarray(X_t, dtype=float)
    if X_t.shape[0] != q.q.shape[0]:
        raise ValueError(f"weights have length {q.q.shape[0]} but X_t has {X_t.shape[0]} rows")
    return q.q @ X_t


def _classes(exposure):
    """Exposed and unexposed masks; values other than 0/1 (e.g. NaN) belong to neither."""
    exposure = np.asarray(exposure, dtype=float)
    return exposure == 1, exposure == 0


def pooled_sd(column: np.ndarray, exposure: np.ndarray) -> float:
    """sqrt of the average of the exposed and unexposed sample variances."""
    exp_, unexp = _classes(exposure)
    v_e = np.var(column[exp_], ddof=1) if exp_.sum() > 1 else 0.0
    v_u = np.var(column[unexp], ddof=1) if unexp.sum() > 1 else 0.0
    return float(np.sqrt((v_e + v_u) / 2.0))


@dataclass(frozen=True)
class BalanceCovariateSet:
    """Per-time balance covariates for one outcome unit.

    ``values`` holds the unscaled columns, ``scale`` the divisor of each column
    (pooled SD when standardized, 1 for raw units). Columns flagged in
    ``dropped`` generate no balance constraints.
    """

    values: np.ndarray
    labels: tuple
    scale: np.ndarray
    dropped: np.ndarray
    exposure: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim == 1:
            values = _frozen(values[:, None])
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "scale", _frozen(self.scale))
        object.__setattr__(self, "dropped", _frozen(self.dropped, dtype=bool))
        if self.exposure is not None:
            object.__setattr__(self, "exposure", _frozen(self.exposure, dtype=float))
        if len(self.labels) != values.shape[1]:
            raise ValueError("one label per column required")

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def standardized(self) -> bool:
        return self.exposure is not None

    @property
    def scaled(self) -> np.ndarray:
        """Columns divided by their scale; dropped columns are zeroed."""
        out = np.zeros_like(self.values)
        keep = ~self.dropped
        out[:, keep] = self.values[:, keep] / self.scale[keep]
        return out

    @property
    def kept(self) -> np.ndarray:
        """Scaled columns that carry balance constraints, shape ``(T, K_kept)``."""
        return self.scaled[:, ~self.dropped]

    @property
    def kept_labels(self) -> List[str]:
        return [lab for lab, d in zip(self.labels, self.dropped) if not d]

    @property
    def dropped_labels(self) -> List[str]:
        return [lab for lab, d in zip(self.labels, self.dropped) if d]

    @classmethod
    def raw(cls, columns, labels: Optional[Sequence[str]] = None) -> "BalanceCovariateSet":
        """Unscaled set; balance tolerances then apply in the columns' own units."""
        columns = np.asarray(columns, dtype=float)
        if columns.ndim == 1:
            columns = columns[:, None]
        labels = _default_labels(labels, columns.shape[1])
        constant = np.ptp(columns, axis=0) == 0 if columns.shape[0] else np.ones(columns.shape[1], bool)
        return cls(columns, labels, np.ones(columns.shape[1]), constant)

    @classmethod
    def empty(cls, T: int) -> "BalanceCovariateSet":
        return cls(np.zeros((T, 0)), (), np.ones(0), np.zeros(0, bool))


def _default_labels(labels, k):
    if labels is None:
        return tuple(f"c{i + 1}" for i in range(k))
    labels = tuple(labels)
    if len(labels) != k:
        raise ValueError(f"expected {k} labels, got {len(labels)}")
    return labels


def standardize(columns, exposure, labels: Optional[Sequence[str]] = None) -> BalanceCovariateSet:
    """Scale every column by its exposed/unexposed pooled standard deviation.

    Columns whose pooled SD is zero are flagged as dropped. Periods whose
    exposure is neither 0 nor 1 (unobserved) do not enter the SD.

    Raises:
        ValueError: if ``exposure`` contains a single class.
    """
    columns = np.asarray(columns, dtype=float)
    if columns.ndim == 1:
        columns = columns[:, None]
    exposure = np.asarray(exposure, dtype=float)
    if exposure.shape[0] != columns.shape[0]:
        raise ValueError("exposure and columns must share the time axis")
    exp_, unexp = _classes(exposure)
    if not exp_.any() or not unexp.any():
        raise ValueError("standardization needs both exposed and unexposed time periods")
    labels = _default_labels(labels, columns.shape[1])
    scale = np.array([pooled_sd(columns[:, k], exposure) for k in range(columns.shape[1])])
    magnitude = np.maximum(1.0, np.abs(columns).max(axis=0)) if columns.size else np.ones(0)
    # round-off noise on a constant column must not count as spread
    dropped = ~(scale > 1e-12 * magnitude)
    scale = np.where(dropped, 1.0, scale)
    return BalanceCovariateSet(columns, labels, scale, dropped, exposure)


def balance_covariates(
    dataset: PanelDataset,
    j: int,
    exposure=None,
    w: Optional[Sequence[str]] = None,
    x: Optional[Sequence[str]] = None,
    p: Optional[Sequence[str]] = None,
    q: Optional[Dict[str, SummaryWeights]] = None,
    default_q: Optional[SummaryWeights] = None,
) -> BalanceCovariateSet:
    """Assemble the balance covariates of outcome unit ``j``.

    Columns are the unit's own time-varying covariates followed by q-summaries
    of the selected interventional and network covariates. ``w``, ``x`` and
    ``p`` select covariates by name (``None`` means all). ``q`` maps a covariate
    name to its own weights; others use ``default_q`` (uniform by default).
    When ``exposure`` is given the set is standardized, otherwise raw.
    """
    q = q or {}
    default_q = default_q or SummaryWeights.uniform(dataset.N)
    cols, labels = [], []

    def pick(names, selected):
        if selected is None:
            return list(range(len(names)))
        lookup = {n: k for k, n in enumerate(names)}
        missing = [s for s in selected if s not in lookup]
        if missing:
            raise KeyError(f"unknown covariates: {missing}")
        return [lookup[s] for s in selected]

    for k in pick(dataset.w_names, w):
        cols.append(dataset.W[:, j, k])
        labels.append(dataset.w_names[k])
    for k in pick(dataset.x_names, x):
        name = dataset.x_names[k]
        weights = q.get(name, default_q)
        cols.append(dataset.X[:, :, k] @ weights.q)
        labels.append(f"{name}~{weights.label}")
    for k in pick(dataset.p_names, p):
        name = dataset.p_names[k]
        weights = q.get(name, default_q)
        cols.append(dataset.P[:, :, j, k] @ weights.q)
        labels.append(f"{name}~{weights.label}")

    columns = np.column_stack(cols) if cols else np.zeros((dataset.T, 0))
    if exposure is None:
        return BalanceCovariateSet.raw(columns, labels)
    return standardize(columns, exposure, labels)
