"""Exposure mappings from treatments and the bipartite network."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import PanelDataset


@dataclass(frozen=True)
class ExposureSeries:
    unit: int
    E: np.ndarray
    rule: str

    def __post_init__(self):
        E = np.array(self.E, dtype=np.int8, copy=True)
        if not np.all((E == 0) | (E == 1)):
            raise ValueError("exposure must be binary")
        E.setflags(write=False)
        object.__setattr__(self, "E", E)

    @property
    def T(self) -> int:
        return self.E.shape[0]

    @property
    def exposed(self) -> np.ndarray:
        """Exposed times (1-based)."""
        return np.flatnonzero(self.E == 1) + 1

    @property
    def unexposed(self) -> np.ndarray:
        return np.flatnonzero(self.E == 0) + 1


def _check_unit(dataset: PanelDataset, j: int) -> None:
    if not 0 <= j < dataset.M:
        raise IndexError(f"outcome unit {j} out of range 0..{dataset.M - 1}")


def treated_neighbor_counts(dataset: PanelDataset, j: int) -> np.ndarray:
    """Number of treated interventional units connected to ``j`` at each time."""
    _check_unit(dataset, j)
    return np.einsum("ti,ti->t", dataset.A, dataset.G[:, :, j])


def threshold_exposure(dataset: PanelDataset, j: int, d: int) -> ExposureSeries:
    """``E_t = 1`` iff at least ``d`` treated units are connected to ``j``."""
    if d < 1:
        raise ValueError("threshold d must be a positive integer")
    counts = treated_neighbor_counts(dataset, j)
    return ExposureSeries(j, (counts >= d).astype(np.int8), f"threshold:d={d}")


def proportion_exposure(dataset: PanelDataset, j: int, threshold: float) -> ExposureSeries:
    """``E_t = 1`` iff the treated share of ``j``'s connections reaches ``threshold``.

    Times at which ``j`` has no connections are unexposed.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    counts = treated_neighbor_counts(dataset, j)
    degree = dataset.G[:, :, j].sum(axis=1)
    share = np.divide(counts, degree, out=np.zeros_like(counts, dtype=float), where=degree > 0)
    E = ((degree > 0) & (share >= threshold)).astype(np.int8)
    return ExposureSeries(j, E, f"proportion:th={threshold:g}")


def custom_exposure(
    dataset: PanelDataset,
    j: int,
    rule: Callable[[np.ndarray, np.ndarray], int],
    name: str = "custom",
) -> ExposureSeries:
    """Apply ``rule(A_t, G_t[:, j]) -> {0, 1}`` at every time period."""
    _check_unit(dataset, j)
    E = [int(rule(dataset.A[t], dataset.G[t, :, j])) for t in range(dataset.T)]
    return ExposureSeries(j, np.array(E), name)


def parse_rule(spec: str):
    """Parse ``threshold:d=K`` or ``proportion:th=X`` into a callable."""
    kind, _, arg = spec.partition(":")
    key, _, value = arg.partition("=")
    if kind == "threshold" and key == "d":
        d = int(value)
        return lambda ds, j: threshold_exposure(ds, j, d)
    if kind == "proportion" and key == "th":
        th = float(value)
        return lambda ds, j: proportion_exposure(ds, j, th)
    raise ValueError(f"unrecognised exposure rule {spec!r}")
