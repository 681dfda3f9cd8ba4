"""Synthetic bipartite panels with known exposure effects.

Five confounding structures are available:

* ``a``: no confounding;
* ``b``: smooth temporal trends drive treatment and outcome;
* ``c``: location-varying covariates drive both;
* ``d``: non-smooth time-varying covariates drive both;
* ``e``: all of the above, with nonlinear outcome terms.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..data import PanelDataset

SCENARIOS = ("a", "b", "c", "d", "e")
SPARSITIES = ("dense", "medium", "sparse")
KERNELS = ("printed", "intended")

# default-size index blocks (1-based, inclusive) placed in the low half of each axis
_INT_X_LOW = [(1, 10), (31, 40)]
_INT_Y_LOW = [(1, 10), (21, 30)]
_OUT_X_LOW = [(1, 68), (113, 156)]
_OUT_Y_LOW = [(1, 50), (101, 150)]


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation design.

    Attributes:
        scenario: confounding structure, one of ``a``..``e``.
        sparsity: ``dense``, ``medium`` or ``sparse``; selects the exposure threshold.
        N, M, T: interventional units, outcome units, time periods.
        seed: base seed; replication ``r`` uses ``SeedSequence(seed, spawn_key=(r,))``.
        heterogeneous: effect ``1 + e'_t + 0.005 (T - t)`` with a scenario-(d)
            style outcome (treatment and network from ``scenario``).
        ar1_rho: autocorrelation of the outcome noise (``None`` for i.i.d.).
        network_confounding: scenario (a) with distance-dependent network.
        null_effects: exposure has no effect.
        kernel: ``printed`` covariance ``exp(-dt^2) / (2 * 100^2)`` or
            ``intended`` ``exp(-dt^2 / (2 * 100^2))`` for the smooth trends.
        d: exposure threshold override.
    """

    scenario: str = "a"
    sparsity: str = "medium"
    N: int = 50
    M: int = 200
    T: int = 400
    seed: int = 0
    heterogeneous: bool = False
    ar1_rho: Optional[float] = None
    network_confounding: bool = False
    null_effects: bool = False
    kernel: str = "printed"
    d: Optional[int] = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if self.sparsity not in SPARSITIES:
            raise ValueError(f"sparsity must be one of {SPARSITIES}")
        if min(self.N, self.M, self.T) < 1:
            raise ValueError("N, M and T must be positive")
        if self.ar1_rho is not None and not 0 <= self.ar1_rho < 1:
            raise ValueError("ar1_rho must lie in [0, 1)")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}")
        if self.d is not None and self.d < 1:
            raise ValueError("threshold d must be positive")

    @property
    def threshold(self) -> int:
        if self.d is not None:
            return self.d
        from .catalog import threshold_for
        return threshold_for(self)

    def with_(self, **kw) -> "ScenarioSpec":
        return replace(self, **kw)

    def rng(self, rep: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(rep,)))


@dataclass(frozen=True)
class Layout:
    int_xy: np.ndarray  # (N, 2)
    out_xy: np.ndarray  # (M, 2)
    dist: np.ndarray  # (N, M)
    R: np.ndarray  # neighbours within 0.1
    Q: np.ndarray  # R with columns normalized to sum to one (zero columns stay zero)


def _low_mask(n: int, blocks, base: int) -> np.ndarray:
    # map unit positions onto the default-size index range, then test the blocks
    pos = np.floor(np.arange(n) * base / n).astype(int) + 1
    mask = np.zeros(n, dtype=bool)
    for lo, hi in blocks:
        mask |= (pos >= lo) & (pos <= hi)
    return mask


def _coords(rng, low_mask):
    return np.where(low_mask, rng.uniform(0, 0.5, low_mask.size), rng.uniform(0.5, 1.0, low_mask.size))


def gen_locations(rng: np.random.Generator, N: int = 50, M: int = 200) -> Layout:
    """Stratified random unit locations on the unit square."""
    ix = _coords(rng, _low_mask(N, _INT_X_LOW, 50))
    iy = _coords(rng, _low_mask(N, _INT_Y_LOW, 50))
    ox = _coords(rng, _low_mask(M, _OUT_X_LOW, 200))
    oy = _coords(rng, _low_mask(M, _OUT_Y_LOW, 200))
    int_xy = np.column_stack([ix, iy])
    out_xy = np.column_stack([ox, oy])
    dist = np.sqrt(((int_xy[:, None, :] - out_xy[None, :, :]) ** 2).sum(-1))
    R = (dist <= 0.1).astype(float)
    colsum = R.sum(axis=0)
    Q = np.divide(R, colsum, out=np.zeros_like(R), where=colsum > 0)
    return Layout(int_xy, out_xy, dist, R, Q)


@functools.lru_cache(maxsize=8)
def _gp_factor(T: int, kernel: str) -> np.ndarray:
    t = np.arange(1, T + 1, dtype=float)
    d2 = (t[:, None] - t[None, :]) ** 2
    if kernel == "printed":
        cov = np.exp(-d2) / (2 * 100.0 ** 2)
    else:
        cov = np.exp(-d2 / (2 * 100.0 ** 2))
    # the smooth kernel is numerically singular; a symmetric square root copes
    vals, vecs = np.linalg.eigh(cov)
    factor = vecs * np.sqrt(np.clip(vals, 0, None))
    factor.setflags(write=False)
    return factor


def gp_paths(rng, T: int, n: int, kernel: str = "printed") -> np.ndarray:
    """``n`` Gaussian-process paths with mean ``3t/400``, shape ``(T, n)``."""
    t = np.arange(1, T + 1)
    return 3.0 * t[:, None] / 400.0 + _gp_factor(T, kernel) @ rng.standard_normal((T, n))


def _inside_low_square(xy):
    return (xy[:, 0] <= 0.5) & (xy[:, 1] <= 0.5)


def _row_mean(R, values):
    """Neighbour average over the last axis of ``values`` using rows of ``R``; 0 without neighbours."""
    rowsum = R.sum(axis=1)
    total = values @ R.T if values.ndim == 2 else R @ values
    return np.divide(total, rowsum, out=np.zeros_like(total, dtype=float), where=rowsum > 0)


def gen_covariates(rng: np.random.Generator, layout: Layout, T: int, kernel: str = "printed") -> dict:
    """All covariates of the design, keyed by name.

    Time-varying arrays have time on axis 0. ``X2``, ``X4``, ``W2``, ``W4``
    are per unit; ``X6`` (= ``W6``) is per time; ``P`` is ``(T, N, M)``.
    """
    N, M = layout.dist.shape
    t = np.arange(1, T + 1, dtype=float)
    cov = {}
    cov["X1"] = gp_paths(rng, T, N, kernel)
    cov["W1"] = gp_paths(rng, T, M, kernel)
    cov["X2"] = 8 * np.where(_inside_low_square(layout.int_xy), rng.beta(9, 1, N), rng.beta(1, 9, N))
    cov["W2"] = 8 * np.where(_inside_low_square(layout.out_xy), rng.beta(9, 1, M), rng.beta(1, 9, M))
    cov["X3"] = rng.standard_normal((T, N)) * np.sqrt(t / 100)[:, None]
    cov["W3"] = 2 * rng.beta(np.broadcast_to((t / 100)[:, None], (T, M)), 2)
    cov["P"] = rng.beta(np.broadcast_to((t / 50)[:, None, None], (T, N, M)), 10)
    # bipartite covariates from the neighbour structure
    cov["X4"] = _row_mean(layout.R, cov["W2"])
    cov["X5"] = _row_mean(layout.R, cov["W3"])
    cov["W4"] = layout.Q.T @ cov["X2"]
    cov["W5"] = cov["X3"] @ layout.Q
    var = np.log(np.maximum(t, 2)) / 10
    cov["Z"] = rng.normal(t / 200, np.sqrt(var))
    return cov


def _bernoulli(rng, prob):
    return (rng.random(np.shape(prob)) < prob).astype(np.int8)


def _network_prob(spec: ScenarioSpec, layout: Layout, T: int):
    dist = layout.dist
    s = spec.scenario
    if s == "a" and not spec.network_confounding:
        return np.full(dist.shape, 0.17)
    if s == "b":
        return 1.0 / (2.0 * (1.0 + np.exp(dist)))
    if s in ("a", "c"):
        return 1.0 / (1.7 * (1.0 + np.exp(dist)))
    t = np.arange(1, T + 1, dtype=float)
    return 1.0 / (1.0 + 0.1 * np.exp(np.sin(np.pi * t / 1000))[:, None, None] + np.exp(dist)[None])


def _treatment_prob(spec, cov, layout, T, N):
    s = spec.scenario
    if s == "a":
        return None
    if s == "b":
        return 1.0 / (1.0 + np.exp(cov["X1"] / 1.2))
    if s == "c":
        p = 1.0 / (1.0 + 0.3 * np.exp(cov["X2"] - cov["X4"] / 40))
        return np.broadcast_to(p, (T, N))
    net = _neighbour_network_mean(layout.R, cov["P"]) / 10
    Z = cov["Z"][:, None]
    if s == "d":
        return 1.0 / (1.0 + np.exp(cov["X3"] / 2 + cov["X5"] / 2 + Z + net))
    eta = (cov["X1"] / 20 + cov["X2"][None] + cov["X3"] / 100 + cov["X4"][None] + cov["X5"] / 20
           + Z / 1.5 + net)
    return 1.0 / (1.0 + 0.45 * np.exp(eta))


def _neighbour_network_mean(R, P):
    """``sum_j r_ij P_tij / sum_j r_ij`` with 0 for units without neighbours, shape ``(T, N)``."""
    rowsum = R.sum(axis=1)
    total = np.einsum("tij,ij->ti", P, R)
    return np.divide(total, rowsum[None], out=np.zeros_like(total), where=rowsum[None] > 0)


def _noise(rng, spec: ScenarioSpec, T, M):
    e = rng.standard_normal((T, M))
    rho = spec.ar1_rho
    if not rho:
        return e
    out = np.empty_like(e)
    out[0] = e[0]
    scale = math.sqrt(1 - rho ** 2)
    for t in range(1, T):
        out[t] = rho * out[t - 1] + scale * e[t]
    return out


@dataclass
class SimulatedPanel:
    """A generated panel with the pieces needed to score estimators.

    ``effect`` holds the per-``(t, j)`` exposure effect used in the outcome,
    so any averaged estimand can be computed after matching.
    """

    spec: ScenarioSpec
    dataset: PanelDataset
    layout: Layout
    E: np.ndarray  # (T, M) exposures at the spec's threshold
    effect: np.ndarray  # (T, M)
    covariates: dict = field(repr=False, default_factory=dict)


def simulate_panel(spec: ScenarioSpec, rep: int = 0, d: Optional[int] = None) -> SimulatedPanel:
    """Generate replication ``rep`` of ``spec`` (locations included)."""
    rng = spec.rng(rep)
    N, M, T = spec.N, spec.M, spec.T
    layout = gen_locations(rng, N, M)
    cov = gen_covariates(rng, layout, T, spec.kernel)

    prob_a = _treatment_prob(spec, cov, layout, T, N)
    A = (rng.random((T, N)) < 0.5).astype(np.int8) if prob_a is None else _bernoulli(rng, prob_a)
    rho = _network_prob(spec, layout, T)
    G = _bernoulli(rng, np.broadcast_to(rho, (T, N, M)))
    d = spec.threshold if d is None else d
    E = (np.einsum("ti,tij->tj", A, G, dtype=np.int64) >= d).astype(np.int8)

    t = np.arange(1, T + 1, dtype=float)
    if spec.heterogeneous:
        effect = 1.0 + rng.standard_normal((T, M)) + 0.005 * (T - t)[:, None]
    else:
        effect = np.ones((T, M))
    if spec.null_effects:
        effect = np.zeros((T, M))
    qP = np.einsum("tij,ij->tj", cov["P"], layout.Q)
    Z = cov["Z"][:, None]
    s = spec.scenario
    if spec.heterogeneous:
        base = cov["W3"] + cov["W5"] + qP + Z
    elif s == "a":
        base = np.broadcast_to(cov["W2"], (T, M))
    elif s == "b":
        base = cov["W1"]
    elif s == "c":
        base = np.broadcast_to(4 * cov["W2"] + 4 * cov["W4"], (T, M))
    elif s == "d":
        base = cov["W3"] + cov["W5"] + qP + Z
    else:
        base = (cov["W1"] + 2 * cov["W2"][None] + cov["W3"] + 0.1 * cov["W3"] ** 2 + 2 * cov["W4"][None]
                + cov["W5"] + 1.0 / (1.0 + np.exp(cov["W5"])) + np.sin(qP) + 2 * Z)
    Y = effect * E + base + _noise(rng, spec, T, M)

    X = np.stack([cov["X1"], np.broadcast_to(cov["X2"], (T, N)), cov["X3"],
                  np.broadcast_to(cov["X4"], (T, N)), cov["X5"], np.broadcast_to(cov["Z"][:, None], (T, N))], -1)
    W = np.stack([cov["W1"], np.broadcast_to(cov["W2"], (T, M)), cov["W3"],
                  np.broadcast_to(cov["W4"], (T, M)), cov["W5"], np.broadcast_to(cov["Z"][:, None], (T, M))], -1)
    names = [f"{k}" for k in range(1, 7)]
    dataset = PanelDataset(A, G, Y, X=X, W=W, P=cov["P"][..., None],
                           x_names=[f"x{k}" for k in names], w_names=[f"w{k}" for k in names], p_names=["p1"])
    return SimulatedPanel(spec, dataset, layout, E, effect, cov)
