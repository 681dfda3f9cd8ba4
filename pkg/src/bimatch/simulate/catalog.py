"""Exposure thresholds that put the target unit's exposed count in each band."""

from __future__ import annotations

import numpy as np

# exposed-period bands for the target outcome unit (first unit) over T=400
BANDS = {"dense": (150, 200), "medium": (80, 120), "sparse": (30, 60)}

# (design, sparsity) -> d, frozen from calibrate_thresholds(reps=50, seed=20240501);
# "a_net" is scenario (a) with the distance-dependent network
THRESHOLDS = {
    ("a", "dense"): 5, ("a", "medium"): 6, ("a", "sparse"): 7,
    ("a_net", "dense"): 6, ("a_net", "medium"): 7, ("a_net", "sparse"): 9,
    ("b", "dense"): 3, ("b", "medium"): 4, ("b", "sparse"): 5,
    ("c", "dense"): 6, ("c", "medium"): 7, ("c", "sparse"): 8,
    ("d", "dense"): 5, ("d", "medium"): 7, ("d", "sparse"): 9,
    ("e", "dense"): 3, ("e", "medium"): 4, ("e", "sparse"): 6,
}


def design_key(spec) -> str:
    return "a_net" if spec.network_confounding and spec.scenario == "a" else spec.scenario


def threshold_for(spec) -> int:
    key = (design_key(spec), spec.sparsity)
    try:
        return THRESHOLDS[key]
    except KeyError:
        raise KeyError(f"no calibrated threshold for {key}; pass d explicitly") from None


def treated_counts(spec, reps: int, unit: int = 0) -> np.ndarray:
    """Treated-neighbour counts of ``unit``, shape ``(reps, T)``."""
    from .generate import simulate_panel
    out = []
    for r in range(reps):
        ds = simulate_panel(spec.with_(d=1), r).dataset
        out.append(np.einsum("ti,ti->t", ds.A, ds.G[:, :, unit]))
    return np.array(out)


def calibrate_thresholds(spec, reps: int = 50, d_max: int = 40):
    """Pick, per sparsity band, the d whose mean exposed count is nearest the band centre.

    The mean exposed count decreases in d, so the search walks d upward and
    stops once the mean falls below the lowest band.

    Returns:
        ``({sparsity: d}, {sparsity: share of replications inside the band})``.
    """
    counts = treated_counts(spec, reps)
    means, exposed = {}, {}
    for d in range(1, d_max + 1):
        exposed[d] = (counts >= d).sum(axis=1)
        means[d] = exposed[d].mean()
        if means[d] < BANDS["sparse"][0] / 2:
            break
    chosen, share = {}, {}
    for name, (lo, hi) in BANDS.items():
        centre = (lo + hi) / 2
        d = min(means, key=lambda k: (abs(means[k] - centre), k))
        chosen[name] = d
        share[name] = float(np.mean((exposed[d] >= lo) & (exposed[d] <= hi)))
    return chosen, share
