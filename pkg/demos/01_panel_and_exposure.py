"""Build a bipartite panel, validate it, and turn interventions into exposures.

Run: python3 demos/01_panel_and_exposure.py
"""

import numpy as np

from bimatch.data import PanelDataset, balance_covariates, validate
from bimatch.exposure import parse_rule, proportion_exposure, threshold_exposure, treated_neighbor_counts

rng = np.random.default_rng(7)
T, N, M = 60, 8, 3

# Interventional units are switched on at random; each outcome unit sees the
# interventional units connected to it by the (time-varying) network.
A = (rng.random((T, N)) < 0.35).astype(int)
G = (rng.random((T, N, M)) < 0.5).astype(int)
Y = rng.normal(size=(T, M))
W = rng.normal(size=(T, M, 1))  # e.g. rainfall at the outcome unit
X = rng.normal(size=(T, N, 1))  # e.g. output at the interventional unit
P = rng.uniform(1, 20, size=(T, N, M, 1))  # e.g. distance between the two
ds = PanelDataset(A, G, Y, X=X, W=W, P=P, x_names=["output"], w_names=["rain"], p_names=["distance"])

print("validation:", validate(ds))

# Exposure of outcome unit 0: at least d treated neighbours.
j = 0
counts = treated_neighbor_counts(ds, j)
print("treated neighbours, first 12 periods:", counts[:12])
for d in (1, 2, 3):
    e = threshold_exposure(ds, j, d)
    print(f"threshold d={d}: {e.E.sum():2d} exposed of {T}")

# The same rules from their text form, as used on the command line.
frac = parse_rule("proportion:th=0.5")(ds, j)
print("proportion >= 0.5:", frac.E.sum(), "exposed;", proportion_exposure(ds, j, 0.5).rule)

# Balance covariates for unit 0: its own W, plus q-weighted summaries of X and P.
E = threshold_exposure(ds, j, 2).E
cov = balance_covariates(ds, j, exposure=E)
print("balance columns:", cov.labels)
print("pooled SDs used for standardization:", np.round(cov.scale, 3))
