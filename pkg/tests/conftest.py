import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("bimatch", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("bimatch")


def make_panel(T=30, N=6, M=3, seed=0, p_treat=0.5, p_net=0.6):
    """Small random panel with one covariate per block."""
    from bimatch.data import PanelDataset
    rng = np.random.default_rng(seed)
    A = (rng.random((T, N)) < p_treat).astype(int)
    G = (rng.random((T, N, M)) < p_net).astype(int)
    Y = rng.normal(size=(T, M))
    X = rng.normal(size=(T, N, 1))
    W = rng.normal(size=(T, M, 2))
    P = rng.normal(size=(T, N, M, 1))
    return PanelDataset(A, G, Y, X=X, W=W, P=P, x_names=["temp"], w_names=["rain", "wind"], p_names=["dist"])


@pytest.fixture
def panel():
    return make_panel()


ACCEPTANCE_SEED = 2024


@pytest.fixture(scope="session")
def scenario_a_records():
    """Scenario (a), medium sparsity, 500 replications (first 100 feed the reduced-scale tables)."""
    from bimatch.simulate import ScenarioSpec, run_study
    return run_study(ScenarioSpec("a", "medium", seed=ACCEPTANCE_SEED), 500)
