import math

import numpy as np
import pandas as pd
import pytest

from bimatch.simulate import (BANDS, THRESHOLDS, ScenarioSpec, calibrate_thresholds, gen_covariates, gen_locations,
                              gp_paths, run_replication, run_study, simulate_panel, summarize)
from bimatch.simulate.study import parse_label, method_label


def test_spec_validation():
    for bad in (dict(scenario="f"), dict(sparsity="thin"), dict(N=0), dict(ar1_rho=1.0), dict(kernel="x"),
                dict(d=0)):
        with pytest.raises(ValueError):
            ScenarioSpec(**bad)
    assert ScenarioSpec("c", "sparse").threshold == THRESHOLDS[("c", "sparse")]
    assert ScenarioSpec("a", network_confounding=True).threshold == THRESHOLDS[("a_net", "medium")]


def test_location_blocks():
    lay = gen_locations(np.random.default_rng(0))
    ix, iy = lay.int_xy[:, 0], lay.int_xy[:, 1]
    assert np.all(ix[:10] <= 0.5) and np.all(ix[30:40] <= 0.5) and np.all(ix[10:30] >= 0.5)
    assert np.all(iy[:10] <= 0.5) and np.all(iy[20:30] <= 0.5) and np.all(iy[40:] >= 0.5)
    ox, oy = lay.out_xy[:, 0], lay.out_xy[:, 1]
    assert np.all(ox[:68] <= 0.5) and np.all(ox[112:156] <= 0.5) and np.all(ox[68:112] >= 0.5)
    assert np.all(oy[:50] <= 0.5) and np.all(oy[100:150] <= 0.5) and np.all(oy[150:] >= 0.5)
    assert np.all((lay.int_xy >= 0) & (lay.int_xy <= 1))
    lay2 = gen_locations(np.random.default_rng(0))
    assert np.array_equal(lay.out_xy, lay2.out_xy)


def test_neighbour_weights():
    lay = gen_locations(np.random.default_rng(1))
    colsum = lay.Q.sum(axis=0)
    has = lay.R.sum(axis=0) > 0
    assert np.allclose(colsum[has], 1.0) and np.all(colsum[~has] == 0)
    cov = gen_covariates(np.random.default_rng(2), lay, 20)
    j = int(np.flatnonzero(has)[0])
    nb = np.flatnonzero(lay.R[:, j])
    assert cov["W4"][j] == pytest.approx(cov["X2"][nb].mean())
    lonely = np.flatnonzero(lay.R.sum(axis=1) == 0)
    if lonely.size:
        assert np.all(cov["X4"][lonely] == 0)


def test_gp_mean_and_kernels():
    rng = np.random.default_rng(3)
    paths = gp_paths(rng, 400, 2000, "printed")
    assert paths[-1].mean() == pytest.approx(3.0, abs=0.01)
    # the printed kernel has variance 1 / (2 * 100^2) and is nearly white
    resid = paths - 3 * np.arange(1, 401)[:, None] / 400
    assert resid.std() == pytest.approx(math.sqrt(1 / 2e4), rel=0.05)
    smooth = gp_paths(rng, 400, 50, "intended") - 3 * np.arange(1, 401)[:, None] / 400
    lag1 = np.corrcoef(smooth[:-1].ravel(), smooth[1:].ravel())[0, 1]
    assert lag1 > 0.99


def test_covariate_shapes_and_z_guard():
    spec = ScenarioSpec("e", N=10, M=12, T=30, d=2)
    panel = simulate_panel(spec, 0)
    c = panel.covariates
    assert c["X1"].shape == (30, 10) and c["P"].shape == (30, 10, 12) and c["Z"].shape == (30,)
    assert panel.dataset.X.shape == (30, 10, 6) and panel.dataset.W.shape == (30, 12, 6)
    z1 = [simulate_panel(spec, r).covariates["Z"][0] for r in range(5)]
    assert np.std(z1) > 0  # t = 1 is not degenerate


def test_scenario_a_treatment_is_fair_coin():
    panel = simulate_panel(ScenarioSpec("a"), 0)
    assert panel.dataset.A.mean() == pytest.approx(0.5, abs=0.01)
    assert panel.dataset.G.mean() == pytest.approx(0.17, abs=0.005)


def test_ar1_noise_autocorrelation():
    panel = simulate_panel(ScenarioSpec("a", ar1_rho=0.8), 0)
    noise = panel.dataset.Y - panel.E - panel.covariates["W2"][None, :]
    lag1 = np.mean([np.corrcoef(noise[:-1, j], noise[1:, j])[0, 1] for j in range(noise.shape[1])])
    assert lag1 == pytest.approx(0.8, abs=0.03)


def test_effects_by_variant():
    assert np.all(simulate_panel(ScenarioSpec("b", T=50, M=5, d=2), 0).effect == 1)
    assert np.all(simulate_panel(ScenarioSpec("b", T=50, M=5, d=2, null_effects=True), 0).effect == 0)
    het = simulate_panel(ScenarioSpec("d", T=50, M=5, d=2, heterogeneous=True), 0).effect
    assert het.std() > 0.5


def test_replications_are_deterministic_and_distinct():
    spec = ScenarioSpec("c", T=60, M=8, N=12, d=3, seed=9)
    a, b = simulate_panel(spec, 2), simulate_panel(spec, 2)
    assert np.array_equal(a.dataset.Y, b.dataset.Y) and np.array_equal(a.E, b.E)
    assert not np.array_equal(a.dataset.Y, simulate_panel(spec, 3).dataset.Y)


def test_study_independent_of_workers():
    spec = ScenarioSpec("b", T=80, M=6, N=15, d=2, seed=4)
    one = run_study(spec, 3, methods=("1-1", "1-2"), workers=1)
    two = run_study(spec, 3, methods=("1-1", "1-2"), workers=2)
    pd.testing.assert_frame_equal(one, two)
    assert summarize(one).to_csv() == summarize(two).to_csv()


def test_single_replication_summary_equals_record():
    spec = ScenarioSpec("a", T=80, M=4, N=10, d=2, seed=5)
    rec = run_study(spec, 1, methods=("1-1",))
    row = rec[rec.estimator == "1-1"].iloc[0]
    summ = summarize(rec).loc["1-1"]
    assert summ["bias"] == pytest.approx(row["tau_hat"] - row["target_all"])
    assert summ["n_reps"] == 1


def test_estimate_without_interval_counts_for_bias_not_coverage():
    base = dict(estimator="naive_j", n_matched=0, n_exposed=1, prop=math.nan, optimality="",
                target_all=1.0, target_exposed=1.0, target_matched=math.nan)
    recs = pd.DataFrame([dict(base, rep=0, tau_hat=1.5, lo=math.nan, hi=math.nan, p_value=math.nan),
                         dict(base, rep=1, tau_hat=0.7, lo=0.5, hi=0.9, p_value=0.01),
                         dict(base, rep=2, tau_hat=math.nan, lo=math.nan, hi=math.nan, p_value=math.nan)])
    row = summarize(recs).loc["naive_j"]
    assert row["n_reps"] == 2
    assert row["bias"] == pytest.approx(0.1)
    assert row["cover"] == 0.0


def test_labels():
    assert method_label("1-12", adjust=False) == "U1-1/2"
    assert parse_label("U1-2")[1] is False
    with pytest.raises(ValueError):
        run_study(ScenarioSpec(), 0)


def test_matched_estimand_recorded():
    recs = run_replication(ScenarioSpec("d", heterogeneous=True, seed=1), 0, labels=("1-1",), naive=False)
    r = recs[0]
    assert not math.isnan(r["target_matched"]) and r["n_matched"] > 0


@pytest.fixture(scope="module")
def calibration():
    out = {}
    for design, spec in (("a", ScenarioSpec("a")), ("a_net", ScenarioSpec("a", network_confounding=True)),
                         ("b", ScenarioSpec("b")), ("c", ScenarioSpec("c")), ("d", ScenarioSpec("d")),
                         ("e", ScenarioSpec("e"))):
        out[design] = calibrate_thresholds(spec.with_(seed=20240501), reps=50)
    return out


@pytest.mark.slow
def test_frozen_thresholds_reproduce(calibration):
    for design, (chosen, _) in calibration.items():
        for sparsity, d in chosen.items():
            assert THRESHOLDS[(design, sparsity)] == d


@pytest.mark.slow
def test_exposure_counts_land_in_bands(calibration):
    """At least 90% of replications inside each sparsity band."""
    shares = {(design, s): share[s] for design, (_, share) in calibration.items() for s in BANDS}
    low = {k: v for k, v in shares.items() if v < 0.9}
    assert not low, f"band shares below 0.9: {low}"


@pytest.mark.slow
def test_no_confounding_means_no_bias(scenario_a_records):
    recs = scenario_a_records
    assert (recs.groupby("estimator")["rep"].nunique() == 500).all()
    # the only estimate allowed to be missing is the cross-sectional contrast
    # when every outcome unit (or none) is exposed at that time
    missing = recs[recs["tau_hat"].isna()]
    assert set(missing["estimator"]) <= {"naive_j"}
    assert missing["n_exposed"].isin([0, ScenarioSpec("a", "medium").M]).all()
    summ = summarize(recs)
    for est, row in summ.iterrows():
        assert abs(row["bias"]) <= 0.05, est


@pytest.mark.slow
def test_intervals_cover_at_nominal_rate(scenario_a_records):
    summ = summarize(scenario_a_records)
    for est in ("1-1", "1-1/2", "1-2"):
        assert 92.0 <= summ.loc[est, "cover"] <= 98.0, est
