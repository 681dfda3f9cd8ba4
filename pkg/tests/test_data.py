import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from bimatch.data import (BalanceCovariateSet, PanelDataset, SummaryWeights, balance_covariates, pooled_sd,
                          standardize, summarize, validate)
from conftest import make_panel


def test_consistent_panel_validates_clean():
    ds = PanelDataset(np.zeros((2, 2)), np.zeros((2, 2, 1)), np.zeros((2, 1)))
    assert validate(ds).ok
    assert validate(ds).issues == []


def test_names_default_per_block(panel):
    assert panel.x_names == ("temp",)
    ds = PanelDataset(np.zeros((2, 2)), np.zeros((2, 2, 1)), np.zeros((2, 1)), W=np.zeros((2, 1, 2)))
    assert ds.w_names == ("w1", "w2")
    assert ds.X.shape == (2, 2, 0)


def test_validation_reports_each_problem():
    A = np.array([[0, 2], [1, 0]])
    G = np.zeros((1, 2, 1))
    Y = np.array([[np.nan], [0.0]])
    report = validate(PanelDataset(A, G, Y))
    text = str(report)
    assert not report.ok
    assert "non-binary treatment" in text
    assert "missing network slice" in text
    assert "missing cells in Y" in text


def test_non_binary_network_flagged():
    G = np.full((2, 2, 1), 0.5)
    assert "non-binary network" in str(validate(PanelDataset(np.zeros((2, 2)), G, np.zeros((2, 1)))))


def test_summary_weights_reject_degenerate():
    with pytest.raises(ValueError):
        SummaryWeights(np.zeros(3))
    with pytest.raises(ValueError):
        SummaryWeights(np.array([1.0, np.inf]))
    assert np.allclose(SummaryWeights.uniform(4).q, 0.25)


def test_summarize_is_weighted_sum():
    X_t = np.array([[1.0, 10.0], [3.0, 30.0]])
    q = SummaryWeights(np.array([0.25, 0.75]))
    assert np.allclose(summarize(X_t, q), [2.5, 25.0])
    with pytest.raises(ValueError):
        summarize(np.ones((3, 1)), q)


def test_pooled_sd_hand_value():
    col = np.array([1.0, 3.0, 10.0, 14.0])
    E = np.array([1, 1, 0, 0])
    # variances 2 and 8 -> sqrt(5)
    assert pooled_sd(col, E) == pytest.approx(np.sqrt(5.0))


def test_unobserved_periods_excluded_from_sd():
    col = np.array([1.0, 3.0, 10.0, 14.0, 1000.0])
    E = np.array([1, 1, 0, 0, np.nan])
    assert pooled_sd(col, E) == pytest.approx(np.sqrt(5.0))


def test_constant_column_dropped():
    cols = np.column_stack([np.arange(6.0), np.full(6, 4.2)])
    cov = standardize(cols, [1, 0, 1, 0, 1, 0], ["a", "b"])
    assert cov.dropped_labels == ["b"]
    assert cov.kept_labels == ["a"]
    assert cov.kept.shape == (6, 1)


def test_single_class_exposure_rejected():
    with pytest.raises(ValueError):
        standardize(np.ones((3, 1)), [1, 1, 1])


def test_raw_set_is_unscaled():
    cov = BalanceCovariateSet.raw(np.array([[1.0], [2.0]]), ["z"])
    assert not cov.standardized
    assert np.array_equal(cov.kept, [[1.0], [2.0]])


@given(arrays(float, (12, 2), elements=st.floats(-50, 50)), st.floats(0.1, 20), st.floats(-10, 10))
def test_standardized_values_invariant_to_affine_rescaling(cols, scale, shift):
    E = np.array([1, 0] * 6)
    base = standardize(cols, E)
    moved = standardize(cols * scale + shift, E)
    assert np.array_equal(base.dropped, moved.dropped)
    keep = ~base.dropped
    # differences between periods are what the constraints use
    d0 = np.diff(base.scaled[:, keep], axis=0)
    d1 = np.diff(moved.scaled[:, keep], axis=0)
    assert np.allclose(d0, d1, atol=1e-6 * (1 + np.abs(d0).max(initial=0)))


def test_balance_covariates_columns_and_labels():
    ds = make_panel()
    q = {"temp": SummaryWeights(np.r_[1.0, np.zeros(5)], label="first")}
    cov = balance_covariates(ds, 1, w=["wind"], q=q)
    assert cov.labels == ("wind", "temp~first", "dist~mean")
    assert np.allclose(cov.values[:, 0], ds.W[:, 1, 1])
    assert np.allclose(cov.values[:, 1], ds.X[:, 0, 0])
    assert np.allclose(cov.values[:, 2], ds.P[:, :, 1, 0].mean(axis=1))
    assert not cov.standardized
    std = balance_covariates(ds, 1, exposure=np.arange(ds.T) % 2)
    assert std.standardized and len(std.labels) == 4


def test_unknown_covariate_name():
    with pytest.raises(KeyError):
        balance_covariates(make_panel(), 0, w=["nope"])
