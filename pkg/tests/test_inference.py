import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from bimatch.estimate import EffectEstimate, naive_t
from bimatch.inference import bh_adjust, global_test, naive_wald, wald, z_quantile
from oracles import bh_oracle


def _est(D):
    D = np.asarray(D, float)
    return EffectEstimate(float(D.mean()), tuple(range(1, D.size + 1)), D, 1.0, "1-1", "target")


def test_wald_hand_values():
    res = wald(_est([1.0, 2.0, 3.0, 4.0]), alpha=0.05)
    se = np.std([1, 2, 3, 4], ddof=1) / 2
    assert res.tau_hat == 2.5 and res.n == 4
    assert res.lo == pytest.approx(2.5 - 1.959963984540054 * se)
    assert res.hi == pytest.approx(2.5 + 1.959963984540054 * se)
    assert res.p_value == pytest.approx(math.erfc(2.5 / se / math.sqrt(2)))


def test_one_sided():
    res = wald(_est([1.0, 2.0, 3.0, 4.0]), alpha=0.05, one_sided=True)
    assert res.hi == math.inf
    assert z_quantile(0.05, True) == pytest.approx(1.6448536269514722)
    assert res.p_value == pytest.approx(wald(_est([1.0, 2.0, 3.0, 4.0])).p_value / 2)


def test_single_match_flagged():
    res = wald(_est([0.7]))
    assert res.flag == "no-variance" and res.p_value == 1.0
    assert (res.lo, res.hi) == (-math.inf, math.inf)


def test_zero_spread():
    assert wald(_est([2.0, 2.0])).p_value == 0.0
    assert wald(_est([0.0, 0.0])).p_value == 1.0


def test_alpha_checked():
    with pytest.raises(ValueError):
        wald(_est([1.0, 2.0]), alpha=1.5)


@given(arrays(float, st.integers(2, 30), elements=st.floats(-10, 10)), st.sampled_from([0.01, 0.05, 0.1]))
def test_interval_test_duality(D, alpha):
    res = wald(_est(D), alpha)
    if res.s_hat > 1e-6:
        excludes_zero = not res.covers(0.0)
        assert excludes_zero == (res.p_value < alpha) or math.isclose(res.p_value, alpha, rel_tol=1e-6)


def test_naive_wald_pooled():
    est = naive_t(np.array([1, 1, 0, 0, 0]), np.array([2.0, 4.0, 0.0, 1.0, 2.0]))
    res = naive_wald(est, 0.05)
    pooled = math.sqrt((1 * 2.0 + 2 * 1.0) / 3)
    se = pooled * math.sqrt(1 / 2 + 1 / 3)
    assert res.hi - res.tau_hat == pytest.approx(1.959963984540054 * se)
    with pytest.raises(ValueError):
        naive_wald(naive_t(np.array([1, 0, 0]), np.array([1.0, 0.0, 0.0])))


def test_bh_small_example():
    p = [0.01, 0.04, 0.03, 0.20]
    assert np.allclose(bh_adjust(p), [0.04, 0.04 * 4 / 3, 0.04 * 4 / 3, 0.20])
    assert np.allclose(bh_adjust(p), bh_oracle(p))
    for bad in ([], [1.2], [np.nan]):
        with pytest.raises(ValueError):
            bh_adjust(bad)


@given(arrays(float, st.integers(1, 40), elements=st.floats(0, 1)))
def test_bh_matches_oracle_and_is_monotone(p):
    adj = bh_adjust(p)
    assert np.allclose(adj, bh_oracle(p), rtol=0, atol=1e-15)
    assert np.all(adj >= p - 1e-15) and np.all(adj <= 1)
    order = np.argsort(p, kind="stable")
    assert np.all(np.diff(adj[order]) >= -1e-15)


def test_global_test_strict_threshold_and_labels():
    res = global_test([0.05, 0.5], alpha=0.1, units=[3, 9], unavailable=[4])
    assert res.adjusted.tolist() == [0.1, 0.5]
    assert not res.reject  # adjusted p must be strictly below alpha
    res = global_test([0.001, 0.5, 0.02], alpha=0.05, units=["a", "b", "c"])
    assert res.reject and res.affected == ["a", "c"]
    assert res.to_dict()["global_reject"] is True
    with pytest.raises(ValueError):
        global_test([0.1, 0.2], units=[1])
