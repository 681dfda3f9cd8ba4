import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from bimatch.estimate import (MATCHED_POPULATION, TARGET, BiasBoundInputs, EffectEstimate, NoMatches, bias_bound,
                              impute_and_estimate, linear_bias_bound, naive_all, naive_j, naive_t,
                              smooth_bias_bound, smooth_constants)
from bimatch.matching import MatchSet, TuningParams


def _ms(pairs=(), triples=(), n_exposed=None):
    pairs, triples = list(pairs), list(triples)
    n = len(pairs) + len(triples) if n_exposed is None else n_exposed
    return MatchSet(pairs, triples, "1-1/2", TuningParams(), n_exposed=n)


def test_imputation_pairs_and_triples():
    Y = np.array([1.0, 5.0, 2.0, 9.0, 4.0])
    est = impute_and_estimate(_ms(pairs=[(2, 1)], triples=[(4, 3, 5)]), Y)
    assert est.D.tolist() == [4.0, 6.0]
    assert est.tau_hat == 5.0
    assert est.matched_exposed == (2, 4)
    assert est.estimand == TARGET


def test_partial_matching_targets_matched_population():
    est = impute_and_estimate(_ms(pairs=[(2, 1)], n_exposed=3), np.array([0.0, 1.0, 0.0]))
    assert est.estimand == MATCHED_POPULATION
    assert est.matched_proportion == pytest.approx(1 / 3)


def test_empty_match_set_refuses():
    with pytest.raises(NoMatches):
        impute_and_estimate(_ms(n_exposed=2), np.zeros(3))


def test_estimate_roundtrip():
    est = impute_and_estimate(_ms(pairs=[(2, 1), (4, 3)]), np.array([0.0, 1.0, 0.5, 3.0]))
    back = EffectEstimate.from_dict(est.to_dict())
    assert back.tau_hat == est.tau_hat and np.array_equal(back.D, est.D)
    assert est.to_dict()["n_matched"] == 2


@given(arrays(float, 8, elements=st.floats(-100, 100)), st.floats(-50, 50))
def test_shift_equivariance(Y, c):
    ms = _ms(pairs=[(1, 2), (3, 4)], triples=[(6, 5, 7)])
    base = impute_and_estimate(ms, Y).tau_hat
    # a common shift cancels; a shift of the exposed periods moves the estimate by c
    assert impute_and_estimate(ms, Y + c).tau_hat == pytest.approx(base, abs=1e-9 * (1 + abs(c)) * 100)
    E = np.zeros(8)
    E[[0, 2, 5]] = 1
    assert impute_and_estimate(ms, Y + c * E).tau_hat == pytest.approx(base + c, abs=1e-7)


def test_naive_estimators():
    E = np.array([1, 0, 1, 0])
    Y = np.array([3.0, 1.0, 5.0, 1.0])
    nt = naive_t(E, Y)
    assert nt.tau_hat == 3.0 and (nt.n_e, nt.n_u) == (2, 2)
    assert nt.s_e == pytest.approx(math.sqrt(2)) and nt.s_u == 0
    assert naive_j(E, Y).tau_hat == 3.0
    EE = np.array([[1, 0], [0, 0]])
    YY = np.array([[4.0, 1.0], [1.0, 1.0]])
    assert naive_all(EE, YY).tau_hat == 3.0
    with pytest.raises(ValueError):
        naive_all(EE, YY[:1])
    with pytest.raises(ValueError):
        naive_t(np.zeros(3), np.zeros(3))


def test_linear_bound():
    assert linear_bias_bound(2, 0.05, -0.5, 1.0, 2.0, 3.0) == pytest.approx(1.0 + 0.3)
    assert linear_bias_bound(0, 0.05, 7.0) == 0
    assert bias_bound(BiasBoundInputs(beta2=1.0, beta3_l1=2.0), 1.0, 0.5) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        BiasBoundInputs(beta3_l1=-1)


def test_smooth_constants_hand_values():
    C_T, C_WXP, C_TWXP = smooth_constants(c=1, K=2, ell=0.5, T=11, supports=[(0, 1)])
    assert (C_T, C_WXP, C_TWXP) == pytest.approx((20.0, 2.0, 2.75))
    assert smooth_bias_bound(2, 0.05, 1, 2, 0.5, 11, [(0, 1)]) == pytest.approx(40 + 0.1 + 2.75 * 0.5)
    with pytest.raises(ValueError):
        smooth_constants(1, 1, 0.5, 11, [])


def test_smooth_constants_against_direct_sums():
    c, K, ell, T, sup = 0.7, 4, 0.3, 25, [(0, 2), (-1, 0.5)]
    fact = math.factorial
    C_T = sum((T - 1) * c / (ell * fact(k)) for k in range(1, K))
    C_WXP = sum((b - a) * c / (ell * fact(k)) for a, b in sup for k in range(1, K))
    C_TWXP = 0.5 ** (K - 1) * ((T - 1) * c / fact(K) + sum((b - a) * c / fact(K) for a, b in sup))
    assert smooth_constants(c, K, ell, T, sup) == pytest.approx((C_T, C_WXP, C_TWXP))
