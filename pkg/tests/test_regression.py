from fractions import Fraction

import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given, settings, strategies as st

from gsasel.regression import (Dataset, GramWindow, as_spec, empty_spec, f_test_vs_gum, fit,
                               full_spec, information_criteria, spec_from_indices)

from conftest import random_dataset


def _exact_normal_equations(X, y):
    # Gauss-Jordan in rational arithmetic: an oracle free of rounding
    k = X.shape[1]
    A = [[Fraction(float(v)) for v in row] for row in (X.T @ X)]
    b = [Fraction(float(v)) for v in (X.T @ y)]
    M = [A[i] + [b[i]] for i in range(k)]
    for c in range(k):
        piv = next(r for r in range(c, k) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        M[c] = [v / M[c][c] for v in M[c]]
        for r in range(k):
            if r != c and M[r][c] != 0:
                M[r] = [a - M[r][c] * bb for a, bb in zip(M[r], M[c])]
    return np.array([float(M[i][k]) for i in range(k)])


def test_dataset_is_demeaned_and_immutable(rng):
    d = Dataset(rng.normal(5, 1, 30), rng.normal(-2, 3, (30, 4)))
    assert np.allclose(d.X.mean(axis=0), 0, atol=1e-13)
    assert abs(d.y.mean()) < 1e-13
    with pytest.raises(ValueError):
        d.X[0, 0] = 1.0
    assert d.labels == (0, 1, 2, 3)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros(3), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        Dataset(np.array([1.0, np.nan, 2.0, 3.0]), np.ones((4, 1)))
    with pytest.raises(ValueError):
        Dataset(np.zeros(5), np.zeros((4, 2)))


def test_spec_helpers():
    assert as_spec([0, 1, 1]).tolist() == [False, True, True]
    assert spec_from_indices([0, 2], 4).tolist() == [True, False, True, False]
    with pytest.raises(ValueError):
        as_spec([0, 2])
    with pytest.raises(ValueError):
        as_spec([0, 1], 3)


def test_empty_model(rng):
    d = random_dataset(rng, 40, 5)
    f = fit(d, empty_spec(5))
    assert np.all(f.beta_hat == 0)
    assert f.k_gamma == 0
    assert f.sigma2_ml == pytest.approx(np.mean(d.y ** 2), rel=1e-12)


def test_noiseless_recovery(rng):
    X = rng.standard_normal((50, 6))
    beta = np.array([0.0, 2.0, 0.0, -1.5, 0.0, 0.0])
    d = Dataset(X @ beta, X)
    f = fit(d, spec_from_indices([1, 3, 5], 6))
    assert np.allclose(f.beta_hat, beta, atol=1e-8)
    assert np.max(np.abs(f.residuals)) < 1e-8


def test_beta_matches_exact_normal_equations(rng):
    d = random_dataset(rng, 20, 5, support=(0, 2), noise=0.5)
    f = fit(d, full_spec(5))
    assert np.allclose(f.beta_hat, _exact_normal_equations(d.X, d.y), atol=1e-8)


def test_fit_matches_statsmodels(rng):
    raw_X = rng.standard_normal((60, 7))
    raw_y = raw_X[:, 1] - 0.5 * raw_X[:, 4] + rng.standard_normal(60) + 3.0
    d = Dataset(raw_y, raw_X)
    gamma = spec_from_indices([1, 2, 4, 6], 7)
    f = fit(d, gamma)
    # the de-meaned fit is OLS with a constant; statsmodels counts it in the df
    ols = sm.OLS(raw_y, sm.add_constant(raw_X[:, gamma])).fit()
    assert np.allclose(f.beta_hat[gamma], ols.params[1:], atol=1e-10)
    assert f.rss == pytest.approx(ols.ssr, rel=1e-10)
    t_adj = ols.tvalues[1:] * np.sqrt((60 - 4) / (60 - 5))
    assert np.allclose(f.t_stats[gamma], t_adj, rtol=1e-9)
    assert np.all(np.isnan(f.t_stats[~gamma]))


def test_fit_invariants(rng):
    d = random_dataset(rng, 45, 8, support=(1,), noise=1.0, corr=0.4)
    gamma = spec_from_indices([0, 1, 5], 8)
    f = fit(d, gamma)
    assert np.all(f.beta_hat[~gamma] == 0)
    assert f.sigma2_unb * (d.n - f.k_gamma) == pytest.approx(f.sigma2_ml * d.n, rel=1e-10)
    Xs = d.X[:, gamma]
    assert np.all(np.abs(Xs.T @ f.residuals) <= 1e-8 * np.linalg.norm(Xs, axis=0) * np.linalg.norm(d.y))
    n, k = d.n, f.k_gamma
    log_s2 = np.log(f.rss / n)
    assert f.bic == pytest.approx(log_s2 + k * np.log(n) / n)
    assert f.aic == pytest.approx(log_s2 + 2 * k / n)
    assert f.hp_ic == pytest.approx(log_s2 + k / n)
    assert information_criteria(f.rss, n, k) == (f.bic, f.aic, f.hp_ic)


def test_rank_deficient_flagged(rng):
    X = rng.standard_normal((30, 3))
    X = np.column_stack([X, X[:, 0] + X[:, 1]])
    d = Dataset(rng.standard_normal(30), X)
    f = fit(d, full_spec(4))
    assert f.degenerate
    assert np.isfinite(f.rss)
    assert not fit(d, spec_from_indices([0, 1, 2], 4)).degenerate


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), bits=st.lists(st.booleans(), min_size=8, max_size=8),
       extra=st.integers(0, 7))
def test_adding_a_regressor_never_increases_rss(seed, bits, extra):
    d = random_dataset(np.random.default_rng(seed), 30, 8, support=(0, 3), corr=0.3)
    a = np.array(bits)
    b = a.copy()
    b[extra] = True
    assert fit(d, b).rss <= fit(d, a).rss * (1 + 1e-12) + 1e-12


def test_fit_invariant_to_column_order(rng):
    d = random_dataset(rng, 40, 6, support=(2, 4), corr=0.2)
    perm = np.array([5, 3, 0, 1, 4, 2])
    dp = Dataset(d.y, d.X[:, perm])
    g = spec_from_indices([0, 2, 4], 6)
    gp = g[perm]
    f, fp = fit(d, g), fit(dp, gp)
    assert f.rss == pytest.approx(fp.rss, rel=1e-12)
    assert np.allclose(f.beta_hat[perm], fp.beta_hat, atol=1e-12)


def test_gram_route_matches_reference(rng):
    d = random_dataset(rng, 50, 9, support=(1, 7), corr=0.3)
    w = d.gram
    for idx in ([], [1], [1, 7], [0, 2, 3, 8], list(range(9))):
        g = spec_from_indices(idx, 9)
        ref = fit(d, g)
        gf = w.solve(np.array(idx, dtype=int))
        assert gf.rss == pytest.approx(ref.rss, rel=1e-10)
        assert np.allclose(gf.beta, ref.beta_hat[g], atol=1e-10)


def test_gram_downdate_matches_direct_solve(rng):
    d = random_dataset(rng, 60, 10, support=(0, 4), corr=0.5)
    w = GramWindow(d.X, d.y)
    f = w.solve(np.arange(10))
    for pos in (0, 3, 9):
        child = f.drop(pos)
        direct = w.solve(np.delete(np.arange(10), pos))
        assert child.rss == pytest.approx(direct.rss, rel=1e-10)
        assert np.allclose(child.beta, direct.beta, atol=1e-10)
        assert np.allclose(child.ginv, direct.ginv, atol=1e-10)
        assert np.allclose(child.resid, direct.resid, atol=1e-10)
    # chained downdates
    g = f.drop(2).drop(5).drop(0)
    direct = w.solve(np.array([1, 3, 4, 5, 7, 8, 9]))
    assert g.rss == pytest.approx(direct.rss, rel=1e-10)


def test_f_test_vs_gum(rng):
    d = random_dataset(rng, 80, 6, support=(0, 1), beta=1.0, noise=1.0)
    assert f_test_vs_gum(d, full_spec(6)).pvalue == 1.0
    g = spec_from_indices([0, 1], 6)
    res = f_test_vs_gum(d, g)
    rss_r, rss_u = fit(d, g).rss, fit(d, full_spec(6)).rss
    df2 = d.n - d.p - 1
    stat = ((rss_r - rss_u) / 4) / (rss_u / df2)
    assert res.statistic == pytest.approx(stat, rel=1e-10)
    assert (res.df1, res.df2) == (4, df2)
    # statsmodels' restricted-vs-full comparison with an explicit constant
    full = sm.OLS(d.y, sm.add_constant(d.X)).fit()
    restr = sm.OLS(d.y, sm.add_constant(d.X[:, g])).fit()
    f_sm, p_sm, _ = full.compare_f_test(restr)
    assert res.statistic == pytest.approx(f_sm, rel=1e-9)
    assert res.pvalue == pytest.approx(p_sm, rel=1e-8, abs=1e-12)


def test_f_test_high_for_truth_low_for_empty(rng):
    high, low = [], []
    for _ in range(40):
        d = random_dataset(rng, 139, 40, support=(2, 10), beta=0.6, noise=1.0)
        high.append(f_test_vs_gum(d, spec_from_indices([2, 10], 40)).pvalue)
        low.append(f_test_vs_gum(d, empty_spec(40)).pvalue)
    assert np.median(high) > 0.2
    assert max(low) < 1e-2


def test_f_test_perfect_fit():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 4))
    d = Dataset(X[:, 0] * 2.0, X)
    exact = f_test_vs_gum(d, spec_from_indices([0], 4))
    assert exact.perfect_fit and exact.pvalue == 1.0
    missing = f_test_vs_gum(d, spec_from_indices([1], 4))
    assert missing.perfect_fit and missing.pvalue == 0.0
