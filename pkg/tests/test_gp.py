from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import solve_triangular
from scipy.stats import multivariate_normal
from sklearn.base import clone

from kernmobo.datasets import synthetic_smiles
from kernmobo.exceptions import DataError, LengthMismatch, NonPositiveVariance, NotPositiveDefinite
from kernmobo.fingerprint import SparseFingerprint, fingerprint_many
from kernmobo.gp import (
    GPHyperparams,
    MultiObjectiveTanimotoGP,
    TanimotoGPRegressor,
    fit,
    mo_fit,
    mo_predict,
    nlml,
    nlpd,
    predict,
)
from kernmobo.kernels import minmax


def pairwise(rows, cols):
    return np.array([[minmax(a, b) for b in cols] for a in rows])


def inverse_oracle(train, y, query, hyper):
    """Posterior moments under covariance aK + sI via an explicit inverse."""
    a, s, mu = hyper.amplitude, hyper.noise, hyper.mean
    C_inv = np.linalg.inv(a * pairwise(train, train) + s * np.eye(len(train)))
    Kq = a * pairwise(train, query)
    means = mu + Kq.T @ C_inv @ (y - mu)
    variances = a - np.einsum("ij,ik,kj->j", Kq, C_inv, Kq)
    return means, variances


def random_instance(pool, rng, n_max=20):
    n = int(rng.integers(2, n_max + 1))
    idx = rng.choice(len(pool), size=n + 5, replace=False)
    fps = fingerprint_many([pool[i] for i in idx])
    return fps[:n], rng.normal(size=n), fps[n:]


class TestFit:
    def test_one_point_factor(self):
        gp = fit([SparseFingerprint({1: 2})], [0.3], GPHyperparams(noise=1e-4))
        np.testing.assert_allclose(gp.chol, [[math.sqrt(1 + 1e-4)]], rtol=1e-15)

    def test_factor_reconstructs(self, synthetic):
        fps = fingerprint_many(synthetic[:3])
        gp = fit(fps, [1.0, 2.0, 3.0])
        K = pairwise(fps, fps)
        np.testing.assert_allclose(gp.chol @ gp.chol.T, K + 1e-4 * np.eye(3), atol=1e-10)
        assert np.all(np.diag(gp.chol) > 0)

    def test_duplicate_without_noise(self):
        x = SparseFingerprint({1: 1, 2: 1})
        with pytest.raises(NotPositiveDefinite):
            fit([x, x], [1.0, 1.0], GPHyperparams(noise=0.0), max_jitter=0.0)
        gp = fit([x, x], [1.0, 1.0], GPHyperparams(noise=0.0))
        assert 0 < gp.jitter <= 1e-4

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            fit([SparseFingerprint({1: 1})], [1.0, 2.0])

    def test_non_finite_targets(self):
        with pytest.raises(DataError):
            fit([SparseFingerprint({1: 1})], [math.nan])

    def test_bad_hyperparams(self):
        with pytest.raises(DataError):
            GPHyperparams(amplitude=0.0)
        with pytest.raises(DataError):
            GPHyperparams(noise=-1.0)


class TestPredict:
    def test_one_point_closed_form(self):
        x = SparseFingerprint({4: 1})
        gp = fit([x], [2.0], GPHyperparams(0.0, 1.0, 1e-4))
        pred = predict(gp, [x])
        assert pred.means[0] == pytest.approx(2 / (1 + 1e-4), rel=1e-14)
        assert pred.variances[0] == pytest.approx(1 - 1 / (1 + 1e-4), rel=1e-9)

    def test_prior_recovery(self):
        gp = fit([SparseFingerprint({1: 1})], [5.0], GPHyperparams(mean=0.7, amplitude=2.5))
        pred = predict(gp, [SparseFingerprint({9: 1})])
        assert pred.means[0] == 0.7 and pred.variances[0] == 2.5

    def test_matches_inverse_oracle(self, corpus, synthetic):
        rng = np.random.default_rng(4)
        pool = corpus + synthetic
        for _ in range(20):
            train, y, query = random_instance(pool, rng)
            hyper = GPHyperparams(mean=rng.normal(), amplitude=rng.uniform(0.5, 2), noise=1e-3)
            pred = predict(fit(train, y, hyper), query)
            m, v = inverse_oracle(train, y, query, hyper)
            np.testing.assert_allclose(pred.means, m, atol=1e-8, rtol=0)
            np.testing.assert_allclose(pred.variances, v, atol=1e-8, rtol=0)

    def test_interpolation(self, synthetic):
        fps = fingerprint_many(synthetic[:15])
        y = np.linspace(-1, 1, 15)
        gp = fit(fps, y, GPHyperparams(noise=1e-8))
        pred = predict(gp, fps)
        assert np.max(np.abs(pred.means - y)) < 1e-4
        assert np.max(pred.variances) <= 1e-6

    def test_variance_bounds(self, synthetic):
        fps = fingerprint_many(synthetic[:40])
        gp = fit(fps[:25], np.sin(np.arange(25)), GPHyperparams(amplitude=1.7))
        pred = predict(gp, fps)
        assert np.all(pred.variances >= 0) and np.all(pred.variances <= 1.7)


class TestLikelihood:
    def test_scalar_at_mean(self):
        gp = fit([SparseFingerprint({1: 1})], [0.0], GPHyperparams(noise=0.0))
        assert nlml(gp) == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-12)

    def test_matches_density_oracle(self, synthetic):
        rng = np.random.default_rng(9)
        for _ in range(10):
            train, y, _ = random_instance(synthetic, rng, n_max=10)
            hyper = GPHyperparams(mean=0.3, amplitude=rng.uniform(0.5, 3), noise=rng.uniform(1e-4, 0.1))
            cov = hyper.amplitude * pairwise(train, train) + hyper.noise * np.eye(len(train))
            expected = -multivariate_normal(mean=np.full(len(y), 0.3), cov=cov).logpdf(y)
            assert nlml(fit(train, y, hyper)) == pytest.approx(expected, abs=1e-8)

    def test_data_fit_quadruples(self, synthetic):
        fps = fingerprint_many(synthetic[:6])
        y = np.arange(6.0)
        g1, g2 = fit(fps, y), fit(fps, 2 * y)
        const = nlml(fit(fps, np.zeros(6)))
        assert nlml(g2) - const == pytest.approx(4 * (nlml(g1) - const), rel=1e-10)

    def test_nlpd_examples(self):
        assert nlpd([0.0], [1.0], [0.0]) == pytest.approx(0.918939, abs=1e-6)
        assert nlpd([0.2205], [0.91320], [0.2489]) == pytest.approx(0.874, abs=1e-3)

    def test_nlpd_errors(self):
        with pytest.raises(NonPositiveVariance):
            nlpd([0.0], [0.0], [0.0])
        with pytest.raises(LengthMismatch):
            nlpd([0.0, 1.0], [1.0], [0.0])

    def test_nlpd_overconfidence_penalized(self):
        # with a miss of 0.5, NLPD rises as variance shrinks below 0.25
        grid = np.geomspace(1e-4, 0.25, 40)
        vals = [nlpd([0.0], [v], [0.5]) for v in grid]
        assert np.all(np.diff(vals) < 0)


class TestMultiObjective:
    def test_single_column_equals_fit(self, synthetic):
        fps = fingerprint_many(synthetic[:12])
        y = np.cos(np.arange(12.0))
        means, variances = mo_predict(mo_fit(fps, y[:, None]), fps[:5])
        pred = predict(fit(fps, y), fps[:5])
        np.testing.assert_array_equal(means[:, 0], pred.means)
        np.testing.assert_array_equal(variances[:, 0], pred.variances)

    def test_independence_oracle(self, synthetic):
        fps = fingerprint_many(synthetic[:30])
        rng = np.random.default_rng(1)
        Y = rng.normal(size=(20, 3))
        hypers = [GPHyperparams(0.1, 1.0, 1e-4), GPHyperparams(-0.2, 2.0, 2e-4), GPHyperparams(0, 0.5, 1e-3)]
        means, variances = mo_predict(mo_fit(fps[:20], Y, hypers), fps[20:])
        for j in range(3):
            pred = predict(fit(fps[:20], Y[:, j], hypers[j]), fps[20:])
            np.testing.assert_allclose(means[:, j], pred.means, rtol=0, atol=1e-12)
            np.testing.assert_allclose(variances[:, j], pred.variances, rtol=0, atol=1e-12)

    def test_column_permutation(self, synthetic):
        fps = fingerprint_many(synthetic[:15])
        Y = np.random.default_rng(2).normal(size=(10, 3))
        m1, v1 = mo_predict(mo_fit(fps[:10], Y), fps[10:])
        m2, v2 = mo_predict(mo_fit(fps[:10], Y[:, [2, 0, 1]]), fps[10:])
        np.testing.assert_array_equal(m1[:, [2, 0, 1]], m2)
        np.testing.assert_array_equal(v1[:, [2, 0, 1]], v2)

    def test_hyper_count_mismatch(self, synthetic):
        fps = fingerprint_many(synthetic[:4])
        with pytest.raises(LengthMismatch):
            mo_fit(fps, np.zeros((4, 2)), [GPHyperparams()] * 3)


class TestEstimators:
    def test_regressor(self, synthetic):
        X, y = synthetic[:20], np.linspace(0, 1, 20)
        est = TanimotoGPRegressor(noise=1e-6).fit(X, y)
        np.testing.assert_allclose(est.predict(X), y, atol=1e-3)
        mean, std = est.predict(X[:3], return_std=True)
        assert mean.shape == std.shape == (3,)
        assert est.log_marginal_likelihood() == pytest.approx(-nlml(est.gp_))
        assert est.score(X, y) > 0.99

    def test_params(self):
        est = TanimotoGPRegressor(kernel="tanimoto", amplitude=2.0)
        params = est.get_params()
        assert params["kernel"] == "tanimoto" and params["amplitude"] == 2.0
        assert clone(est).get_params() == params

    def test_accepts_fingerprints(self, synthetic):
        fps = fingerprint_many(synthetic[:8])
        a = TanimotoGPRegressor().fit(fps, np.arange(8.0)).predict(fps)
        b = TanimotoGPRegressor().fit(synthetic[:8], np.arange(8.0)).predict(synthetic[:8])
        np.testing.assert_array_equal(a, b)

    def test_multi_objective(self, synthetic):
        X = synthetic[:12]
        Y = np.column_stack([np.arange(12.0), -np.arange(12.0)])
        est = MultiObjectiveTanimotoGP(amplitude=[1.0, 2.0]).fit(X, Y)
        means, var = est.predict(synthetic[12:15], return_var=True)
        assert means.shape == var.shape == (3, 2)
        assert np.all(var[:, 1] <= 2.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_pre_clamp_variance_negativity_small(seed):
    rng = np.random.default_rng(seed)
    fps = fingerprint_many(synthetic_smiles(25, seed=seed % 50))
    gp = fit(fps[:20], rng.normal(size=20), GPHyperparams(noise=1e-6))
    K_q = np.array([[minmax(a, b) for b in fps] for a in fps[:20]])
    v = solve_triangular(gp.chol, K_q, lower=True)
    raw = 1.0 - np.einsum("ij,ij->j", v, v)
    assert raw.min() >= -1e-8
