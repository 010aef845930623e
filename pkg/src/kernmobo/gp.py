"""Exact kernel-only Gaussian process regression over fingerprints.

The prior covariance of one objective is ``a * K + s * I`` where ``K`` is the
unit-amplitude Tanimoto/MinMax Gram matrix, ``a`` the amplitude and ``s`` the
noise. Everything is computed from the Cholesky factor ``L`` of
``K + (s / a) I``.

The functional core (:func:`fit`, :func:`predict`, :func:`nlml`, :func:`mo_fit`,
:func:`mo_predict`) is wrapped by two scikit-learn estimators,
:class:`TanimotoGPRegressor` and :class:`MultiObjectiveTanimotoGP`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from kernmobo.exceptions import DataError, LengthMismatch, NonPositiveVariance, NotPositiveDefinite
from kernmobo.fingerprint import FingerprintConfig, SparseFingerprint
from kernmobo.kernels import KernelKind, gram_matrix
from kernmobo.validation import check_fingerprints, check_objective_matrix, check_targets

logger = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_MAX = 1e-4


@dataclass(frozen=True)
class GPHyperparams:
    mean: float = 0.0
    amplitude: float = 1.0
    noise: float = 1e-4

    def __post_init__(self):
        for name in ("mean", "amplitude", "noise"):
            if not math.isfinite(getattr(self, name)):
                raise DataError(f"{name} must be finite")
        if self.amplitude <= 0:
            raise DataError(f"amplitude must be > 0, got {self.amplitude}")
        if self.noise < 0:
            raise DataError(f"noise must be >= 0, got {self.noise}")

    @property
    def ratio(self) -> float:
        return self.noise / self.amplitude


@dataclass(frozen=True)
class FittedGP:
    train_fps: tuple[SparseFingerprint, ...]
    centered_targets: np.ndarray
    chol: np.ndarray
    hyper: GPHyperparams
    kind: KernelKind
    jitter: float = 0.0  # extra diagonal added on top of s/a
    alpha: np.ndarray = field(repr=False, default=None)  # (K + (s/a + jitter) I)^-1 (y - mu)

    @property
    def n_train(self) -> int:
        return len(self.train_fps)


@dataclass(frozen=True)
class PosteriorPrediction:
    means: np.ndarray
    variances: np.ndarray
    n_clamped: int = 0


def _cholesky_with_jitter(K: np.ndarray, ratio: float, max_jitter: float):
    n = K.shape[0]
    jitter = 0.0
    while True:
        try:
            L = cholesky(K + (ratio + jitter) * np.eye(n), lower=True, check_finite=True)
            if np.all(np.diag(L) > 0):
                return L, jitter
        except LinAlgError:
            pass
        jitter = JITTER_START if jitter == 0.0 else jitter * 10
        if jitter > max_jitter * (1 + 1e-9):
            raise NotPositiveDefinite(
                f"Cholesky of K + (s/a)I failed (n={n}, s/a={ratio:g}) "
                f"even with jitter up to {max_jitter:g}")
        logger.debug("Cholesky failed; retrying with jitter %g", jitter)


def _fit_from_gram(fps, K, y, hyper, kind, max_jitter) -> FittedGP:
    L, jitter = _cholesky_with_jitter(K, hyper.ratio, max_jitter)
    centered = y - hyper.mean
    alpha = solve_triangular(L.T, solve_triangular(L, centered, lower=True), lower=False)
    return FittedGP(tuple(fps), centered, L, hyper, kind, jitter, alpha)


def fit(train_fps: Sequence[SparseFingerprint], y, hyper: GPHyperparams | None = None,
        kind="minmax", max_jitter: float = JITTER_MAX) -> FittedGP:
    """Factorize ``K + (s/a) I`` for the training fingerprints.

    Args:
        train_fps: training fingerprints.
        y: finite targets, one per fingerprint.
        hyper: fixed hyperparameters; defaults to mean 0, amplitude 1, noise 1e-4.
        kind: kernel kind.
        max_jitter: largest extra diagonal tried when the factorization fails.
            Jitter starts at 1e-10 and grows tenfold. Pass 0 to disable.

    Raises:
        LengthMismatch: ``len(train_fps) != len(y)``.
        NotPositiveDefinite: factorization failed at every jitter level.
    """
    hyper = hyper or GPHyperparams()
    kind = KernelKind.parse(kind)
    fps = check_fingerprints(train_fps)
    y = check_targets(y, len(fps))
    K = gram_matrix(fps, None, kind)
    return _fit_from_gram(fps, K, y, hyper, kind, max_jitter)


def predict(gp: FittedGP, query_fps: Sequence[SparseFingerprint],
            K_query: np.ndarray | None = None) -> PosteriorPrediction:
    """Posterior mean and variance at the query fingerprints.

    ``mean = mu + k_q^T (K + (s/a) I)^-1 (y - mu)`` and
    ``var = a * (1 - v^T v)`` with ``v = L^-1 k_q``. Variances are clamped to
    ``[0, a]``; the number of clamped entries is returned for diagnostics.

    ``K_query`` (shape ``n_train x n_query``) may be passed to reuse a cross
    Gram matrix across objectives.
    """
    query = check_fingerprints(query_fps)
    if K_query is None:
        K_query = gram_matrix(gp.train_fps, query, gp.kind)
    a = gp.hyper.amplitude
    means = gp.hyper.mean + K_query.T @ gp.alpha
    v = solve_triangular(gp.chol, K_query, lower=True)
    raw = a * (1.0 - np.einsum("ij,ij->j", v, v))
    clamped = int(np.count_nonzero((raw < 0) | (raw > a)))
    if clamped:
        logger.warning("clamped %d posterior variance(s) into [0, a]", clamped)
    return PosteriorPrediction(means, np.clip(raw, 0.0, a), clamped)


def nlml(gp: FittedGP) -> float:
    """Negative log marginal likelihood under covariance ``a K + s I``.

    ``0.5 r^T (aK + sI)^-1 r + 0.5 log det(aK + sI) + (n/2) log 2 pi`` with
    ``r = y - mu`` and ``log det(aK + sI) = n log a + 2 sum log diag L``.
    """
    n = gp.n_train
    a = gp.hyper.amplitude
    data_fit = 0.5 * float(gp.centered_targets @ gp.alpha) / a
    complexity = 0.5 * (n * math.log(a) + 2.0 * float(np.sum(np.log(np.diag(gp.chol)))))
    return data_fit + complexity + 0.5 * n * math.log(2 * math.pi)


def nlpd(means, variances, y_true) -> float:
    """Mean Gaussian negative log predictive density of held-out targets."""
    means = np.asarray(means, dtype=float).ravel()
    variances = np.asarray(variances, dtype=float).ravel()
    y_true = np.asarray(y_true, dtype=float).ravel()
    if not (len(means) == len(variances) == len(y_true)):
        raise LengthMismatch("means, variances and y_true must have equal lengths")
    if len(means) == 0:
        raise DataError("nlpd needs at least one test point")
    if np.any(~(variances > 0)):
        raise NonPositiveVariance("all predictive variances must be > 0")
    terms = 0.5 * np.log(2 * np.pi * variances) + (y_true - means) ** 2 / (2 * variances)
    return float(np.mean(terms))


@dataclass(frozen=True)
class MultiObjectiveGP:
    """Independent GPs, one per objective, over shared training inputs."""

    models: tuple[FittedGP, ...]

    @property
    def n_objectives(self) -> int:
        return len(self.models)

    @property
    def train_fps(self) -> tuple[SparseFingerprint, ...]:
        return self.models[0].train_fps


def mo_fit(train_fps, Y, hypers: Sequence[GPHyperparams] | GPHyperparams | None = None,
           kind="minmax", max_jitter: float = JITTER_MAX) -> MultiObjectiveGP:
    """Fit one independent GP per column of ``Y``.

    The Gram matrix is computed once. Objectives whose ``s/a`` ratios agree
    also share a single Cholesky factorization, which gives the same result
    as fitting them separately.
    """
    kind = KernelKind.parse(kind)
    fps = check_fingerprints(train_fps)
    Y = check_objective_matrix(Y, n_rows=len(fps))
    d = Y.shape[1]
    if hypers is None or isinstance(hypers, GPHyperparams):
        hypers = [hypers or GPHyperparams()] * d
    hypers = list(hypers)
    if len(hypers) != d:
        raise LengthMismatch(f"{len(hypers)} hyperparameter sets for {d} objectives")
    K = gram_matrix(fps, None, kind)
    factor_cache: dict[float, tuple[np.ndarray, float]] = {}
    models = []
    for j, hyper in enumerate(hypers):
        if hyper.ratio not in factor_cache:
            factor_cache[hyper.ratio] = _cholesky_with_jitter(K, hyper.ratio, max_jitter)
        L, jitter = factor_cache[hyper.ratio]
        centered = Y[:, j] - hyper.mean
        alpha = solve_triangular(L.T, solve_triangular(L, centered, lower=True), lower=False)
        models.append(FittedGP(tuple(fps), centered, L, hyper, kind, jitter, alpha))
    return MultiObjectiveGP(tuple(models))


def mo_predict(mogp: MultiObjectiveGP, query_fps) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(means, variances)``, each of shape ``(n_query, n_objectives)``."""
    query = check_fingerprints(query_fps)
    K_query = gram_matrix(mogp.train_fps, query, mogp.models[0].kind)
    preds = [predict(m, query, K_query) for m in mogp.models]
    means = np.column_stack([p.means for p in preds])
    variances = np.column_stack([p.variances for p in preds])
    return means, variances


# -- scikit-learn estimators ----------------------------------------------------

class TanimotoGPRegressor(RegressorMixin, BaseEstimator):
    """Exact GP regressor with a fixed-hyperparameter Tanimoto/MinMax kernel.

    ``X`` may be a sequence of SMILES strings, parsed graphs or
    :class:`~kernmobo.fingerprint.SparseFingerprint` objects.

    Parameters
    ----------
    kernel : {"minmax", "tanimoto"}, default="minmax"
    mean, amplitude, noise : float
        Constant prior mean, kernel amplitude and noise variance.
    radius, fold_dim : int
        Fingerprint settings used for non-fingerprint inputs.

    Attributes
    ----------
    gp_ : FittedGP
    """

    def __init__(self, kernel="minmax", mean=0.0, amplitude=1.0, noise=1e-4,
                 radius=2, fold_dim=0):
        self.kernel = kernel
        self.mean = mean
        self.amplitude = amplitude
        self.noise = noise
        self.radius = radius
        self.fold_dim = fold_dim

    def _features(self, X):
        from kernmobo.fingerprint import fingerprint_many

        return fingerprint_many(X, FingerprintConfig(self.radius, self.fold_dim))

    def fit(self, X, y):
        hyper = GPHyperparams(float(self.mean), float(self.amplitude), float(self.noise))
        self.gp_ = fit(self._features(X), y, hyper, self.kernel)
        self.n_features_in_ = 1
        return self

    def predict(self, X, return_std=False, return_var=False):
        check_is_fitted(self, "gp_")
        pred = predict(self.gp_, self._features(X))
        if return_var:
            return pred.means, pred.variances
        if return_std:
            return pred.means, np.sqrt(pred.variances)
        return pred.means

    def log_marginal_likelihood(self):
        check_is_fitted(self, "gp_")
        return -nlml(self.gp_)


class MultiObjectiveTanimotoGP(TanimotoGPRegressor):
    """Independent per-objective GPs; ``fit(X, Y)`` with ``Y`` of shape (n, d).

    ``mean``, ``amplitude`` and ``noise`` may be scalars (shared) or
    length-``d`` sequences.
    """

    def fit(self, X, Y):
        Y = check_objective_matrix(Y)
        d = Y.shape[1]

        def per_objective(value):
            arr = np.broadcast_to(np.asarray(value, dtype=float), (d,))
            return [float(v) for v in arr]

        hypers = [GPHyperparams(m, a, s) for m, a, s in zip(
            per_objective(self.mean), per_objective(self.amplitude), per_objective(self.noise))]
        self.mogp_ = mo_fit(self._features(X), Y, hypers, self.kernel)
        self.n_features_in_ = 1
        return self

    def predict(self, X, return_std=False, return_var=False):
        check_is_fitted(self, "mogp_")
        means, variances = mo_predict(self.mogp_, self._features(X))
        if return_var:
            return means, variances
        if return_std:
            return means, np.sqrt(variances)
        return means

    def log_marginal_likelihood(self):
        check_is_fitted(self, "mogp_")
        return -sum(nlml(m) for m in self.mogp_.models)

    def _more_tags(self):
        return {"multioutput": True}
