"""Acquisition functions and scalarization.

Monte Carlo EHVI scores the multi-objective path. Closed-form expected
improvement and UCB score the scalarized single-objective baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr

from kernmobo.exceptions import DataError, NegativeInput, NoEligibleCandidates
from kernmobo.pareto import ImprovementBoxes, hvi
from kernmobo.validation import check_vector

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class AcquisitionKind(str, Enum):
    EHVI = "ehvi"
    EI = "ei"
    UCB = "ucb"
    RANDOM = "random"


@dataclass(frozen=True)
class AcquisitionConfig:
    kind: AcquisitionKind = AcquisitionKind.EHVI
    mc_samples: int = 1000
    ucb_beta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", AcquisitionKind(self.kind))
        if int(self.mc_samples) != self.mc_samples or self.mc_samples < 1:
            raise DataError(f"mc_samples must be a positive integer, got {self.mc_samples!r}")
        if not (math.isfinite(self.ucb_beta) and self.ucb_beta >= 0):
            raise DataError(f"ucb_beta must be finite and >= 0, got {self.ucb_beta!r}")


def _check_variances(variances) -> np.ndarray:
    var = np.asarray(variances, dtype=float)
    if np.any(var < 0) or not np.all(np.isfinite(var)):
        raise NegativeInput("variances must be finite and >= 0")
    return var


def ehvi_mc(means, variances, front, r, n_samples: int = 1000, rng=None,
            normals: np.ndarray | None = None) -> float:
    """Monte Carlo expected hypervolume improvement of one candidate.

    Draws ``y_i = mean + sqrt(var) * z_i`` with independent standard normal
    ``z_i`` (diagonal posterior covariance) and averages ``hvi(front, y_i, r)``.

    Args:
        means, variances: per-objective posterior moments.
        front: current Pareto front (all points strictly above ``r``).
        r: reference point.
        n_samples: number of samples; ignored when ``normals`` is given.
        rng: seed or Generator used to draw the standard normals.
        normals: optional pre-drawn ``(N, d)`` standard normals (common
            random numbers across candidates).
    """
    means = check_vector(means, name="means")
    var = _check_variances(check_vector(variances, means.size, "variances"))
    if normals is None:
        if n_samples < 1:
            raise DataError("n_samples must be >= 1")
        normals = np.random.default_rng(rng).standard_normal((int(n_samples), means.size))
    samples = means + np.sqrt(var) * normals
    return float(np.mean([hvi(front, y, r) for y in samples]))


def ehvi_mc_batch(means, variances, front, r, normals: np.ndarray) -> np.ndarray:
    """EHVI estimates for many candidates sharing one batch of normals.

    Numerically equivalent to calling :func:`ehvi_mc` per row with the same
    ``normals``, but computes each improvement from a box decomposition of
    the non-dominated region, so a whole sample batch is handled in one
    vectorized pass.

    Args:
        means, variances: ``(m, d)`` posterior moments.
        front: ``(k, d)`` Pareto points; entries not strictly above ``r`` are
            ignored.
        r: reference point.
        normals: ``(N, d)`` standard normal draws.
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    var = _check_variances(np.atleast_2d(variances))
    if var.shape != means.shape:
        raise DataError("means and variances must have the same shape")
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    boxes = ImprovementBoxes(front, r)
    sd = np.sqrt(var)
    out = np.empty(len(means))
    for i in range(len(means)):
        out[i] = boxes.improvement(means[i] + sd[i] * normals).mean()
    return out


def expected_improvement(mean, variance, f_best):
    """Closed-form ``E[max(0, f - f_best)]`` for ``f ~ N(mean, variance)``.

    Vectorized over ``mean`` and ``variance``; zero variance gives
    ``max(mean - f_best, 0)``.
    """
    mean = np.asarray(mean, dtype=float)
    var = _check_variances(variance)
    sigma = np.sqrt(var)
    diff = mean - f_best
    safe = np.where(sigma > 0, sigma, 1.0)
    z = diff / safe
    ei = sigma * (z * ndtr(z) + _INV_SQRT_2PI * np.exp(-0.5 * z * z))
    ei = np.where(sigma > 0, np.maximum(ei, 0.0), np.maximum(diff, 0.0))
    return float(ei) if ei.ndim == 0 else ei


def ucb(mean, variance, beta: float = 1.0):
    """``mean + beta * sqrt(variance)``."""
    mean = np.asarray(mean, dtype=float)
    out = mean + beta * np.sqrt(_check_variances(variance))
    return float(out) if out.ndim == 0 else out


def geometric_mean(values) -> float:
    """Geometric mean computed in log space; 0 if any value is 0.

    Raises:
        NegativeInput: a value is negative.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise DataError("geometric_mean of an empty vector")
    if np.any(v < 0):
        raise NegativeInput(f"geometric mean needs non-negative values, got {v.tolist()}")
    if np.any(v == 0):
        return 0.0
    return float(np.exp(np.mean(np.log(v))))


def select_candidate(scores, mask=None) -> int:
    """Index of the largest eligible score; ties go to the lowest index."""
    scores = np.asarray(scores, dtype=float).ravel()
    eligible = np.ones(scores.size, dtype=bool) if mask is None else np.asarray(mask, dtype=bool).ravel()
    if eligible.shape != scores.shape:
        raise DataError("mask and scores must have equal length")
    if not eligible.any():
        raise NoEligibleCandidates("no eligible candidates to select from")
    masked = np.where(eligible & ~np.isnan(scores), scores, -np.inf)
    best = np.max(masked)
    if best == -np.inf:
        return int(np.flatnonzero(eligible)[0])
    return int(np.flatnonzero(masked == best)[0])
