"""Input validation helpers shared by the estimators and the functional API."""

from __future__ import annotations

import numpy as np

from kernmobo.exceptions import DataError, DimensionMismatch, EmptyInput, LengthMismatch


def check_fingerprints(fps) -> list:
    """Return ``fps`` as a non-empty list of SparseFingerprint."""
    from kernmobo.fingerprint import SparseFingerprint

    fps = list(fps)
    if not fps:
        raise EmptyInput("expected at least one fingerprint")
    for i, fp in enumerate(fps):
        if not isinstance(fp, SparseFingerprint):
            raise DataError(f"item {i} is {type(fp).__name__}, not SparseFingerprint")
    return fps


def check_targets(y, n: int | None = None) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        y = y.ravel() if y.ndim == 2 and 1 in y.shape else y
    if y.ndim != 1:
        raise DimensionMismatch(f"targets must be 1-D, got shape {y.shape}")
    if n is not None and len(y) != n:
        raise LengthMismatch(f"{n} inputs but {len(y)} targets")
    if len(y) == 0:
        raise EmptyInput("expected at least one target")
    if not np.all(np.isfinite(y)):
        raise DataError("targets must be finite")
    return y


def check_objective_matrix(Y, n_rows: int | None = None, allow_empty: bool = False) -> np.ndarray:
    """2-D finite float array; a 1-D input is read as a single objective column."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2:
        raise DimensionMismatch(f"objective matrix must be 2-D, got shape {Y.shape}")
    if n_rows is not None and Y.shape[0] != n_rows:
        raise LengthMismatch(f"{n_rows} inputs but {Y.shape[0]} objective rows")
    if not allow_empty and Y.shape[0] == 0:
        raise EmptyInput("expected at least one objective row")
    if Y.shape[1] < 1:
        raise DimensionMismatch("need at least one objective")
    if not np.all(np.isfinite(Y)):
        raise DataError("objective values must be finite (filter NaN rows first)")
    return Y


def check_points(points, d: int | None = None, allow_empty: bool = False) -> np.ndarray:
    """Objective-space points as an ``(n, d)`` float array."""
    P = np.asarray(points, dtype=float)
    if P.size == 0 and allow_empty:
        return P.reshape(0, d if d is not None else 0)
    if P.ndim == 1:
        P = P[None, :]
    if P.ndim != 2 or P.shape[1] < 1:
        raise DimensionMismatch(f"points must be an (n, d) array, got shape {P.shape}")
    if P.shape[0] == 0:
        if allow_empty:
            return P
        raise EmptyInput("expected at least one point")
    if d is not None and P.shape[1] != d:
        raise DimensionMismatch(f"points have {P.shape[1]} objectives, expected {d}")
    if not np.all(np.isfinite(P)):
        raise DataError("points must be finite")
    return P


def check_vector(v, d: int | None = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput(f"{name} is empty")
    if d is not None and v.size != d:
        raise DimensionMismatch(f"{name} has {v.size} entries, expected {d}")
    if not np.all(np.isfinite(v)):
        raise DataError(f"{name} must be finite")
    return v
