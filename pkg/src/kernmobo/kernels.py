"""Tanimoto and MinMax similarity over sparse fingerprints."""

from __future__ import annotations

from enum import Enum
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from kernmobo.exceptions import DataError, EmptyInput
from kernmobo.fingerprint import SparseFingerprint


class KernelKind(str, Enum):
    TANIMOTO = "tanimoto"
    MINMAX = "minmax"

    @classmethod
    def parse(cls, value) -> "KernelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DataError(f"unknown kernel {value!r}; expected 'tanimoto' or 'minmax'") from None


def tanimoto(a: SparseFingerprint, b: SparseFingerprint) -> float:
    """Intersection over union of the key sets (counts are ignored)."""
    ka, kb = a.counts.keys(), b.counts.keys()
    union = len(ka | kb)
    if union == 0:
        return 1.0
    return len(ka & kb) / union


def minmax(a: SparseFingerprint, b: SparseFingerprint) -> float:
    """Sum of elementwise minima over sum of elementwise maxima."""
    ca, cb = a.counts, b.counts
    if not ca and not cb:
        return 1.0
    lo = sum(min(v, cb[k]) for k, v in ca.items() if k in cb)
    hi = sum(ca.values()) + sum(cb.values()) - lo
    return lo / hi


def kernel_function(kind):
    return tanimoto if KernelKind.parse(kind) is KernelKind.TANIMOTO else minmax


def _column_matrix(fps: Sequence[SparseFingerprint], binary: bool):
    vocab: dict[int, int] = {}
    rows, cols, vals = [], [], []
    for i, fp in enumerate(fps):
        for key, count in fp.counts.items():
            j = vocab.setdefault(key, len(vocab))
            rows.append(i)
            cols.append(j)
            vals.append(1.0 if binary else float(count))
    mat = sp.csc_matrix((vals, (rows, cols)), shape=(len(fps), max(len(vocab), 1)))
    return mat, vocab


def gram_matrix(rows: Sequence[SparseFingerprint], cols: Sequence[SparseFingerprint] | None = None,
                kind="minmax") -> np.ndarray:
    """Dense kernel matrix ``K[i, j] = k(rows[i], cols[j])``.

    Works directly on the sparse key space: for each row only the columns of
    ``cols`` that share one of the row's keys are touched, using
    ``sum max = |a| + |b| - sum min``.

    Args:
        rows: fingerprints indexing the matrix rows.
        cols: fingerprints indexing the columns; ``None`` means ``rows``
            (the result is then symmetrized exactly).
        kind: ``"minmax"`` or ``"tanimoto"`` (binarizes both sides).
    """
    kind = KernelKind.parse(kind)
    symmetric = cols is None
    if symmetric:
        cols = rows
    rows, cols = list(rows), list(cols)
    if not rows or not cols:
        raise EmptyInput("gram_matrix needs non-empty row and column lists")
    binary = kind is KernelKind.TANIMOTO

    colmat, vocab = _column_matrix(cols, binary)
    col_tot = np.asarray(colmat.sum(axis=1)).ravel()
    K = np.empty((len(rows), len(cols)))
    for i, fp in enumerate(rows):
        idx, weights = [], []
        for key, count in fp.counts.items():
            j = vocab.get(key)
            if j is not None:
                idx.append(j)
                weights.append(1.0 if binary else float(count))
        row_tot = float(len(fp.counts)) if binary else float(sum(fp.counts.values()))
        if idx:
            sub = colmat[:, idx].toarray()
            lo = np.minimum(sub, np.asarray(weights)).sum(axis=1)
        else:
            lo = np.zeros(len(cols))
        hi = row_tot + col_tot - lo
        with np.errstate(invalid="ignore", divide="ignore"):
            K[i] = np.where(hi > 0, lo / np.where(hi > 0, hi, 1.0), 1.0)
    if symmetric:
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
    return K
