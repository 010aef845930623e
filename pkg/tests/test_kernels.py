from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernmobo.exceptions import EmptyInput
from kernmobo.fingerprint import SparseFingerprint, fingerprint_many, to_binary
from kernmobo.kernels import KernelKind, gram_matrix, minmax, tanimoto


def dense_oracle(a: SparseFingerprint, b: SparseFingerprint, binary: bool) -> float:
    """Direct evaluation on dense vectors over the union of keys."""
    keys = sorted(set(a.counts) | set(b.counts))
    if not keys:
        return 1.0
    va = np.array([a.counts.get(k, 0) for k in keys], dtype=float)
    vb = np.array([b.counts.get(k, 0) for k in keys], dtype=float)
    if binary:
        va, vb = (va > 0).astype(float), (vb > 0).astype(float)
    return float(np.minimum(va, vb).sum() / np.maximum(va, vb).sum())


def fp(d):
    return SparseFingerprint(d)


class TestExamples:
    def test_tanimoto(self):
        assert tanimoto(fp({1: 1, 2: 1, 3: 1}), fp({2: 1, 3: 1, 4: 1})) == 0.5

    def test_minmax(self):
        assert minmax(fp({10: 2, 11: 1}), fp({10: 1, 11: 3})) == pytest.approx(0.4, abs=1e-15)

    def test_identity_and_disjoint(self):
        x = fp({1: 3, 7: 2})
        assert tanimoto(x, x) == 1.0 and minmax(x, x) == 1.0
        assert tanimoto(x, fp({2: 1})) == 0.0 and minmax(x, fp({2: 1})) == 0.0

    def test_empty(self):
        e = fp({})
        assert tanimoto(e, e) == 1.0 and minmax(e, e) == 1.0
        assert minmax(e, fp({1: 1})) == 0.0 and tanimoto(fp({1: 1}), e) == 0.0

    def test_tanimoto_binarizes_counts(self):
        assert tanimoto(fp({1: 5, 2: 1}), fp({1: 1})) == 0.5

    def test_gram_small(self):
        x = fp({1: 1})
        np.testing.assert_array_equal(gram_matrix([x]), [[1.0]])
        np.testing.assert_array_equal(gram_matrix([x, fp({2: 1})]), np.eye(2))

    def test_gram_empty_input(self):
        with pytest.raises(EmptyInput):
            gram_matrix([])
        with pytest.raises(EmptyInput):
            gram_matrix([fp({1: 1})], [])

    def test_kind_parse(self):
        assert KernelKind.parse("MinMax") is KernelKind.MINMAX
        assert KernelKind.parse(KernelKind.TANIMOTO) is KernelKind.TANIMOTO
        with pytest.raises(ValueError):
            KernelKind.parse("rbf")


class TestGram:
    @pytest.mark.parametrize("kind", ["minmax", "tanimoto"])
    def test_matches_pairwise_oracle(self, corpus, synthetic, kind):
        rows = fingerprint_many(corpus)
        cols = fingerprint_many(synthetic[:40])
        K = gram_matrix(rows, cols, kind)
        binary = kind == "tanimoto"
        expected = np.array([[dense_oracle(a, b, binary) for b in cols] for a in rows])
        np.testing.assert_allclose(K, expected, rtol=0, atol=1e-14)

    def test_symmetric_square(self, synthetic):
        fps = fingerprint_many(synthetic[:60])
        K = gram_matrix(fps)
        np.testing.assert_array_equal(K, K.T)
        np.testing.assert_array_equal(np.diag(K), 1.0)
        assert K.min() >= 0.0 and K.max() <= 1.0

    def test_psd(self, synthetic):
        for start in range(0, 150, 50):
            fps = fingerprint_many(synthetic[start:start + 50])
            for kind in ("minmax", "tanimoto"):
                assert np.linalg.eigvalsh(gram_matrix(fps, kind=kind)).min() >= -1e-8


counts_maps = st.dictionaries(st.integers(0, 40), st.integers(1, 6), max_size=10)


@settings(max_examples=300, deadline=None)
@given(counts_maps, counts_maps)
def test_kernel_laws(a, b):
    fa, fb = fp(a), fp(b)
    for k in (minmax, tanimoto):
        assert k(fa, fb) == k(fb, fa)
        assert 0.0 <= k(fa, fb) <= 1.0
        assert k(fa, fa) == 1.0
    assert minmax(fa, fb) == pytest.approx(dense_oracle(fa, fb, False), abs=1e-15)
    assert tanimoto(fa, fb) == pytest.approx(dense_oracle(fa, fb, True), abs=1e-15)
    # binary reduction is exact
    assert minmax(to_binary(fa), to_binary(fb)) == tanimoto(fa, fb)
