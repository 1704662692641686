import itertools

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from s3comp.spectral import (affinity_from_coefficients, eigen_gap_report, kmeans,
                             normalized_laplacian, smallest_eigenpairs, spectral_cluster)


def random_graph(rng, N, p=0.3):
    W = np.triu(rng.random((N, N)) * (rng.random((N, N)) < p), 1)
    return sp.csr_matrix(W + W.T)


def blocks(sizes, rng=None, weight=1.0):
    mats = []
    for m in sizes:
        B = np.full((m, m), weight)
        if rng is not None:
            B = B * (0.5 + rng.random((m, m)))
            B = (B + B.T) / 2
        np.fill_diagonal(B, 0)
        mats.append(sp.csr_matrix(B))
    return sp.block_diag(mats, format="csr")


def test_affinity_formula():
    C = np.array([[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(affinity_from_coefficients(C).toarray(), [[0, 0.5], [0.5, 0]])
    S = np.array([[0.0, -2.0, 1.0], [-2.0, 0.0, 3.0], [1.0, 3.0, 0.0]])
    np.testing.assert_allclose(affinity_from_coefficients(S).toarray(), np.abs(S))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 30))
def test_affinity_exactly_symmetric(seed, N):
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((N, N)) * (rng.random((N, N)) < 0.3)
    np.fill_diagonal(C, 0)
    A = affinity_from_coefficients(C).toarray()
    assert np.array_equal(A, A.T)
    assert np.all(np.diag(A) == 0) and np.all(A >= 0)


def test_k4_spectrum():
    vals, _ = smallest_eigenpairs(normalized_laplacian(blocks([4])), 4)
    np.testing.assert_allclose(vals, [0, 4 / 3, 4 / 3, 4 / 3], atol=1e-12)
    np.testing.assert_allclose(eigen_gap_report(blocks([4]), 2), [0, 4 / 3], atol=1e-12)


def test_two_components_double_zero():
    vals, _ = smallest_eigenpairs(normalized_laplacian(blocks([2, 2])), 3)
    np.testing.assert_allclose(vals[:2], 0, atol=1e-12)
    assert vals[2] > 0.5


def test_null_vector_and_symmetry(rng):
    A = random_graph(rng, 30, 0.5)
    assert np.all(np.asarray(A.sum(axis=1)) > 0)
    L = normalized_laplacian(A)
    assert (L != L.T).nnz == 0
    x = np.sqrt(np.asarray(A.sum(axis=1)).ravel())
    np.testing.assert_allclose(L @ x, 0, atol=1e-10)


def test_isolated_vertex_identity_row():
    A = sp.csr_matrix(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=float))
    L = normalized_laplacian(A).toarray()
    np.testing.assert_array_equal(L[2], [0, 0, 1])


def test_identity_laplacian():
    vals, _ = smallest_eigenpairs(sp.identity(6, format="csr"), 6)
    np.testing.assert_allclose(vals, 1.0)


def test_block_components_zero(rng):
    A = blocks([5, 6, 7], rng)
    vals, _ = smallest_eigenpairs(normalized_laplacian(A), 3)
    np.testing.assert_allclose(vals, 0, atol=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000))
def test_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    A = random_graph(rng, 50, 0.2)
    L = normalized_laplacian(A)
    vals, vecs = smallest_eigenpairs(L, 8)
    full = np.linalg.eigvalsh(L.toarray())
    np.testing.assert_allclose(vals, full[:8], atol=1e-8)
    assert np.all(full >= -1e-8) and np.all(full <= 2 + 1e-8)
    np.testing.assert_allclose(vecs.T @ vecs, np.eye(8), atol=1e-8)


def test_iterative_path_agrees_with_dense(rng, monkeypatch):
    import s3comp.spectral as spectral
    A = blocks([40, 50, 60], rng) + random_graph(rng, 150, 0.02) * 0.01
    L = normalized_laplacian(A)
    dense, _ = smallest_eigenpairs(L, 5)
    monkeypatch.setattr(spectral, "DENSE_EIG_MAX", 10)
    lanczos, V = spectral.smallest_eigenpairs(L, 5)
    np.testing.assert_allclose(lanczos, dense, atol=1e-8)
    np.testing.assert_allclose(V.T @ V, np.eye(5), atol=1e-8)


def test_k_validation():
    with pytest.raises(ValueError):
        smallest_eigenpairs(sp.identity(3, format="csr"), 4)


def test_kmeans_separated_clouds(rng):
    pts = np.vstack([rng.normal(0, 0.1, (20, 2)), rng.normal(10, 0.1, (20, 2))])
    lab = kmeans(pts, 2, seed=1)
    assert len(set(lab[:20])) == 1 and len(set(lab[20:])) == 1 and lab[0] != lab[20]


def test_kmeans_n_equals_N(rng):
    pts = rng.standard_normal((6, 3))
    assert len(set(kmeans(pts, 6, seed=0))) == 6


def _inertia(pts, lab):
    return sum(np.sum((pts[lab == k] - pts[lab == k].mean(axis=0)) ** 2) for k in set(lab))


@pytest.mark.parametrize("seed", range(5))
def test_kmeans_matches_partition_brute_force(seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((8, 2))
    best = min(_inertia(pts, np.array((0,) + bits))
               for bits in itertools.product((0, 1), repeat=7) if 1 in bits)
    assert _inertia(pts, kmeans(pts, 2, seed=seed)) == pytest.approx(best, abs=1e-10)


def test_kmeans_deterministic(rng):
    pts = rng.standard_normal((50, 3))
    assert np.array_equal(kmeans(pts, 4, seed=9), kmeans(pts, 4, seed=9))


def test_clean_blocks_recovered(rng):
    from s3comp.metrics import clustering_accuracy
    A = blocks([10, 12, 14], rng)
    truth = np.repeat([0, 1, 2], [10, 12, 14])
    lab = spectral_cluster(A, 3, seed=0)
    assert clustering_accuracy(lab, truth) == 100.0
    assert np.array_equal(lab, spectral_cluster(A, 3, k_eig=3, seed=0))
    from s3comp.metrics import clustering_accuracy as acc
    assert acc(spectral_cluster(A, 3, k_eig=4, seed=0), lab) == 100.0


@pytest.mark.parametrize("alpha", [2.0, 0.37, 15.0])
def test_scale_invariance(rng, alpha):
    A = blocks([10, 12, 14], rng) + random_graph(rng, 36, 0.1) * 0.05
    assert np.array_equal(spectral_cluster(A, 3, seed=4), spectral_cluster(A * alpha, 3, seed=4))


def test_k_eig_below_n_rejected(rng):
    with pytest.raises(ValueError):
        spectral_cluster(blocks([3, 3]), 2, k_eig=1)


def test_eigen_gap_five_components(rng):
    vals = eigen_gap_report(blocks([4, 5, 6, 7, 8], rng), 15)
    np.testing.assert_allclose(vals[:5], 0, atol=1e-8)
    assert vals[5] > 1e-3
