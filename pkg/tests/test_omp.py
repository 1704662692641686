import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_unit
from s3comp.omp import SparseCoefVector, omp_solve, sscomp_matrix
from s3comp.dataset import SyntheticSpec, generate_synthetic
from s3comp.metrics import subspace_preserving_error


def test_exact_duplicate_one_atom(rng):
    X = random_unit(rng, 5, 8)
    X[:, 6] = X[:, 2]
    b = omp_solve(X, 2, 1)
    assert list(b.support) == [6]
    assert b.values[0] == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(X[:, 2] - X @ b.to_dense()) < 1e-12


def test_residuals_decrease_and_support_size(rng):
    X = random_unit(rng, 20, 60)
    prev = 1.0
    for s in range(1, 8):
        b = omp_solve(X, 0, s)
        assert len(b.support) == s and 0 not in b.support
        r = np.linalg.norm(X[:, 0] - X @ b.to_dense())
        assert r < prev
        prev = r


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6))
def test_residual_orthogonal_to_support(seed, s):
    rng = np.random.default_rng(seed)
    X = random_unit(rng, 9, 30)
    b = omp_solve(X, 3, s)
    q = X[:, 3] - X @ b.to_dense()
    assert np.abs(X[:, b.support].T @ q).max() <= 1e-8
    assert len(set(b.support.tolist())) == len(b.support) <= s


def test_tie_breaks_to_lowest_index():
    X = np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]])
    assert list(omp_solve(X, 0, 1).support) == [1]


def test_duplicate_atoms_do_not_abort(rng):
    X = random_unit(rng, 3, 6)
    X[:, 4] = X[:, 1]
    b = omp_solve(X, 0, 3)
    assert np.all(np.isfinite(b.values))


def test_orthogonal_pairs():
    X = np.array([[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]])
    C = sscomp_matrix(X, 1).toarray()
    expected = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float)
    np.testing.assert_allclose(C, expected)


def test_matrix_matches_columns_and_bounds(rng):
    X = random_unit(rng, 9, 60)
    C = sscomp_matrix(X, 4)
    assert np.all(C.diagonal() == 0)
    assert C.nnz <= 4 * 60
    dense = C.toarray()
    for j in range(60):
        np.testing.assert_allclose(dense[:, j], omp_solve(X, j, 4).to_dense(), atol=1e-12)


def test_synthetic_sre_small_but_nonzero():
    X, y = generate_synthetic(SyntheticSpec(points_per_subspace=320, seed=0))
    e = subspace_preserving_error(sscomp_matrix(X, 5), y)
    assert 0.0 < e < 25.0


def test_sparse_vector_roundtrip():
    c = np.array([0.0, 2.0, 0.0, -1.0])
    v = SparseCoefVector.from_dense(c)
    assert v.nnz == 2 and np.array_equal(v.to_dense(), c)
    with pytest.raises(ValueError):
        SparseCoefVector(3, [0, 1], [1.0])


@pytest.mark.parametrize("s", [0, 10])
def test_invalid_sparsity(rng, s):
    with pytest.raises(ValueError):
        omp_solve(random_unit(rng, 3, 10), 0, s)
