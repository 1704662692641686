"""Affinity graphs, normalized Laplacians and normalized-cut spectral clustering."""
import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from sklearn.cluster import KMeans

from .exceptions import ConvergenceFailure

DENSE_EIG_MAX = 2000
EIG_RESIDUAL_TOL = 1e-6


def affinity_from_coefficients(C):
    """``A = (|C| + |C|^T) / 2`` with a zero diagonal, as a CSR matrix.

    Floating-point addition is commutative, so ``A`` is exactly symmetric.
    """
    absC = abs(sp.csr_matrix(C, dtype=np.float64))
    A = ((absC + absC.T) * 0.5).tocsr()
    A.setdiag(0)
    A.eliminate_zeros()
    return A


def _inv_sqrt_degree(A):
    deg = np.asarray(A.sum(axis=1)).ravel()
    out = np.zeros_like(deg)
    pos = deg > 0
    out[pos] = 1.0 / np.sqrt(deg[pos])
    return out


def normalized_laplacian(A):
    """``L = I - D^{-1/2} A D^{-1/2}`` as a sparse CSR matrix.

    Zero-degree vertices get ``D^{-1/2} = 0``, so their row of ``L`` is the
    corresponding row of the identity.
    """
    A = sp.csr_matrix(A, dtype=np.float64)
    scale = sp.diags(_inv_sqrt_degree(A))
    M = scale @ A @ scale
    M = (M + M.T) * 0.5  # exact symmetry
    return (sp.identity(A.shape[0], format="csr") - M).tocsr()


def _sign_flip(V):
    # make the largest-magnitude entry of every eigenvector positive
    rows = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[rows, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def smallest_eigenpairs(L, k):
    """The ``k`` algebraically smallest eigenpairs of a symmetric matrix.

    Dense ``eigh`` for ``N <= 2000``; above that, Lanczos (ARPACK) on
    ``I - L``.  Raises :class:`ConvergenceFailure` when any residual
    ``||L v - lambda v||`` exceeds ``1e-6``.
    """
    N = L.shape[0]
    if not 1 <= k <= N:
        raise ValueError(f"k={k} must be in [1, {N}]")
    if N <= DENSE_EIG_MAX:
        dense = L.toarray() if sp.issparse(L) else np.asarray(L, dtype=np.float64)
        vals, vecs = scipy.linalg.eigh(dense, subset_by_index=[0, k - 1])
    else:
        L = sp.csr_matrix(L)
        shifted = sp.identity(N, format="csr") - L
        v0 = np.random.default_rng(0).standard_normal(N)
        try:
            mu, vecs = spla.eigsh(shifted, k=k, which="LA", tol=1e-12, v0=v0,
                                  maxiter=max(1000, 20 * N))
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceFailure(f"Lanczos did not converge for k={k}") from exc
        vals = 1.0 - mu
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
    vecs = _sign_flip(vecs)
    resid = np.linalg.norm(L @ vecs - vecs * vals, axis=0)
    if np.any(resid > EIG_RESIDUAL_TOL):
        raise ConvergenceFailure(f"eigen-residuals too large: {resid.max():.3g}", residuals=resid)
    return vals, vecs


def kmeans(rows, n, seed=0, restarts=20, max_iter=300):
    """Best-inertia k-means++ clustering of ``rows`` over ``restarts`` seeded runs."""
    rows = np.asarray(rows, dtype=np.float64)
    if not 1 <= n <= rows.shape[0]:
        raise ValueError(f"cannot form {n} clusters from {rows.shape[0]} points")
    km = KMeans(n_clusters=n, init="k-means++", n_init=restarts, max_iter=max_iter,
                random_state=seed)
    return km.fit_predict(rows)


def spectral_embedding(A, k):
    """Row-normalized eigenvectors of the ``k`` smallest Laplacian eigenvalues."""
    _, V = smallest_eigenpairs(normalized_laplacian(A), k)
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    return np.divide(V, norms, out=np.zeros_like(V), where=norms >= 1e-12)


def spectral_cluster(A, n, k_eig=None, seed=0, restarts=20):
    """Normalized-cut spectral clustering of the affinity ``A`` into ``n`` groups.

    ``k_eig`` (default ``n``) eigenvectors are used for the embedding.
    """
    k_eig = n if k_eig is None else k_eig
    if k_eig < n:
        raise ValueError(f"k_eig={k_eig} must be >= n={n}")
    return kmeans(spectral_embedding(A, k_eig), n, seed=seed, restarts=restarts)


def eigen_gap_report(A, k):
    """The ``k`` smallest eigenvalues of the normalized Laplacian of ``A``."""
    vals, _ = smallest_eigenpairs(normalized_laplacian(A), k)
    return vals
