"""Sparse self-expression by plain orthogonal matching pursuit (SSC-OMP)."""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ._pursuit import batched_pursuit
from .dataset import check_data_matrix

DEFAULT_EPS = 1e-6
# columns per batched pursuit call are chosen so that N * m stays below this
_BATCH_ENTRIES = 2_000_000


@dataclass
class SparseCoefVector:
    """A length-``length`` vector stored as an ordered support and its values.

    The support keeps pick order, which is what the pursuit tests compare.
    """

    length: int
    support: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=np.intp)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.support.shape != self.values.shape:
            raise ValueError("support and values must have the same length")

    @classmethod
    def from_dense(cls, c):
        c = np.asarray(c, dtype=np.float64)
        nz = np.flatnonzero(c)
        return cls(c.size, nz, c[nz])

    @property
    def nnz(self):
        return int(np.count_nonzero(self.values))

    def to_dense(self):
        out = np.zeros(self.length)
        out[self.support] = self.values
        return out


def as_dense_coef(c, N):
    """Accept a :class:`SparseCoefVector`, a dense vector or ``None`` (zero)."""
    if c is None:
        return np.zeros(N)
    if isinstance(c, SparseCoefVector):
        return c.to_dense()
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (N,):
        raise ValueError(f"coefficient vector must have shape ({N},), got {c.shape}")
    return c


def _check_sparsity(s, N):
    if not 1 <= s < N:
        raise ValueError(f"sparsity s={s} must satisfy 1 <= s < N={N}")


def omp_solve(X, j, s, eps=DEFAULT_EPS):
    """Orthogonal matching pursuit of ``x_j`` over the other columns of ``X``.

    Picks ``argmax |x_i^T q|`` (lowest index on ties), refits least squares on
    the support and stops after ``s`` atoms or once ``||q|| <= eps``.
    """
    X = check_data_matrix(X)
    N = X.shape[1]
    _check_sparsity(s, N)
    x = X[:, j]
    q = x.copy()
    avail = np.ones(N, dtype=bool)
    avail[j] = False
    support = []
    b = np.zeros(0)
    while len(support) < s and np.linalg.norm(q) > eps and avail.any():
        corr = np.abs(X.T @ q)
        corr[~avail] = -1.0
        i = int(np.argmax(corr))
        support.append(i)
        avail[i] = False
        XS = X[:, support]
        try:
            b = scipy.linalg.cho_solve(scipy.linalg.cho_factor(XS.T @ XS), XS.T @ x)
        except np.linalg.LinAlgError:
            # duplicated atoms: fall back to the least-norm solution
            b = np.linalg.lstsq(XS, x, rcond=None)[0]
        q = x - XS @ b
    return SparseCoefVector(N, support, b)


def column_batches(N, m=None):
    """Yield index arrays covering ``0..N-1`` in memory-bounded chunks."""
    if m is None:
        m = max(1, _BATCH_ENTRIES // max(N, 1))
    for start in range(0, N, m):
        yield np.arange(start, min(start + m, N))


def coef_matrix(N, rows, cols, vals):
    """Assemble a CSC ``N x N`` matrix, dropping padding (``row < 0``) and exact zeros."""
    rows, cols, vals = (np.asarray(a).ravel() for a in (rows, cols, vals))
    ok = (rows >= 0) & (vals != 0)
    C = sp.csc_matrix((vals[ok], (rows[ok], cols[ok])), shape=(N, N))
    C.sum_duplicates()
    return C


def sscomp_matrix(X, s, eps=DEFAULT_EPS):
    """Self-expression matrix whose column ``j`` is ``omp_solve(X, j, s, eps)``.

    Returns a ``scipy.sparse.csc_matrix`` with a zero diagonal.
    """
    X = check_data_matrix(X)
    N = X.shape[1]
    _check_sparsity(s, N)
    rows, cols, vals = [], [], []
    for batch in column_batches(N):
        idx, val, _ = batched_pursuit(X, batch, s, lam=0.0, eps=eps)
        rows.append(idx)
        cols.append(np.broadcast_to(batch[:, None], idx.shape))
        vals.append(val)
    return coef_matrix(N, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))
