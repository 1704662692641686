"""Data matrices, synthetic union-of-subspaces data, PCA and file I/O.

Throughout the functional API a data matrix is ``D x N``: column ``j`` is the
data point ``x_j``.  The estimators in :mod:`s3comp.estimators` accept the
usual scikit-learn ``(n_samples, n_features)`` layout and transpose.
"""
import csv
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._rng import stream_rng
from .exceptions import (
    DimTooLargeError,
    InvalidSpecError,
    ParseError,
    ShapeMismatchError,
    ZeroColumnError,
)

BINARY_MAGIC = b"S3CMTX01"
_ZERO_NORM = 1e-300


def check_data_matrix(X, name="X"):
    """Validate a ``D x N`` float matrix and return it as float64."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-D, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 2:
        raise ShapeMismatchError(f"{name} needs D >= 1 and N >= 2, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or Inf")
    return X


def normalize_columns(M):
    """Scale every column of ``M`` to unit l2 norm.

    Raises :class:`ZeroColumnError` for the first column whose norm is zero.
    """
    M = check_data_matrix(M, "M")
    norms = np.linalg.norm(M, axis=0)
    bad = np.flatnonzero(norms < _ZERO_NORM)
    if bad.size:
        raise ZeroColumnError(int(bad[0]))
    return M / norms


@dataclass(frozen=True)
class SyntheticSpec:
    """Union of ``n`` random ``d``-dimensional subspaces of R^D."""

    n: int = 5
    d: int = 6
    D: int = 9
    points_per_subspace: int = 30
    seed: int = 0

    def validate(self):
        if self.n < 1 or self.points_per_subspace < 1 or self.d < 1:
            raise InvalidSpecError(f"n, d and points_per_subspace must be >= 1: {self}")
        if self.d > self.D:
            raise InvalidSpecError(f"subspace dimension d={self.d} exceeds ambient D={self.D}")
        return self


def generate_synthetic(spec, return_bases=False):
    """Sample unit-norm points from a union of random linear subspaces.

    Each subspace basis is the thin-QR orthonormalization of a ``D x d``
    standard Gaussian matrix.  Points are ``U_i g`` with ``g ~ N(0, I_d)``,
    normalized, i.e. uniform on the unit sphere of the subspace.

    Returns
    -------
    X : ndarray, shape (D, n * points_per_subspace)
    labels : ndarray of int, shape (N,)
        Subspace membership, ``0..n-1``, in contiguous blocks.
    bases : list of ndarray, only if ``return_bases``
    """
    spec.validate()
    basis_rng = stream_rng(spec.seed, "basis")
    point_rng = stream_rng(spec.seed, "points")
    bases, blocks = [], []
    for _ in range(spec.n):
        U, _ = np.linalg.qr(basis_rng.standard_normal((spec.D, spec.d)))
        bases.append(U)
    for U in bases:
        pts = U @ point_rng.standard_normal((spec.d, spec.points_per_subspace))
        blocks.append(pts / np.linalg.norm(pts, axis=0))
    X = np.hstack(blocks)
    labels = np.repeat(np.arange(spec.n), spec.points_per_subspace)
    if return_bases:
        return X, labels, bases
    return X, labels


def pca_project(M, target_dim):
    """Center the columns of ``M`` and project onto the top principal directions.

    The output is ``target_dim x N`` and is *not* renormalized; call
    :func:`normalize_columns` afterwards if unit-norm points are needed.
    """
    M = check_data_matrix(M, "M")
    D, N = M.shape
    if not 1 <= target_dim <= min(D, N):
        raise DimTooLargeError(f"target_dim={target_dim} not in [1, min(D, N)={min(D, N)}]")
    centered = M - M.mean(axis=1, keepdims=True)
    U, _, _ = np.linalg.svd(centered, full_matrices=False)
    return U[:, :target_dim].T @ centered


# --------------------------------------------------------------------------- I/O


def _is_binary(path):
    return Path(path).suffix.lower() in {".bin", ".s3m"}


def save_matrix(M, path):
    """Write ``M`` as CSV (``.csv``/``.txt``) or the tagged binary format (``.bin``)."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ShapeMismatchError(f"expected a 2-D matrix, got shape {M.shape}")
    path = Path(path)
    if _is_binary(path):
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<QQ", *M.shape))
            fh.write(np.asfortranarray(M).astype("<f8").tobytes(order="F"))
    else:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in M:
                writer.writerow([repr(float(v)) for v in row])


def load_matrix(path):
    """Read a matrix written by :func:`save_matrix` (or any numeric CSV)."""
    path = Path(path)
    if _is_binary(path):
        raw = path.read_bytes()
        if raw[:8] != BINARY_MAGIC:
            raise ParseError(f"{path}: bad magic {raw[:8]!r}")
        if len(raw) < 24:
            raise ParseError(f"{path}: truncated header")
        rows, cols = struct.unpack("<QQ", raw[8:24])
        payload = raw[24:]
        if len(payload) != 8 * rows * cols:
            raise ShapeMismatchError(
                f"{path}: header says {rows}x{cols} but payload holds {len(payload) // 8} values"
            )
        return np.frombuffer(payload, dtype="<f8").reshape((rows, cols), order="F").astype(np.float64)

    data = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not tok.strip() for tok in row):
                continue
            values = []
            for colno, tok in enumerate(row, start=1):
                try:
                    values.append(float(tok))
                except ValueError:
                    raise ParseError(f"{path}: non-numeric token {tok!r}", lineno, colno) from None
            if data and len(values) != len(data[0]):
                raise ShapeMismatchError(
                    f"{path}: line {lineno} has {len(values)} values, expected {len(data[0])}"
                )
            data.append(values)
    if not data:
        raise ParseError(f"{path}: empty matrix file")
    return np.array(data, dtype=np.float64)


def save_labels(labels, path):
    """Write labels one per line, 1-based."""
    labels = np.asarray(labels)
    with open(path, "w") as fh:
        for v in labels:
            fh.write(f"{int(v) + 1}\n")


def load_labels(path):
    """Read a labels file (one integer per line) into dense 0-based codes.

    Cluster ids that are not a contiguous ``1..n`` range are remapped in
    increasing order and a warning is emitted.
    """
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok:
                continue
            try:
                values.append(int(tok))
            except ValueError:
                raise ParseError(f"{path}: label {tok!r} is not an integer", lineno, 1) from None
    if not values:
        raise ParseError(f"{path}: no labels")
    raw = np.array(values)
    uniq, codes = np.unique(raw, return_inverse=True)
    if not np.array_equal(uniq, np.arange(1, uniq.size + 1)):
        mapping = ", ".join(f"{u}->{k + 1}" for k, u in enumerate(uniq))
        warnings.warn(f"{path}: cluster ids remapped to 1..{uniq.size} ({mapping})", stacklevel=2)
    return codes.astype(np.int64)
