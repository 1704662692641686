"""Clustering accuracy, subspace-preserving error and algebraic connectivity."""
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components

from .exceptions import LengthMismatchError
from .spectral import normalized_laplacian, smallest_eigenpairs


def clustering_accuracy(est, truth):
    """Percentage of points correctly labeled under the best cluster matching.

    The matching is an optimal assignment on the contingency table, so the
    two labelings may use different names and numbers of clusters.
    """
    est, truth = np.asarray(est), np.asarray(truth)
    if est.shape != truth.shape:
        raise LengthMismatchError(f"{est.shape[0]} estimated labels vs {truth.shape[0]} true labels")
    _, e = np.unique(est, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((e.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(table, (e, t), 1)
    r, c = linear_sum_assignment(table, maximize=True)
    return 100.0 * table[r, c].sum() / truth.size


def subspace_preserving_error(C, truth):
    """Mean fraction (in %) of each column's l1 mass placed on other clusters.

    A column with zero l1 norm counts as fully non-preserving (error 1).
    """
    truth = np.asarray(truth)
    C = sp.coo_matrix(C)
    N = C.shape[1]
    if truth.size != N:
        raise LengthMismatchError(f"C has {N} columns, truth has {truth.size} labels")
    mag = np.abs(C.data)
    same = truth[C.row] == truth[C.col]
    l1 = np.bincount(C.col, weights=mag, minlength=N)
    inside = np.bincount(C.col, weights=mag * same, minlength=N)
    frac = np.divide(inside, l1, out=np.zeros(N), where=l1 > 0)
    return float(100.0 * np.mean(1.0 - frac))


def algebraic_connectivity(A):
    """Second smallest eigenvalue of the normalized Laplacian of ``A``.

    Exactly 0 for a disconnected graph or a single vertex.
    """
    A = sp.csr_matrix(A)
    if A.shape[0] < 2:
        return 0.0
    ncomp, _ = connected_components(A, directed=False)
    if ncomp > 1:
        return 0.0
    vals, _ = smallest_eigenpairs(normalized_laplacian(A), 2)
    return float(vals[1])


def per_cluster_lambda2(A, truth):
    """Algebraic connectivity of the subgraph induced by each ground-truth cluster.

    Returns an array ordered by sorted cluster id; singleton clusters give 0.
    """
    A = sp.csr_matrix(A)
    truth = np.asarray(truth)
    out = []
    for k in np.unique(truth):
        idx = np.flatnonzero(truth == k)
        out.append(algebraic_connectivity(A[idx][:, idx]))
    return np.array(out)


def connectivity_min(A, truth):
    return float(per_cluster_lambda2(A, truth).min())


def connectivity_mean(A, truth):
    return float(per_cluster_lambda2(A, truth).mean())


@dataclass
class ClusteringReport:
    accuracy_pct: float
    sre_pct: float
    conn_min: float
    conn_mean: float
    per_cluster_lambda2: list = field(default_factory=list)
    singleton_clusters: int = 0
    wall_time_s: float = float("nan")

    def as_dict(self):
        return asdict(self)


def evaluate(labels, truth, C, A, wall_time_s=float("nan")):
    """Compute every metric of one clustering run."""
    lam2 = per_cluster_lambda2(A, truth)
    _, sizes = np.unique(truth, return_counts=True)
    return ClusteringReport(
        accuracy_pct=clustering_accuracy(labels, truth),
        sre_pct=subspace_preserving_error(C, truth),
        conn_min=float(lam2.min()),
        conn_mean=float(lam2.mean()),
        per_cluster_lambda2=lam2.tolist(),
        singleton_clusters=int(np.sum(sizes == 1)),
        wall_time_s=wall_time_s,
    )
