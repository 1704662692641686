"""scikit-learn compatible subspace-clustering estimators.

Both estimators take ``X`` with shape ``(n_samples, n_features)``, like any
other scikit-learn clusterer, and internally work on the transposed,
column-normalized ``D x N`` data matrix.

>>> from s3comp import S3COMP, SyntheticSpec, generate_synthetic
>>> X, y = generate_synthetic(SyntheticSpec(n=3, d=3, D=6, points_per_subspace=40, seed=0))
>>> labels = S3COMP(n_clusters=3, n_nonzero=3, random_state=0).fit_predict(X.T)
"""
import time

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array

from ._rng import stream_int
from .consensus import ConsensusParams, consensus_matrix, sample_dropout_masks
from .dataset import normalize_columns
from .omp import DEFAULT_EPS, sscomp_matrix
from .spectral import affinity_from_coefficients, spectral_cluster


def _resolve_seed(random_state):
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    return int(check_random_state(random_state).randint(np.iinfo(np.int32).max))


class _SelfExpressiveClustering(ClusterMixin, BaseEstimator):
    """Shared fit pipeline: self-expression -> affinity -> spectral clustering."""

    def _self_expression(self, data, seed):
        raise NotImplementedError

    def _validate_common(self, n_samples):
        if not 1 <= self.n_clusters <= n_samples:
            raise ValueError(f"n_clusters={self.n_clusters} must be in [1, {n_samples}]")
        if not 1 <= self.n_nonzero < n_samples:
            raise ValueError(f"n_nonzero={self.n_nonzero} must be in [1, {n_samples - 1}]")
        if self.k_eig is not None and self.k_eig < self.n_clusters:
            raise ValueError("k_eig must be >= n_clusters")

    def fit(self, X, y=None):
        """Compute the self-expression matrix, its affinity and the cluster labels.

        Parameters
        ----------
        X : array-like, shape (n_samples, n_features)
        y : ignored
        """
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        self.n_features_in_ = X.shape[1]
        self._validate_common(X.shape[0])
        data = normalize_columns(X.T) if self.normalize else X.T
        seed = _resolve_seed(self.random_state)

        t0 = time.perf_counter()
        self.representation_matrix_ = self._self_expression(data, seed)
        t1 = time.perf_counter()
        self.affinity_matrix_ = affinity_from_coefficients(self.representation_matrix_)
        self.labels_ = spectral_cluster(self.affinity_matrix_, self.n_clusters, k_eig=self.k_eig,
                                        seed=stream_int(seed, "kmeans"), restarts=self.n_init)
        t2 = time.perf_counter()
        self.timings_ = {"self_expression": t1 - t0, "spectral": t2 - t1}
        return self


class SSCOMP(_SelfExpressiveClustering):
    """Sparse subspace clustering with orthogonal matching pursuit.

    Parameters
    ----------
    n_clusters : int, default=8
    n_nonzero : int, default=5
        Sparsity budget ``s`` of every self-expression.
    tol : float, default=1e-6
        Pursuit stops once the residual norm falls to ``tol``.
    k_eig : int or None, default=None
        Number of Laplacian eigenvectors in the spectral embedding
        (``None`` means ``n_clusters``).
    normalize : bool, default=True
        Scale every sample to unit l2 norm first.
    n_init : int, default=20
        k-means restarts.
    random_state : int, RandomState or None

    Attributes
    ----------
    representation_matrix_ : scipy.sparse.csc_matrix, shape (n_samples, n_samples)
        Column ``j`` expresses sample ``j`` through the others.
    affinity_matrix_ : scipy.sparse.csr_matrix
    labels_ : ndarray of shape (n_samples,)
    timings_ : dict
    """

    def __init__(self, n_clusters=8, n_nonzero=5, tol=DEFAULT_EPS, k_eig=None, normalize=True,
                 n_init=20, random_state=None):
        self.n_clusters = n_clusters
        self.n_nonzero = n_nonzero
        self.tol = tol
        self.k_eig = k_eig
        self.normalize = normalize
        self.n_init = n_init
        self.random_state = random_state

    def _self_expression(self, data, seed):
        return sscomp_matrix(data, self.n_nonzero, self.tol)


class S3COMP(_SelfExpressiveClustering):
    """Stochastic sparse subspace clustering by consensus OMP.

    Every sample is expressed against ``n_subproblems`` dictionaries in which
    each column was dropped with probability ``dropout``; the per-dictionary
    damped-OMP solutions are averaged into a consensus and the process is
    repeated until the consensus settles.  With ``max_outer=1`` this is the
    single-pass variant (S3COMP); larger values give S3COMP-C.

    Parameters
    ----------
    n_clusters : int, default=8
    n_nonzero : int, default=5
        Sparsity budget ``s`` per subproblem; the consensus can hold up to
        ``n_nonzero * n_subproblems`` entries.
    dropout : float, default=0.4
        Probability ``delta`` of dropping a column from a subproblem.
        Larger data sets tolerate larger rates.
    n_subproblems : int, default=15
    penalty : float, default=0.5
        Consensus penalty ``lambda``; values in [0.1, 1] usually work.
    tol : float, default=1e-6
        Residual tolerance of each damped OMP.
    outer_tol : float, default=1e-3
        Relative-change threshold of the consensus loop.
    max_outer : int, default=10
    averaging : {"mean", "star"}, default="mean"
        "star" divides each entry by the number of subproblems that used it.
    union_selection : bool, default=False
        Let damped OMP also pick dropped columns.
    k_eig, normalize, n_init, random_state
        As in :class:`SSCOMP`.

    Attributes
    ----------
    representation_matrix_, affinity_matrix_, labels_, timings_
        As in :class:`SSCOMP`.
    dropout_plan_ : DropoutPlan
    n_outer_iter_ : ndarray of shape (n_samples,)
    converged_ : ndarray of bool, shape (n_samples,)
    convergence_trace_ : list of float
        Relative change of the whole matrix for outer rounds 2, 3, ...
    """

    def __init__(self, n_clusters=8, n_nonzero=5, dropout=0.4, n_subproblems=15, penalty=0.5,
                 tol=DEFAULT_EPS, outer_tol=1e-3, max_outer=10, averaging="mean",
                 union_selection=False, k_eig=None, normalize=True, n_init=20, random_state=None):
        self.n_clusters = n_clusters
        self.n_nonzero = n_nonzero
        self.dropout = dropout
        self.n_subproblems = n_subproblems
        self.penalty = penalty
        self.tol = tol
        self.outer_tol = outer_tol
        self.max_outer = max_outer
        self.averaging = averaging
        self.union_selection = union_selection
        self.k_eig = k_eig
        self.normalize = normalize
        self.n_init = n_init
        self.random_state = random_state

    def consensus_params(self):
        return ConsensusParams(
            s=self.n_nonzero, lam=self.penalty, eps_inner=self.tol, eps_outer=self.outer_tol,
            max_outer=self.max_outer, averaging=self.averaging,
            union_selection=self.union_selection,
        ).validate()

    def _self_expression(self, data, seed):
        params = self.consensus_params()
        self.dropout_plan_ = sample_dropout_masks(data.shape[1], self.dropout, self.n_subproblems,
                                                  seed=seed)
        result = consensus_matrix(data, self.dropout_plan_, params)
        self.n_outer_iter_ = result.n_iter
        self.converged_ = result.converged
        self.convergence_trace_ = result.trace
        return result.C
