"""Stochastic sparse subspace clustering.

Dropout on the dictionary of a sparse self-expressive model, solved as a
consensus over randomly sub-sampled dictionaries with damped orthogonal
matching pursuit, followed by normalized-cut spectral clustering.
"""
from .consensus import (
    ConsensusParams,
    DropoutPlan,
    consensus_matrix,
    consensus_solve,
    damped_omp,
    damped_omp_union,
    dropout_objective_mc,
    psi_score,
    regularized_objective,
    s3comp_c_matrix,
    s3comp_matrix,
    sample_dropout_masks,
)
from .dataset import (
    SyntheticSpec,
    generate_synthetic,
    load_labels,
    load_matrix,
    normalize_columns,
    pca_project,
    save_labels,
    save_matrix,
)
from .estimators import S3COMP, SSCOMP
from .metrics import (
    ClusteringReport,
    clustering_accuracy,
    connectivity_mean,
    connectivity_min,
    per_cluster_lambda2,
    subspace_preserving_error,
)
from .omp import SparseCoefVector, omp_solve, sscomp_matrix
from .spectral import (
    affinity_from_coefficients,
    eigen_gap_report,
    kmeans,
    normalized_laplacian,
    smallest_eigenpairs,
    spectral_cluster,
)

__version__ = "0.1.0"
