import numpy as np
import pytest
from sklearn.base import clone

from s3comp import S3COMP, SSCOMP, SyntheticSpec, generate_synthetic
from s3comp.metrics import clustering_accuracy


@pytest.fixture(scope="module")
def data():
    X, y = generate_synthetic(SyntheticSpec(n=3, d=3, D=8, points_per_subspace=40, seed=2))
    return X.T, y


def test_sscomp_fit_predict(data):
    X, y = data
    est = SSCOMP(n_clusters=3, n_nonzero=3, random_state=0)
    labels = est.fit_predict(X)
    assert labels.shape == (120,)
    assert est.representation_matrix_.shape == (120, 120)
    assert set(est.timings_) == {"self_expression", "spectral"}
    assert clustering_accuracy(labels, y) > 60


def test_s3comp_attributes(data):
    X, y = data
    est = S3COMP(n_clusters=3, n_nonzero=3, dropout=0.3, n_subproblems=6, penalty=0.5,
                 max_outer=3, random_state=1).fit(X)
    assert est.dropout_plan_.masks.shape == (6, 120)
    assert est.n_outer_iter_.max() <= 3
    assert len(est.convergence_trace_) <= 2
    assert est.representation_matrix_.nnz <= 3 * 6 * 120
    again = clone(est).fit(X)
    assert np.array_equal(again.labels_, est.labels_)


def test_params_roundtrip():
    est = S3COMP(penalty=0.3, averaging="star")
    assert est.get_params()["penalty"] == 0.3
    assert est.set_params(dropout=0.6).dropout == 0.6
    assert clone(est).get_params() == est.get_params()


def test_max_outer_one_is_single_pass(data):
    X, _ = data
    a = S3COMP(n_clusters=3, n_nonzero=3, n_subproblems=4, max_outer=1, random_state=5).fit(X)
    assert a.n_outer_iter_.max() == 1 and a.convergence_trace_ == []


@pytest.mark.parametrize("bad", [dict(n_clusters=0), dict(n_nonzero=500), dict(k_eig=1)])
def test_validation(data, bad):
    X, _ = data
    params = dict(n_clusters=3, n_nonzero=3)
    params.update(bad)
    with pytest.raises(ValueError):
        SSCOMP(**params).fit(X)


def test_rejects_nan(data):
    X, _ = data
    X = X.copy()
    X[0, 0] = np.nan
    with pytest.raises(ValueError):
        SSCOMP(n_clusters=3).fit(X)


def test_bad_consensus_params(data):
    X, _ = data
    with pytest.raises(ValueError):
        S3COMP(n_clusters=3, penalty=0.0).fit(X)
    with pytest.raises(ValueError):
        S3COMP(n_clusters=3, averaging="median").fit(X)
