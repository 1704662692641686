"""Dropout masks, the dropout/ridge objectives, damped OMP and consensus OMP.

Conventions
-----------
* A dropout mask keeps column ``i`` with probability ``1 - delta``.  Inside
  the pursuit the kept columns are used unscaled and dropped columns become
  zero atoms; the ``1 / (1 - delta)`` scaling only appears in the Monte-Carlo
  objective :func:`dropout_objective_mc`, where it is what makes the
  expectation match :func:`regularized_objective`.
* One :class:`DropoutPlan` is shared by all columns; column ``j`` is removed
  from its own candidate set in every subproblem.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from ._pursuit import batched_pursuit
from ._rng import stream_rng
from .dataset import check_data_matrix
from .exceptions import DivergentRegularizerError, EmptyCandidatesError
from .omp import (
    DEFAULT_EPS,
    SparseCoefVector,
    _check_sparsity,
    as_dense_coef,
    coef_matrix,
    column_batches,
)

AVERAGING = ("mean", "star")


@dataclass
class DropoutPlan:
    """``T`` fixed keep/drop masks over ``N`` columns."""

    masks: np.ndarray  # bool, shape (T, N), True = kept
    delta: float
    seed: int

    @property
    def T(self):
        return self.masks.shape[0]

    @property
    def N(self):
        return self.masks.shape[1]

    def keep_set(self, t):
        return np.flatnonzero(self.masks[t])

    def drop_set(self, t):
        return np.flatnonzero(~self.masks[t])


def sample_dropout_masks(N, delta, T, seed=0):
    """Draw ``T`` independent Bernoulli keep-masks with keep probability ``1 - delta``."""
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {delta}")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    rng = stream_rng(seed, "masks")
    masks = rng.random((T, N)) >= delta
    return DropoutPlan(masks=masks, delta=float(delta), seed=int(seed))


@dataclass
class ConsensusParams:
    """Settings of the consensus solver.

    ``lam`` is the consensus penalty; its useful range is roughly [0.1, 1]
    (smaller for data whose subspaces are very close).  ``max_outer=1`` gives
    the single-pass S3COMP variant.
    """

    s: int = 5
    lam: float = 0.5
    eps_inner: float = DEFAULT_EPS
    eps_outer: float = 1e-3
    max_outer: int = 10
    averaging: str = "mean"
    union_selection: bool = False

    def validate(self):
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")
        if not self.lam > 0:
            raise ValueError(f"consensus penalty must be > 0, got {self.lam}")
        if self.eps_inner < 0 or self.eps_outer < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be >= 1, got {self.max_outer}")
        if self.averaging not in AVERAGING:
            raise ValueError(f"averaging must be one of {AVERAGING}, got {self.averaging!r}")
        return self


# ----------------------------------------------------------------- objectives


def regularized_objective(X, j, c, delta):
    """``||x_j - X c||^2 + delta / (1 - delta) * sum_i ||x_i||^2 c_i^2``.

    This is the closed-form expectation of :func:`dropout_objective_mc`.
    """
    if delta >= 1.0:
        raise DivergentRegularizerError("delta = 1 drops every column")
    X = np.asarray(X, dtype=np.float64)
    c = as_dense_coef(c, X.shape[1])
    r = X[:, j] - X @ c
    sq_norms = np.einsum("ij,ij->j", X, X)
    return float(r @ r + delta / (1.0 - delta) * np.sum(sq_norms * c * c))


def dropout_objective_mc(X, j, c, delta, samples=100_000, seed=0, chunk=20_000):
    """Monte-Carlo mean of ``||x_j - sum_i xi_i c_i x_i||^2``.

    ``xi_i`` is ``1 / (1 - delta)`` with probability ``1 - delta`` and 0
    otherwise, drawn fresh for every sample.  Only the support of ``c`` is
    sampled, which leaves the distribution of the objective unchanged.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    c = as_dense_coef(c, X.shape[1])
    S = np.flatnonzero(c)
    x = X[:, j]
    if S.size == 0:
        return float(x @ x)
    XS, cS = X[:, S], c[S]
    rng = stream_rng(seed, "montecarlo")
    scale = 1.0 / (1.0 - delta)
    total = 0.0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        xi = np.where(rng.random((n, S.size)) >= delta, scale, 0.0)
        R = x[None, :] - (xi * cS) @ XS.T
        total += np.einsum("nd,nd->", R, R)
        done += n
    return float(total / samples)


def psi_score(x_i, q, c_ij, lam):
    """Selection score ``(x_i^T q)^2 + 2 lam (x_i^T q) c_ij - lam c_ij^2``.

    For unit-norm ``x_i`` the atom with the largest score is the one whose
    one-coefficient penalized fit ``min_b ||q - x_i b||^2 + lam (b - c_ij)^2``
    is smallest.  ``x_i`` may be a ``(D, k)`` block, scoring ``k`` atoms.
    """
    corr = np.asarray(x_i).T @ np.asarray(q)
    c_ij = np.asarray(c_ij, dtype=np.float64)
    return corr * corr + corr * (2.0 * lam * c_ij) - lam * (c_ij * c_ij)


def one_atom_objective(x_i, q, c_ij, lam, b):
    """``||q - x_i b||^2 + lam (b - c_ij)^2``."""
    r = q - x_i * b
    return float(r @ r + lam * (b - c_ij) ** 2)


# --------------------------------------------------------------- damped OMP


def _support_solve(XS, x, cS, lam):
    G = XS.T @ XS + lam * np.eye(XS.shape[1])
    rhs = XS.T @ x + lam * cS
    try:
        return np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(G, rhs, rcond=None)[0]


def _as_mask(index_set, N):
    mask = np.zeros(N, dtype=bool)
    mask[np.asarray(index_set, dtype=np.intp)] = True
    return mask


def damped_omp(dictionary, keep, x, c, s, lam, eps=DEFAULT_EPS):
    """Greedy solve of ``min ||x - Xi b||^2 + lam ||b - c||^2`` s.t. ``||b||_0 <= s``.

    Parameters
    ----------
    dictionary : ndarray, shape (D, N)
        ``Xi``: the data matrix with dropped columns set to zero.
    keep : array of int
        Candidate indices ``I``.  The caller removes the target's own index.
    x : ndarray, shape (D,)
    c : SparseCoefVector, ndarray or None
        Consensus vector; ``None`` means zero.
    s, lam, eps : sparsity budget, penalty, residual tolerance.

    Atoms are picked from ``I`` minus the current support by :func:`psi_score`
    (lowest index on ties); after each pick the coefficients on the support
    are ``(Xi_S^T Xi_S + lam I)^{-1} (Xi_S^T x + lam c_S)``.
    """
    Xi = np.asarray(dictionary, dtype=np.float64)
    N = Xi.shape[1]
    c = as_dense_coef(c, N)
    avail = _as_mask(keep, N)
    if not avail.any():
        raise EmptyCandidatesError("no candidate atoms to pursue with")
    q = np.array(x, dtype=np.float64)
    support = []
    b = np.zeros(0)
    while len(support) < s and np.linalg.norm(q) > eps and avail.any():
        cand = np.flatnonzero(avail)
        score = psi_score(Xi[:, cand], q, c[cand], lam)
        i = int(cand[np.argmax(score)])
        support.append(i)
        avail[i] = False
        XS = Xi[:, support]
        b = _support_solve(XS, x, c[support], lam)
        q = x - XS @ b
    return SparseCoefVector(N, support, b)


def damped_omp_union(dictionary, keep, drop, x, c, s, lam, eps=DEFAULT_EPS):
    """Damped OMP that may also pick dropped columns.

    At each step the best kept atom ``i*`` (by :func:`psi_score`) is taken if
    ``lam c_i*^2 - (q^T x_i* + lam c_i*)^2 / (1 + lam) < 0``; otherwise the
    dropped atom with the largest ``|c_i|`` is added and, being a zero
    column, its coefficient ends up equal to ``c_i``.
    """
    Xi = np.asarray(dictionary, dtype=np.float64)
    N = Xi.shape[1]
    c = as_dense_coef(c, N)
    avail_i = _as_mask(keep, N)
    avail_j = _as_mask(drop, N)
    if not (avail_i.any() or avail_j.any()):
        raise EmptyCandidatesError("no candidate atoms to pursue with")
    q = np.array(x, dtype=np.float64)
    support = []
    b = np.zeros(0)
    while len(support) < s and np.linalg.norm(q) > eps and (avail_i.any() or avail_j.any()):
        pick_i = None
        if avail_i.any():
            cand = np.flatnonzero(avail_i)
            score = psi_score(Xi[:, cand], q, c[cand], lam)
            pick_i = int(cand[np.argmax(score)])
            corr = Xi[:, pick_i] @ q
            gain = lam * c[pick_i] ** 2 - (corr + lam * c[pick_i]) ** 2 / (1.0 + lam)
        if pick_i is not None and (gain < 0 or not avail_j.any()):
            i = pick_i
            avail_i[i] = False
        else:
            jc = np.flatnonzero(avail_j)
            i = int(jc[np.argmax(np.abs(c[jc]))])
            avail_j[i] = False
        support.append(i)
        XS = Xi[:, support]
        b = _support_solve(XS, x, c[support], lam)
        q = x - XS @ b
    return SparseCoefVector(N, support, b)


# ------------------------------------------------------------ consensus OMP


def _average(stack, averaging):
    """Combine per-subproblem solutions stacked along axis 0 (summed in t order)."""
    total = np.zeros(stack.shape[1:])
    for b in stack:
        total += b
    if averaging == "mean":
        return total / stack.shape[0]
    counts = np.count_nonzero(stack, axis=0)
    return np.divide(total, counts, out=np.zeros_like(total), where=counts > 0)


def _relative_change(new, old):
    return float(np.linalg.norm(new - old) / max(np.linalg.norm(old), 1e-12))


def consensus_solve(X, j, plan, params, return_trace=False):
    """Consensus OMP for one column ``j``.

    Starting from ``c = 0``, alternate between solving the ``T`` damped-OMP
    subproblems on the masked dictionaries and averaging their solutions,
    until the relative change of ``c`` drops below ``params.eps_outer`` or
    ``params.max_outer`` rounds have run.

    Returns the consensus :class:`SparseCoefVector`, plus the list of
    per-round relative changes if ``return_trace``.
    """
    X = check_data_matrix(X)
    params.validate()
    N = X.shape[1]
    _check_sparsity(params.s, N)
    x = X[:, j]
    c = np.zeros(N)
    changes = []
    for _ in range(params.max_outer):
        subs = np.zeros((plan.T, N))
        for t in range(plan.T):
            keep = plan.masks[t].copy()
            keep[j] = False
            Xi = X * plan.masks[t]
            try:
                if params.union_selection:
                    drop = ~plan.masks[t]
                    drop[j] = False
                    b = damped_omp_union(Xi, np.flatnonzero(keep), np.flatnonzero(drop), x, c,
                                         params.s, params.lam, params.eps_inner)
                else:
                    b = damped_omp(Xi, np.flatnonzero(keep), x, c, params.s, params.lam,
                                   params.eps_inner)
            except EmptyCandidatesError:
                continue  # an empty subproblem contributes b = 0
            subs[t] = b.to_dense()
        c_new = _average(subs, params.averaging)
        changes.append(_relative_change(c_new, c))
        c = c_new
        if changes[-1] < params.eps_outer:
            break
    coef = SparseCoefVector.from_dense(c)
    return (coef, changes) if return_trace else coef


@dataclass
class ConsensusResult:
    """Output of :func:`consensus_matrix`."""

    C: object  # scipy.sparse.csc_matrix, shape (N, N)
    n_iter: np.ndarray  # outer rounds run per column
    trace: list  # matrix-level ||C_k - C_{k-1}||_F / ||C_{k-1}||_F for k = 2, 3, ...
    converged: np.ndarray  # per column: stopped by the relative-change test
    empty_subproblems: list  # (column, t) pairs whose candidate set was empty


def consensus_matrix(X, plan, params, batch_size=None):
    """Run consensus OMP for every column of ``X`` with a shared dropout plan.

    Columns are processed in memory-bounded batches; inside a batch all
    active columns advance one outer round at a time and each column stops
    on its own relative-change test.
    """
    X = check_data_matrix(X)
    params.validate()
    N = X.shape[1]
    _check_sparsity(params.s, N)
    if plan.N != N:
        raise ValueError(f"dropout plan covers {plan.N} columns, data has {N}")
    R = params.max_outer
    diff2 = np.zeros(R + 1)
    prev2 = np.zeros(R + 1)
    rounds_run = 0
    n_iter = np.zeros(N, dtype=np.int64)
    converged = np.zeros(N, dtype=bool)
    empty_pairs = []
    out_rows, out_cols, out_vals = [], [], []

    for batch in column_batches(N, batch_size):
        m = batch.size
        C = np.zeros((m, N))  # row r holds the consensus vector of column batch[r]
        active = np.ones(m, dtype=bool)
        for r in range(1, R + 1):
            a = np.flatnonzero(active)
            if a.size == 0:
                # frozen columns still count towards the matrix norm
                prev2[r:] += np.sum(C * C)
                break
            rounds_run = max(rounds_run, r)
            old = C[a]
            total = np.zeros((a.size, N))
            counts = np.zeros((a.size, N), dtype=np.int64)
            ar = np.broadcast_to(np.arange(a.size)[:, None], (a.size, params.s))
            support = np.nonzero(old)
            for t in range(plan.T):
                idx, val, empty = batched_pursuit(
                    X, batch[a], params.s, lam=params.lam, eps=params.eps_inner,
                    keep=plan.masks[t], consensus=old, union=params.union_selection,
                    support=support,
                )
                if r == 1 and empty.any():
                    empty_pairs.extend((int(batch[a][e]), t) for e in np.flatnonzero(empty))
                ok = (idx >= 0) & (val != 0)
                total[ar[ok], idx[ok]] += val[ok]
                counts[ar[ok], idx[ok]] += 1
            if params.averaging == "mean":
                new = total / plan.T
            else:
                new = np.divide(total, counts, out=np.zeros_like(total), where=counts > 0)
            d2 = np.sum((new - old) ** 2, axis=1)
            o2 = np.sum(old * old, axis=1)
            diff2[r] += d2.sum()
            prev2[r] += np.sum(C * C)
            change = np.sqrt(d2) / np.maximum(np.sqrt(o2), 1e-12)
            C[a] = new
            n_iter[batch[a]] = r
            done = a[change < params.eps_outer]
            converged[batch[done]] = True
            active[done] = False
        tcols, rows = np.nonzero(C)
        out_rows.append(rows)
        out_cols.append(batch[tcols])
        out_vals.append(C[tcols, rows])

    if empty_pairs:
        warnings.warn(f"{len(empty_pairs)} subproblems had no candidate atoms and contributed zero",
                      stacklevel=2)
    trace = [float(np.sqrt(diff2[r] / prev2[r])) if prev2[r] > 0 else float("inf")
             for r in range(2, rounds_run + 1)]
    C = coef_matrix(N, np.concatenate(out_rows), np.concatenate(out_cols), np.concatenate(out_vals))
    return ConsensusResult(C=C, n_iter=n_iter, trace=trace, converged=converged,
                           empty_subproblems=empty_pairs)


def s3comp_matrix(X, plan, params):
    """Single-round consensus (S3COMP): one pass of damped OMP plus averaging."""
    one = ConsensusParams(**{**params.__dict__, "max_outer": 1})
    return consensus_matrix(X, plan, one).C


def s3comp_c_matrix(X, plan, params):
    """Fully iterated consensus OMP (S3COMP-C)."""
    return consensus_matrix(X, plan, params).C
