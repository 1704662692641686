"""Column-batched (damped) orthogonal matching pursuit.

Runs the same greedy loop as :func:`s3comp.consensus.damped_omp` for many
target columns at once: correlations for all active targets come from a
single ``Q.T @ X_kept`` product and the support-restricted solves are stacked
``k x k`` systems.  The per-column reference implementations in
:mod:`s3comp.omp` and :mod:`s3comp.consensus` are the oracle for this module.

Work arrays are laid out target-major, ``(m, K)``, so the per-target argmax
runs over contiguous rows.
"""
import numpy as np


def _stacked_solve(G, rhs):
    try:
        return np.linalg.solve(G, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.empty_like(rhs)
        for r in range(G.shape[0]):
            out[r] = np.linalg.lstsq(G[r], rhs[r], rcond=None)[0]
        return out


def batched_pursuit(X, cols, s, lam=0.0, eps=1e-6, keep=None, consensus=None, union=False,
                    support=None):
    """Greedy penalized pursuit of ``X[:, cols]`` over the kept columns of ``X``.

    Parameters
    ----------
    X : ndarray, shape (D, N)
        Unit-norm dictionary; also the source of the targets.
    cols : ndarray of int, shape (m,)
        Target column indices; each target is excluded from its own dictionary.
    s : int
        Maximum support size.
    lam : float
        Penalty weight pulling the solution towards ``consensus``.
    eps : float
        Residual-norm stopping tolerance.
    keep : bool ndarray, shape (N,), optional
        Kept dictionary columns; dropped columns act as zero atoms.
    consensus : ndarray, shape (m, N), optional
        Current consensus vectors, one row per target. ``None`` means zero.
    union : bool
        Also allow picks from dropped columns (value copied from ``consensus``).
    support : tuple of int arrays, optional
        ``np.nonzero(consensus)``, when the caller already has it.

    Returns
    -------
    idx : ndarray of int, shape (m, s)
        Selected atoms in pick order, ``-1`` padded.
    val : ndarray, shape (m, s)
        Coefficients aligned with ``idx``.
    empty : bool ndarray, shape (m,)
        Targets that had no admissible atom at all.
    """
    D, N = X.shape
    cols = np.asarray(cols, dtype=np.intp)
    m = cols.size
    if keep is None:
        keep = np.ones(N, dtype=bool)
    kept = np.flatnonzero(keep)
    dropped = np.flatnonzero(~keep)
    K = kept.size
    XiT = np.ascontiguousarray((X * keep).T)  # dropped atoms are zero rows
    Xk = np.ascontiguousarray(X[:, kept])
    targets_T = np.ascontiguousarray(X[:, cols].T)  # (m, D)

    pos = np.full(N, -1, dtype=np.intp)
    pos[kept] = np.arange(K)
    # blocked kept positions per target: its own column, then its I-picks
    blk = np.full((m, s + 1), -1, dtype=np.intp)
    blk[:, 0] = pos[cols]
    left_i = K - (blk[:, 0] >= 0)

    use_c = consensus is not None and lam != 0.0
    if use_c:
        # the consensus is sparse; the penalty terms of the score vanish off its
        # support, where the score is exactly corr * corr
        nz_r, nz_n = np.nonzero(consensus) if support is None else support
        nz_k = pos[nz_n]
        on = nz_k >= 0
        nz_r, nz_k, cval = nz_r[on], nz_k[on], consensus[nz_r[on], nz_n[on]]
        use_c = nz_r.size > 0
        # same operation order as consensus.psi_score, so ties resolve identically
        c_2l = 2.0 * lam * cval
        c_sq = lam * (cval * cval)
    if union:
        dpos = np.full(N, -1, dtype=np.intp)
        dpos[dropped] = np.arange(dropped.size)
        blocked_j = np.zeros((m, dropped.size), dtype=bool)
        sp = dpos[cols]
        hj = sp >= 0
        blocked_j[np.flatnonzero(hj), sp[hj]] = True
        Cj = (np.abs(consensus[:, dropped]) if consensus is not None
              else np.zeros((m, dropped.size)))

    QT = targets_T.copy()  # residuals, one row per target
    idx = np.full((m, s), -1, dtype=np.intp)
    val = np.zeros((m, s))
    empty = left_i == 0
    if union:
        left_j = (~blocked_j).sum(axis=1)
        empty &= left_j == 0
    active = (np.linalg.norm(QT, axis=1) > eps) & ~empty
    corr_buf = np.empty((m, K))
    score_buf = np.empty((m, K))
    rowmap = np.full(m, -1, dtype=np.intp)

    for k in range(s):
        a = np.flatnonzero(active)
        if a.size == 0:
            break
        ar = np.arange(a.size)
        has_i = left_i[a] > 0
        if K:
            corr = corr_buf[: a.size]
            np.matmul(QT[a], Xk, out=corr)  # (|a|, K)
            score = score_buf[: a.size]
            np.multiply(corr, corr, out=score)
            rowmap[:] = -1
            rowmap[a] = ar
            if use_c:
                rl = rowmap[nz_r]
                ok = rl >= 0
                r_, k_ = rl[ok], nz_k[ok]
                score[r_, k_] = (score[r_, k_] + corr[r_, k_] * c_2l[ok]) - c_sq[ok]
            b_ = blk[a, : k + 1]
            okb = b_ >= 0
            score[np.broadcast_to(ar[:, None], b_.shape)[okb], b_[okb]] = -np.inf
            best = np.argmax(score, axis=1)
            picks = np.where(has_i, kept[best], -1)
        else:
            best = np.zeros(a.size, dtype=np.intp)
            picks = np.full(a.size, -1, dtype=np.intp)

        take_i = has_i
        if union:
            has_j = left_j[a] > 0
            if K:
                bc = corr[ar, best]
                cb = consensus[a, kept[best]] if consensus is not None else np.zeros(a.size)
                gain = lam * cb * cb - (bc + lam * cb) ** 2 / (1.0 + lam)
            else:
                gain = np.zeros(a.size)
            take_j = has_j & (~has_i | ~(gain < 0))
            if take_j.any():
                cj = np.where(blocked_j[a], -np.inf, Cj[a])
                jbest = np.argmax(cj, axis=1)
                picks = np.where(take_j, dropped[jbest], picks)
                jj = np.flatnonzero(take_j)
                blocked_j[a[jj], jbest[jj]] = True
                left_j[a[jj]] -= 1
            take_i = has_i & ~take_j

        ii = np.flatnonzero(take_i)
        blk[a[ii], k + 1] = best[ii]
        left_i[a[ii]] -= 1
        stalled = picks < 0
        if stalled.any():
            active[a[stalled]] = False
            a, picks = a[~stalled], picks[~stalled]
            if a.size == 0:
                break
        idx[a, k] = picks

        S = idx[a, : k + 1]
        XS = XiT[S]  # (|a|, k+1, D)
        G = XS @ XS.transpose(0, 2, 1)
        tg = targets_T[a]
        rhs = np.einsum("akd,ad->ak", XS, tg)
        if lam != 0.0:
            G += lam * np.eye(k + 1)
            if consensus is not None:
                rhs += lam * consensus[a[:, None], S]
        b = _stacked_solve(G, rhs)
        val[a, : k + 1] = b
        QT[a] = tg - np.einsum("akd,ak->ad", XS, b)
        active[a] &= np.linalg.norm(QT[a], axis=1) > eps

    return idx, val, empty
