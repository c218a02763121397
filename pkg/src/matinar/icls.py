"""Iterated conditional least squares (block coordinate descent).

Minimizes ``sum_t ||Y_t - sum_l A_l Y_{t-l} B_lᵀ - Λ||_F²`` by cycling
exact least-squares updates of A_1, B_1, ..., A_p, B_p and finally Λ.
Every update uses the most recent value of every other block, so the
objective can never increase.
"""

import warnings

import numpy as np

from .linalg import unvec
from .process import ModelParams
from .proj import proj_fit
from .results import FitResult

COND_LIMIT = 1e12


def _lagged(Y, p):
    T = Y.shape[0]
    return Y[p:], [Y[p - l:T - l] for l in range(1, p + 1)]


def icls_objective(params, series):
    """The least-squares criterion at ``params``."""
    Y = np.asarray(series, dtype=float)
    target, lags = _lagged(Y, params.p)
    R = target - params.Lambda
    for a, b, L in zip(params.A, params.B, lags):
        R = R - a @ L @ b.T
    return float(np.sum(R * R))


def _spread(Lam, N):
    """Λ repeated for every time point in the (m*N, n) layout."""
    m, n = Lam.shape
    return np.broadcast_to(Lam[:, None, :], (m, N, n)).reshape(m * N, n)


def _solve_gram(S, G, notes):
    """Return ``S @ G⁻¹`` for symmetric ``G``; pseudo-inverse when ill-conditioned."""
    ev = np.linalg.eigvalsh(G)
    if ev[0] <= ev[-1] / COND_LIMIT:
        notes.append("singular Gram matrix; used pseudo-inverse")
        return S @ np.linalg.pinv(G, rcond=1.0 / COND_LIMIT, hermitian=True)
    return np.linalg.solve(G, S.T).T


def icls_fit(series, p, init=None, max_sweeps=500, tol=1e-9, se="sandwich"):
    """ICLS estimates started from the projection estimates.

    Parameters
    ----------
    series : array (T, m, n)
    p : int
    init : ModelParams or FitResult, optional
        Starting point; defaults to the projection fit.
    max_sweeps : int
    tol : float
        Stop once the largest Frobenius change of any block between two
        sweeps falls below ``tol``.
    se : {"sandwich", "pooled", "none"}

    Returns
    -------
    FitResult
        ``info`` carries ``sweeps``, ``converged`` and ``objective_trace``
        (objective at the start and after every sweep).
    """
    Y = np.asarray(series, dtype=float)
    if init is None:
        init = proj_fit(Y, p, se="none")
    if isinstance(init, FitResult):
        init = init.params
    if init.p != p:
        raise ValueError(f"initial values have order {init.p}, expected {p}")
    init = init.normalized()

    m, n = init.m, init.n
    A = [a.copy() for a in init.A]
    B = [b.copy() for b in init.B]
    Lam = init.Lambda.copy()
    # (m, N, n) layout: left products are W2 = A @ W.reshape(m, N*n), right
    # products are W.reshape(m*N, n) @ B.T; both are single matmuls.
    target, lags = _lagged(Y, p)
    N = target.shape[0]
    tgt = np.ascontiguousarray(target.transpose(1, 0, 2))
    lags = [np.ascontiguousarray(L.transpose(1, 0, 2)) for L in lags]
    lags_wide = [L.reshape(m, N * n) for L in lags]
    lags_tall = [L.reshape(m * N, n) for L in lags]

    def contribution(l):
        return (A[l] @ lags_wide[l]).reshape(m * N, n) @ B[l].T

    F = [contribution(l) for l in range(p)]
    tgt_tall = tgt.reshape(m * N, n)
    total = sum(F) + _spread(Lam, N)

    def objective():
        R = tgt_tall - total
        return float(np.vdot(R, R))

    notes = []
    trace = [objective()]
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        old = [x.copy() for x in A + B] + [Lam.copy()]
        for l in range(p):
            R = tgt_tall - (total - F[l])
            C = (lags_tall[l] @ B[l].T).reshape(m, N * n)
            Rw = R.reshape(m, N * n)
            A[l] = _solve_gram(Rw @ C.T, C @ C.T, notes)
            D = (A[l] @ lags_wide[l]).reshape(m * N, n)
            B[l] = _solve_gram(R.T @ D, D.T @ D, notes)
            newF = D @ B[l].T
            total += newF - F[l]
            F[l] = newF
        resid_wo_lam = (tgt_tall - (total - _spread(Lam, N))).reshape(m, N, n)
        Lam = resid_wo_lam.mean(axis=1)
        total = sum(F) + _spread(Lam, N)
        for l in range(p):
            c = np.linalg.norm(A[l])
            if c > 0:
                A[l] /= c
                B[l] *= c
        trace.append(objective())
        new = A + B + [Lam]
        change = max(np.linalg.norm(x - y) for x, y in zip(new, old))
        if change < tol:
            converged = True
            break

    params = ModelParams(A, B, Lam)
    resid = (tgt_tall - total).reshape(m, N, n).transpose(1, 0, 2)
    if notes:
        warnings.warn(f"ICLS: {notes[0]} ({len(notes)} times)", RuntimeWarning)
    info = {
        "sweeps": sweeps,
        "converged": converged,
        "objective_trace": trace,
        "se_method": se,
        "warnings": sorted(set(notes)),
    }
    if se == "none":
        m, n = params.m, params.n
        nan = np.full((m, n), np.nan)
        return FitResult("icls", params, None, None, nan, resid, info=info)
    ses = icls_standard_errors(params, Y, resid, kind=se)
    return FitResult("icls", params, ses["se_A"], ses["se_B"], ses["se_Lambda"], resid, info=info)


def jacobians(params, series):
    """Per-time Jacobians of ``vec`` of the conditional mean, shape (T-p, mn, d).

    Parameter order is ``(vec A_1, vec B_1ᵀ, ..., vec A_p, vec B_pᵀ, vec Λ)``;
    the transpose on B follows from ``vec(A Y Bᵀ) = (I_n ⊗ A Y) vec(Bᵀ)``.
    """
    Y = np.asarray(series, dtype=float)
    m, n, p = params.m, params.n, params.p
    _, lags = _lagged(Y, p)
    N = lags[0].shape[0]
    Im, In = np.eye(m), np.eye(n)
    blocks = []
    for a, b, L in zip(params.A, params.B, lags):
        C = b @ L.transpose(0, 2, 1)  # B Yᵀ, n×m
        blocks.append(np.einsum("tjk,ab->tjakb", C, Im).reshape(N, n * m, m * m))
        D = a @ L  # A Y, m×n
        blocks.append(np.einsum("ik,tab->tiakb", In, D).reshape(N, n * m, n * n))
    blocks.append(np.broadcast_to(np.eye(m * n), (N, m * n, m * n)))
    return np.concatenate(blocks, axis=2)


def information_matrix(params, J):
    """``Q = mean(P_t P_tᵀ) + sum_l γ_l γ_lᵀ`` from stacked Jacobians ``J``."""
    m, n = params.m, params.n
    N, _, d = J.shape
    Q = np.einsum("tka,tkb->ab", J, J) / N
    offset = 0
    for a in params.A:
        g = np.zeros(d)
        g[offset:offset + m * m] = a.reshape(-1, order="F")
        Q += np.outer(g, g)
        offset += m * m + n * n
    return Q


def icls_standard_errors(params, series, residuals, kind="sandwich"):
    """Sandwich standard errors ``sqrt(diag(Q⁻¹ M Q⁻¹) / (T - p))``.

    ``Q`` is the average of ``P_t P_tᵀ`` plus ``γ_l γ_lᵀ`` for each lag,
    where ``γ_l`` carries ``vec(A_l)`` in the A_l slot and fixes the scale.
    ``M`` averages ``P_t û_t û_tᵀ P_tᵀ`` (``kind="sandwich"``) or
    ``P_t Σ̂_U P_tᵀ`` with the pooled residual covariance (``kind="pooled"``).
    """
    m, n, p = params.m, params.n, params.p
    J = jacobians(params, series)
    N = J.shape[0]
    U = np.asarray(residuals, dtype=float).transpose(0, 2, 1).reshape(N, m * n)
    Q = information_matrix(params, J)
    if kind == "sandwich":
        S = np.einsum("tka,tk->ta", J, U)
        M = S.T @ S / N
    elif kind == "pooled":
        Sigma = U.T @ U / N
        M = np.einsum("tka,kl,tlb->ab", J, Sigma, J) / N
    else:
        raise ValueError(f"unknown se kind {kind!r}")
    Qinv = np.linalg.inv(Q)
    Xi = Qinv @ M @ Qinv
    se = np.sqrt(np.maximum(np.diag(Xi), 0.0) / N)

    se_A, se_B = [], []
    offset = 0
    for _ in range(p):
        se_A.append(unvec(se[offset:offset + m * m], m, m))
        offset += m * m
        se_B.append(unvec(se[offset:offset + n * n], n, n).T)
        offset += n * n
    se_Lambda = unvec(se[offset:], m, n)
    return {"se_A": se_A, "se_B": se_B, "se_Lambda": se_Lambda, "Xi": Xi, "Q": Q, "M": M}
