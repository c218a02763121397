"""Projection estimation.

Conditional least squares on the vectorized model, then each ``Φ̂_l`` is
projected onto the nearest Kronecker product ``B̂_l ⊗ Â_l`` with
``||Â_l||_F = 1``.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import rank1_svd, rearrange, rearrange_permutation, unvec
from .process import ModelParams, simulate, vectorize_series
from .results import FitResult


@dataclass
class ClsFit:
    """Unrestricted least-squares fit of the vectorized model.

    ``Psi`` stacks ``(Φ_1ᵀ; ...; Φ_pᵀ; vec(Λ)ᵀ)`` so that ``Yresp ≈ X @ Psi``.
    """

    Psi: np.ndarray
    Phi: list
    Lambda: np.ndarray
    residuals: np.ndarray
    X: np.ndarray
    Yresp: np.ndarray
    condition_number: float


def cls_design(series, p):
    """Regressor and response matrices for t = p+1..T.

    Row t of ``X`` is ``(vec(Y_{t-1})ᵀ, ..., vec(Y_{t-p})ᵀ, 1)`` and the
    matching row of ``Yresp`` is ``vec(Y_t)ᵀ``.
    """
    Y = np.asarray(series, dtype=float)
    if Y.ndim != 3:
        raise ValueError("series must have shape (T, m, n)")
    T = Y.shape[0]
    if p < 1:
        raise ValueError("order p must be at least 1")
    if T <= p:
        raise ValueError(f"series of length {T} is too short for order {p}")
    V = vectorize_series(Y)
    lags = [V[p - l:T - l] for l in range(1, p + 1)]
    X = np.hstack(lags + [np.ones((T - p, 1))])
    return X, V[p:]


def cls_fit(series, p):
    """Least-squares estimate of ``Ψ`` and the implied ``Φ̂_l``, ``Λ̂``.

    Residuals are returned as rows ``Û_tᵀ`` of shape ``(T - p, mn)``.
    """
    Y = np.asarray(series, dtype=float)
    m, n = Y.shape[1:]
    k = m * n
    X, Yresp = cls_design(Y, p)
    if X.shape[0] <= X.shape[1]:
        raise ValueError(
            f"{X.shape[0]} usable observations cannot identify {X.shape[1]} regressors"
        )
    Psi, _, rank, sv = np.linalg.lstsq(X, Yresp, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if rank < X.shape[1]:
        cond = float("inf")
    Phi = [Psi[l * k:(l + 1) * k].T.copy() for l in range(p)]
    Lambda = unvec(Psi[p * k], m, n)
    resid = Yresp - X @ Psi
    return ClsFit(Psi, Phi, Lambda, resid, X, Yresp, cond)


def nkp_project(Phi, m, n):
    """Nearest Kronecker product ``B ⊗ A`` to ``Phi`` in Frobenius norm.

    Returns ``(A, B)`` with ``vec(A) = u₁`` and ``vec(B) = σ₁ v₁`` from the
    leading singular triplet of the rearranged matrix, so ``||A||_F = 1``.
    """
    sigma, u, v = rank1_svd(rearrange(Phi, m, n))
    return unvec(u, m, m), unvec(sigma * v, n, n)


def proj_standard_errors(cls, T, p):
    """Plug-in asymptotic covariance of ``Ψ̂`` and entrywise SEs.

    ``Σ̂_U`` divides by ``T - mn - p`` and ``Ĥ`` by ``T - p``; the covariance
    of ``vec(Ψ̂)`` is ``Σ̂_U ⊗ Ĥ⁻¹ / (T - p)``.

    Returns
    -------
    dict with ``se_Phi`` (list of mn×mn), ``se_Lambda`` (m×n), ``Sigma_U``,
    ``H`` and ``H_inv``.
    """
    k = cls.Yresp.shape[1]
    m, n = cls.Lambda.shape
    N = T - p
    denom = T - k - p
    if denom <= 0:
        raise ValueError(f"T={T} too small for mn={k}, p={p}")
    U = cls.residuals
    Sigma_U = U.T @ U / denom
    H = cls.X.T @ cls.X / N
    try:
        H_inv = np.linalg.inv(H)
    except np.linalg.LinAlgError as exc:
        raise ValueError("regressor second-moment matrix is singular") from exc
    # Var(Psi[r, c]) = Sigma_U[c, c] * H_inv[r, r] / N
    var = np.outer(np.diag(H_inv), np.diag(Sigma_U)) / N
    se = np.sqrt(np.maximum(var, 0.0))
    se_Phi = [se[l * k:(l + 1) * k].T.copy() for l in range(p)]
    se_Lambda = unvec(se[p * k], m, n)
    return {"se_Phi": se_Phi, "se_Lambda": se_Lambda, "Sigma_U": Sigma_U, "H": H, "H_inv": H_inv}


def projection_cov(cls, A, B, l, Sigma_U, H_inv, N):
    """Delta-method covariance of ``(vec(Â_l), vec(B̂_l))``.

    The covariance of ``vec(Φ̂_lᵀ)`` is permuted into rearranged order and
    pushed through the derivative of the leading singular pair:
    ``d vec(A) = ||B||⁻¹ (β₁ᵀ ⊗ (I - ααᵀ)) d vec(Φ̃)`` and
    ``d vec(B) = (I ⊗ αᵀ) d vec(Φ̃)``.
    """
    m, n = A.shape[0], B.shape[0]
    k = m * n
    blk = slice(l * k, (l + 1) * k)
    cov_phiT = np.kron(Sigma_U, H_inv[blk, blk]) / N
    perm = rearrange_permutation(m, n)
    Xi = cov_phiT[np.ix_(perm, perm)]
    alpha = A.reshape(-1, order="F")
    beta = B.reshape(-1, order="F")
    bnorm = np.linalg.norm(beta)
    beta1 = beta / bnorm
    top = np.kron(beta1[None, :], np.eye(m * m) - np.outer(alpha, alpha)) / bnorm
    bottom = np.kron(np.eye(n * n), alpha[None, :])
    V0 = np.vstack([top, bottom])
    return V0 @ Xi @ V0.T


def proj_fit(series, p, se="delta", n_boot=200, seed=None):
    """Projection estimates with standard errors.

    Parameters
    ----------
    series : array (T, m, n)
    p : int
    se : {"delta", "bootstrap", "none"}
        How to get SEs for Â and B̂ (``"none"`` still reports Λ̂ SEs). ``"delta"`` linearizes the projection
        around the estimates; ``"bootstrap"`` refits ``n_boot`` series
        simulated from the clamped estimates.
    """
    Y = np.asarray(series, dtype=float)
    T, m, n = Y.shape
    cls = cls_fit(Y, p)
    A, B = [], []
    for Phi in cls.Phi:
        a, b = nkp_project(Phi, m, n)
        A.append(a)
        B.append(b)
    params = ModelParams(A, B, cls.Lambda)
    resid = _residuals(params, Y)
    info = {"condition_number": cls.condition_number, "se_method": se, "Phi_hat": cls.Phi}
    if se == "none":
        # Λ SEs are cheap; skip them only when the regressor moment matrix is singular
        try:
            ses = proj_standard_errors(cls, T, p)
        except ValueError:
            return FitResult("proj", params, None, None, np.full((m, n), np.nan), resid, info=info)
        return FitResult("proj", params, None, None, ses["se_Lambda"], resid,
                         se_Phi=ses["se_Phi"], info=info)
    ses = proj_standard_errors(cls, T, p)

    se_A = se_B = None
    if se == "delta":
        se_A, se_B = [], []
        for l in range(p):
            cov = projection_cov(cls, A[l], B[l], l, ses["Sigma_U"], ses["H_inv"], T - p)
            d = np.sqrt(np.maximum(np.diag(cov), 0.0))
            se_A.append(unvec(d[:m * m], m, m))
            se_B.append(unvec(d[m * m:], n, n))
    elif se == "bootstrap":
        se_A, se_B = bootstrap_se(params, T, p, n_boot=n_boot, seed=seed)
    else:
        raise ValueError(f"unknown se method {se!r}")

    return FitResult("proj", params, se_A, se_B, ses["se_Lambda"], resid,
                     se_Phi=ses["se_Phi"], info=info)


def bootstrap_se(params, T, p, n_boot=200, seed=None, burn_in=500):
    """Parametric-bootstrap SEs of the projected factors.

    Series are simulated from ``params.feasible()`` and refitted; the
    returned SEs are the across-replicate standard deviations.
    """
    if n_boot < 2:
        raise ValueError("need at least two bootstrap replicates")
    truth = params.feasible()
    m, n = truth.m, truth.n
    streams = np.random.SeedSequence(seed).spawn(n_boot)
    draws_A = np.empty((n_boot, p, m, m))
    draws_B = np.empty((n_boot, p, n, n))
    for r, ss in enumerate(streams):
        Y = simulate(truth, T, burn_in=burn_in, seed=ss, force=True)
        cls = cls_fit(Y, p)
        for l, Phi in enumerate(cls.Phi):
            draws_A[r, l], draws_B[r, l] = nkp_project(Phi, m, n)
    sd_A = draws_A.std(axis=0, ddof=1)
    sd_B = draws_B.std(axis=0, ddof=1)
    return list(sd_A), list(sd_B)


def _residuals(params, Y):
    p = params.p
    fitted = np.broadcast_to(params.Lambda, Y[p:].shape).copy()
    T = Y.shape[0]
    for l in range(1, p + 1):
        fitted += params.A[l - 1] @ Y[p - l:T - l] @ params.B[l - 1].T
    return Y[p:] - fitted
