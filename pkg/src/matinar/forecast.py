"""Forecasting by iterated conditional expectation, error metrics and
residual whiteness tests."""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .process import conditional_mean, vectorize_series


@dataclass
class ForecastPath:
    origin: int
    horizon: int
    mean: np.ndarray  # (H, m, n)

    def rounded(self, mode="nearest"):
        if mode == "nearest":
            return np.rint(self.mean).astype(np.int64)
        if mode == "floor":
            return np.floor(self.mean).astype(np.int64)
        raise ValueError(f"unknown rounding mode {mode!r}")


def forecast(params, history, H):
    """h-step conditional-mean forecasts for h = 1..H.

    Lags that fall before the forecast origin use observed values, later
    ones use the previous forecasts.
    """
    history = np.asarray(history, dtype=float)
    p = params.p
    if history.ndim != 3 or history.shape[0] < p:
        raise ValueError(f"need at least p={p} past matrices")
    if H < 1:
        raise ValueError("horizon must be at least 1")
    window = list(history[-p:])
    out = np.empty((H,) + params.Lambda.shape)
    for h in range(H):
        out[h] = conditional_mean(params, np.array(window[-p:]))
        window.append(out[h])
    return ForecastPath(origin=history.shape[0], horizon=H, mean=out)


def mrss(params, series):
    """Mean (unsquared) Frobenius norm of one-step residuals.

    The sum runs over t = p+1..T and is divided by T.
    """
    Y = np.asarray(series, dtype=float)
    T = Y.shape[0]
    p = params.p
    if T <= p:
        raise ValueError("series must be longer than the model order")
    fitted = np.broadcast_to(params.Lambda, Y[p:].shape).copy()
    for l in range(1, p + 1):
        fitted += params.A[l - 1] @ Y[p - l:T - l] @ params.B[l - 1].T
    norms = np.sqrt(((Y[p:] - fitted) ** 2).sum(axis=(1, 2)))
    return float(norms.sum() / T)


def prediction_errors(params, series, origin, H):
    """Frobenius norms ``||Ŷ_origin(h) - Y_{origin+h}||`` for h = 1..H.

    ``origin`` counts observations, so the forecasts condition on
    ``series[:origin]`` and are compared with ``series[origin:origin+H]``.
    """
    Y = np.asarray(series, dtype=float)
    if origin < params.p:
        raise ValueError("forecast origin leaves fewer than p observations")
    if origin + H > Y.shape[0]:
        raise ValueError(f"horizon {H} from origin {origin} exceeds {Y.shape[0]} observations")
    path = forecast(params, Y[:origin], H)
    return np.sqrt(((path.mean - Y[origin:origin + H]) ** 2).sum(axis=(1, 2)))


def mspe(params, series, origin, H):
    """Average out-of-sample prediction-error norm over h = 1..H."""
    return float(prediction_errors(params, series, origin, H).mean())


def cmpe(params, series, origin, H):
    """Running means ``CMPE_S`` of the prediction-error norms, S = 1..H."""
    e = prediction_errors(params, series, origin, H)
    return np.cumsum(e) / np.arange(1, H + 1)


def _autocov(U, h):
    T = U.shape[0]
    return U[h:].T @ U[:T - h] / T


def portmanteau(residuals, max_lag=24, dof_adjust=0):
    """Hosking's multivariate portmanteau statistic for delays 1..max_lag.

    ``Q(K) = T² Σ_{h≤K} tr(Ĉ_hᵀ Ĉ_0⁻¹ Ĉ_h Ĉ_0⁻¹) / (T - h)`` compared with a
    chi-square on ``k² K - dof_adjust`` degrees of freedom, ``k`` being the
    residual dimension.

    Parameters
    ----------
    residuals : array, shape (T, k) or (T, m, n)
        Matrix residuals are vectorized column-wise first.
    max_lag : int
    dof_adjust : int
        Number of estimated coefficients to subtract from the degrees of
        freedom (0 leaves them unadjusted).

    Returns
    -------
    dict with arrays ``lag``, ``stat``, ``df`` and ``p_value``.
    """
    U = np.asarray(residuals, dtype=float)
    if U.ndim == 3:
        U = vectorize_series(U)
    T, k = U.shape
    if max_lag < 1 or max_lag >= T:
        raise ValueError("max_lag must lie in [1, T)")
    U = U - U.mean(axis=0)
    C0 = _autocov(U, 0)
    if np.linalg.cond(C0) > 1e12:
        raise np.linalg.LinAlgError("residual covariance is singular")
    C0_inv = np.linalg.inv(C0)
    lags = np.arange(1, max_lag + 1)
    terms = np.empty(max_lag)
    for i, h in enumerate(lags):
        Ch = _autocov(U, h)
        terms[i] = np.trace(Ch.T @ C0_inv @ Ch @ C0_inv) / (T - h)
    stat = T * T * np.cumsum(terms)
    df = k * k * lags - dof_adjust
    p_value = np.where(df > 0, stats.chi2.sf(stat, np.maximum(df, 1)), np.nan)
    return {"lag": lags, "stat": stat, "df": df, "p_value": p_value, "test": "hosking"}


def diagnostics(params, series, residuals, origin=None, H=None, max_lag=24, test="adjusted"):
    """Bundle MRSS, optional MSPE/CMPE and the portmanteau table.

    ``test="adjusted"`` (default) uses :func:`adjusted_portmanteau`, which
    needs the in-sample series; ``test="hosking"`` uses the raw statistic.
    """
    Y = np.asarray(series) if origin is None else np.asarray(series)[:origin]
    report = {"mrss": mrss(params, Y)}
    if origin is not None and H is not None:
        curve = cmpe(params, series, origin, H)
        report["cmpe"] = curve
        report["mspe"] = float(curve[-1])
    lag = min(max_lag, np.asarray(residuals).shape[0] - 1)
    if test == "adjusted":
        report["portmanteau"] = adjusted_portmanteau(params, Y, residuals, max_lag=lag)
    elif test == "hosking":
        report["portmanteau"] = portmanteau(residuals, max_lag=lag)
    else:
        raise ValueError(f"unknown portmanteau test {test!r}")
    return report


def _inv_sqrt_psd(C):
    w, V = np.linalg.eigh(C)
    if w[0] <= w[-1] * 1e-12:
        raise np.linalg.LinAlgError("residual covariance is singular")
    return (V / np.sqrt(w)) @ V.T


def adjusted_portmanteau(params, series, residuals=None, max_lag=24):
    """Portmanteau test that accounts for estimation and heteroscedasticity.

    Uses the same statistic as :func:`portmanteau`. Its null law is
    approximated by a scaled chi-square whose first two moments match the
    weighted sum of chi-squares implied by the asymptotic covariance of the
    residual autocovariances. That covariance comes from the per-time
    influence terms ``vec(û_t û_{t-h}ᵀ) - G_h Q⁻¹ P_t û_t``, where ``P_t``
    is the Jacobian of the conditional mean and ``Q`` the least-squares
    information with the scale constraint on each ``A_l``.

    For i.i.d. homoscedastic errors and no estimation effect the reference
    law reduces asymptotically to the chi-square of Hosking's test.
    """
    from .icls import jacobians, information_matrix

    Y = np.asarray(series, dtype=float)
    p = params.p
    if residuals is None:
        T = Y.shape[0]
        fitted = np.broadcast_to(params.Lambda, Y[p:].shape).copy()
        for l in range(1, p + 1):
            fitted += params.A[l - 1] @ Y[p - l:T - l] @ params.B[l - 1].T
        residuals = Y[p:] - fitted
    U = vectorize_series(np.asarray(residuals, dtype=float))
    N, k = U.shape
    if max_lag < 1 or max_lag >= N:
        raise ValueError("max_lag must lie in [1, T - p)")
    J = jacobians(params, Y)
    if J.shape[0] != N:
        raise ValueError("residuals do not match the series and model order")
    Qinv = np.linalg.inv(information_matrix(params, J))
    # influence of the parameter estimate on each time point
    infl = np.einsum("tka,tk->ta", J, U) @ Qinv  # rows (Q⁻¹ P_t û_t)ᵀ

    C0 = U.T @ U / N
    R = _inv_sqrt_psd(C0)
    Wh = np.kron(R, R)  # (C0^{-1/2} ⊗ C0^{-1/2})
    lags = np.arange(1, max_lag + 1)
    psi = np.zeros((N, max_lag, k * k))
    stat_terms = np.empty(max_lag)
    for i, h in enumerate(lags):
        a = np.zeros((N, k * k))
        a[h:] = np.einsum("tb,ta->tba", U[:N - h], U[h:]).reshape(N - h, k * k)
        G = np.einsum("tb,tad->bad", U[:N - h], J[h:]).reshape(k * k, -1) / N
        c = a.sum(axis=0) / N
        z = Wh @ c
        stat_terms[i] = z @ z / (N - h)
        w = np.sqrt(N / (N - h))
        psi[:, i, :] = w * ((a - infl @ G.T) @ Wh.T)
    stat = N * N * np.cumsum(stat_terms)

    psi = psi.reshape(N, -1)
    scale = np.empty(max_lag)
    df = np.empty(max_lag)
    p_value = np.empty(max_lag)
    for i in range(max_lag):
        P = psi[:, :(i + 1) * k * k]
        M = P.T @ P / N
        tr1 = np.trace(M)
        tr2 = np.sum(M * M)
        scale[i] = tr2 / tr1
        df[i] = tr1 * tr1 / tr2
        p_value[i] = stats.chi2.sf(stat[i] / scale[i], df[i])
    return {
        "lag": lags,
        "stat": stat,
        "df": df,
        "scale": scale,
        "p_value": p_value,
        "test": "hosking-adjusted",
    }
