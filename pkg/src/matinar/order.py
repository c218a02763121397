"""Autoregressive order selection with the IC1 criterion."""

from dataclasses import dataclass, field

import numpy as np

from .icls import icls_fit
from .proj import proj_fit

LOG_FLOOR = 1e-300


@dataclass
class OrderSelection:
    p_bar: int
    ic_values: np.ndarray
    p_hat: int
    method: str
    fits: list = field(default_factory=list, repr=False)
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {
            "p_bar": self.p_bar,
            "p_hat": self.p_hat,
            "method": self.method,
            "ic1": [float(v) for v in self.ic_values],
            "flags": self.flags,
        }

    def curve_rows(self):
        return [(k, float(v)) for k, v in enumerate(self.ic_values, start=1)]


def fit_order(series, p, method="icls", max_sweeps=500, tol=1e-9):
    """Point estimates at order ``p`` (no standard errors)."""
    if method == "proj":
        return proj_fit(series, p, se="none")
    if method == "icls":
        init = proj_fit(series, p, se="none")
        return icls_fit(series, p, init=init, max_sweeps=max_sweeps, tol=tol, se="none")
    raise ValueError(f"unknown method {method!r}")


def ic1_from_fit(fit, T):
    """IC1 for an already fitted model; returns ``(value, clamped)``.

    The residual sum covers t = p+1..T but is divided by T.
    """
    rss = fit.rss()
    clamped = rss / T < LOG_FLOOR
    return float(np.log(max(rss / T, LOG_FLOOR)) + fit.p * np.log(T) / T), clamped


def ic1(series, p_tilde, method="icls", **fit_kw):
    """``log(RSS(p̃)/T) + p̃ log(T)/T`` with the model fitted at order ``p̃``."""
    Y = np.asarray(series, dtype=float)
    T, m, n = Y.shape
    if T <= p_tilde * m * n + 1:
        raise ValueError(f"T={T} too small for order {p_tilde} with mn={m * n}")
    value, _ = ic1_from_fit(fit_order(Y, p_tilde, method, **fit_kw), T)
    return value


def select_order(series, p_bar, method="icls", keep_fits=False, **fit_kw):
    """Minimize IC1 over orders 1..p_bar; ties go to the smaller order."""
    if p_bar < 1:
        raise ValueError("p_bar must be at least 1")
    Y = np.asarray(series, dtype=float)
    T, m, n = Y.shape
    if T <= p_bar * m * n + 1:
        raise ValueError(f"T={T} too small for p_bar={p_bar} with mn={m * n}")
    values, fits, flags = [], [], []
    for k in range(1, p_bar + 1):
        fit = fit_order(Y, k, method, **fit_kw)
        v, clamped = ic1_from_fit(fit, T)
        if clamped:
            flags.append(f"p={k}: residual sum clamped before log")
        values.append(v)
        if keep_fits:
            fits.append(fit)
    values = np.array(values)
    p_hat = int(np.argmin(values)) + 1  # argmin returns the first minimum
    return OrderSelection(p_bar, values, p_hat, method, fits, flags)
