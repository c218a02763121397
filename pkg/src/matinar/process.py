"""MAT-INAR(p) model parameters, simulation and moments.

A series is stored as an integer array of shape ``(T, m, n)`` with time on
the first axis.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import companion, kron, spectral_radius, transformation_matrix, unvec, vec


class NonStationaryError(ValueError):
    """Raised when a simulation is requested for parameters with ρ(𝒜) ≥ 1."""


@dataclass
class ModelParams:
    """Coefficients of a MAT-INAR(p) model.

    Attributes
    ----------
    A : list of ndarray
        Left (row) coefficient matrices, each m×m.
    B : list of ndarray
        Right (column) coefficient matrices, each n×n.
    Lambda : ndarray
        Innovation mean, m×n.
    """

    A: list
    B: list
    Lambda: np.ndarray

    def __post_init__(self):
        self.A = [np.array(a, dtype=float) for a in self.A]
        self.B = [np.array(b, dtype=float) for b in self.B]
        self.Lambda = np.array(self.Lambda, dtype=float)
        if len(self.A) == 0 or len(self.A) != len(self.B):
            raise ValueError("A and B must be non-empty lists of equal length")
        if self.Lambda.ndim != 2:
            raise ValueError("Lambda must be a 2-d matrix")
        m, n = self.Lambda.shape
        for l, (a, b) in enumerate(zip(self.A, self.B), start=1):
            if a.shape != (m, m):
                raise ValueError(f"A_{l} has shape {a.shape}, expected {(m, m)}")
            if b.shape != (n, n):
                raise ValueError(f"B_{l} has shape {b.shape}, expected {(n, n)}")

    @property
    def m(self):
        return self.Lambda.shape[0]

    @property
    def n(self):
        return self.Lambda.shape[1]

    @property
    def p(self):
        return len(self.A)

    @property
    def Phi(self):
        """Vectorized-model coefficients ``B_l ⊗ A_l``."""
        return [kron(b, a) for a, b in zip(self.A, self.B)]

    def companion(self):
        return companion(self.A, self.B)

    def validate(self, unit_norm=True, atol=1e-8):
        """Check the constraints needed for simulation.

        Probabilities must lie in [0, 1], Λ must be positive and, when
        ``unit_norm`` is set, every ``A_l`` must have unit Frobenius norm.
        """
        for l, (a, b) in enumerate(zip(self.A, self.B), start=1):
            if np.any(a < 0) or np.any(a > 1) or np.any(b < 0) or np.any(b > 1):
                raise ValueError(f"A_{l} and B_{l} entries must lie in [0, 1]")
            if unit_norm and abs(np.linalg.norm(a) - 1.0) > atol:
                raise ValueError(f"A_{l} must have unit Frobenius norm")
        if np.any(self.Lambda <= 0):
            raise ValueError("Lambda entries must be positive")

    def normalized(self):
        """Gauge-fixed copy with ``||A_l||_F = 1`` and B rescaled to compensate."""
        A, B = [], []
        for a, b in zip(self.A, self.B):
            c = np.linalg.norm(a)
            if c == 0:
                A.append(a.copy())
                B.append(b.copy())
            else:
                A.append(a / c)
                B.append(b * c)
        return ModelParams(A, B, self.Lambda.copy())

    def feasible(self, floor=1e-8):
        """Copy clamped into the parameter space (for simulation/forecasting).

        Entries of A and B are clipped to [0, 1], A is renormalized, B is
        clipped again and Λ is floored at ``floor``.
        """
        A, B = [], []
        for a, b in zip(self.A, self.B):
            a = np.clip(a, 0.0, 1.0)
            c = np.linalg.norm(a)
            if c > 0:
                a = a / c
                b = b * c
            A.append(a)
            B.append(np.clip(b, 0.0, 1.0))
        return ModelParams(A, B, np.maximum(self.Lambda, floor))

    def to_dict(self):
        return {
            "m": self.m,
            "n": self.n,
            "p": self.p,
            "A": [a.tolist() for a in self.A],
            "B": [b.tolist() for b in self.B],
            "Lambda": self.Lambda.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        params = cls(d["A"], d["B"], d["Lambda"])
        for key in ("m", "n", "p"):
            if key in d and int(d[key]) != getattr(params, key):
                raise ValueError(f"declared {key}={d[key]} disagrees with the matrices")
        return params


@dataclass
class PoissonInnovations:
    """Independent Poisson entries with means ``Lambda``."""

    Lambda: np.ndarray

    def __post_init__(self):
        self.Lambda = np.asarray(self.Lambda, dtype=float)

    @property
    def mean(self):
        return self.Lambda

    def __call__(self, rng, size):
        return rng.poisson(self.Lambda, size=(size,) + self.Lambda.shape)


@dataclass
class TableInnovations:
    """Innovations drawn from a finite table of integer matrices.

    Lets users plug in dependent innovations: each entry of ``support`` is an
    m×n nonnegative integer matrix, drawn with probability ``probs``.
    """

    support: np.ndarray
    probs: np.ndarray = field(default=None)

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=np.int64)
        if self.support.ndim != 3 or np.any(self.support < 0):
            raise ValueError("support must be a stack of nonnegative integer matrices")
        k = self.support.shape[0]
        if self.probs is None:
            self.probs = np.full(k, 1.0 / k)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (k,) or np.any(self.probs < 0):
            raise ValueError("probs must be a nonnegative vector matching support")
        if not np.isclose(self.probs.sum(), 1.0):
            raise ValueError("probs must sum to one")

    @property
    def mean(self):
        return np.tensordot(self.probs, self.support, axes=1)

    def __call__(self, rng, size):
        idx = rng.choice(self.support.shape[0], size=size, p=self.probs)
        return self.support[idx]


def check_stationary(params):
    """Spectral radius of the companion matrix and whether it is below one."""
    radius = spectral_radius(params.companion())
    return {"radius": radius, "stationary": radius < 1.0}


def simulate(params, T, burn_in=500, seed=None, innovations=None, force=False):
    """Simulate ``Y_t = sum_l A_l ∘_L Y_{t-l} ∘_R B_lᵀ + ε_t``.

    The recursion starts from zero matrices and the first ``burn_in`` draws
    are discarded. Each lag contributes a left thinning followed by a right
    thinning, with fresh counting series at every step.

    Parameters
    ----------
    params : ModelParams
    T : int
        Number of matrices returned.
    burn_in : int
    seed : int, SeedSequence or Generator, optional
    innovations : callable, optional
        ``innovations(rng, size)`` returning ``(size, m, n)`` counts. Defaults
        to independent Poisson with mean ``params.Lambda``.
    force : bool
        Simulate even when ρ(𝒜) ≥ 1.

    Returns
    -------
    ndarray of int64, shape (T, m, n)
    """
    if T < 1 or burn_in < 0:
        raise ValueError("need T >= 1 and burn_in >= 0")
    params.validate(unit_norm=False)
    if not force:
        info = check_stationary(params)
        if not info["stationary"]:
            raise NonStationaryError(
                f"spectral radius {info['radius']:.6g} >= 1; pass force=True to simulate anyway"
            )
    rng = np.random.default_rng(seed)
    sampler = innovations if innovations is not None else PoissonInnovations(params.Lambda)

    m, n, p = params.m, params.n, params.p
    total = T + burn_in
    eps = np.asarray(sampler(rng, total), dtype=np.int64)
    if eps.shape != (total, m, n):
        raise ValueError(f"innovation sampler returned shape {eps.shape}")
    A = [a[:, :, None] for a in params.A]
    Bt = [b.T[None, :, :] for b in params.B]

    Y = np.zeros((total, m, n), dtype=np.int64)
    for t in range(total):
        acc = eps[t].copy()
        for l in range(min(p, t)):
            prev = Y[t - l - 1]
            if not prev.any():
                continue
            z = rng.binomial(prev[None, :, :], A[l]).sum(axis=1)
            acc += rng.binomial(z[:, :, None], Bt[l]).sum(axis=1)
        Y[t] = acc
    return Y[burn_in:]


def conditional_mean(params, history):
    """``E(Y_t | past) = sum_l A_l Y_{t-l} B_lᵀ + Λ``.

    ``history`` is ordered in time; its last element is ``Y_{t-1}``.
    """
    history = np.asarray(history, dtype=float)
    if history.ndim != 3 or history.shape[0] < params.p:
        raise ValueError(f"need at least p={params.p} past matrices")
    out = params.Lambda.copy()
    for l in range(1, params.p + 1):
        out += params.A[l - 1] @ history[-l] @ params.B[l - 1].T
    return out


def stationary_mean(params):
    """Solve ``(I - sum_l B_l ⊗ A_l) vec(μ) = vec(Λ)``."""
    k = params.m * params.n
    M = np.eye(k) - sum(params.Phi)
    try:
        mu = np.linalg.solve(M, vec(params.Lambda))
    except np.linalg.LinAlgError as exc:
        raise ValueError("mean equation is singular; parameters are not stationary") from exc
    return unvec(mu, params.m, params.n)


def _as_series(series):
    Y = np.asarray(series, dtype=float)
    if Y.ndim != 3:
        raise ValueError("series must have shape (T, m, n)")
    return Y


def empirical_autocov_kron(series, h):
    """Sample ``Γ_h⊗``: the average of ``(Y_{t+h} - Ȳ) ⊗ (Y_t - Ȳ)ᵀ``.

    The mean is taken over the whole series; the sum runs over the
    ``T - |h|`` available pairs and is divided by ``T - |h|``.
    """
    Y = _as_series(series)
    T, m, n = Y.shape
    if abs(h) >= T:
        raise ValueError(f"lag {h} needs more than {T} observations")
    D = Y - Y.mean(axis=0)
    if h >= 0:
        lead, base = D[h:], D[:T - h]
    else:
        lead, base = D[:T + h], D[-h:]
    # kron(X, Zᵀ)[i*n + k, j*m + l] = X[i, j] * Z[l, k]
    G = np.einsum("tij,tlk->ikjl", lead, base) / (T - abs(h))
    return G.reshape(m * n, n * m)


def column_row_autocov(series, h):
    """Column-wise ``𝒯 Γ_h⊗`` and row-wise ``Γ_h⊗ 𝒯`` autocovariances."""
    Y = _as_series(series)
    G = empirical_autocov_kron(Y, h)
    Tm = transformation_matrix(Y.shape[1], Y.shape[2])
    return {"Sigma_c": Tm @ G, "Sigma_r": G @ Tm}


def cross_acf(series, max_lag):
    """Cross-autocorrelations of the vectorized series for lags 0..max_lag.

    Entry ``[h, a, b]`` is the lag-h sample covariance of components ``a``
    (at time t+h) and ``b`` (at time t) of ``vec(Y_t)``, divided by the two
    sample standard deviations. Lagged sums are divided by T, not T - h,
    which keeps every value inside [-1, 1].
    """
    Y = _as_series(series)
    T = Y.shape[0]
    if max_lag >= T or max_lag < 0:
        raise ValueError("max_lag must lie in [0, T)")
    X = vectorize_series(Y)
    X = X - X.mean(axis=0)
    sd = np.sqrt((X ** 2).mean(axis=0))
    if np.any(sd == 0):
        raise ValueError("a component of the series has zero variance")
    out = np.empty((max_lag + 1, X.shape[1], X.shape[1]))
    for h in range(max_lag + 1):
        C = X[h:].T @ X[:T - h] / T
        out[h] = C / np.outer(sd, sd)
    return out


def vectorize_series(series):
    """Rows ``vec(Y_t)`` for every t, shape ``(T, m*n)``."""
    Y = np.asarray(series)
    return Y.transpose(0, 2, 1).reshape(Y.shape[0], -1)
