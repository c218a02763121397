"""Binomial thinning and its left/right matricial versions.

Every call draws a fresh counting series from the supplied generator, so
repeated applications are independent. The matrix operators also accept a
stack of count matrices with leading batch axes; each matrix in the stack
is thinned independently. Binomial draws come from
``numpy.random.Generator.binomial`` which is exact and seed-deterministic.
"""

import numpy as np


def _check_prob(P, name):
    P = np.asarray(P, dtype=float)
    if np.any(~np.isfinite(P)) or np.any(P < 0.0) or np.any(P > 1.0):
        raise ValueError(f"{name} must have entries in [0, 1]")
    return P


def _check_counts(Y):
    Y = np.asarray(Y)
    if Y.ndim < 2:
        raise ValueError("count matrix must be at least 2-d")
    if np.any(Y < 0) or np.any(Y != np.floor(Y)):
        raise ValueError("count matrix must hold nonnegative integers")
    return Y.astype(np.int64)


def binomial_thin(a, y, rng):
    """``a ∘ y``: the number of successes among ``y`` Bernoulli(a) trials."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"thinning probability {a} outside [0, 1]")
    if y < 0 or int(y) != y:
        raise ValueError(f"count {y} must be a nonnegative integer")
    return int(rng.binomial(int(y), a))


def left_thin(A, Y, rng):
    """``A ∘_L Y`` with entry (i, j) equal to ``sum_k a[i,k] ∘ y[k,j]``."""
    A = _check_prob(A, "A")
    Y = _check_counts(Y)
    m = Y.shape[-2]
    if A.shape != (m, m):
        raise ValueError(f"A has shape {A.shape}, expected {(m, m)}")
    # draws[..., i, k, j] ~ Bin(y[..., k, j], a[i, k])
    return rng.binomial(Y[..., None, :, :], A[:, :, None]).sum(axis=-2)


def right_thin(Y, B, rng):
    """``Y ∘_R B`` with entry (i, j) equal to ``sum_k b[k,j] ∘ y[i,k]``.

    The conditional mean is ``Y @ B``, so ``right_thin(Y, B.T)`` has mean
    ``Y @ B.T`` as the vectorized model requires.
    """
    B = _check_prob(B, "B")
    Y = _check_counts(Y)
    n = Y.shape[-1]
    if B.shape != (n, n):
        raise ValueError(f"B has shape {B.shape}, expected {(n, n)}")
    # draws[..., i, k, j] ~ Bin(y[..., i, k], b[k, j])
    return rng.binomial(Y[..., :, :, None], B).sum(axis=-2)


def matrix_thin(A, Y, B, rng):
    """``A ∘_L Y ∘_R Bᵀ``: left thinning followed by right thinning with ``Bᵀ``."""
    return right_thin(left_thin(A, Y, rng), np.asarray(B).T, rng)


def kron_thin(Phi, y, rng):
    """``Phi ∘ y`` for a count vector, one independent series per (row, col) pair."""
    Phi = _check_prob(Phi, "Phi")
    y = np.asarray(y)
    if y.ndim != 1 or np.any(y < 0) or np.any(y != np.floor(y)):
        raise ValueError("y must be a 1-d nonnegative integer vector")
    if Phi.shape != (y.size, y.size):
        raise ValueError(f"Phi has shape {Phi.shape}, expected {(y.size,) * 2}")
    return rng.binomial(y.astype(np.int64)[None, :], Phi).sum(axis=1)
