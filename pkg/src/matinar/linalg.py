"""Dense matrix helpers and the structural operators used by MAT-INAR models.

Everything here works on plain ``numpy`` arrays. Vectorization is
column-major throughout, so ``vec(A @ Y @ B.T) == kron(B, A) @ vec(Y)``.
"""

import numpy as np


def vec(M):
    """Stack the columns of ``M`` into a 1-d array."""
    M = np.asarray(M)
    return M.reshape(-1, order="F")


def unvec(v, rows, cols):
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape vector of length {v.size} to {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def kron(B, A):
    """Kronecker product ``B ⊗ A`` (B is n×n, A is m×m for MAT-INAR blocks)."""
    return np.kron(np.asarray(B, dtype=float), np.asarray(A, dtype=float))


def rearrange(Phi, m, n):
    """Rearrange an ``mn×mn`` matrix so that Kronecker products become rank one.

    The m×m block of ``Phi`` at block position (i, j) is vectorized into
    column ``j*n + i`` (0-based) of the ``m²×n²`` output. With this layout
    ``rearrange(kron(B, A)) == outer(vec(A), vec(B))``.

    Parameters
    ----------
    Phi : ndarray, shape (m*n, m*n)
    m, n : int
        Sizes of the left (A) and right (B) factors.

    Returns
    -------
    ndarray, shape (m*m, n*n)
    """
    Phi = np.asarray(Phi, dtype=float)
    if Phi.shape != (m * n, m * n):
        raise ValueError(f"expected a {m * n}x{m * n} matrix, got {Phi.shape}")
    # blocks[i, a, j, b] = Phi[i*m + a, j*m + b]
    blocks = Phi.reshape(n, m, n, m)
    # out[a + b*m, i + j*n]
    return blocks.transpose(3, 1, 2, 0).reshape(m * m, n * n)


def unrearrange(R, m, n):
    """Inverse of :func:`rearrange`."""
    R = np.asarray(R, dtype=float)
    if R.shape != (m * m, n * n):
        raise ValueError(f"expected a {m * m}x{n * n} matrix, got {R.shape}")
    return R.reshape(m, m, n, n).transpose(3, 1, 2, 0).reshape(m * n, m * n)


def rearrange_permutation(m, n):
    """Index map taking ``vec(Phi.T)`` to ``vec(rearrange(Phi))``.

    ``vec(rearrange(Phi, m, n)) == vec(Phi.T)[rearrange_permutation(m, n)]``.
    Used to move covariance matrices between the regression ordering and
    the rank-one ordering.
    """
    k = m * n
    idx = np.arange(k * k).reshape(k, k, order="F")  # idx[r, c] = position of Phi.T[r, c]
    # Phi[i, j] is Phi.T[j, i]
    return vec(rearrange(idx.T.astype(float), m, n)).astype(int)


def transformation_matrix(m, n):
    """The ``mn×mn`` permutation that regroups Kronecker-arranged covariances.

    Row ``i`` (1-based), lying in row block ``s = (i-1)//m``, has its single
    one in column ``(s+1) + (i-s*m-1)*n``.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    T = np.zeros((m * n, m * n))
    for i in range(1, m * n + 1):
        s = (i - 1) // m
        j = (s + 1) + (i - s * m - 1) * n
        T[i - 1, j - 1] = 1.0
    return T


def companion(A, B):
    """Block companion matrix with first block row ``B_j ⊗ A_j``.

    Parameters
    ----------
    A, B : sequence of ndarray
        The ``p`` left (m×m) and right (n×n) coefficient matrices.
    """
    p = len(A)
    if p != len(B) or p == 0:
        raise ValueError("A and B must be non-empty lists of equal length")
    m = np.shape(A[0])[0]
    n = np.shape(B[0])[0]
    k = m * n
    C = np.zeros((k * p, k * p))
    for j in range(p):
        C[:k, j * k:(j + 1) * k] = kron(B[j], A[j])
    for i in range(1, p):
        C[i * k:(i + 1) * k, (i - 1) * k:i * k] = np.eye(k)
    return C


def spectral_radius(M, tol=1e-12, max_iter=10_000):
    """Largest eigenvalue modulus of a square matrix.

    Nonnegative matrices go through a shifted power iteration with
    Collatz-Wielandt bounds (the Perron root is real and dominant). Anything
    else, or a run that fails to bracket the root within ``max_iter`` steps,
    is handed to the dense eigensolver.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if np.any(M < 0):
        return float(np.max(np.abs(np.linalg.eigvals(M))))

    # rho(M + I) = rho(M) + 1 for nonnegative M, and the shift makes the
    # iteration aperiodic.
    S = M + np.eye(M.shape[0])
    x = np.ones(M.shape[0])
    for _ in range(max_iter):
        y = S @ x
        ratio = y / x
        lo, hi = ratio.min(), ratio.max()
        if hi - lo <= tol * hi:
            return float(max(0.5 * (lo + hi) - 1.0, 0.0))
        x = y / np.linalg.norm(y)
        if np.any(x < 1e-150):
            break
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def _fix_sign(u, v):
    s = u.sum()
    if s < 0 or (s == 0 and u[np.flatnonzero(u)[0]] < 0):
        return -u, -v
    return u, v


def rank1_svd(M, tol=1e-12, max_iter=10_000):
    """Leading singular triplet of ``M`` by power iteration on ``MᵀM``.

    The sign is fixed so that ``u`` has a nonnegative entry sum (first
    nonzero entry positive on a tie).

    Returns
    -------
    sigma : float
    u : ndarray, unit norm, length ``M.shape[0]``
    v : ndarray, unit norm, length ``M.shape[1]``
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("rank1_svd needs a 2-d array")
    scale = np.abs(M).max() if M.size else 0.0
    if scale == 0.0:
        raise ValueError("rank1_svd of a zero matrix is undefined")

    G = M.T @ M
    v = G[:, np.argmax(np.diag(G))].copy()
    v /= np.linalg.norm(v)
    converged = False
    for _ in range(max_iter):
        w = G @ v
        w /= np.linalg.norm(w)
        if np.linalg.norm(w - v) < tol:
            v = w
            converged = True
            break
        v = w
    if not converged:
        U, s, Vt = np.linalg.svd(M)
        u, v = _fix_sign(U[:, 0], Vt[0])
        return float(s[0]), u, v

    Mv = M @ v
    sigma = float(np.linalg.norm(Mv))
    u = Mv / sigma
    u, v = _fix_sign(u, v)
    return sigma, u, v
