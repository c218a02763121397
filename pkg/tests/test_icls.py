import numpy as np
import pytest

from matinar.icls import icls_fit, icls_objective, icls_standard_errors, jacobians
from matinar.linalg import kron, vec
from matinar.process import ModelParams, simulate
from matinar.proj import proj_fit


def _rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _noiseless_series(T=60):
    A = _rot(0.7) / np.sqrt(2)
    B = _rot(1.9) * np.sqrt(2)
    Lam = np.array([[1.0, -0.5], [0.3, 2.0]])
    Y = np.zeros((T, 2, 2))
    Y[0] = [[3.0, 1.0], [-2.0, 4.0]]
    for t in range(1, T):
        Y[t] = A @ Y[t - 1] @ B.T + Lam
    return ModelParams([A], [B], Lam), Y


def test_noiseless_recovery():
    truth, Y = _noiseless_series()
    init = ModelParams([truth.A[0] + 0.05], [truth.B[0] - 0.05], truth.Lambda + 0.1)
    fit = icls_fit(Y, 1, init=init, se="none")
    assert fit.info["converged"]
    assert fit.info["objective_trace"][-1] < 1e-12 * np.sum(Y ** 2)
    np.testing.assert_allclose(kron(fit.params.B[0], fit.params.A[0]), truth.Phi[0], atol=1e-8)
    np.testing.assert_allclose(fit.params.Lambda, truth.Lambda, atol=1e-8)


def test_objective_examples(params_a):
    truth, Y = _noiseless_series()
    assert icls_objective(truth, Y) < 1e-20
    Yi = simulate(params_a, 50, seed=1)
    P = params_a
    Q = ModelParams([P.A[0] / 3.0], [P.B[0] * 3.0], P.Lambda)
    assert icls_objective(Q, Yi) == pytest.approx(icls_objective(P, Yi), rel=1e-12)
    # scalar hand sum: y = (1, 2, 4, 3), a*b = 0.5, lambda = 1
    S = ModelParams([[[1.0]]], [[[0.5]]], [[1.0]])
    y = np.array([1.0, 2.0, 4.0, 3.0]).reshape(4, 1, 1)
    hand = (2 - 1.5) ** 2 + (4 - 2.0) ** 2 + (3 - 3.0) ** 2
    assert icls_objective(S, y) == pytest.approx(hand)


def test_monotone_trace_and_normalization(params_a):
    for seed in range(10):
        Y = simulate(params_a, 200, seed=seed)
        fit = icls_fit(Y, 1)
        tr = np.array(fit.info["objective_trace"])
        assert np.all(np.diff(tr) <= 1e-12 * tr[:-1])
        assert fit.info["converged"]
        assert np.linalg.norm(fit.params.A[0]) == pytest.approx(1.0, abs=1e-12)
        assert icls_objective(fit.params, Y) == pytest.approx(tr[-1], rel=1e-10)


def test_order_two_fit():
    A1 = np.array([[0.5, 0.2], [0.1, 0.6]])
    A2 = np.array([[0.3, 0.3], [0.2, 0.1]])
    P = ModelParams([A1 / np.linalg.norm(A1), A2 / np.linalg.norm(A2)],
                    [np.array([[0.4, 0.1], [0.1, 0.3]]), np.array([[0.2, 0.1], [0.0, 0.2]])],
                    np.ones((2, 2)))
    Y = simulate(P, 1500, seed=3)
    fit = icls_fit(Y, 2)
    tr = np.array(fit.info["objective_trace"])
    assert np.all(np.diff(tr) <= 1e-12 * tr[:-1])
    for l in range(2):
        assert np.abs(kron(fit.params.B[l], fit.params.A[l]) - P.Phi[l]).max() < 0.1


def test_gradient_conditions(params_a):
    Y = simulate(params_a, 500, seed=2).astype(float)
    fit = icls_fit(Y, 1, se="none")
    A, B, Lam = fit.params.A[0], fit.params.B[0], fit.params.Lambda
    R = fit.residuals
    L = Y[:-1]
    gA = np.einsum("tij,tkj->ik", R, L @ B.T)  # sum R (Y Bᵀ)ᵀ
    gB = np.einsum("tji,tjk->ik", R, A @ L)  # sum Rᵀ (A Y)
    gL = R.sum(axis=0)
    scale = np.abs(Y).sum()
    for g in (gA, gB, gL):
        assert np.abs(g).max() < 1e-6 * scale


def test_nonconvergence_flag(params_a):
    Y = simulate(params_a, 200, seed=4)
    fit = icls_fit(Y, 1, max_sweeps=2, se="none")
    assert not fit.info["converged"] and fit.info["sweeps"] == 2


def test_singular_gram_warning():
    rng = np.random.default_rng(0)
    Y = rng.poisson(2.0, size=(100, 2, 2))
    Y[:, 1, :] = 0  # a dead row makes the A-update Gram matrix singular
    with pytest.warns(RuntimeWarning):
        fit = icls_fit(Y, 1, init=ModelParams([np.eye(2) / np.sqrt(2)], [np.eye(2) * 0.3], np.ones((2, 2))),
                       max_sweeps=5, se="none")
    assert fit.info["warnings"]


def test_init_order_mismatch(params_a):
    with pytest.raises(ValueError):
        icls_fit(simulate(params_a, 100, seed=1), 2, init=params_a)


def test_jacobian_matches_finite_differences(params_a):
    Y = simulate(params_a, 20, seed=9).astype(float)
    J = jacobians(params_a, Y)
    A, B, Lam = params_a.A[0], params_a.B[0], params_a.Lambda
    theta = np.concatenate([vec(A), vec(B.T), vec(Lam)])

    def mean(th):
        a = th[:4].reshape(2, 2, order="F")
        bt = th[4:8].reshape(2, 2, order="F")
        lam = th[8:].reshape(2, 2, order="F")
        return np.stack([vec(a @ Y[t - 1] @ bt + lam) for t in range(1, 20)])

    eps = 1e-6
    for d in range(12):
        e = np.zeros(12)
        e[d] = eps
        fd = (mean(theta + e) - mean(theta - e)) / (2 * eps)
        np.testing.assert_allclose(J[:, :, d], fd, atol=1e-6)


def test_standard_errors_structure(params_a):
    Y = simulate(params_a, 600, seed=10)
    fit = icls_fit(Y, 1, se="none")
    for kind in ("sandwich", "pooled"):
        out = icls_standard_errors(fit.params, Y, fit.residuals, kind=kind)
        for key in ("Q", "M", "Xi"):
            np.testing.assert_allclose(out[key], out[key].T, atol=1e-10 * np.abs(out[key]).max())
        assert np.all(np.diag(out["Xi"]) >= 0)
    with pytest.raises(ValueError):
        icls_standard_errors(fit.params, Y, fit.residuals, kind="bogus")


def test_se_rate(params_a):
    se200 = np.mean([icls_fit(simulate(params_a, 200, seed=s), 1).se_A[0] for s in range(8)], axis=0)
    se1000 = np.mean([icls_fit(simulate(params_a, 1000, seed=s), 1).se_A[0] for s in range(8)], axis=0)
    np.testing.assert_allclose(se1000 / se200, np.sqrt(199 / 999), rtol=0.2)


def test_lambda_se_matches_monte_carlo_spread():
    """Reported Λ SEs match the Monte-Carlo SD of Λ̂.

    The Λ block of Ξ is an intercept variance, so it exceeds Cov(ε) by the
    usual regressor-mean term; the Monte-Carlo SD is the honest oracle.
    """
    lam = np.array([[2.0, 3.0], [1.5, 4.0]])
    A = np.array([[0.6, 0.3], [0.2, 0.7]])
    P = ModelParams([A / np.linalg.norm(A)], [np.array([[0.3, 0.1], [0.1, 0.3]])], lam)
    est, ses = [], []
    for r in range(200):
        fit = icls_fit(simulate(P, 500, seed=r), 1)
        est.append(fit.params.Lambda)
        ses.append(fit.se_Lambda)
    np.testing.assert_allclose(np.mean(ses, axis=0), np.std(est, axis=0, ddof=1), rtol=0.15)
