import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matinar.thinning import binomial_thin, kron_thin, left_thin, matrix_thin, right_thin

N = 100_000


def test_binomial_thin_edges(rng):
    assert binomial_thin(0.0, 7, rng) == 0
    assert binomial_thin(1.0, 7, rng) == 7
    with pytest.raises(ValueError):
        binomial_thin(1.2, 3, rng)
    with pytest.raises(ValueError):
        binomial_thin(0.5, -1, rng)


def test_binomial_thin_moments():
    rng = np.random.default_rng(5)
    x = np.array([binomial_thin(0.5, 10, rng) for _ in range(N)])
    assert abs(x.mean() - 5.0) < 0.05
    assert abs(x.var() - 2.5) < 0.1


def test_identity_and_zero_operators(rng):
    Y = rng.integers(0, 20, size=(3, 2))
    np.testing.assert_array_equal(left_thin(np.eye(3), Y, rng), Y)
    np.testing.assert_array_equal(right_thin(Y, np.eye(2), rng), Y)
    np.testing.assert_array_equal(left_thin(np.zeros((3, 3)), Y, rng), 0)


def test_validation(rng):
    Y = np.ones((2, 3), dtype=int)
    with pytest.raises(ValueError):
        left_thin(np.full((2, 2), 1.5), Y, rng)
    with pytest.raises(ValueError):
        left_thin(np.eye(3), Y, rng)
    with pytest.raises(ValueError):
        right_thin(Y, np.eye(2), rng)
    with pytest.raises(ValueError):
        right_thin(-Y, np.eye(3), rng)
    with pytest.raises(ValueError):
        kron_thin(np.eye(2), np.array([1.5, 2.0]), rng)


def _batched_mean(op, draws, rng):
    """Mean and standard error of ``op`` over many independent applications."""
    samples = np.stack([op(rng) for _ in range(draws)])
    return samples.mean(axis=0), samples.std(axis=0, ddof=1) / np.sqrt(draws)


def test_left_thin_mean():
    rng = np.random.default_rng(11)
    A = rng.uniform(size=(3, 3))
    Y = rng.integers(0, 15, size=(3, 2))
    mean, se = _batched_mean(lambda r: left_thin(A, Y, r), 20_000, rng)
    assert np.all(np.abs(mean - A @ Y) <= 4 * se + 1e-12)


def test_right_thin_mean_is_y_times_b():
    rng = np.random.default_rng(12)
    B = rng.uniform(size=(3, 3))
    Y = rng.integers(0, 15, size=(2, 3))
    mean, se = _batched_mean(lambda r: right_thin(Y, B, r), 20_000, rng)
    assert np.all(np.abs(mean - Y @ B) <= 4 * se + 1e-12)


def test_left_thin_variance():
    # entries are sums of independent binomials: var = sum_k y_kj a_ik (1 - a_ik)
    rng = np.random.default_rng(13)
    A = np.array([[0.3, 0.6], [0.9, 0.1]])
    Y = np.array([[10, 4], [7, 12]])
    s = np.stack([left_thin(A, Y, rng) for _ in range(40_000)])
    expected = (A * (1 - A)) @ Y
    np.testing.assert_allclose(s.var(axis=0), expected, rtol=0.05)


def test_thinned_entries_bounded(rng):
    A, B = rng.uniform(size=(2, 2)), rng.uniform(size=(3, 3))
    Y = rng.integers(0, 30, size=(2, 3))
    bound = np.ones((2, 2)) @ Y @ np.ones((3, 3))
    for _ in range(200):
        Z = matrix_thin(A, Y, B, rng)
        assert Z.dtype.kind == "i" and np.all(Z >= 0) and np.all(Z <= bound)


def test_cascade_matches_single_binomial():
    rng = np.random.default_rng(3)
    y, a, b = 40, 0.7, 0.4
    cascade = rng.binomial(rng.binomial(y, a, size=N), b)
    direct = rng.binomial(y, a * b, size=N)
    for sample in (cascade, direct):
        assert abs(sample.mean() - a * b * y) < 4 * np.sqrt(a * b * (1 - a * b) * y / N)
        assert sample.var() == pytest.approx(a * b * (1 - a * b) * y, rel=0.03)


@given(st.integers(0, 2**32 - 1))
def test_seed_determinism(seed):
    A = np.array([[0.2, 0.7], [0.5, 0.5]])
    B = np.array([[0.1, 0.8, 0.3], [0.4, 0.4, 0.9], [1.0, 0.0, 0.2]])
    Y = np.arange(6).reshape(2, 3)
    z1 = matrix_thin(A, Y, B, np.random.default_rng(seed))
    z2 = matrix_thin(A, Y, B, np.random.default_rng(seed))
    assert np.array_equal(z1, z2)


def test_kron_thin_mean():
    rng = np.random.default_rng(4)
    Phi = rng.uniform(size=(4, 4))
    y = rng.integers(0, 10, size=4)
    mean, se = _batched_mean(lambda r: kron_thin(Phi, y, r), 20_000, rng)
    assert np.all(np.abs(mean - Phi @ y) <= 4 * se + 1e-12)


def test_batched_thinning_matches_loop():
    A = np.array([[0.2, 0.7], [0.5, 0.5]])
    B = np.array([[0.1, 0.8, 0.3], [0.4, 0.4, 0.9], [1.0, 0.0, 0.2]])
    Y = np.arange(6).reshape(2, 3)
    stack = np.broadcast_to(Y, (50_000, 2, 3))
    Z = matrix_thin(A, stack, B, np.random.default_rng(1))
    assert Z.shape == (50_000, 2, 3)
    se = Z.std(axis=0, ddof=1) / np.sqrt(Z.shape[0])
    assert np.all(np.abs(Z.mean(axis=0) - A @ Y @ B.T) <= 4 * se + 1e-12)
    # independent draws across the stack
    assert len({tuple(z.ravel()) for z in Z[:100]}) > 1
