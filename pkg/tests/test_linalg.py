import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conereg import linalg
from conereg.exceptions import DomainError, SingularMatrixError


def random_spd(rng, n):
    M = rng.normal(size=(n + 3, n))
    return M.T @ M + 0.1 * np.eye(n)


def test_matmul_examples():
    A = np.array([[1.0, 2], [3, 4]])
    np.testing.assert_array_equal(linalg.matmul(np.eye(2), A), A)
    np.testing.assert_array_equal(linalg.matmul(A, [[0], [1]]), [[2], [4]])
    np.testing.assert_array_equal(linalg.matmul(np.zeros((1, 0)), np.zeros((0, 1))), [[0]])
    with pytest.raises(DomainError):
        linalg.matmul(A, np.ones((3, 1)))


def test_matrix_validation():
    with pytest.raises(DomainError):
        linalg.as_matrix([[1.0, np.inf]])
    np.testing.assert_array_equal(linalg.transpose([[1, 2, 3]]), [[1], [2], [3]])


def test_solve_spd_examples():
    b = np.array([3.0, -1.0, 2.0])
    np.testing.assert_array_equal(linalg.solve_spd(np.eye(3), b), b)
    np.testing.assert_allclose(linalg.solve_spd([[4, 0], [0, 9]], [8, 27]), [2, 3])
    with pytest.raises(SingularMatrixError) as err:
        linalg.solve_spd([[1, 1], [1, 1]], [1, 2])
    assert err.value.pivot == 1


def test_non_symmetric_rejected():
    with pytest.raises(SingularMatrixError):
        linalg.cholesky([[2.0, 1.0], [0.0, 2.0]])


def test_inverse_examples():
    np.testing.assert_array_equal(linalg.inverse_spd(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(linalg.inverse_spd([[2, 0], [0, 4]]), [[0.5, 0], [0, 0.25]])
    np.testing.assert_allclose(linalg.inverse_spd([[4, 2], [2, 2]]),
                               [[0.5, -0.5], [-0.5, 1.0]], atol=1e-15)


def test_rank_examples():
    assert linalg.rank_full(np.eye(3), 1e-10)
    A = np.array([[1.0, 2, 1], [3, 1, 3], [0, 5, 0], [2, 2, 2]])
    assert not linalg.rank_full(A, 1e-10)
    assert linalg.deficient_column(A) in (0, 2)
    assert not linalg.rank_full([[1, 1], [1, 1 + 1e-14]], 1e-10)
    assert linalg.deficient_column(np.eye(3)) is None
    with pytest.raises(DomainError):
        linalg.rank_full(np.eye(2), 0)


@settings(max_examples=50)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_solve_reproduces_rhs(n, seed):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    b = rng.normal(size=n) * 10
    x = linalg.solve_spd(A, b)
    assert np.abs(A @ x - b).max() <= 1e-8 * (1 + np.abs(b).max())
    np.testing.assert_allclose(x, np.linalg.solve(A, b), rtol=1e-8, atol=1e-10)


@settings(max_examples=50)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_inverse_involution(n, seed):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    inv = linalg.inverse_spd(A)
    np.testing.assert_allclose(A @ inv, np.eye(n), atol=1e-8)
    np.testing.assert_allclose(linalg.inverse_spd(inv), A, atol=1e-6 * np.abs(A).max())


def test_condition_estimate():
    assert linalg.condition_estimate(np.diag([1.0, 1e-11])) == pytest.approx(1e11)
    A = np.array([[4.0, 2], [2, 2]])
    assert linalg.condition_estimate(A) == pytest.approx(np.linalg.cond(A, 1))
