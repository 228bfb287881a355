import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hidden_gda.linalg import SingularMatrixError, jacobi_eigenvalues, solve


def test_solve_matches_known_solution():
    A = np.array([[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]])
    x = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(solve(A, A @ x), x, atol=1e-14)


def test_solve_needs_pivoting():
    # zero leading pivot: plain elimination would divide by zero
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(solve(A, [2.0, 3.0]), [3.0, 2.0])


def test_solve_singular():
    with pytest.raises(SingularMatrixError):
        solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0])


def test_solve_rejects_rectangular():
    with pytest.raises(ValueError):
        solve(np.ones((2, 3)), [1.0, 1.0])


def test_jacobi_diagonal():
    np.testing.assert_allclose(jacobi_eigenvalues(np.diag([-1.0, -2.0])), [-2.0, -1.0])


def test_jacobi_two_by_two_closed_form():
    S = np.array([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(jacobi_eigenvalues(S), [1.0, 3.0], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_jacobi_matches_characteristic_polynomial_roots(seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(6, 6))
    S = 0.5 * (B + B.T)
    # independent oracle: roots of the characteristic polynomial
    roots = np.sort(np.real(np.roots(np.poly(S))))
    np.testing.assert_allclose(jacobi_eigenvalues(S), roots, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_solve_random_well_conditioned(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=n)
    np.testing.assert_allclose(A @ solve(A, b), b, atol=1e-10)
