import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ris_linksim.numerics import (
    NumericalError,
    cholesky_lower,
    frobenius_norm_sq,
    hermitian,
    matmul,
    solve_hermitian_positive,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
complexes = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


def cmat(rows, cols):
    return arrays(np.complex128, (rows, cols), elements=complexes)


def rand_c(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestMatmul:
    def test_identity(self):
        m = rand_c(np.random.default_rng(0), (3, 5))
        np.testing.assert_array_equal(matmul(np.eye(3), m), m)

    def test_scalar_hand_value(self):
        assert matmul(np.array([[2 + 1j]]), np.array([[3 - 1j]]))[0, 0] == 7 + 1j

    def test_zero_annihilates(self):
        m = rand_c(np.random.default_rng(1), (4, 3))
        assert not np.any(matmul(m, np.zeros((3, 2))))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    @given(cmat(3, 4), cmat(4, 2), cmat(2, 5))
    def test_associative(self, a, b, c):
        left = matmul(matmul(a, b), c)
        right = matmul(a, matmul(b, c))
        scale = np.linalg.norm(np.abs(a) @ np.abs(b) @ np.abs(c)) + 1e-300
        assert np.linalg.norm(left - right) <= 1e-9 * scale


class TestHermitian:
    def test_scalar(self):
        assert hermitian(np.array([[1j]]))[0, 0] == -1j

    def test_real_symmetric_fixed_point(self):
        m = np.array([[1.0, 2.0], [2.0, 5.0]])
        np.testing.assert_array_equal(hermitian(m), m)

    def test_conjugated_entries(self):
        m = rand_c(np.random.default_rng(2), (2, 3))
        h = hermitian(m)
        assert h.shape == (3, 2)
        for i in range(2):
            for j in range(3):
                assert h[j, i] == np.conj(m[i, j])

    @given(cmat(3, 4))
    def test_involution_exact(self, a):
        np.testing.assert_array_equal(hermitian(hermitian(a)), a)


class TestSolve:
    def test_identity(self):
        v = rand_c(np.random.default_rng(3), (4, 1))
        np.testing.assert_allclose(solve_hermitian_positive(np.eye(4), v), v)

    def test_scaled_identity(self):
        v = rand_c(np.random.default_rng(4), (4, 2))
        np.testing.assert_allclose(solve_hermitian_positive(2 * np.eye(4), v), v / 2)

    @pytest.mark.parametrize("seed", range(5))
    def test_residual(self, seed):
        rng = np.random.default_rng(seed)
        q = rand_c(rng, (4, 4))
        a = q.conj().T @ q + np.eye(4)
        b = rand_c(rng, (4, 3))
        x = solve_hermitian_positive(a, b)
        assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) <= 1e-10

    def test_indefinite_rejected(self):
        with pytest.raises(NumericalError, match="positive definite"):
            solve_hermitian_positive(np.diag([1.0, -1.0]), np.ones(2))

    def test_regularization_rescues_singular(self):
        x = solve_hermitian_positive(np.zeros((2, 2)), np.ones(2), regularization=2.0)
        np.testing.assert_allclose(x.ravel(), [0.5, 0.5])

    def test_cholesky_factor(self):
        a = np.array([[4.0, 2j], [-2j, 5.0]])
        l = cholesky_lower(a)
        np.testing.assert_allclose(l @ l.conj().T, a)


class TestFrobenius:
    def test_values(self):
        assert frobenius_norm_sq(np.zeros((3, 3))) == 0
        assert frobenius_norm_sq(np.eye(4)) == 4
        assert frobenius_norm_sq(np.array([[3 + 4j]])) == 25

    @given(cmat(5, 3), arrays(np.float64, 5, elements=st.floats(0, 2 * np.pi)))
    def test_unit_modulus_diagonal_preserves_norm(self, x, theta):
        u = np.diag(np.exp(1j * theta))
        before = frobenius_norm_sq(x)
        assert abs(frobenius_norm_sq(matmul(u, x)) - before) <= 1e-9 * max(before, 1e-300)
