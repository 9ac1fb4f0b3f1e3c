"""Dense complex linear-algebra kernel.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. Vectors
are carried as column matrices (shape ``(n, 1)``) wherever a function talks
about matrix dimensions; 1-D arrays are accepted and promoted.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular


class NumericalError(ArithmeticError):
    """Raised when a factorization breaks down (e.g. matrix not positive definite)."""


def as_matrix(a) -> np.ndarray:
    """Return `a` as a 2-D complex128 array, promoting 1-D input to a column."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got array with ndim={arr.ndim}")
    return arr


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def hermitian(a) -> np.ndarray:
    """Conjugate transpose. Exact involution on finite input."""
    return np.conj(as_matrix(a)).T.copy()


def frobenius_norm_sq(a) -> float:
    arr = np.asarray(a, dtype=np.complex128)
    return float(np.sum(arr.real**2 + arr.imag**2))


def cholesky_lower(a, regularization: float = 0.0) -> np.ndarray:
    """Lower Cholesky factor of ``a + regularization * I``.

    Raises
    ------
    NumericalError
        If the (regularized) matrix is not numerically positive definite.
    """
    a = as_matrix(a)
    n, m = a.shape
    if n != m:
        raise ValueError(f"matrix must be square, got {a.shape}")
    if regularization:
        a = a + regularization * np.eye(n)
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        diag = np.real(np.diag(a))
        raise NumericalError(
            f"Cholesky factorization failed ({exc}); "
            f"min diagonal={diag.min():.3e}, max diagonal={diag.max():.3e}, "
            f"regularization={regularization:.3e}"
        ) from None


def solve_hermitian_positive(a, b, regularization: float = 0.0) -> np.ndarray:
    """Solve ``(a + regularization*I) x = b`` for Hermitian positive definite `a`.

    Parameters
    ----------
    a : (n, n) array_like
        Hermitian positive definite system matrix. Only the lower triangle is
        read by the factorization.
    b : (n,) or (n, k) array_like
        Right-hand side(s).
    regularization : float
        Non-negative value added to the diagonal before factorizing.

    Returns
    -------
    x : np.ndarray
        Same shape as `b`.
    """
    b_arr = np.asarray(b, dtype=np.complex128)
    rhs = as_matrix(b_arr)
    low = cholesky_lower(a, regularization)
    if low.shape[0] != rhs.shape[0]:
        raise ValueError(f"dimension mismatch: {low.shape} vs rhs {rhs.shape}")
    y = solve_triangular(low, rhs, lower=True, check_finite=False)
    x = solve_triangular(low, y, lower=True, trans="C", check_finite=False)
    return x.reshape(b_arr.shape) if b_arr.ndim == 1 else x


def eigh_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    return np.linalg.eigh(a)
