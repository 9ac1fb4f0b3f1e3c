"""Link-level simulation of passive and active RIS-aided multi-user MISO downlinks."""

from .numerics import (
    NumericalError,
    frobenius_norm_sq,
    hermitian,
    matmul,
    solve_hermitian_positive,
)

__version__ = "0.1.0"

__all__ = [
    "NumericalError",
    "frobenius_norm_sq",
    "hermitian",
    "matmul",
    "solve_hermitian_positive",
]
