"""Orthogonal Matching Pursuit with dual stopping rules.

The greedy loop picks the atom best correlated with the current residual
(ties to the lowest index), refits all selected atoms by least squares, and
stops once the squared residual reaches the error bound or the support
reaches the sparsity cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ParameterError
from .parallel import pmap

if TYPE_CHECKING:
    from .dictionary import Dictionary, KsvdConfig

_TINY = 1e-12


@dataclass
class SparseCode:
    """Sparse coefficient vector with explicit support.

    ``support`` holds atom indices in selection order, ``coefficients`` the
    aligned values, and ``residual_norm`` equals ||y - D @ code||.
    """

    length: int
    support: np.ndarray
    coefficients: np.ndarray
    residual_norm: float

    def __post_init__(self) -> None:
        self.support = np.asarray(self.support, dtype=np.int64)
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)
        if self.support.shape != self.coefficients.shape:
            raise ParameterError("support and coefficients must align")
        if self.support.size and (
            self.support.min() < 0
            or self.support.max() >= self.length
            or np.unique(self.support).size != self.support.size
        ):
            raise ParameterError("support indices must be unique and < length")
        if self.residual_norm < 0:
            raise ParameterError("residual norm must be >= 0")

    @property
    def sparsity(self) -> int:
        return int(self.support.size)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.length)
        dense[self.support] = self.coefficients
        return dense


def reconstruct(dictionary: "Dictionary", code: SparseCode) -> np.ndarray:
    """Evaluate D @ code without materializing the dense coefficient vector."""
    if code.support.size == 0:
        return np.zeros(dictionary.patch_dim)
    return dictionary.atoms[:, code.support] @ code.coefficients


def omp_pursuit(columns, y, max_sparsity: int, error_bound: float = 0.0) -> SparseCode:
    """Greedy pursuit of one signal against an arbitrary column matrix.

    Stops when ||residual||^2 <= error_bound or the support reaches
    ``max_sparsity``; a zero signal yields an empty support. The matrix need
    not be overcomplete, which is what the residual-based classifier relies
    on; use :func:`omp_solve` when you have a patch dictionary.
    """
    atoms = np.asarray(columns, dtype=np.float64)
    if atoms.ndim != 2:
        raise ParameterError(f"columns must be 2-D, got shape {atoms.shape}")
    signal = np.asarray(y, dtype=np.float64)
    if signal.shape != (atoms.shape[0],):
        raise ParameterError(
            f"signal length {signal.shape} does not match column length {atoms.shape[0]}"
        )
    if not np.all(np.isfinite(signal)):
        raise ParameterError("signal contains non-finite values")
    if max_sparsity < 1:
        raise ParameterError(f"max_sparsity must be >= 1, got {max_sparsity}")
    if error_bound < 0:
        raise ParameterError(f"error_bound must be >= 0, got {error_bound}")

    support: list[int] = []
    coeffs = np.zeros(0)
    residual = signal.copy()
    res2 = float(residual @ residual)
    y_norm = math.sqrt(res2)

    while len(support) < max_sparsity and res2 > error_bound and math.sqrt(res2) > _TINY * y_norm:
        corr = atoms.T @ residual
        best = int(np.argmax(np.abs(corr)))
        if abs(corr[best]) <= _TINY * max(math.sqrt(res2), _TINY):
            break  # residual is (numerically) orthogonal to every atom
        if best in support:
            raise AssertionError(f"atom {best} selected twice; residual orthogonality violated")
        support.append(best)
        sub = atoms[:, support]
        coeffs = np.linalg.lstsq(sub, signal, rcond=None)[0]
        residual = signal - sub @ coeffs
        res2 = float(residual @ residual)

    return SparseCode(
        length=atoms.shape[1],
        support=np.array(support, dtype=np.int64),
        coefficients=coeffs,
        residual_norm=math.sqrt(res2),
    )


def omp_solve(
    dictionary: "Dictionary",
    y,
    max_sparsity: int,
    error_bound: float = 0.0,
) -> SparseCode:
    """Sparse-code one signal against a patch dictionary."""
    return omp_pursuit(dictionary.atoms, y, max_sparsity, error_bound)


def omp_batch(
    dictionary: "Dictionary",
    signals,
    config: "KsvdConfig",
    threads: int = 1,
) -> list[SparseCode]:
    """Code every column of ``signals``; element i is bit-identical to the
    corresponding single :func:`omp_solve` call regardless of thread count."""
    matrix = np.asarray(signals, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != dictionary.patch_dim:
        raise ParameterError(
            f"signals must be a {dictionary.patch_dim} x n matrix, got shape {matrix.shape}"
        )

    def solve_one(col: int) -> SparseCode:
        return omp_solve(dictionary, matrix[:, col], config.max_sparsity, config.error_bound)

    return pmap(solve_one, range(matrix.shape[1]), threads)
