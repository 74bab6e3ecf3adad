"""Overcomplete DCT initialization, K-SVD dictionary learning, persistence.

A dictionary is a p x m matrix of unit-norm column atoms with m >= p.
Learning alternates batch OMP coding with a sequential per-atom rank-1
update sweep; all tie-breaking and update order is fixed so identical
inputs give bit-identical dictionaries.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .omp import SparseCode, omp_batch

_MAGIC = b"SSDICT01"
_NORM_TOL = 1e-9
_SIGN_EPS = 1e-12


@dataclass
class Dictionary:
    """p x m atom matrix; every column has unit Euclidean norm."""

    atoms: np.ndarray

    def __post_init__(self) -> None:
        self.atoms = np.asarray(self.atoms, dtype=np.float64)
        if self.atoms.ndim != 2:
            raise ParameterError(f"atoms must be 2-D, got shape {self.atoms.shape}")
        p, m = self.atoms.shape
        if m < p:
            raise ParameterError(f"dictionary must be overcomplete (m >= p), got {p}x{m}")
        if not np.all(np.isfinite(self.atoms)):
            raise ParameterError("dictionary contains non-finite entries")
        norms = np.linalg.norm(self.atoms, axis=0)
        if np.any(np.abs(norms - 1.0) > _NORM_TOL):
            worst = float(np.max(np.abs(norms - 1.0)))
            raise ParameterError(f"atom norms must be 1 within {_NORM_TOL}, worst deviation {worst:g}")

    @property
    def patch_dim(self) -> int:
        return int(self.atoms.shape[0])

    @property
    def atom_count(self) -> int:
        return int(self.atoms.shape[1])

    def copy(self) -> "Dictionary":
        return Dictionary(self.atoms.copy())


@dataclass(frozen=True)
class KsvdConfig:
    """Learning knobs: alternation count, per-signal sparsity cap, squared
    residual target (p * sigma^2 scale), and a seed."""

    iterations: int
    max_sparsity: int
    error_bound: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if self.max_sparsity < 1:
            raise ParameterError(f"max_sparsity must be >= 1, got {self.max_sparsity}")
        if self.error_bound < 0:
            raise ParameterError(f"error_bound must be >= 0, got {self.error_bound}")


def init_overcomplete_dct(patch_side: int, atom_count: int) -> Dictionary:
    """Overcomplete 2-D DCT dictionary built as a Kronecker square.

    The 1-D base is patch_side x sqrt(atom_count) sampled cosines, mean-freed
    (except the DC column) and normalized; atom 0 comes out as the constant
    vector 1/patch_side.
    """
    if patch_side < 1:
        raise ParameterError(f"patch side must be >= 1, got {patch_side}")
    root = math.isqrt(atom_count)
    if root * root != atom_count:
        raise ParameterError(f"atom count {atom_count} is not a perfect square")
    if root < patch_side:
        raise ParameterError(
            f"sqrt(atom count) = {root} must be >= patch side {patch_side} for overcompleteness"
        )
    base = np.zeros((patch_side, root))
    grid = np.arange(patch_side)
    for k in range(root):
        wave = np.cos(grid * k * math.pi / root)
        if k > 0:
            wave = wave - wave.mean()
        base[:, k] = wave / np.linalg.norm(wave)
    return Dictionary(np.kron(base, base))


def _residual_norms(atoms: np.ndarray, signals: np.ndarray, codes: list[SparseCode]) -> np.ndarray:
    norms = np.empty(len(codes))
    for k, code in enumerate(codes):
        if code.support.size:
            resid = signals[:, k] - atoms[:, code.support] @ code.coefficients
        else:
            resid = signals[:, k]
        norms[k] = math.sqrt(float(resid @ resid))
    return norms


def _fix_sign(vec: np.ndarray) -> float:
    """Return -1.0 if the first non-negligible entry is negative, else 1.0."""
    nonzero = np.nonzero(np.abs(vec) > _SIGN_EPS)[0]
    if nonzero.size and vec[nonzero[0]] < 0:
        return -1.0
    return 1.0


def ksvd_sweep(dictionary: Dictionary, signals, codes: list[SparseCode]) -> Dictionary:
    """One sequential pass of per-atom rank-1 updates (ascending atom index).

    Each used atom is replaced by the dominant left singular vector of its
    restricted residual matrix and the touching coefficients by the matching
    scaled right singular vector, so the summed squared representation error
    never increases. Unused atoms are re-seeded from the currently
    worst-represented signal. Mutates ``dictionary`` and ``codes`` in place.
    """
    matrix = np.asarray(signals, dtype=np.float64)
    atoms = dictionary.atoms
    if matrix.ndim != 2 or matrix.shape[0] != dictionary.patch_dim:
        raise ParameterError(
            f"signals must be {dictionary.patch_dim} x n, got shape {matrix.shape}"
        )
    if len(codes) != matrix.shape[1]:
        raise ParameterError(f"{len(codes)} codes for {matrix.shape[1]} signals")
    for code in codes:
        if code.length != dictionary.atom_count:
            raise ParameterError("code length does not match dictionary atom count")

    users: dict[int, list[tuple[int, int]]] = {}
    for k, code in enumerate(codes):
        for pos, j in enumerate(code.support):
            users.setdefault(int(j), []).append((k, pos))

    res_norms = _residual_norms(atoms, matrix, codes)

    for j in range(dictionary.atom_count):
        touching = users.get(j)
        if not touching:
            worst = int(np.argmax(res_norms))
            seed_norm = float(np.linalg.norm(matrix[:, worst]))
            if seed_norm > _SIGN_EPS:
                atoms[:, j] = matrix[:, worst] / seed_norm
            continue
        sig_idx = [k for k, _ in touching]
        coeff_j = np.array([codes[k].coefficients[pos] for k, pos in touching])
        recon = np.zeros((dictionary.patch_dim, len(sig_idx)))
        for col, k in enumerate(sig_idx):
            code = codes[k]
            recon[:, col] = atoms[:, code.support] @ code.coefficients
        restricted = matrix[:, sig_idx] - recon + np.outer(atoms[:, j], coeff_j)
        u, s, vt = np.linalg.svd(restricted, full_matrices=False)
        sign = _fix_sign(u[:, 0])
        atoms[:, j] = sign * u[:, 0]
        new_coeffs = sign * s[0] * vt[0]
        for (k, pos), value in zip(touching, new_coeffs):
            codes[k].coefficients[pos] = value
        for col, k in enumerate(sig_idx):
            code = codes[k]
            resid = matrix[:, k] - atoms[:, code.support] @ code.coefficients
            res_norms[k] = math.sqrt(float(resid @ resid))

    for k, code in enumerate(codes):
        code.residual_norm = float(res_norms[k])
    return dictionary


def train_ksvd(
    signals,
    config: KsvdConfig,
    init: Dictionary,
    threads: int = 1,
) -> tuple[Dictionary, list[SparseCode], list[float]]:
    """Alternate batch OMP coding and K-SVD sweeps for config.iterations.

    Returns the adapted dictionary, the final (post-sweep) codes, and the
    per-iteration summed squared representation error logged after each
    sweep. The initial dictionary is copied, never mutated.
    """
    matrix = np.asarray(signals, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] < 1:
        raise ParameterError(f"signals must be a p x n matrix with n >= 1, got {matrix.shape}")
    if matrix.shape[0] != init.patch_dim:
        raise ParameterError(
            f"signal dim {matrix.shape[0]} does not match dictionary patch dim {init.patch_dim}"
        )
    dictionary = init.copy()
    codes: list[SparseCode] = []
    trace: list[float] = []
    for _ in range(config.iterations):
        codes = omp_batch(dictionary, matrix, config, threads)
        ksvd_sweep(dictionary, matrix, codes)
        trace.append(float(sum(code.residual_norm**2 for code in codes)))
    return dictionary, codes, trace


def save_dictionary(path, dictionary: Dictionary) -> None:
    """Write the bit-exact on-disk form: magic, u32 p, u32 m, column-major
    little-endian f64 atom values."""
    p, m = dictionary.atoms.shape
    with open(Path(path), "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", p, m))
        fh.write(dictionary.atoms.astype("<f8").tobytes(order="F"))


def load_dictionary(path) -> Dictionary:
    """Read a dictionary file and re-validate all invariants."""
    data = Path(path).read_bytes()
    if len(data) < len(_MAGIC) + 8 or data[: len(_MAGIC)] != _MAGIC:
        raise ParameterError(f"{path}: not a dictionary file")
    p, m = struct.unpack_from("<II", data, len(_MAGIC))
    expected = len(_MAGIC) + 8 + p * m * 8
    if len(data) != expected:
        raise ParameterError(f"{path}: expected {expected} bytes, got {len(data)}")
    values = np.frombuffer(data, dtype="<f8", offset=len(_MAGIC) + 8)
    return Dictionary(values.reshape((p, m), order="F").copy())
