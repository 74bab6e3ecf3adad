"""Shared fixtures and oracle helpers for the test suite."""

import itertools
import math

import numpy as np


def low_coherence_dictionary(p: int, m: int, target: float, seed: int) -> np.ndarray:
    """Random unit-atom matrix pushed below the given mutual coherence by
    alternating projection (clip the Gram matrix, refactor at rank p)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    atoms = rng.standard_normal((p, m))
    atoms /= np.linalg.norm(atoms, axis=0)
    for _ in range(500):
        gram = atoms.T @ atoms
        off = gram - np.diag(np.diag(gram))
        if np.abs(off).max() < target:
            break
        clipped = np.clip(gram, -target * 0.95, target * 0.95)
        np.fill_diagonal(clipped, 1.0)
        w, v = np.linalg.eigh(clipped)
        w = np.clip(w[-p:], 0.0, None)
        atoms = (v[:, -p:] * np.sqrt(w)).T
        atoms /= np.linalg.norm(atoms, axis=0)
    return atoms


def mutual_coherence(atoms: np.ndarray) -> float:
    gram = np.abs(atoms.T @ atoms)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


def brute_force_support(atoms: np.ndarray, y: np.ndarray, max_size: int) -> set:
    """Exhaustive least squares over every support of size <= max_size."""
    best, best_err = set(), math.inf
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(range(atoms.shape[1]), size):
            sub = atoms[:, combo]
            coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
            err = float(np.linalg.norm(y - sub @ coef))
            if err < best_err - 1e-12:
                best_err, best = err, set(combo)
    return best


def brute_force_class_label(cdict, y: np.ndarray, max_size: int) -> int:
    """Per-class exhaustive least squares; label = class with the smallest
    best within-class residual on the unit-normalized query."""
    yn = y / np.linalg.norm(y)
    best = []
    for start, stop in cdict.class_ranges:
        err_best = math.inf
        for size in range(1, max_size + 1):
            for combo in itertools.combinations(range(start, stop), size):
                sub = cdict.columns[:, combo]
                coef, *_ = np.linalg.lstsq(sub, yn, rcond=None)
                err_best = min(err_best, float(np.linalg.norm(yn - sub @ coef)))
        best.append(err_best)
    return int(np.argmin(best))
