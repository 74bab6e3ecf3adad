"""Synthetic texture mosaics standing in for real acquired scenes.

The image is split into four quadrants (top-left, top-right, bottom-left,
bottom-right) carrying class ``quadrant % k``; the four generators are
deliberately easy to tell apart with histogram + co-occurrence features:

  class 0  smooth low-variance field with a gentle gradient
  class 1  high-contrast random blocks
  class 2  directional vertical stripes
  class 3  granular bright speckles on a dark background

Everything is drawn from one seeded generator in fixed quadrant order, so a
given (size, k, seed) triple always produces the same image and truth map.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

MIN_SIZE = 64
VALID_CLASS_COUNTS = (2, 3, 4)


def _box_blur(values: np.ndarray, radius: int) -> np.ndarray:
    """Separable box filter with edge replication, radius in pixels."""
    size = 2 * radius + 1
    padded = np.pad(values, radius, mode="edge")
    csum = np.cumsum(padded, axis=0)
    rows = (csum[size - 1 :, :] - np.vstack([np.zeros((1, padded.shape[1])), csum[: -size, :]])) / size
    csum = np.cumsum(rows, axis=1)
    cols = (csum[:, size - 1 :] - np.hstack([np.zeros((rows.shape[0], 1)), csum[:, : -size]])) / size
    return cols


def _smooth_field(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    rows, cols = shape
    gradient = 10.0 * np.arange(cols) / max(cols - 1, 1)
    noise = _box_blur(rng.standard_normal(shape) * 30.0, 4)
    return 70.0 + gradient[None, :] + noise


def _random_blocks(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    rows, cols = shape
    block = 8
    grid = rng.choice(np.array([60.0, 180.0]), size=((rows + block - 1) // block, (cols + block - 1) // block))
    field = np.kron(grid, np.ones((block, block)))[:rows, :cols]
    return field + rng.standard_normal(shape) * 1.0


def _stripes(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    rows, cols = shape
    phase = int(rng.integers(0, 8))
    band = ((np.arange(cols) + phase) // 4) % 2
    field = np.where(band, 200.0, 110.0)
    return np.broadcast_to(field, shape) + rng.standard_normal(shape) * 1.0


def _granular(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    rows, cols = shape
    field = np.full(shape, 85.0)
    mask = rng.random(shape) < 0.02
    ys, xs = np.nonzero(mask)
    for dy in (0, 1):
        for dx in (0, 1):
            field[np.minimum(ys + dy, rows - 1), np.minimum(xs + dx, cols - 1)] = 205.0
    return field + rng.standard_normal(shape) * 1.0


_TEXTURES = (_smooth_field, _random_blocks, _stripes, _granular)


def synth_mosaic(size: int, k: int, seed: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Generate a size x size mosaic and its ground-truth label map."""
    if size < MIN_SIZE:
        raise ParameterError(f"mosaic size must be >= {MIN_SIZE}, got {size}")
    if k not in VALID_CLASS_COUNTS:
        raise ParameterError(f"class count must be one of {VALID_CLASS_COUNTS}, got {k}")
    rng = np.random.Generator(np.random.PCG64(seed))
    half = size // 2
    spans = (
        (slice(0, half), slice(0, half)),
        (slice(0, half), slice(half, size)),
        (slice(half, size), slice(0, half)),
        (slice(half, size), slice(half, size)),
    )
    image = np.zeros((size, size))
    truth = np.zeros((size, size), dtype=np.int64)
    for quadrant, (rows, cols) in enumerate(spans):
        cls = quadrant % k
        shape = (rows.stop - rows.start, cols.stop - cols.start)
        image[rows, cols] = _TEXTURES[cls](shape, rng)
        truth[rows, cols] = cls
    return np.clip(image, 0.0, 255.0), truth


def make_training_mask(truth, per_class: int, seed: int = 1) -> np.ndarray:
    """Seeded pick of ``per_class`` labeled pixels per class; everything
    else is -1 (unlabeled)."""
    labels = np.asarray(truth, dtype=np.int64)
    if per_class < 1:
        raise ParameterError("per-class sample count must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    mask = np.full(labels.shape, -1, dtype=np.int64)
    flat = labels.ravel()
    for cls in range(int(labels.max()) + 1):
        candidates = np.flatnonzero(flat == cls)
        if candidates.size < per_class:
            raise ParameterError(
                f"class {cls} has {candidates.size} pixels, cannot sample {per_class}"
            )
        picked = rng.choice(candidates.size, size=per_class, replace=False)
        mask.ravel()[candidates[np.sort(picked)]] = cls
    return mask
