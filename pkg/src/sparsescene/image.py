"""Grayscale image containers, noise synthesis, patch operators, and PSNR.

Images are plain 2-D float64 numpy arrays in nominal [0, 255] gray levels.
Values are not clipped internally; clipping and integer rounding happen only
when a file is written (see :mod:`sparsescene.pgm`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParameterError

PEAK = 255.0


def as_image(data, name: str = "image") -> np.ndarray:
    """Validate and return ``data`` as a 2-D float64 image array."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ParameterError(f"{name} must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ParameterError(f"{name} contains non-finite values")
    return img


@dataclass(frozen=True)
class NoiseSpec:
    """Additive zero-mean Gaussian noise: standard deviation in gray levels
    plus an explicit 64-bit seed."""

    sigma: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class Patch:
    """A square block extracted from an image.

    ``values`` is the block read in lexicographic (row-major) order, length
    ``side**2``; ``origin`` is the (row, col) of its top-left pixel.
    """

    side: int
    origin: tuple[int, int]
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.side * self.side,):
            raise ParameterError(
                f"patch values length {self.values.shape} does not match side {self.side}"
            )


def add_noise(img, spec: NoiseSpec) -> np.ndarray:
    """Add i.i.d. Gaussian(0, sigma^2) samples to ``img``.

    Deterministic for a fixed seed; output is not clipped.
    """
    image = as_image(img)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    return image + rng.standard_normal(image.shape) * spec.sigma


def _patch_grid(height: int, width: int, side: int, stride: int) -> tuple[np.ndarray, np.ndarray]:
    rows = np.arange(0, height - side + 1, stride)
    cols = np.arange(0, width - side + 1, stride)
    return rows, cols


def _check_patch_args(img: np.ndarray, side: int, stride: int) -> None:
    height, width = img.shape
    if side < 1 or side > min(height, width):
        raise ParameterError(
            f"patch side {side} must be in [1, {min(height, width)}] for a {height}x{width} image"
        )
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")


def extract_patches(img, side: int, stride: int = 1) -> list[Patch]:
    """Enumerate all patches in row-major origin order.

    Covers every position with origin + side inside the image bounds; with
    stride 1 that is (height-side+1) * (width-side+1) patches.
    """
    image = as_image(img)
    _check_patch_args(image, side, stride)
    rows, cols = _patch_grid(image.shape[0], image.shape[1], side, stride)
    patches = []
    for r in rows:
        for c in cols:
            block = image[r : r + side, c : c + side]
            patches.append(Patch(side=side, origin=(int(r), int(c)), values=block.ravel().copy()))
    return patches


def extract_patch_matrix(img, side: int, stride: int = 1) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Vectorized companion to :func:`extract_patches`.

    Returns the same enumeration as (origins, p x n matrix) with column k
    equal to ``extract_patches(img, side, stride)[k].values``.
    """
    image = as_image(img)
    _check_patch_args(image, side, stride)
    rows, cols = _patch_grid(image.shape[0], image.shape[1], side, stride)
    windows = np.lib.stride_tricks.sliding_window_view(image, (side, side))
    blocks = windows[rows][:, cols]  # (nr, nc, side, side)
    matrix = blocks.reshape(len(rows) * len(cols), side * side).T.copy()
    origins = [(int(r), int(c)) for r in rows for c in cols]
    return origins, matrix


def aggregate_patches(
    estimates: Iterable[tuple[tuple[int, int], np.ndarray]],
    noisy,
    mu: float,
) -> np.ndarray:
    """Fuse overlapping patch estimates with the noisy image.

    Each output pixel is (mu * y_i + sum of covering estimates at i) /
    (mu + cover count); pixels covered by no patch keep their noisy value.
    Accumulation runs in the given patch order so results are reproducible.
    """
    image = as_image(noisy, "noisy")
    if mu < 0:
        raise ParameterError(f"mu must be >= 0, got {mu}")
    height, width = image.shape
    num = mu * image
    den = np.full(image.shape, float(mu))
    covered = np.zeros(image.shape, dtype=bool)
    for origin, values in estimates:
        vals = np.asarray(values, dtype=np.float64)
        side = math.isqrt(vals.size)
        if side * side != vals.size:
            raise ParameterError(f"estimate length {vals.size} is not a perfect square")
        r, c = origin
        if r < 0 or c < 0 or r + side > height or c + side > width:
            raise ParameterError(f"patch origin {origin} with side {side} exceeds image bounds")
        num[r : r + side, c : c + side] += vals.reshape(side, side)
        den[r : r + side, c : c + side] += 1.0
        covered[r : r + side, c : c + side] = True
    out = num / np.where(den > 0.0, den, 1.0)
    # uncovered pixels keep the noisy value bit-for-bit (mu*y/mu can round)
    out[~covered] = image[~covered]
    return out


def psnr(reference, test) -> float:
    """Peak signal-to-noise ratio 10*log10(255^2 / MSE) in dB.

    Returns math.inf when the images are identical (zero MSE).
    """
    ref = as_image(reference, "reference")
    tst = as_image(test, "test")
    if ref.shape != tst.shape:
        raise ParameterError(f"shape mismatch: {ref.shape} vs {tst.shape}")
    mse = float(np.mean((ref - tst) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)
