"""Per-pixel texture features: gray-level histogram plus GLCM statistics.

Each pixel is described by the normalized histogram of its window
concatenated with six co-occurrence statistics (contrast, dissimilarity,
homogeneity, energy, entropy, correlation), computed over a symmetric GLCM
accumulated across the four distance-1 offsets. Windows are centered and
edge-replicated at borders, and the multi-size window plan follows the
resolution-driven size formulas.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ParameterError
from .image import as_image
from .parallel import pmap

DEFAULT_BINS = 16
DEFAULT_LEVELS = 16
DEFAULT_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))
SMALLEST_WINDOW = 3

_FEAT_MAGIC = b"SSFEAT01"
_SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class PatchSizePlan:
    """Odd window sizes for the coarse-to-fine layers, largest first."""

    resolution: int
    s_init: int
    s_large: int
    s_middle: int
    s_small: int

    def __post_init__(self) -> None:
        sizes = (self.s_large, self.s_middle, self.s_small)
        if any(s % 2 == 0 for s in (self.s_init,) + sizes):
            raise ParameterError(f"window sizes must be odd, got {sizes}")
        if not (self.s_large > self.s_middle > self.s_small >= SMALLEST_WINDOW):
            raise ParameterError(
                f"sizes must satisfy large > middle > small >= {SMALLEST_WINDOW}, got {sizes}"
            )

    def size_for_layer(self, layer: int, layer_count: int) -> int:
        """Window size of 1-based ``layer`` out of ``layer_count`` layers."""
        if layer < 1 or layer > layer_count:
            raise ParameterError(f"layer {layer} out of range 1..{layer_count}")
        if layer_count == 1:
            ladder = [self.s_large]
        elif layer_count == 2:
            ladder = [self.s_large, self.s_small]
        else:
            ladder = [self.s_large, self.s_middle, self.s_small]
            ladder += [self.s_small] * (layer_count - 3)
        return ladder[layer - 1]


def plan_patch_sizes(resolution: int, s_large_override: int | None = None) -> PatchSizePlan:
    """Derive the window-size ladder from the image resolution.

    The starting size is 2*floor(resolution*3/2) + 1; the middle size is
    small + (large-3)/2 + ((large-3)/2 mod 2), which keeps it odd.
    """
    if resolution < 1:
        raise ParameterError(f"resolution must be >= 1, got {resolution}")
    s_init = 2 * int(resolution * 3 // 2) + 1
    if s_large_override is not None:
        if s_large_override < SMALLEST_WINDOW or s_large_override % 2 == 0:
            raise ParameterError(
                f"largest window override must be odd and >= {SMALLEST_WINDOW}, got {s_large_override}"
            )
        s_large = s_large_override
    else:
        s_large = s_init
    half_gap = (s_large - SMALLEST_WINDOW) // 2
    s_middle = SMALLEST_WINDOW + half_gap + (half_gap % 2)
    return PatchSizePlan(
        resolution=resolution,
        s_init=s_init,
        s_large=s_large,
        s_middle=s_middle,
        s_small=SMALLEST_WINDOW,
    )


class GlcmStats(NamedTuple):
    contrast: float
    dissimilarity: float
    homogeneity: float
    energy: float
    entropy: float
    correlation: float


@dataclass(frozen=True)
class GlcmMatrix:
    """Symmetric, normalized co-occurrence frequencies over L gray levels."""

    levels: int
    counts: np.ndarray

    def __post_init__(self) -> None:
        if self.counts.shape != (self.levels, self.levels):
            raise ParameterError(
                f"GLCM must be {self.levels}x{self.levels}, got {self.counts.shape}"
            )


def quantize_levels(values: np.ndarray, levels: int) -> np.ndarray:
    """Map gray values to integer levels: clamp to [0, 255], then
    floor(v * levels / 256)."""
    clamped = np.clip(values, 0.0, 255.0)
    return np.minimum((clamped * levels / 256.0).astype(np.int64), levels - 1)


def compute_glh(window, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Normalized gray-level histogram of a window (sums to 1)."""
    if bins < 2:
        raise ParameterError(f"bins must be >= 2, got {bins}")
    values = np.asarray(window, dtype=np.float64)
    if values.size == 0:
        raise ParameterError("window is empty")
    idx = quantize_levels(values.ravel(), bins)
    hist = np.bincount(idx, minlength=bins).astype(np.float64)
    return hist / values.size


def _offset_pairs(quantized: np.ndarray, drow: int, dcol: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = quantized.shape
    r0, r1 = max(0, -drow), rows - max(0, drow)
    c0, c1 = max(0, -dcol), cols - max(0, dcol)
    if r0 >= r1 or c0 >= c1:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    first = quantized[r0:r1, c0:c1]
    second = quantized[r0 + drow : r1 + drow, c0 + dcol : c1 + dcol]
    return first.ravel(), second.ravel()


def compute_glcm(
    window,
    levels: int = DEFAULT_LEVELS,
    offsets: Sequence[tuple[int, int]] = DEFAULT_OFFSETS,
) -> GlcmMatrix:
    """Symmetric co-occurrence matrix accumulated over all offsets and
    normalized to total mass 1."""
    if levels < 2:
        raise ParameterError(f"levels must be >= 2, got {levels}")
    if not offsets:
        raise ParameterError("at least one offset is required")
    values = np.asarray(window, dtype=np.float64)
    if values.ndim != 2 or min(values.shape) < 2:
        raise ParameterError(f"window must be 2-D with side >= 2, got shape {values.shape}")
    quantized = quantize_levels(values, levels)
    counts = np.zeros((levels, levels))
    total = 0
    for drow, dcol in offsets:
        first, second = _offset_pairs(quantized, drow, dcol)
        np.add.at(counts, (first, second), 1.0)
        np.add.at(counts, (second, first), 1.0)
        total += 2 * first.size
    if total == 0:
        raise ParameterError("window too small for every offset")
    return GlcmMatrix(levels=levels, counts=counts / total)


def glcm_stats(glcm: GlcmMatrix) -> GlcmStats:
    """The six co-occurrence statistics; correlation degenerates to 0 when
    either marginal is (numerically) constant."""
    p = glcm.counts
    levels = glcm.levels
    i = np.arange(levels)[:, None]
    j = np.arange(levels)[None, :]
    diff = i - j
    contrast = float(np.sum(diff**2 * p))
    dissimilarity = float(np.sum(np.abs(diff) * p))
    homogeneity = float(np.sum(p / (1.0 + np.abs(diff))))
    energy = float(np.sum(p**2))
    positive = p[p > 0]
    entropy = float(-np.sum(positive * np.log2(positive)))
    row_marginal = p.sum(axis=1)
    col_marginal = p.sum(axis=0)
    mu_i = float(np.sum(np.arange(levels) * row_marginal))
    mu_j = float(np.sum(np.arange(levels) * col_marginal))
    var_i = float(np.sum((np.arange(levels) - mu_i) ** 2 * row_marginal))
    var_j = float(np.sum((np.arange(levels) - mu_j) ** 2 * col_marginal))
    sigma_product = np.sqrt(var_i) * np.sqrt(var_j)
    if sigma_product < _SIGMA_FLOOR:
        correlation = 0.0
    else:
        correlation = float(np.sum((i - mu_i) * (j - mu_j) * p) / sigma_product)
    return GlcmStats(contrast, dissimilarity, homogeneity, energy, entropy, correlation)


def feature_length(bins: int = DEFAULT_BINS) -> int:
    return bins + len(GlcmStats._fields)


def _window_feature(
    window: np.ndarray,
    bins: int,
    levels: int,
    offsets: Sequence[tuple[int, int]],
) -> np.ndarray:
    glh = compute_glh(window, bins)
    stats = glcm_stats(compute_glcm(window, levels, offsets))
    return np.concatenate([glh, np.asarray(stats, dtype=np.float64)])


def _padded(img: np.ndarray, size: int) -> np.ndarray:
    half = size // 2
    return np.pad(img, half, mode="edge")


def pixel_feature(
    img,
    pixel: tuple[int, int],
    size: int,
    bins: int = DEFAULT_BINS,
    levels: int = DEFAULT_LEVELS,
    offsets: Sequence[tuple[int, int]] = DEFAULT_OFFSETS,
) -> np.ndarray:
    """Feature vector of the size x size window centered at ``pixel``,
    edge-replicated at image borders."""
    image = as_image(img)
    if size < 2 or size % 2 == 0:
        raise ParameterError(f"window size must be odd and >= 3, got {size}")
    row, col = pixel
    if not (0 <= row < image.shape[0] and 0 <= col < image.shape[1]):
        raise ParameterError(f"pixel {pixel} outside image of shape {image.shape}")
    padded = _padded(image, size)
    window = padded[row : row + size, col : col + size]
    return _window_feature(window, bins, levels, offsets)


def feature_raster(
    img,
    size: int,
    bins: int = DEFAULT_BINS,
    levels: int = DEFAULT_LEVELS,
    offsets: Sequence[tuple[int, int]] = DEFAULT_OFFSETS,
    threads: int = 1,
) -> np.ndarray:
    """Features for every pixel, shape (height, width, feature_length).

    Row ``r``, column ``c`` equals pixel_feature(img, (r, c), ...) bit for
    bit; rows are computed independently so thread count cannot change the
    result.
    """
    image = as_image(img)
    if size < 2 or size % 2 == 0:
        raise ParameterError(f"window size must be odd and >= 3, got {size}")
    padded = _padded(image, size)
    width = image.shape[1]

    def one_row(row: int) -> np.ndarray:
        out = np.empty((width, feature_length(bins)))
        for col in range(width):
            window = padded[row : row + size, col : col + size]
            out[col] = _window_feature(window, bins, levels, offsets)
        return out

    rows = pmap(one_row, range(image.shape[0]), threads)
    return np.stack(rows, axis=0)


def save_feature_raster(path, raster) -> None:
    """Binary export: magic, u32 height/width/feature length, then row-major
    little-endian f64 features."""
    data = np.asarray(raster, dtype=np.float64)
    if data.ndim != 3:
        raise ParameterError(f"feature raster must be 3-D, got shape {data.shape}")
    height, width, feat_len = data.shape
    with open(Path(path), "wb") as fh:
        fh.write(_FEAT_MAGIC)
        fh.write(struct.pack("<III", height, width, feat_len))
        fh.write(data.astype("<f8").tobytes(order="C"))


def load_feature_raster(path) -> np.ndarray:
    data = Path(path).read_bytes()
    header = len(_FEAT_MAGIC) + 12
    if len(data) < header or data[: len(_FEAT_MAGIC)] != _FEAT_MAGIC:
        raise ParameterError(f"{path}: not a feature raster file")
    height, width, feat_len = struct.unpack_from("<III", data, len(_FEAT_MAGIC))
    expected = header + height * width * feat_len * 8
    if len(data) != expected:
        raise ParameterError(f"{path}: expected {expected} bytes, got {len(data)}")
    values = np.frombuffer(data, dtype="<f8", offset=header)
    return values.reshape(height, width, feat_len).copy()
