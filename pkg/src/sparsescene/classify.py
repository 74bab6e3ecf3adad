"""Sparse representation classification with hierarchical refinement.

A class dictionary concatenates unit-normalized training feature vectors per
class; a query is sparse-coded against all columns and labeled by whichever
class reconstructs it with the smallest residual. The double-threshold test
defers unreliable pixels (small residual AND clear margin required) to later
layers, which re-extract features at smaller windows and rebuild their
dictionaries from pixels labeled in the previous layer; the last layer
labels everything that is left without thresholds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .features import DEFAULT_BINS, DEFAULT_LEVELS, PatchSizePlan, feature_raster
from .image import as_image
from .omp import omp_pursuit
from .parallel import pmap

log = logging.getLogger(__name__)

UNCERTAIN = -1

_NORM_TOL = 1e-9


@dataclass
class ClassDictionary:
    """Per-layer concatenation of class training columns (m x n), with the
    half-open column range of each class."""

    columns: np.ndarray
    class_ranges: list[tuple[int, int]]
    layer: int = 1

    def __post_init__(self) -> None:
        self.columns = np.asarray(self.columns, dtype=np.float64)
        if self.columns.ndim != 2:
            raise ParameterError(f"columns must be 2-D, got shape {self.columns.shape}")
        n = self.columns.shape[1]
        expected = 0
        for start, stop in self.class_ranges:
            if start != expected or stop <= start:
                raise ParameterError("class ranges must be non-empty and partition the columns")
            expected = stop
        if expected != n:
            raise ParameterError(f"class ranges cover {expected} columns, dictionary has {n}")
        norms = np.linalg.norm(self.columns, axis=0)
        if np.any(np.abs(norms - 1.0) > _NORM_TOL):
            raise ParameterError("every training column must be unit-norm")

    @property
    def class_count(self) -> int:
        return len(self.class_ranges)

    @property
    def feature_dim(self) -> int:
        return int(self.columns.shape[0])


@dataclass(frozen=True)
class SrcDecision:
    """Per-class reconstruction residuals plus the winning class."""

    label: int
    residuals: np.ndarray
    tau: float
    theta: int


@dataclass(frozen=True)
class HierarchyConfig:
    layers: int = 3
    samples_per_class: int = 64
    delta1: float = 0.35
    delta2: float = 0.05
    max_sparsity: int = 5
    seed: int = 0
    bins: int = DEFAULT_BINS
    levels: int = DEFAULT_LEVELS

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise ParameterError(f"layer count must be >= 1, got {self.layers}")
        if self.samples_per_class < 1:
            raise ParameterError("samples per class must be >= 1")
        if self.delta1 < 0 or self.delta2 < 0:
            raise ParameterError("thresholds must be >= 0")
        if self.max_sparsity < 1:
            raise ParameterError("max sparsity must be >= 1")


@dataclass
class LabelMap:
    """Final per-pixel classes plus the uncertainty snapshot after each
    layer (True = still deferred)."""

    labels: np.ndarray
    uncertain_masks: list[np.ndarray] = field(default_factory=list)


def _unit(vec: np.ndarray, what: str) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm <= 0 or not math.isfinite(norm):
        raise ParameterError(f"{what} must have positive finite norm")
    return vec / norm


def build_class_dictionary(samples, layer: int = 1) -> ClassDictionary:
    """Concatenate per-class training vectors into one matrix, normalizing
    every column; ``samples`` is a sequence of per-class vector lists."""
    if not samples:
        raise ParameterError("at least one class is required")
    columns = []
    ranges = []
    dim = None
    for cls, vectors in enumerate(samples):
        vecs = [np.asarray(v, dtype=np.float64) for v in vectors]
        if not vecs:
            raise ParameterError(f"class {cls} has no training samples")
        start = len(columns)
        for v in vecs:
            if v.ndim != 1:
                raise ParameterError("training samples must be 1-D vectors")
            if dim is None:
                dim = v.size
            elif v.size != dim:
                raise ParameterError("all training samples must share one length")
            columns.append(_unit(v, f"class {cls} training sample"))
        ranges.append((start, len(columns)))
    return ClassDictionary(columns=np.column_stack(columns), class_ranges=ranges, layer=layer)


def src_classify(y, dictionary: ClassDictionary, max_sparsity: int) -> SrcDecision:
    """Sparse-code ``y`` against all classes and label by minimum per-class
    reconstruction residual (ties to the lowest class index)."""
    query = np.asarray(y, dtype=np.float64)
    if query.shape != (dictionary.feature_dim,):
        raise ParameterError(
            f"query length {query.shape} does not match feature dim {dictionary.feature_dim}"
        )
    if not np.all(np.isfinite(query)):
        raise ParameterError("query contains non-finite values")
    unit_query = _unit(query, "query")
    code = omp_pursuit(dictionary.columns, unit_query, max_sparsity, 0.0)
    residuals = np.empty(dictionary.class_count)
    for cls, (start, stop) in enumerate(dictionary.class_ranges):
        inside = (code.support >= start) & (code.support < stop)
        if np.any(inside):
            recon = dictionary.columns[:, code.support[inside]] @ code.coefficients[inside]
            diff = unit_query - recon
        else:
            diff = unit_query
        residuals[cls] = math.sqrt(float(diff @ diff))
    label = int(np.argmin(residuals))
    return SrcDecision(label=label, residuals=residuals, tau=float(residuals[label]), theta=label)


def threshold_decide(decision: SrcDecision, delta1: float, delta2: float) -> int:
    """Accept the winning class only when the residual is small (tau <=
    delta1) and every other class is at least delta2 worse; otherwise
    UNCERTAIN."""
    if delta1 < 0 or delta2 < 0:
        raise ParameterError("thresholds must be >= 0")
    others = np.delete(decision.residuals, decision.theta)
    margin = float(others.min() - decision.tau) if others.size else math.inf
    if decision.tau <= delta1 and margin >= delta2:
        return decision.theta
    return UNCERTAIN


def _class_pixels(mask: np.ndarray, cls: int) -> np.ndarray:
    return np.flatnonzero(mask.ravel() == cls)


def _pick_samples(rng: np.random.Generator, candidates: np.ndarray, count: int) -> np.ndarray:
    """Seeded pick of up to ``count`` flat pixel indices; candidates are
    sorted first so the draw is platform-independent."""
    ordered = np.sort(candidates)
    if ordered.size <= count:
        return ordered
    chosen = rng.choice(ordered.size, size=count, replace=False)
    return ordered[np.sort(chosen)]


def hierarchical_classify(
    img,
    training_mask,
    config: HierarchyConfig,
    plan: PatchSizePlan,
    class_count: int | None = None,
    threads: int = 1,
) -> LabelMap:
    """Coarse-to-fine classification of every pixel.

    Layer 1 classifies all pixels from the supplied training mask at the
    largest window; each later layer rebuilds its dictionary from pixels
    newly labeled by the previous layer and revisits only pixels still
    uncertain. The final layer decides without thresholds, so no UNCERTAIN
    entries survive.
    """
    image = as_image(img)
    mask = np.asarray(training_mask)
    if mask.shape != image.shape:
        raise ParameterError(
            f"training mask shape {mask.shape} does not match image {image.shape}"
        )
    mask = mask.astype(np.int64)
    if class_count is None:
        if mask.max() < 0:
            raise ParameterError("training mask has no labeled pixels")
        class_count = int(mask.max()) + 1
    if class_count < 1:
        raise ParameterError("class count must be >= 1")
    if min(image.shape) < plan.s_large:
        raise ParameterError(
            f"image {image.shape} is smaller than the largest window {plan.s_large}"
        )
    for cls in range(class_count):
        have = _class_pixels(mask, cls).size
        if have < config.samples_per_class:
            raise ParameterError(
                f"class {cls} has {have} training pixels, needs >= {config.samples_per_class}"
            )

    rng = np.random.Generator(np.random.PCG64(config.seed))
    height, width = image.shape
    labels = np.full(image.shape, UNCERTAIN, dtype=np.int64)
    labeled_at = np.zeros(image.shape, dtype=np.int64)
    masks: list[np.ndarray] = []
    previous_picks: list[np.ndarray] = [np.empty(0, dtype=np.int64)] * class_count

    for layer in range(1, config.layers + 1):
        size = plan.size_for_layer(layer, config.layers)
        feats = feature_raster(
            image, size, bins=config.bins, levels=config.levels, threads=threads
        )

        picks: list[np.ndarray] = []
        for cls in range(class_count):
            if layer == 1:
                pool = _class_pixels(mask, cls)
            else:
                pool = np.flatnonzero((labels.ravel() == cls) & (labeled_at.ravel() == layer - 1))
                if pool.size == 0:
                    log.warning(
                        "layer %d: class %d gained no new pixels; reusing previous samples",
                        layer,
                        cls,
                    )
                    pool = previous_picks[cls]
            chosen = _pick_samples(rng, pool, config.samples_per_class)
            if chosen.size == 0:
                raise ParameterError(f"class {cls} has no usable training pixels at layer {layer}")
            picks.append(chosen)
        previous_picks = picks

        flat_feats = feats.reshape(height * width, -1)
        dictionary = build_class_dictionary(
            [list(flat_feats[p]) for p in picks], layer=layer
        )

        final_layer = layer == config.layers
        if layer == 1 and not final_layer:
            targets = np.arange(height * width)
        else:
            targets = np.flatnonzero(labels.ravel() == UNCERTAIN)

        def decide(px: int) -> int:
            decision = src_classify(flat_feats[px], dictionary, config.max_sparsity)
            if final_layer:
                return decision.label
            return threshold_decide(decision, config.delta1, config.delta2)

        def decide_block(block: np.ndarray) -> list[int]:
            return [decide(px) for px in block]

        chunk = max(1, math.ceil(targets.size / max(1, threads * 4)))
        blocks = [targets[i : i + chunk] for i in range(0, targets.size, chunk)]
        results = pmap(decide_block, blocks, threads)
        flat_labels = labels.ravel()
        flat_layer = labeled_at.ravel()
        for block, outcome in zip(blocks, results):
            for px, lab in zip(block, outcome):
                if lab != UNCERTAIN:
                    flat_labels[px] = lab
                    flat_layer[px] = layer
        masks.append(labels == UNCERTAIN)

    return LabelMap(labels=labels, uncertain_masks=masks)
