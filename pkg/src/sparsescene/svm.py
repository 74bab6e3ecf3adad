"""Linear one-vs-one SVM baseline trained from scratch.

The binary trainer is dual coordinate descent on the soft-margin objective
0.5 * (||w||^2 + b^2) + c * sum hinge(y * (w @ x + b)), with the bias folded
in as an always-one feature (so it is regularized too). It stops on a
certified duality gap, which pins the result to the optimum far tighter
than the 1e-3 relative contract. The ensemble standardizes features once
and trains one pairwise model per unordered class pair; prediction is
majority vote with ties to the lowest class index.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError

_MAGIC = b"SSSVM001"
_STD_FLOOR = 1e-12

GAP_TOL = 1e-9
MAX_EPOCHS = 4000


@dataclass(frozen=True)
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    class_pair: tuple[int, int]

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ParameterError("model parameters must be finite")
        i, j = self.class_pair
        if i >= j:
            raise ParameterError(f"class pair must satisfy i < j, got {self.class_pair}")

    def decision(self, x) -> float:
        return float(self.weights @ np.asarray(x, dtype=np.float64) + self.bias)


@dataclass(frozen=True)
class OvoEnsemble:
    class_count: int
    models: list[LinearSvmModel]
    feature_means: np.ndarray
    feature_stds: np.ndarray

    def __post_init__(self) -> None:
        expected = self.class_count * (self.class_count - 1) // 2
        if len(self.models) != expected:
            raise ParameterError(
                f"need {expected} pairwise models for {self.class_count} classes, got {len(self.models)}"
            )

    def standardize(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.feature_means) / self.feature_stds


def svm_objective(weights, bias: float, features, labels, c: float) -> float:
    """The pinned primal objective both the solver and any reference
    optimizer score against."""
    w = np.asarray(weights, dtype=np.float64)
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    margins = y * (x @ w + bias)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * (float(w @ w) + bias * bias) + c * float(hinge.sum())


def train_binary(
    features,
    labels,
    c: float,
    seed: int = 0,
    class_pair: tuple[int, int] = (0, 1),
) -> LinearSvmModel:
    """Train one soft-margin linear classifier on +/-1 labels.

    Deterministic for a fixed seed; converges to within GAP_TOL relative
    duality gap of the optimum (or raises if MAX_EPOCHS is hit first).
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ParameterError(f"features {x.shape} and labels {y.shape} do not align")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ParameterError("labels must be -1 or +1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ParameterError("both classes must be present in the training set")
    if c <= 0:
        raise ParameterError(f"regularization trade-off must be > 0, got {c}")

    n, dim = x.shape
    augmented = np.hstack([x, np.ones((n, 1))])
    sq_norms = np.einsum("ij,ij->i", augmented, augmented)
    alpha = np.zeros(n)
    w = np.zeros(dim + 1)
    rng = np.random.Generator(np.random.PCG64(seed))

    for _ in range(MAX_EPOCHS):
        for i in rng.permutation(n):
            gradient = y[i] * float(w @ augmented[i]) - 1.0
            if alpha[i] <= 0.0:
                projected = min(gradient, 0.0)
            elif alpha[i] >= c:
                projected = max(gradient, 0.0)
            else:
                projected = gradient
            if projected != 0.0:
                updated = min(max(alpha[i] - gradient / sq_norms[i], 0.0), c)
                w += (updated - alpha[i]) * y[i] * augmented[i]
                alpha[i] = updated
        margins = y * (augmented @ w)
        primal = 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - margins).sum())
        dual = float(alpha.sum()) - 0.5 * float(w @ w)
        if primal - dual <= GAP_TOL * max(1.0, primal):
            break
    else:
        raise RuntimeError("dual coordinate descent did not converge")

    return LinearSvmModel(weights=w[:dim].copy(), bias=float(w[dim]), class_pair=class_pair)


def train_ovo(features, labels, class_count: int, c: float, seed: int = 0) -> OvoEnsemble:
    """Train class_count*(class_count-1)/2 pairwise models on standardized
    features; each model sees only its own pair's samples."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ParameterError(f"features {x.shape} and labels {y.shape} do not align")
    if class_count < 2:
        raise ParameterError(f"need at least 2 classes, got {class_count}")
    if y.min() < 0 or y.max() >= class_count:
        raise ParameterError("labels must lie in [0, class_count)")
    for cls in range(class_count):
        if not np.any(y == cls):
            raise ParameterError(f"class {cls} has no training samples")

    means = x.mean(axis=0)
    stds = x.std(axis=0)
    stds = np.where(stds < _STD_FLOOR, 1.0, stds)
    standardized = (x - means) / stds

    models = []
    pair_index = 0
    for i in range(class_count):
        for j in range(i + 1, class_count):
            subset = (y == i) | (y == j)
            signs = np.where(y[subset] == i, 1.0, -1.0)
            models.append(
                train_binary(
                    standardized[subset],
                    signs,
                    c,
                    seed=seed + pair_index,
                    class_pair=(i, j),
                )
            )
            pair_index += 1
    return OvoEnsemble(
        class_count=class_count,
        models=models,
        feature_means=means,
        feature_stds=stds,
    )


def predict(ensemble: OvoEnsemble, x) -> int:
    """Majority vote over all pairwise decisions; a non-negative decision
    value votes for the lower-indexed class of the pair."""
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != ensemble.feature_means.shape:
        raise ParameterError(
            f"feature length {vec.shape} does not match model dim {ensemble.feature_means.shape}"
        )
    standardized = ensemble.standardize(vec)
    votes = np.zeros(ensemble.class_count, dtype=np.int64)
    for model in ensemble.models:
        i, j = model.class_pair
        votes[i if model.decision(standardized) >= 0.0 else j] += 1
    return int(np.argmax(votes))


def predict_batch(ensemble: OvoEnsemble, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    return np.array([predict(ensemble, row) for row in x], dtype=np.int64)


def save_svm(path, ensemble: OvoEnsemble) -> None:
    """On-disk form: magic, u32 class count, u32 feature dim, per model
    (u32 i, u32 j, f64 bias, dim f64 weights), then means and stds."""
    dim = ensemble.feature_means.size
    with open(Path(path), "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", ensemble.class_count, dim))
        for model in ensemble.models:
            if model.weights.size != dim:
                raise ParameterError("model weight length does not match ensemble dim")
            fh.write(struct.pack("<II", *model.class_pair))
            fh.write(struct.pack("<d", model.bias))
            fh.write(model.weights.astype("<f8").tobytes())
        fh.write(ensemble.feature_means.astype("<f8").tobytes())
        fh.write(ensemble.feature_stds.astype("<f8").tobytes())


def load_svm(path) -> OvoEnsemble:
    data = Path(path).read_bytes()
    if len(data) < len(_MAGIC) + 8 or data[: len(_MAGIC)] != _MAGIC:
        raise ParameterError(f"{path}: not an SVM model file")
    class_count, dim = struct.unpack_from("<II", data, len(_MAGIC))
    pair_count = class_count * (class_count - 1) // 2
    offset = len(_MAGIC) + 8
    model_bytes = 8 + 8 + dim * 8
    expected = offset + pair_count * model_bytes + 2 * dim * 8
    if len(data) != expected:
        raise ParameterError(f"{path}: expected {expected} bytes, got {len(data)}")
    models = []
    for _ in range(pair_count):
        i, j = struct.unpack_from("<II", data, offset)
        (bias,) = struct.unpack_from("<d", data, offset + 8)
        weights = np.frombuffer(data, dtype="<f8", count=dim, offset=offset + 16).copy()
        models.append(LinearSvmModel(weights=weights, bias=bias, class_pair=(int(i), int(j))))
        offset += model_bytes
    means = np.frombuffer(data, dtype="<f8", count=dim, offset=offset).copy()
    stds = np.frombuffer(data, dtype="<f8", count=dim, offset=offset + dim * 8).copy()
    return OvoEnsemble(class_count=class_count, models=models, feature_means=means, feature_stds=stds)
