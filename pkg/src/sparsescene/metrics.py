"""Confusion matrix, overall accuracy, Cohen's kappa, and JSON reports.

Accuracy display strings truncate toward zero at two decimals (90.625 ->
"90.62", 92.578125 -> "92.57"); full precision is always carried in the
numeric fields.
"""

from __future__ import annotations

import json
import math
from decimal import ROUND_DOWN, Decimal

import numpy as np

from .errors import ParameterError


class UndefinedMetricError(ValueError):
    """Raised when a metric has no defined value (e.g. kappa with chance
    agreement exactly 1)."""


def confusion(pred, truth, class_count: int) -> np.ndarray:
    """Tally counts[t][p] over all pixels; UNCERTAIN entries are rejected
    because only final maps may be scored."""
    p = np.asarray(pred)
    t = np.asarray(truth)
    if p.shape != t.shape:
        raise ParameterError(f"prediction shape {p.shape} does not match truth {t.shape}")
    if class_count < 1:
        raise ParameterError(f"class count must be >= 1, got {class_count}")
    p = p.astype(np.int64).ravel()
    t = t.astype(np.int64).ravel()
    if p.size == 0:
        raise ParameterError("empty label maps")
    for name, arr in (("prediction", p), ("truth", t)):
        if arr.min() < 0:
            raise ParameterError(f"{name} contains UNCERTAIN/negative labels")
        if arr.max() >= class_count:
            raise ParameterError(f"{name} contains labels >= {class_count}")
    counts = np.bincount(t * class_count + p, minlength=class_count * class_count)
    return counts.reshape(class_count, class_count)


def _check_matrix(cm) -> np.ndarray:
    matrix = np.asarray(cm, dtype=np.int64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ParameterError(f"confusion matrix must be square, got shape {matrix.shape}")
    if matrix.min() < 0:
        raise ParameterError("confusion matrix counts must be >= 0")
    if matrix.sum() <= 0:
        raise ParameterError("confusion matrix total must be > 0")
    return matrix


def overall_accuracy(cm) -> float:
    """Matched labels over total, as a percentage."""
    matrix = _check_matrix(cm)
    return 100.0 * float(np.trace(matrix)) / float(matrix.sum())


def truncate2(value: float) -> str:
    """Two-decimal display string, truncated toward zero."""
    if not math.isfinite(value):
        raise ParameterError(f"cannot format non-finite value {value}")
    return str(Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_DOWN))


def kappa(cm) -> float:
    """Cohen's kappa (p_o - p_e) / (1 - p_e); negative when agreement falls
    below chance."""
    matrix = _check_matrix(cm)
    total = float(matrix.sum())
    p_o = float(np.trace(matrix)) / total
    rows = matrix.sum(axis=1).astype(np.float64)
    cols = matrix.sum(axis=0).astype(np.float64)
    p_e = float(rows @ cols) / (total * total)
    if abs(1.0 - p_e) < 1e-15:
        raise UndefinedMetricError("kappa undefined: chance agreement is 1")
    return (p_o - p_e) / (1.0 - p_e)


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, float):
        if math.isnan(value):
            raise ParameterError("report values must not be NaN")
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def report(entries: dict) -> str:
    """Deterministic key-sorted JSON; every float "*_pct" entry gains a
    sibling "*_display" truncated string."""
    out = {}
    for key, value in entries.items():
        out[str(key)] = _jsonable(value)
    for key in list(out):
        if key.endswith("_pct") and isinstance(out[key], (int, float)):
            out[key[: -len("_pct")] + "_display"] = truncate2(float(out[key]))
    return json.dumps(out, sort_keys=True, indent=2)
