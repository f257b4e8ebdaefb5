"""One-pass evaluation metrics: success AUC and distance precision."""

from __future__ import annotations

import numpy as np

from ..boxes import BoundingBox, center_distance, iou
from ..errors import ParameterError

# 101 thresholds, step 0.01, strict `>` comparison.
_AUC_THRESHOLDS = np.linspace(0.0, 1.0, 101)

DEFAULT_PRECISION_THRESHOLD = 20.0


def iou_series(predictions: list[BoundingBox], groundtruth: list[BoundingBox]) -> list[float]:
    if len(predictions) != len(groundtruth):
        raise ParameterError(
            f"{len(predictions)} predictions vs {len(groundtruth)} annotations")
    return [iou(p, g) for p, g in zip(predictions, groundtruth)]


def center_errors(predictions: list[BoundingBox], groundtruth: list[BoundingBox]) -> list[float]:
    if len(predictions) != len(groundtruth):
        raise ParameterError(
            f"{len(predictions)} predictions vs {len(groundtruth)} annotations")
    return [center_distance(p, g) for p, g in zip(predictions, groundtruth)]


def success_auc(ious) -> float:
    """Mean success rate over 101 overlap thresholds in [0, 1].

    The success rate at threshold t is the fraction of frames with
    IoU strictly greater than t, so perfect tracking scores 100/101.
    """
    arr = np.asarray(list(ious), dtype=np.float64)
    if arr.size == 0:
        raise ParameterError("success_auc needs at least one IoU value")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ParameterError("IoU values must lie in [0, 1]")
    rates = (arr[None, :] > _AUC_THRESHOLDS[:, None]).mean(axis=1)
    return float(rates.mean())


def precision_at(errors, threshold: float = DEFAULT_PRECISION_THRESHOLD) -> float:
    """Fraction of frames whose center error is within ``threshold`` pixels."""
    arr = np.asarray(list(errors), dtype=np.float64)
    if arr.size == 0:
        raise ParameterError("precision_at needs at least one error value")
    if arr.min() < 0.0:
        raise ParameterError("center errors must be non-negative")
    return float((arr <= threshold).mean())
