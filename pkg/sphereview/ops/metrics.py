# sphereview/ops/metrics.py
"""
Salient object detection scores for a continuous prediction s in [0, 1]
against a binary ground truth g: MAE, adaptive F-measure, max F-measure,
weighted F-measure, S-measure and E-measure, plus dataset aggregation and
attribute-sorted curves.

Every metric accepts SaliencyMap/SaliencyMask containers or plain arrays of
any shape (the ERP aspect is only required by the containers).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import ndimage

from sphereview.core.config import settings
from sphereview.core.exceptions import UsageError
from sphereview.models.enums import Subset, ThresholdPolicy
from sphereview.schemas.grids import SaliencyMap, SaliencyMask
from sphereview.schemas.metrics import (
    CURVE_CSV_COLUMNS,
    METRIC_NAMES,
    DatasetReport,
    MetricsReport,
)

logger = logging.getLogger(__name__)

MapLike = Union[SaliencyMap, np.ndarray]
MaskLike = Union[SaliencyMask, np.ndarray]

MAX_F_THRESHOLDS = np.arange(256, dtype=np.float64) / 255.0


def _prepare(s: MapLike, g: MaskLike) -> Tuple[np.ndarray, np.ndarray]:
    s_data = s.data if isinstance(s, SaliencyMap) else np.clip(np.asarray(s, dtype=np.float64), 0.0, 1.0)
    g_data = g.data if isinstance(g, SaliencyMask) else np.asarray(g) != 0
    if s_data.shape != g_data.shape:
        raise UsageError(f"Prediction shape {s_data.shape} does not match mask shape {g_data.shape}.")
    return s_data, g_data


def adaptive_threshold(s: np.ndarray) -> float:
    return min(2.0 * float(s.mean()), 1.0)


def binarize(s: np.ndarray, threshold: float) -> np.ndarray:
    """s >= threshold, restricted to strictly positive pixels so an all-zero map predicts nothing."""
    return (s >= threshold) & (s > 0.0)


def f_score(tp, n_pred, n_fg, beta2: float):
    """
    F = (1 + b2) P R / (b2 P + R) from true-positive and predicted/actual
    foreground counts; works elementwise on arrays. P is 0 when nothing is
    predicted and F is 0 when P = R = 0.
    """
    tp = np.asarray(tp, dtype=np.float64)
    n_pred = np.asarray(n_pred, dtype=np.float64)
    precision = np.divide(tp, n_pred, out=np.zeros_like(tp), where=n_pred > 0)
    recall = tp / float(n_fg)
    numerator = (1.0 + beta2) * precision * recall
    denominator = beta2 * precision + recall
    return np.divide(numerator, denominator, out=np.zeros_like(numerator), where=denominator > 0)


# --- Individual metrics ---


def mae(s: MapLike, g: MaskLike) -> float:
    s, g = _prepare(s, g)
    return float(np.mean(np.abs(s - g)))


def f_beta(
    s: MapLike,
    g: MaskLike,
    threshold_policy: ThresholdPolicy = ThresholdPolicy.ADAPTIVE,
    threshold: float = 0.5,
    beta2: Optional[float] = None,
) -> Optional[float]:
    """None when g has no foreground."""
    s, g = _prepare(s, g)
    n_fg = int(np.count_nonzero(g))
    if n_fg == 0:
        return None
    beta2 = settings.FBETA_BETA2 if beta2 is None else beta2
    if ThresholdPolicy(threshold_policy) is ThresholdPolicy.ADAPTIVE:
        threshold = adaptive_threshold(s)
    predicted = binarize(s, threshold)
    tp = np.count_nonzero(predicted & g)
    return float(f_score(tp, np.count_nonzero(predicted), n_fg, beta2))


def max_f(s: MapLike, g: MaskLike, beta2: Optional[float] = None) -> Optional[float]:
    """
    Best F over thresholds t in {0, 1/255, ..., 1} with the binarize rule,
    so max_f equals the largest f_beta(FIXED, k/255).

    Counts come from one sort of the positive pixels and a binary search per
    threshold, so they are the same integers a per-threshold loop would produce.
    """
    s, g = _prepare(s, g)
    n_fg = int(np.count_nonzero(g))
    if n_fg == 0:
        return None
    beta2 = settings.FBETA_BETA2 if beta2 is None else beta2
    positive = s > 0.0
    all_sorted = np.sort(s[positive], axis=None)
    fg_sorted = np.sort(s[g & positive], axis=None)
    n_pred = all_sorted.size - np.searchsorted(all_sorted, MAX_F_THRESHOLDS, side="left")
    tp = fg_sorted.size - np.searchsorted(fg_sorted, MAX_F_THRESHOLDS, side="left")
    return float(np.max(f_score(tp, n_pred, n_fg, beta2)))


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """Normalized size x size Gaussian, tiny tails zeroed like MATLAB's fspecial."""
    half = (size - 1) / 2.0
    y, x = np.ogrid[-half : half + 1, -half : half + 1]
    kernel = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    kernel[kernel < np.finfo(kernel.dtype).eps * kernel.max()] = 0.0
    return kernel / kernel.sum()


def nearest_foreground(g: np.ndarray, wrap: bool = True) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Distance from every pixel to its nearest foreground pixel and that pixel's
    (row, col). With `wrap`, distances are measured across the left/right seam.
    """
    h, w = g.shape
    if not wrap:
        dist, (rows, cols) = ndimage.distance_transform_edt(~g, return_indices=True)
        return dist, rows, cols
    tiled = np.tile(~g, (1, 3))
    dist, (rows, cols) = ndimage.distance_transform_edt(tiled, return_indices=True)
    middle = slice(w, 2 * w)
    return dist[:, middle], rows[:, middle], np.mod(cols[:, middle], w)


def _smooth_errors(errors: np.ndarray, kernel: np.ndarray, wrap: bool) -> np.ndarray:
    if not wrap:
        return ndimage.correlate(errors, kernel, mode="constant", cval=0.0)
    pad = kernel.shape[1] // 2
    padded = np.pad(errors, ((0, 0), (pad, pad)), mode="wrap")
    smoothed = ndimage.correlate(padded, kernel, mode="constant", cval=0.0)
    return smoothed[:, pad : pad + errors.shape[1]]


def weighted_f(
    s: MapLike,
    g: MaskLike,
    wrap: bool = True,
    beta2: Optional[float] = None,
    sigma: Optional[float] = None,
    window: Optional[int] = None,
) -> Optional[float]:
    """
    Weighted F-measure: background errors inherit the error of their nearest
    foreground pixel, foreground errors are Gaussian-smoothed (keeping the
    smaller of raw and smoothed), and background errors are amplified by
    2 - exp(ln(0.5)/5 * distance to foreground).

    `wrap=False` gives planar distances and zero padding on all sides.
    """
    s, g = _prepare(s, g)
    if not g.any():
        return None
    beta2 = settings.FBETA_BETA2 if beta2 is None else beta2
    sigma = settings.WFM_SIGMA if sigma is None else sigma
    window = settings.WFM_WINDOW if window is None else window

    gt = g.astype(np.float64)
    dist, rows, cols = nearest_foreground(g, wrap=wrap)
    errors = np.abs(s - gt)
    dependent = errors.copy()
    background = ~g
    dependent[background] = errors[rows[background], cols[background]]
    smoothed = _smooth_errors(dependent, gaussian_window(window, sigma), wrap)
    min_errors = np.where(g & (smoothed < errors), smoothed, errors)
    importance = np.where(background, 2.0 - np.exp(math.log(0.5) / 5.0 * dist), 1.0)
    weighted = min_errors * importance

    tp_w = float(np.count_nonzero(g)) - float(np.sum(weighted[g]))
    fp_w = float(np.sum(weighted[background]))
    recall = 1.0 - float(np.mean(weighted[g]))
    precision = tp_w / (tp_w + fp_w) if tp_w + fp_w > 0 else 0.0
    denominator = recall + beta2 * precision
    if denominator <= 0:
        return 0.0
    return (1.0 + beta2) * recall * precision / denominator


# S-measure


def _object_similarity(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return 2.0 * mean / (mean * mean + 1.0 + std)


def _object_score(s: np.ndarray, g: np.ndarray) -> float:
    u = float(np.mean(g))
    fg = _object_similarity((s * g)[g])
    bg = _object_similarity(((1.0 - s) * ~g)[~g])
    return u * fg + (1.0 - u) * bg


def _block_ssim(s: np.ndarray, g: np.ndarray) -> float:
    n = s.size
    if n == 0:
        return 0.0
    gt = g.astype(np.float64)
    x = float(np.mean(s))
    y = float(np.mean(gt))
    if n > 1:
        sigma_x = float(np.sum((s - x) ** 2)) / (n - 1)
        sigma_y = float(np.sum((gt - y) ** 2)) / (n - 1)
        sigma_xy = float(np.sum((s - x) * (gt - y))) / (n - 1)
    else:
        sigma_x = sigma_y = sigma_xy = 0.0
    alpha = 4.0 * x * y * sigma_xy
    beta = (x * x + y * y) * (sigma_x + sigma_y)
    if alpha != 0:
        return alpha / beta
    return 1.0 if beta == 0 else 0.0


def foreground_centroid(g: np.ndarray) -> Tuple[int, int]:
    """(col, row) split point: the rounded foreground centroid, one past it."""
    h, w = g.shape
    if not g.any():
        return int(np.round(w / 2)) + 1, int(np.round(h / 2)) + 1
    row, col = np.argwhere(g).mean(axis=0).round()
    return int(col) + 1, int(row) + 1


def _region_score(s: np.ndarray, g: np.ndarray) -> float:
    h, w = g.shape
    x, y = foreground_centroid(g)
    area = float(h * w)
    w1 = x * y / area
    w2 = y * (w - x) / area
    w3 = (h - y) * x / area
    w4 = 1.0 - w1 - w2 - w3
    blocks = [
        (slice(0, y), slice(0, x), w1),
        (slice(0, y), slice(x, w), w2),
        (slice(y, h), slice(0, x), w3),
        (slice(y, h), slice(x, w), w4),
    ]
    return sum(weight * _block_ssim(s[rows, cols], g[rows, cols]) for rows, cols, weight in blocks)


def s_measure(s: MapLike, g: MaskLike, alpha: Optional[float] = None) -> float:
    """
    Structure measure: alpha * object-aware + (1 - alpha) * region-aware
    similarity. Empty g scores 1 - mean(s); a full g scores mean(s).

    The region term splits the image at the foreground centroid, so unlike
    the other metrics it changes under a circular shift.
    """
    s, g = _prepare(s, g)
    alpha = settings.SM_ALPHA if alpha is None else alpha
    y = float(np.mean(g))
    if y == 0.0:
        return 1.0 - float(np.mean(s))
    if y == 1.0:
        return float(np.mean(s))
    score = alpha * _object_score(s, g) + (1.0 - alpha) * _region_score(s, g)
    return max(0.0, score)


def e_measure(s: MapLike, g: MaskLike) -> float:
    """
    Enhanced-alignment measure on the adaptively binarized prediction.

    Constant ground truth falls back to the fraction of pixels predicted with
    the same label.
    """
    s, g = _prepare(s, g)
    predicted = binarize(s, adaptive_threshold(s))
    n = g.size
    n_fg = int(np.count_nonzero(g))
    if n_fg == 0:
        return float(np.count_nonzero(~predicted)) / n
    if n_fg == n:
        return float(np.count_nonzero(predicted)) / n
    phi_s = predicted.astype(np.float64) - np.mean(predicted)
    phi_g = g.astype(np.float64) - np.mean(g)
    # phi_g is nonzero everywhere once g is not constant
    align = 2.0 * phi_s * phi_g / (phi_s * phi_s + phi_g * phi_g)
    return float(np.mean((1.0 + align) ** 2 / 4.0))


# --- Reports ---


def _unit(value: Optional[float]) -> Optional[float]:
    return None if value is None else min(max(float(value), 0.0), 1.0)


def evaluate_pair(s: MapLike, g: MaskLike, path: str = "", wrap: bool = True) -> MetricsReport:
    s, g = _prepare(s, g)
    return MetricsReport(
        path=path,
        mae=_unit(mae(s, g)),
        f_beta=_unit(f_beta(s, g)),
        w_f_beta=_unit(weighted_f(s, g, wrap=wrap)),
        max_f=_unit(max_f(s, g)),
        s_measure=_unit(s_measure(s, g)),
        e_measure=_unit(e_measure(s, g)),
    )


def aggregate_reports(reports: Sequence[MetricsReport], subset: Subset = Subset.ALL) -> DatasetReport:
    """Per-metric mean over the samples where the metric is defined, in input order."""
    means: Dict[str, Optional[float]] = {}
    for name in METRIC_NAMES:
        values = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        means[name] = float(np.mean(values)) if values else None
    excluded = sum(1 for r in reports if r.has_empty_ground_truth)
    if excluded:
        logger.warning(
            f"{excluded} of {len(reports)} samples ({subset.value}) have empty ground truth; "
            "excluded from f_beta, w_f_beta and max_f."
        )
    return DatasetReport(subset=subset, n_images=len(reports), n_excluded=excluded, **means)


def evaluate_dataset(
    pairs: Iterable[Tuple[MapLike, MaskLike]], jobs: int = 1, wrap: bool = True
) -> Tuple[List[MetricsReport], DatasetReport]:
    pairs = list(pairs)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(lambda pair: evaluate_pair(*pair, wrap=wrap), pairs))
    else:
        reports = [evaluate_pair(s, g, wrap=wrap) for s, g in pairs]
    return reports, aggregate_reports(reports)


def evaluate_subsets(
    reports: Sequence[MetricsReport], edge_flags: Sequence[bool]
) -> Dict[Subset, DatasetReport]:
    """Aggregates over all samples, those with discontinuous edge effects, and the rest."""
    if len(reports) != len(edge_flags):
        raise UsageError(f"{len(reports)} reports but {len(edge_flags)} edge flags.")
    return {
        Subset.ALL: aggregate_reports(reports, Subset.ALL),
        Subset.EDGE_DISC: aggregate_reports(
            [r for r, flag in zip(reports, edge_flags) if flag], Subset.EDGE_DISC
        ),
        Subset.CONTINUOUS: aggregate_reports(
            [r for r, flag in zip(reports, edge_flags) if not flag], Subset.CONTINUOUS
        ),
    }


def attribute_curves(
    per_sample_scores: Iterable[Tuple[float, float]], window: Optional[int] = None
) -> pd.DataFrame:
    """
    Sort (attribute, score) pairs by attribute (stable) and smooth the scores
    with a centered moving average; edge windows use what is available.
    """
    window = settings.CURVE_WINDOW if window is None else window
    if window < 1:
        raise UsageError(f"Curve window must be >= 1, got {window}.")
    frame = pd.DataFrame(list(per_sample_scores), columns=["attr", "score"], dtype=np.float64)
    if frame.empty:
        return pd.DataFrame(columns=CURVE_CSV_COLUMNS)
    frame = frame.sort_values("attr", kind="mergesort", ignore_index=True)
    smoothed = frame["score"].rolling(window, center=True, min_periods=1).mean()
    return pd.DataFrame(
        {"rank": np.arange(1, len(frame) + 1), "attr": frame["attr"], "score_smoothed": smoothed}
    )
