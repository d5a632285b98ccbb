# sphereview/ops/stats.py
"""
Per-mask dataset statistics on binary ERP ground truth: distortion degree,
discontinuous edge effects, FoV coverage and foreground ratio, plus the
dataset-level histograms built from them.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import ndimage

from sphereview.core.exceptions import UsageError
from sphereview.ops.geometry import pixel_to_lonlat
from sphereview.schemas.grids import SaliencyMask
from sphereview.schemas.stats import HISTOGRAM_CSV_COLUMNS, RegionStats

logger = logging.getLogger(__name__)

FOUR_CONNECTIVITY = ndimage.generate_binary_structure(2, 1)

# Histogram ranges used by the stats command for the FoV attributes.
ATTRIBUTE_RANGES = {
    "max_hfov": (0.0, 360.0),
    "max_vfov": (0.0, 180.0),
}


@dataclass(frozen=True)
class Component:
    rows: np.ndarray
    cols: np.ndarray

    @property
    def size(self) -> int:
        return int(self.rows.size)


def row_latitudes(h: int) -> np.ndarray:
    _, lat = pixel_to_lonlat(0.0, np.arange(h, dtype=np.float64), 2 * h, h)
    return lat


def distortion_degree(mask: SaliencyMask) -> Optional[float]:
    """
    Mean of 1/cos(lat) over rows holding at least one salient pixel.

    Returns None when the mask has no salient pixel.
    """
    occupied = mask.data.any(axis=1)
    if not occupied.any():
        return None
    lat = row_latitudes(mask.dims.h)[occupied]
    return float(np.mean(1.0 / np.cos(lat)))


def _find_root(parent: np.ndarray, label: int) -> int:
    while parent[label] != label:
        parent[label] = parent[parent[label]]
        label = parent[label]
    return label


def label_components(data: np.ndarray, wrap: bool = True) -> Tuple[np.ndarray, int]:
    """
    4-connected labels; with `wrap`, column w-1 touches column 0. Labels are
    renumbered 1..n in raster order of first appearance.
    """
    labels, count = ndimage.label(data, structure=FOUR_CONNECTIVITY)
    if count == 0:
        return labels, 0
    if wrap:
        parent = np.arange(count + 1)
        seam_rows = np.flatnonzero(data[:, 0] & data[:, -1])
        for row in seam_rows:
            left = _find_root(parent, labels[row, 0])
            right = _find_root(parent, labels[row, -1])
            if left != right:
                parent[max(left, right)] = min(left, right)
        roots = np.array([_find_root(parent, k) for k in range(count + 1)])
        labels = roots[labels]
    flat = labels.ravel()
    present = flat[flat > 0]
    _, first_seen = np.unique(present, return_index=True)
    ordered = np.unique(present)[np.argsort(first_seen)]
    remap = np.zeros(int(labels.max()) + 1, dtype=np.int64)
    remap[ordered] = np.arange(1, ordered.size + 1)
    return remap[labels], int(ordered.size)


def wrap_components(mask: SaliencyMask, wrap: bool = True) -> List[Component]:
    labels, count = label_components(mask.data, wrap=wrap)
    if count == 0:
        return []
    rows, cols = np.nonzero(labels)
    owners = labels[rows, cols]
    order = np.argsort(owners, kind="stable")
    rows, cols, owners = rows[order], cols[order], owners[order]
    splits = np.flatnonzero(np.diff(owners)) + 1
    return [
        Component(rows=r, cols=c)
        for r, c in zip(np.split(rows, splits), np.split(cols, splits))
    ]


def edge_discontinuity(mask: SaliencyMask) -> bool:
    """
    True when a salient region crosses the left/right border, i.e. some row has
    foreground in both column 0 and column w-1. Those two pixels are seam
    neighbours, so they always belong to the same wrap component; a full-width
    band therefore counts as discontinuous.
    """
    data = mask.data
    return bool(np.any(data[:, 0] & data[:, -1]))


def component_fov(component: Component, w: int, h: int) -> Tuple[float, float]:
    """(hfov, vfov) in degrees; hfov is the complement of the widest circular column gap."""
    cols = np.unique(component.cols)
    gaps = np.diff(cols) - 1
    wrap_gap = cols[0] + w - cols[-1] - 1
    largest_gap = max(int(gaps.max()) if gaps.size else 0, int(wrap_gap))
    hfov = (w - largest_gap) * 360.0 / w
    vfov = (int(component.rows.max()) - int(component.rows.min()) + 1) * 180.0 / h
    return hfov, vfov


def fov_coverage(
    mask: SaliencyMask, components: Optional[Sequence[Component]] = None
) -> Tuple[float, float]:
    if components is None:
        components = wrap_components(mask)
    if not components:
        return 0.0, 0.0
    w, h = mask.dims.w, mask.dims.h
    fovs = [component_fov(c, w, h) for c in components]
    return max(f[0] for f in fovs), max(f[1] for f in fovs)


def foreground_ratio(mask: SaliencyMask) -> float:
    return float(np.count_nonzero(mask.data)) / mask.data.size


def compute_region_stats(mask: SaliencyMask, path: str = "") -> RegionStats:
    components = wrap_components(mask)
    max_hfov, max_vfov = fov_coverage(mask, components)
    return RegionStats(
        path=path,
        distortion=distortion_degree(mask),
        edge_discontinuous=edge_discontinuity(mask),
        max_hfov=max_hfov,
        max_vfov=max_vfov,
        fg_ratio=foreground_ratio(mask),
        n_components=len(components),
    )


def dataset_histograms(
    stats: Iterable[RegionStats],
    attribute: str = "distortion",
    bins: Union[int, Sequence[float]] = 20,
    cumulative: bool = False,
    value_range: Optional[Tuple[float, float]] = None,
) -> pd.DataFrame:
    """
    Binned percentages of an attribute over a dataset. Absent values (distortion
    of empty masks) are skipped. The plain variant sums to 100; the cumulative
    variant is non-decreasing and ends at exactly 100. Bins are all zero when
    no value falls inside the range.
    """
    if attribute not in RegionStats.model_fields:
        raise UsageError(f"Unknown statistics attribute '{attribute}'.")
    values = np.array(
        [getattr(s, attribute) for s in stats if getattr(s, attribute) is not None],
        dtype=np.float64,
    )
    if values.size == 0:
        return pd.DataFrame(columns=HISTOGRAM_CSV_COLUMNS)
    if value_range is None:
        value_range = ATTRIBUTE_RANGES.get(attribute)
    counts, edges = np.histogram(values, bins=bins, range=value_range)
    total = counts.sum()
    if total == 0:
        logger.warning(f"No '{attribute}' values fall inside the histogram range {value_range}.")
        return pd.DataFrame({"bin_lo": edges[:-1], "bin_hi": edges[1:], "percent": np.zeros(counts.size)})
    if cumulative:
        percent = np.cumsum(counts) / total * 100.0
    else:
        percent = counts / total * 100.0
    if total < values.size:
        logger.warning(
            f"{values.size - total} '{attribute}' values fall outside the histogram range {value_range}."
        )
    return pd.DataFrame({"bin_lo": edges[:-1], "bin_hi": edges[1:], "percent": percent})


def edge_discontinuity_share(stats: Iterable[RegionStats]) -> Tuple[float, float]:
    """(percent with discontinuous edge effects, percent without)."""
    flags = [s.edge_discontinuous for s in stats]
    if not flags:
        return 0.0, 0.0
    yes = 100.0 * sum(flags) / len(flags)
    return yes, 100.0 - yes
