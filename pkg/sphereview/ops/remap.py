# sphereview/ops/remap.py
"""
Dense backward-warp fields realizing F = T o SP^-1 o f o SP o T^-1 on an ERP grid.

Each output pixel center is pushed through F^-1 (T^-1, SP, f^-1, SP^-1, T) to
find the continuous source coordinate it samples, so every output pixel
receives a value. Sampling wraps horizontally (longitude is periodic) and
clamps vertically; within one row of a pole the clamp is an approximation.
"""

import cmath
import logging
import math
import threading
from collections import OrderedDict
from typing import Optional, Tuple

import numpy as np

from sphereview.core.config import settings
from sphereview.core.exceptions import UsageError
from sphereview.models.enums import Interpolation
from sphereview.ops.geometry import (
    inverse_stereographic_pairs,
    lonlat_to_pixel,
    lonlat_to_xyz,
    pixel_to_lonlat,
    stereographic_pairs,
    xyz_to_lonlat,
)
from sphereview.ops.mobius import apply_pairs, inverse
from sphereview.schemas.geometry import GridDims
from sphereview.schemas.grids import ErpImage, FeatureGrid, RemapField
from sphereview.schemas.mobius import MobiusTransform

logger = logging.getLogger(__name__)

SHIFT_SNAP_TOL = 1e-9


def _polar_rotation_angle(f: MobiusTransform) -> Optional[float]:
    """Longitude increment of f when it is a rotation about the polar axis, else None."""
    if not f.is_diagonal() or abs(abs(f.a) - abs(f.d)) > 1e-12:
        return None
    return cmath.phase(f.a / f.d)


def backward_coordinates(
    f: MobiusTransform, u: np.ndarray, v: np.ndarray, dims: GridDims
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Source coordinates for output coordinates (u, v) under the view transform f.

    u is wrapped into [0, w); v is left unclamped so fields can be composed
    analytically.
    """
    f_inv = inverse(f)
    w, h = dims.w, dims.h
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)

    angle = _polar_rotation_angle(f_inv)
    if angle is not None:
        # Pure longitude shift: keep rows untouched and snap whole-column shifts.
        cols = angle * w / (2.0 * math.pi)
        if abs(cols - round(cols)) < SHIFT_SNAP_TOL:
            cols = float(round(cols))
        src_u = np.mod(u + cols, w)
        return np.where(src_u >= w, src_u - w, src_u), v.copy()

    lon, lat = pixel_to_lonlat(u, v, w, h)
    x, y, z = lonlat_to_xyz(lon, lat)
    p, q = stereographic_pairs(x, y, z)
    p, q = apply_pairs(f_inv, p, q)
    x, y, z = inverse_stereographic_pairs(p, q)
    lon, lat = xyz_to_lonlat(x, y, z)
    return lonlat_to_pixel(lon, lat, w, h)


def build_remap_field(f: MobiusTransform, dims: GridDims) -> RemapField:
    rows, cols = np.meshgrid(
        np.arange(dims.h, dtype=np.float64), np.arange(dims.w, dtype=np.float64), indexing="ij"
    )
    src_u, src_v = backward_coordinates(f, cols, rows, dims)
    src_v = np.clip(src_v, 0.0, dims.h - 1.0)
    return RemapField(dims=dims, src_u=src_u, src_v=src_v)


class RemapFieldCache:
    """LRU of fields keyed by (canonical coefficients, dims); readers share, inserts are exclusive."""

    def __init__(self, max_size: int):
        self.max_size = max_size
        self._entries: "OrderedDict[tuple, RemapField]" = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, f: MobiusTransform, dims: GridDims) -> RemapField:
        key = (f.cache_key, dims.w, dims.h)
        with self._lock:
            field = self._entries.get(key)
            if field is not None:
                self._entries.move_to_end(key)
                self.hits += 1
                return field
            self.misses += 1
        field = build_remap_field(f, dims)
        if self.max_size <= 0:
            return field
        with self._lock:
            # another thread may have inserted meanwhile; keep the first one
            existing = self._entries.setdefault(key, field)
            self._entries.move_to_end(key)
            while len(self._entries) > self.max_size:
                self._entries.popitem(last=False)
            n_entries = len(self._entries)
        logger.debug(f"Remap field cached for dims {dims} ({n_entries} entries).")
        return existing

    def clear(self):
        with self._lock:
            self._entries.clear()
            self.hits = 0
            self.misses = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


field_cache = RemapFieldCache(settings.REMAP_CACHE_SIZE)


# --- Sampling ---


def sample_grid(
    data: np.ndarray, src_u: np.ndarray, src_v: np.ndarray, interp: Interpolation
) -> np.ndarray:
    """
    Sample an (h, w, c) array at continuous coordinates with horizontal wrap and
    vertical clamp. Nearest keeps the dtype; bilinear returns float64.
    """
    h, w = data.shape[:2]
    v = np.clip(src_v, 0.0, h - 1.0)
    if Interpolation(interp) is Interpolation.NEAREST:
        iu = np.mod(np.floor(src_u + 0.5).astype(np.int64), w)
        iv = np.clip(np.floor(v + 0.5).astype(np.int64), 0, h - 1)
        return data[iv, iu]

    values = data.astype(np.float64, copy=False)
    u0 = np.floor(src_u)
    v0 = np.floor(v)
    fu = (src_u - u0)[..., np.newaxis]
    fv = (v - v0)[..., np.newaxis]
    i0 = np.mod(u0.astype(np.int64), w)
    i1 = np.mod(i0 + 1, w)
    j0 = np.clip(v0.astype(np.int64), 0, h - 1)
    j1 = np.clip(j0 + 1, 0, h - 1)
    # lerp form: constants stay exact and zero fractions reproduce the source exactly
    top = values[j0, i0] + fu * (values[j0, i1] - values[j0, i0])
    bottom = values[j1, i0] + fu * (values[j1, i1] - values[j1, i0])
    return top + fv * (bottom - top)


def restore_dtype(sampled: np.ndarray, dtype: np.dtype) -> np.ndarray:
    if np.issubdtype(dtype, np.integer) and sampled.dtype != dtype:
        info = np.iinfo(dtype)
        return np.clip(np.rint(sampled), info.min, info.max).astype(dtype)
    return sampled.astype(dtype, copy=False)


def warp_image(
    img: ErpImage, field: RemapField, interp: Interpolation = Interpolation.BILINEAR
) -> ErpImage:
    if img.dims != field.dims:
        raise UsageError(f"Image dims {img.dims} do not match field dims {field.dims}.")
    sampled = sample_grid(img.data, field.src_u, field.src_v, interp)
    return ErpImage(data=restore_dtype(sampled, img.data.dtype))


def warp_array(
    data: np.ndarray, field: RemapField, interp: Interpolation = Interpolation.BILINEAR
) -> np.ndarray:
    """Warp an (h, w) or (h, w, c) array of any aspect with a field of matching dims."""
    squeeze = data.ndim == 2
    grid = data[:, :, np.newaxis] if squeeze else data
    if GridDims.from_shape(grid.shape) != field.dims:
        raise UsageError(f"Array shape {data.shape} does not match field dims {field.dims}.")
    sampled = restore_dtype(sample_grid(grid, field.src_u, field.src_v, interp), grid.dtype)
    return sampled[:, :, 0] if squeeze else sampled


def transform_features(
    fg: FeatureGrid,
    f: MobiusTransform,
    interp: Interpolation = Interpolation.BILINEAR,
    cache: Optional[RemapFieldCache] = None,
) -> FeatureGrid:
    """Move every channel through the same geometric transform; values are carried, not altered."""
    field = (cache if cache is not None else field_cache).get(f, fg.dims)
    return FeatureGrid(data=warp_array(fg.data, field, interp))


def inverse_transform_features(
    fg: FeatureGrid,
    f: MobiusTransform,
    interp: Interpolation = Interpolation.BILINEAR,
    cache: Optional[RemapFieldCache] = None,
) -> FeatureGrid:
    return transform_features(fg, inverse(f), interp, cache)
