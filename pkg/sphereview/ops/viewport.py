# sphereview/ops/viewport.py
"""Perspective (gnomonic) viewport extraction with zero roll: up follows the meridian through P."""

import logging
import math
from typing import Tuple

import numpy as np

from sphereview.models.enums import Interpolation
from sphereview.ops.geometry import lonlat_to_pixel, xyz_to_lonlat
from sphereview.ops.remap import restore_dtype, sample_grid
from sphereview.schemas.geometry import GridDims
from sphereview.schemas.grids import ErpImage
from sphereview.schemas.viewport import ViewportSpec

logger = logging.getLogger(__name__)


def tangent_plane_coordinates(spec: ViewportSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tangent-plane (east, north) offsets for each output pixel, one step of
    2 tan(fov / 2) / size apart. Pixel (h // 2, w // 2) sits at (0, 0) so it
    samples the viewpoint exactly; for even sizes the lattice therefore spans
    [-tan, tan - step] and the view is half a pixel west and north of symmetric.
    """
    row_c, col_c = spec.center_index
    step_x = 2.0 * math.tan(spec.fovh / 2.0) / spec.out_w
    step_y = 2.0 * math.tan(spec.fovv / 2.0) / spec.out_h
    cols = (np.arange(spec.out_w, dtype=np.float64) - col_c) * step_x
    rows = (row_c - np.arange(spec.out_h, dtype=np.float64)) * step_y
    east, north = np.meshgrid(cols, rows)
    return east, north


def viewport_directions(spec: ViewportSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Longitude/latitude seen through each viewport pixel."""
    lon0, lat0 = spec.viewpoint.lon, spec.viewpoint.lat
    center = np.array(
        [math.cos(lat0) * math.cos(lon0), math.cos(lat0) * math.sin(lon0), math.sin(lat0)]
    )
    east_axis = np.array([-math.sin(lon0), math.cos(lon0), 0.0])
    north_axis = np.array(
        [-math.sin(lat0) * math.cos(lon0), -math.sin(lat0) * math.sin(lon0), math.cos(lat0)]
    )
    east, north = tangent_plane_coordinates(spec)
    rays = (
        center[np.newaxis, np.newaxis, :]
        + east[..., np.newaxis] * east_axis
        + north[..., np.newaxis] * north_axis
    )
    rays /= np.linalg.norm(rays, axis=-1, keepdims=True)
    return xyz_to_lonlat(rays[..., 0], rays[..., 1], rays[..., 2])


def viewport_source_coordinates(
    spec: ViewportSpec, dims: GridDims
) -> Tuple[np.ndarray, np.ndarray]:
    lon, lat = viewport_directions(spec)
    return lonlat_to_pixel(lon, lat, dims.w, dims.h)


def extract_viewport(
    img: ErpImage, spec: ViewportSpec, interp: Interpolation = Interpolation.BILINEAR
) -> np.ndarray:
    """Returns an (out_h, out_w, c) array with the image dtype."""
    src_u, src_v = viewport_source_coordinates(spec, img.dims)
    sampled = sample_grid(img.data, src_u, src_v, interp)
    logger.debug(
        f"Viewport at ({math.degrees(spec.viewpoint.lon):.2f}, {math.degrees(spec.viewpoint.lat):.2f}) deg, "
        f"{spec.out_w}x{spec.out_h}"
    )
    return restore_dtype(sampled, img.data.dtype)
