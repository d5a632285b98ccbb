# sphereview/ops/geometry.py
"""
Coordinate conversions between the ERP pixel plane, longitude/latitude,
the unit sphere and the extended complex plane.

Conventions: pixel centers sit at half-integer offsets, the image center is
(lon, lat) = (0, 0), row 0 is the north edge, longitude grows with the column
index. Cartesian axes: x = cos(lat)cos(lon), y = cos(lat)sin(lon), z = sin(lat),
so the north pole N = (0, 0, 1) is the projection point of the stereographic
map and the south pole lands on the plane origin.

The array functions are the workhorses used by remap/viewport/stats; the
scalar functions wrap them for the schema types.
"""

import logging
import math
from typing import Sequence, Tuple, Union

import numpy as np

from sphereview.core.exceptions import DomainError
from sphereview.schemas.geometry import (
    GridDims,
    PixelCoord,
    PlanePoint,
    SphericalPoint,
    UnitVector3,
)

logger = logging.getLogger(__name__)

CARTESIAN_INPUT_TOL = 1e-6

ArrayLike = Union[float, np.ndarray]


# --- Array kernels ---


def pixel_to_lonlat(u: ArrayLike, v: ArrayLike, w: int, h: int) -> Tuple[np.ndarray, np.ndarray]:
    # Written as signed offsets from the center so rows v and h-1-v give exactly -lat/lat.
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    lon = np.pi * (2.0 * u + 1.0 - w) / w
    lat = np.pi * (h - 1.0 - 2.0 * v) / (2.0 * h)
    return lon, lat


def lonlat_to_pixel(
    lon: ArrayLike, lat: ArrayLike, w: int, h: int, wrap: bool = True
) -> Tuple[np.ndarray, np.ndarray]:
    lon = np.asarray(lon, dtype=np.float64)
    lat = np.asarray(lat, dtype=np.float64)
    u = (lon * w / np.pi + w - 1.0) / 2.0
    v = (h - 1.0 - lat * 2.0 * h / np.pi) / 2.0
    if wrap:
        u = np.mod(u, w)
        # np.mod can round up to exactly w for tiny negative inputs
        u = np.where(u >= w, u - w, u)
    return u, v


def lonlat_to_xyz(lon: ArrayLike, lat: ArrayLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    lon = np.asarray(lon, dtype=np.float64)
    lat = np.asarray(lat, dtype=np.float64)
    cos_lat = np.cos(lat)
    return cos_lat * np.cos(lon), cos_lat * np.sin(lon), np.sin(lat)


def xyz_to_lonlat(x: ArrayLike, y: ArrayLike, z: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    lon = np.arctan2(y, x)
    lat = np.arctan2(z, np.hypot(x, y))
    return lon, lat


def stereographic_pairs(x: ArrayLike, y: ArrayLike, z: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Homogeneous stereographic projection from the north pole.

    Southern points use (x + iy, 1 - z); northern points use the equivalent
    pair (1 + z, x - iy), which stays well conditioned next to N and encodes
    N itself as (2, 0), the point at infinity. No division is performed.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    # (1 + z) / (x - iy) == (x + iy) / (1 - z) on the unit sphere
    south = z <= 0.0
    p = np.where(south, x + 1j * y, (1.0 + z) + 0j)
    q = np.where(south, (1.0 - z) + 0j, x - 1j * y)
    return p, q


def inverse_stereographic_pairs(
    p: np.ndarray, q: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=np.complex128)
    q = np.asarray(q, dtype=np.complex128)
    scale = np.maximum(np.abs(p), np.abs(q))
    p = p / scale
    q = q / scale
    pp = p.real * p.real + p.imag * p.imag
    qq = q.real * q.real + q.imag * q.imag
    den = pp + qq
    cross = p * np.conj(q)
    return 2.0 * cross.real / den, 2.0 * cross.imag / den, (pp - qq) / den


# --- Scalar operations ---


def erp_to_sphere(pix: PixelCoord, dims: GridDims) -> SphericalPoint:
    dims.require_erp()
    lon, lat = pixel_to_lonlat(pix.u, pix.v, dims.w, dims.h)
    return SphericalPoint(lon=float(lon), lat=float(lat))


def sphere_to_erp(sp: SphericalPoint, dims: GridDims) -> PixelCoord:
    u, v = lonlat_to_pixel(sp.lon, sp.lat, dims.w, dims.h)
    return PixelCoord(u=float(u), v=float(v))


def sphere_to_cartesian(sp: SphericalPoint) -> UnitVector3:
    x, y, z = lonlat_to_xyz(sp.lon, sp.lat)
    return UnitVector3(x=float(x), y=float(y), z=float(z))


def as_unit_vector(
    v: Union[UnitVector3, Sequence[float]], tol: float = CARTESIAN_INPUT_TOL
) -> UnitVector3:
    if isinstance(v, UnitVector3):
        return v
    x, y, z = (float(c) for c in v)
    norm = math.sqrt(x * x + y * y + z * z)
    if not abs(norm - 1.0) <= tol:
        raise DomainError(f"({x}, {y}, {z}) is not a unit vector (norm {norm}).")
    return UnitVector3(x=x / norm, y=y / norm, z=z / norm)


def cartesian_to_sphere(v: Union[UnitVector3, Sequence[float]]) -> SphericalPoint:
    unit = as_unit_vector(v)
    lon, lat = xyz_to_lonlat(unit.x, unit.y, unit.z)
    return SphericalPoint(lon=float(lon), lat=float(lat))


def stereographic(v: UnitVector3) -> PlanePoint:
    p, q = stereographic_pairs(v.x, v.y, v.z)
    return PlanePoint(p=complex(p), q=complex(q))


def inverse_stereographic(z: PlanePoint) -> UnitVector3:
    x, y, zz = inverse_stereographic_pairs(np.complex128(z.p), np.complex128(z.q))
    # the closed form is unit to rounding; renormalize to stay within the schema tolerance
    return UnitVector3.normalized(float(x), float(y), float(zz))
