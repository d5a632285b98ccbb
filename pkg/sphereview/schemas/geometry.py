# sphereview/schemas/geometry.py

import math
from typing import Optional, Sequence

import numpy as np
from pydantic import Field, field_validator, model_validator

from sphereview.core.exceptions import ConfigurationError, DomainError
from sphereview.schemas.base import FrozenSchema

UNIT_NORM_TOL = 1e-12
HALF_PI = math.pi / 2.0


def wrap_longitude(lon: float) -> float:
    wrapped = math.fmod(lon + math.pi, 2.0 * math.pi)
    if wrapped < 0.0:
        wrapped += 2.0 * math.pi
    wrapped -= math.pi
    if wrapped >= math.pi:
        wrapped -= 2.0 * math.pi
    return wrapped


class GridDims(FrozenSchema):
    w: int = Field(..., description="Pixel count along a row (longitude).")
    h: int = Field(..., description="Pixel count along a column (latitude).")

    @model_validator(mode="after")
    def _check_positive(self) -> "GridDims":
        if self.w <= 0 or self.h <= 0:
            raise ConfigurationError(f"Grid dims must be positive, got {self.w}x{self.h}.")
        return self

    @property
    def is_erp(self) -> bool:
        return self.w == 2 * self.h

    def require_erp(self) -> "GridDims":
        if not self.is_erp:
            raise ConfigurationError(
                f"ERP grids must be exactly 2:1 (w = 2h), got {self.w}x{self.h}."
            )
        return self

    @property
    def shape(self) -> tuple:
        return (self.h, self.w)

    @classmethod
    def erp(cls, h: int) -> "GridDims":
        return cls(w=2 * h, h=h)

    @classmethod
    def from_shape(cls, shape: Sequence[int]) -> "GridDims":
        return cls(w=int(shape[1]), h=int(shape[0]))

    def __str__(self) -> str:
        return f"{self.w}x{self.h}"


class SphericalPoint(FrozenSchema):
    lon: float = Field(..., description="Longitude in radians, wrapped into [-pi, pi).")
    lat: float = Field(..., description="Latitude in radians, within [-pi/2, pi/2].")

    @field_validator("lon")
    @classmethod
    def _wrap_lon(cls, value: float) -> float:
        if not math.isfinite(value):
            raise DomainError(f"Longitude must be finite, got {value}.")
        return wrap_longitude(value)

    @field_validator("lat")
    @classmethod
    def _clamp_lat(cls, value: float) -> float:
        if not math.isfinite(value) or abs(value) > HALF_PI + 1e-9:
            raise DomainError(f"Latitude {value} rad is outside [-pi/2, pi/2].")
        return min(HALF_PI, max(-HALF_PI, value))

    @classmethod
    def from_degrees(cls, lon_deg: float, lat_deg: float) -> "SphericalPoint":
        return cls(lon=math.radians(lon_deg), lat=math.radians(lat_deg))


class UnitVector3(FrozenSchema):
    x: float
    y: float
    z: float

    @model_validator(mode="after")
    def _check_unit(self) -> "UnitVector3":
        norm_sq = self.x * self.x + self.y * self.y + self.z * self.z
        if not abs(norm_sq - 1.0) <= UNIT_NORM_TOL:
            raise DomainError(
                f"({self.x}, {self.y}, {self.z}) is not a unit vector (|v|^2 = {norm_sq})."
            )
        return self

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "UnitVector3":
        norm = math.sqrt(x * x + y * y + z * z)
        if not norm > 0.0 or not math.isfinite(norm):
            raise DomainError(f"Cannot normalize ({x}, {y}, {z}).")
        return cls(x=x / norm, y=y / norm, z=z / norm)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def __neg__(self) -> "UnitVector3":
        return UnitVector3(x=-self.x, y=-self.y, z=-self.z)


NORTH_POLE = UnitVector3(x=0.0, y=0.0, z=1.0)
SOUTH_POLE = UnitVector3(x=0.0, y=0.0, z=-1.0)


class PixelCoord(FrozenSchema):
    u: float = Field(..., description="Continuous column index; wraps modulo w.")
    v: float = Field(..., description="Continuous row index; clamped to [0, h-1] when sampling.")


class PlanePoint(FrozenSchema):
    """Homogeneous pair (p, q) standing for p/q on the extended complex plane; q = 0 is infinity."""

    p: complex
    q: complex

    @model_validator(mode="after")
    def _check_nonzero(self) -> "PlanePoint":
        if self.p == 0 and self.q == 0:
            raise DomainError("(0, 0) is not a valid homogeneous point.")
        if not all(math.isfinite(part) for c in (self.p, self.q) for part in (c.real, c.imag)):
            raise DomainError("Homogeneous coordinates must be finite.")
        return self

    @classmethod
    def finite(cls, z: complex) -> "PlanePoint":
        return cls(p=complex(z), q=1.0 + 0.0j)

    @classmethod
    def infinity(cls) -> "PlanePoint":
        return cls(p=1.0 + 0.0j, q=0.0j)

    @property
    def is_infinity(self) -> bool:
        return self.q == 0

    @property
    def value(self) -> Optional[complex]:
        """p/q, or None for the point at infinity."""
        if self.is_infinity:
            return None
        return self.p / self.q

    def same_point(self, other: "PlanePoint", tol: float = 1e-9) -> bool:
        # cross product of homogeneous pairs, scale-free
        scale = max(abs(self.p), abs(self.q)) * max(abs(other.p), abs(other.q))
        return abs(self.p * other.q - self.q * other.p) <= tol * scale
