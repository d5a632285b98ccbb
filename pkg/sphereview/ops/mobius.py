# sphereview/ops/mobius.py
"""
Mobius transformations acting on the Riemann sphere.

Elliptic transforms (c = -conj(b), d = conj(a), |a|^2 + |b|^2 = 1) are sphere
rotations; the diagonal hyperbolic transform z -> rho z is a zoom that fixes
the south pole (plane origin) and the north pole (infinity).
"""

import logging
import math
from typing import Sequence, Tuple, Union

import numpy as np

from sphereview.core.exceptions import DomainError
from sphereview.ops.geometry import as_unit_vector
from sphereview.schemas.geometry import PlanePoint, UnitVector3
from sphereview.schemas.mobius import MobiusTransform

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
POLE_ALIGN_TOL = 1e-12

VectorLike = Union[UnitVector3, Sequence[float]]


def rotation(axis: VectorLike, angle: float) -> MobiusTransform:
    """
    Rotation by `angle` radians about `axis`, right-hand rule, seen through
    SP^-1 o f o SP.

    a = cos(t/2) + i n sin(t/2), b = (i l - m) sin(t/2) for L = (l, m, n).
    """
    unit = as_unit_vector(axis)
    if not math.isfinite(angle):
        raise DomainError(f"Rotation angle must be finite, got {angle}.")
    theta = math.fmod(angle, TWO_PI)
    half = theta / 2.0
    cos_h, sin_h = math.cos(half), math.sin(half)
    a = complex(cos_h, unit.z * sin_h)
    b = complex(-unit.y * sin_h, unit.x * sin_h)
    return MobiusTransform.from_matrix([[a, b], [-b.conjugate(), a.conjugate()]])


def zoom(rho: float) -> MobiusTransform:
    """Origin-centred zoom z -> rho z; contraction for rho < 1, expansion for rho > 1."""
    if not (rho > 0.0 and math.isfinite(rho)):
        raise DomainError(f"Zoom factor must be positive, got {rho}.")
    return MobiusTransform.from_matrix([[rho, 0.0], [0.0, 1.0]])


def rotation_to_south_pole(center: VectorLike) -> MobiusTransform:
    """Minimal-angle rotation taking `center` to (0, 0, -1)."""
    c = as_unit_vector(center)
    # axis = center x (0, 0, -1)
    ax, ay = -c.y, c.x
    sin_angle = math.hypot(ax, ay)
    cos_angle = -c.z
    if sin_angle <= POLE_ALIGN_TOL:
        if cos_angle > 0.0:
            return MobiusTransform.identity()
        return rotation((1.0, 0.0, 0.0), math.pi)
    angle = math.atan2(sin_angle, cos_angle)
    return rotation((ax / sin_angle, ay / sin_angle, 0.0), angle)


def zoom_about(center: VectorLike, rho: float) -> MobiusTransform:
    """R^-1 o zoom(rho) o R with R taking `center` to the south pole; fixes center and -center."""
    to_origin = rotation_to_south_pole(center)
    return compose(inverse(to_origin), compose(zoom(rho), to_origin))


def compose(f: MobiusTransform, g: MobiusTransform) -> MobiusTransform:
    """f o g: apply g first."""
    return MobiusTransform.from_matrix(f.matrix @ g.matrix)


def compose_all(transforms: Sequence[MobiusTransform]) -> MobiusTransform:
    """Compose a sequence applied left to right: the first element acts first."""
    result = MobiusTransform.identity()
    for step in transforms:
        result = compose(step, result)
    return result


def inverse(f: MobiusTransform) -> MobiusTransform:
    return MobiusTransform.from_matrix([[f.d, -f.b], [-f.c, f.a]])


def apply(f: MobiusTransform, z: PlanePoint) -> PlanePoint:
    p, q = apply_pairs(f, np.complex128(z.p), np.complex128(z.q))
    return PlanePoint(p=complex(p), q=complex(q))


def apply_pairs(f: MobiusTransform, p: np.ndarray, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Homogeneous action (p, q) -> (ap + bq, cp + dq) on arrays."""
    return f.a * p + f.b * q, f.c * p + f.d * q
