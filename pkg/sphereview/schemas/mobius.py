# sphereview/schemas/mobius.py

import cmath
from typing import Tuple

import numpy as np
from pydantic import Field

from sphereview.core.exceptions import DomainError
from sphereview.schemas.base import FrozenSchema

COEFF_TOL = 1e-12
KEY_DECIMALS = 12


def _canonical_sign(coeffs: Tuple[complex, ...]) -> int:
    for c in coeffs:
        if abs(c) <= COEFF_TOL:
            continue
        if abs(c.real) > COEFF_TOL:
            return 1 if c.real > 0 else -1
        return 1 if c.imag > 0 else -1
    return 1


class MobiusTransform(FrozenSchema):
    """
    f(z) = (az + b) / (cz + d) with ad - bc normalized to 1.

    Instances are expected to come from `from_matrix` (or the constructors in
    sphereview.ops.mobius), which divide by a square root of the determinant
    and fix the remaining +/- ambiguity so that the first nonzero coefficient
    has a positive real part (positive imaginary part if the real part is 0).
    """

    a: complex = Field(default=1.0 + 0.0j)
    b: complex = Field(default=0.0j)
    c: complex = Field(default=0.0j)
    d: complex = Field(default=1.0 + 0.0j)

    @classmethod
    def from_matrix(cls, m) -> "MobiusTransform":
        m = np.asarray(m, dtype=np.complex128)
        a, b, c, d = complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1])
        det = a * d - b * c
        if not abs(det) > 0.0 or not cmath.isfinite(det):
            raise DomainError(f"Degenerate Mobius coefficients (det = {det}).")
        root = cmath.sqrt(det)
        a, b, c, d = a / root, b / root, c / root, d / root
        sign = _canonical_sign((a, b, c, d))
        if sign < 0:
            a, b, c, d = -a, -b, -c, -d
        return cls(a=a + 0.0, b=b + 0.0, c=c + 0.0, d=d + 0.0)

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls()

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.complex128)

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def coefficients(self) -> Tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    @property
    def cache_key(self) -> Tuple[float, ...]:
        parts = []
        for coef in self.coefficients:
            # +0.0 folds negative zero so equal transforms share a key
            parts.append(round(coef.real, KEY_DECIMALS) + 0.0)
            parts.append(round(coef.imag, KEY_DECIMALS) + 0.0)
        return tuple(parts)

    def is_rotation(self, tol: float = COEFF_TOL) -> bool:
        return (
            abs(self.c + self.b.conjugate()) <= tol
            and abs(self.d - self.a.conjugate()) <= tol
            and abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) <= tol
        )

    def is_diagonal(self, tol: float = COEFF_TOL) -> bool:
        return abs(self.b) <= tol and abs(self.c) <= tol

    def equivalent(self, other: "MobiusTransform", tol: float = 1e-9) -> bool:
        """Coefficient equality up to the overall sign of the matrix."""
        diff_plus = max(abs(x - y) for x, y in zip(self.coefficients, other.coefficients))
        diff_minus = max(abs(x + y) for x, y in zip(self.coefficients, other.coefficients))
        return min(diff_plus, diff_minus) <= tol

    def is_identity(self, tol: float = COEFF_TOL) -> bool:
        return self.equivalent(MobiusTransform.identity(), tol)
