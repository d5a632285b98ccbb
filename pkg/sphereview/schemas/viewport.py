# sphereview/schemas/viewport.py

import math

from pydantic import Field, model_validator

from sphereview.core.exceptions import DomainError
from sphereview.schemas.base import FrozenSchema
from sphereview.schemas.geometry import SphericalPoint


class ViewportSpec(FrozenSchema):
    viewpoint: SphericalPoint = Field(..., description="Tangent point P at the viewport center.")
    fovh: float = Field(..., description="Horizontal field of view, radians in (0, pi).")
    fovv: float = Field(..., description="Vertical field of view, radians in (0, pi).")
    out_w: int = Field(..., gt=0)
    out_h: int = Field(..., gt=0)

    @model_validator(mode="after")
    def _check_fov(self) -> "ViewportSpec":
        for name, fov in (("fovh", self.fovh), ("fovv", self.fovv)):
            if not (0.0 < fov < math.pi):
                raise DomainError(
                    f"{name} = {math.degrees(fov):.4g} deg is outside (0, 180); "
                    "the gnomonic projection diverges at 180 deg."
                )
        return self

    @classmethod
    def from_degrees(
        cls, lon: float, lat: float, fovh: float, fovv: float, out_w: int, out_h: int
    ) -> "ViewportSpec":
        return cls(
            viewpoint=SphericalPoint.from_degrees(lon, lat),
            fovh=math.radians(fovh),
            fovv=math.radians(fovv),
            out_w=out_w,
            out_h=out_h,
        )

    @property
    def center_index(self) -> tuple:
        """(row, col) of the pixel that samples the viewpoint exactly; off-center by half a pixel for even sizes."""
        return (self.out_h // 2, self.out_w // 2)
