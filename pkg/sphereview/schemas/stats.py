# sphereview/schemas/stats.py

from typing import Optional

from pydantic import Field, model_validator

from sphereview.schemas.base import BaseSchema


class RegionStats(BaseSchema):
    path: str = Field(default="", description="Source mask path, as given on the command line.")
    distortion: Optional[float] = Field(
        default=None, ge=1.0, description="Distortion degree; absent for masks with no salient pixel."
    )
    edge_discontinuous: bool = Field(
        default=False, description="Some salient region is split by the left/right ERP border."
    )
    max_hfov: float = Field(default=0.0, ge=0.0, le=360.0, description="Degrees.")
    max_vfov: float = Field(default=0.0, ge=0.0, le=180.0, description="Degrees.")
    fg_ratio: float = Field(default=0.0, ge=0.0, le=1.0)
    n_components: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _empty_has_no_distortion(self) -> "RegionStats":
        if self.fg_ratio == 0.0 and self.distortion is not None:
            raise ValueError("An empty mask has no distortion degree.")
        return self

    def csv_row(self) -> dict:
        return {
            "path": self.path,
            "fg_ratio": self.fg_ratio,
            "distortion": self.distortion,
            "edge_disc": int(self.edge_discontinuous),
            "max_hfov_deg": self.max_hfov,
            "max_vfov_deg": self.max_vfov,
            "n_components": self.n_components,
        }


STATS_CSV_COLUMNS = [
    "path",
    "fg_ratio",
    "distortion",
    "edge_disc",
    "max_hfov_deg",
    "max_vfov_deg",
    "n_components",
]

HISTOGRAM_CSV_COLUMNS = ["bin_lo", "bin_hi", "percent"]
