# sphereview/schemas/metrics.py

from typing import Optional

from pydantic import Field

from sphereview.models.enums import Subset
from sphereview.schemas.base import BaseSchema

METRIC_NAMES = ["mae", "f_beta", "w_f_beta", "max_f", "s_measure", "e_measure"]

# Version strings written into report headers so numbers can be traced to the formulation.
METRIC_VERSIONS = {
    "f_beta": "adaptive-2mean",
    "w_f_beta": "margolin2014",
    "s_measure": "fan2017",
    "e_measure": "fan2018",
}


class MetricsReport(BaseSchema):
    """
    Per-image scores. Metrics that need foreground in the ground truth
    (f_beta, w_f_beta, max_f) are None for empty masks.
    """

    path: str = ""
    mae: float = Field(..., ge=0.0, le=1.0)
    f_beta: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    w_f_beta: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    max_f: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    s_measure: float = Field(..., ge=0.0, le=1.0)
    e_measure: float = Field(..., ge=0.0, le=1.0)

    @property
    def has_empty_ground_truth(self) -> bool:
        return self.f_beta is None

    def csv_row(self) -> dict:
        return {"path": self.path, **{name: getattr(self, name) for name in METRIC_NAMES}}


class DatasetReport(BaseSchema):
    subset: Subset = Subset.ALL
    n_images: int = Field(default=0, ge=0)
    n_excluded: int = Field(
        default=0, ge=0, description="Samples with empty ground truth, left out of f_beta/w_f_beta/max_f."
    )
    mae: Optional[float] = None
    f_beta: Optional[float] = None
    w_f_beta: Optional[float] = None
    max_f: Optional[float] = None
    s_measure: Optional[float] = None
    e_measure: Optional[float] = None

    def csv_row(self) -> dict:
        return {
            "subset": self.subset.value,
            "n_images": self.n_images,
            "n_excluded": self.n_excluded,
            **{name: getattr(self, name) for name in METRIC_NAMES},
        }


PER_IMAGE_CSV_COLUMNS = ["path"] + METRIC_NAMES
SUMMARY_CSV_COLUMNS = ["subset", "n_images", "n_excluded"] + METRIC_NAMES
CURVE_CSV_COLUMNS = ["rank", "attr", "score_smoothed"]
