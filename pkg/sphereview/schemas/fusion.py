# sphereview/schemas/fusion.py

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator

from sphereview.core.config import settings
from sphereview.core.exceptions import ConfigurationError, UsageError
from sphereview.models.enums import BranchKind, Interpolation
from sphereview.schemas.base import BaseSchema, FrozenSchema
from sphereview.schemas.geometry import UnitVector3

ANGLE_TOL = 1e-12

# Logit large enough that expit() rounds to exactly 1.0 in float64.
SATURATED_LOGIT = 40.0


class ZoomParam(FrozenSchema):
    center: UnitVector3
    rho: float = Field(..., description="Zoom factor about `center`; must be positive and not 1.")

    @field_validator("rho")
    @classmethod
    def _check_rho(cls, value: float) -> float:
        if not (value > 0.0 and math.isfinite(value)):
            raise ConfigurationError(f"Zoom factor must be positive, got {value}.")
        if value == 1.0:
            raise ConfigurationError("Zoom factor 1 duplicates the original branch.")
        return value


class BranchSpec(FrozenSchema):
    """
    One View-Transformer branch: a family of sub-branches sharing a kind.
    Rotation kinds carry `angles` (radians); the zoom kind carries `zooms`.
    """

    kind: BranchKind
    angles: Tuple[float, ...] = ()
    zooms: Tuple[ZoomParam, ...] = ()
    branch_op: str = "identity"

    @model_validator(mode="after")
    def _check_params(self) -> "BranchSpec":
        if self.kind is BranchKind.ZOOM:
            if self.angles:
                raise ConfigurationError("Zoom branches take zoom parameters, not angles.")
            return self
        if self.zooms:
            raise ConfigurationError(f"{self.kind.value} branches take angles, not zoom parameters.")
        for angle in self.angles:
            if not math.isfinite(angle):
                raise ConfigurationError(f"Rotation angles must be finite, got {angle}.")
            turns = math.remainder(angle, 2.0 * math.pi)
            if abs(turns) <= ANGLE_TOL:
                raise ConfigurationError(
                    f"Angle {math.degrees(angle):g} deg is a full turn and duplicates the original branch."
                )
        return self

    @property
    def n_sub_branches(self) -> int:
        return len(self.zooms) if self.kind is BranchKind.ZOOM else len(self.angles)


@dataclass(frozen=True)
class FusionWeights:
    """One scalar weight per fused branch; index 0 is the original branch."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64).reshape(-1)
        if np.any(w < 0.0) or np.any(w > 1.0) or not np.all(np.isfinite(w)):
            raise UsageError(f"Fusion weights must lie in [0, 1], got {w.tolist()}.")
        object.__setattr__(self, "w", w)

    def __len__(self) -> int:
        return int(self.w.size)


@dataclass(frozen=True)
class GatingParams:
    """
    Squeeze-and-excitation gate C -> hidden -> K: w1 is (hidden, C), b1 is
    (hidden,), w2 is (K, hidden), b2 is (K,).
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.w1.ndim != 2 or self.w2.ndim != 2 or self.b1.ndim != 1 or self.b2.ndim != 1:
            raise UsageError("Gating weights must be matrices and biases vectors.")
        hidden = self.w1.shape[0]
        if self.b1.shape != (hidden,) or self.w2.shape[1] != hidden or self.b2.shape != (self.w2.shape[0],):
            raise UsageError(
                f"Inconsistent gating shapes: w1 {self.w1.shape}, b1 {self.b1.shape}, "
                f"w2 {self.w2.shape}, b2 {self.b2.shape}."
            )

    @property
    def channels(self) -> int:
        return int(self.w1.shape[1])

    @property
    def branches(self) -> int:
        return int(self.w2.shape[0])

    @classmethod
    def constant(
        cls, channels: int, branches: int, logit: float = 0.0, reduction: Optional[int] = None
    ) -> "GatingParams":
        """Zero weights with a fixed output bias: every branch gets expit(logit)."""
        reduction = settings.GATING_REDUCTION if reduction is None else reduction
        hidden = max(1, channels // reduction)
        return cls(
            w1=np.zeros((hidden, channels)),
            b1=np.zeros(hidden),
            w2=np.zeros((branches, hidden)),
            b2=np.full(branches, float(logit)),
        )

    @classmethod
    def neutral(cls, channels: int, branches: int, reduction: Optional[int] = None) -> "GatingParams":
        """Gate that passes every branch through with weight 1."""
        return cls.constant(channels, branches, SATURATED_LOGIT, reduction)

    @classmethod
    def random(
        cls, channels: int, branches: int, seed: int = 0, reduction: Optional[int] = None
    ) -> "GatingParams":
        reduction = settings.GATING_REDUCTION if reduction is None else reduction
        hidden = max(1, channels // reduction)
        rng = np.random.default_rng(seed)
        return cls(
            w1=rng.normal(0.0, 1.0 / math.sqrt(channels), (hidden, channels)),
            b1=np.zeros(hidden),
            w2=rng.normal(0.0, 1.0 / math.sqrt(hidden), (branches, hidden)),
            b2=np.zeros(branches),
        )


# --- YAML configuration ---


class ZoomConfig(BaseSchema):
    center: List[float] = Field(default_factory=lambda: [0.0, 0.0, -1.0], min_length=3, max_length=3)
    rho: float

    def to_param(self) -> ZoomParam:
        return ZoomParam(center=UnitVector3.normalized(*self.center), rho=self.rho)


class BranchConfig(BaseSchema):
    kind: BranchKind
    enabled: bool = True
    angles_deg: List[float] = Field(default_factory=list)
    zooms: List[ZoomConfig] = Field(default_factory=list)
    branch_op: str = "identity"

    def to_spec(self) -> BranchSpec:
        return BranchSpec(
            kind=self.kind,
            angles=tuple(math.radians(a) for a in self.angles_deg),
            zooms=tuple(z.to_param() for z in self.zooms),
            branch_op=self.branch_op,
        )


class GatingConfig(BaseSchema):
    params_path: Optional[str] = Field(
        default=None, description=".npz file with w1, b1, w2, b2; None gives every branch weight 1."
    )
    reduction: int = Field(default_factory=lambda: settings.GATING_REDUCTION, ge=1)


class SavtConfig(BaseSchema):
    branches: List[BranchConfig]
    gating: GatingConfig = Field(default_factory=GatingConfig)
    interpolation: Interpolation = Field(default_factory=lambda: settings.INTERPOLATION)

    def branch_specs(self) -> List[BranchSpec]:
        return [b.to_spec() for b in self.branches if b.enabled]
