# sphereview/schemas/grids.py
"""Array containers. Frozen dataclasses around numpy arrays; shapes are (h, w[, c])."""

from dataclasses import dataclass

import numpy as np

from sphereview.core.exceptions import UsageError
from sphereview.schemas.geometry import GridDims


def _as_hwc(data: np.ndarray) -> np.ndarray:
    data = np.asarray(data)
    if data.ndim == 2:
        return data[:, :, np.newaxis]
    if data.ndim != 3:
        raise UsageError(f"Expected an (h, w) or (h, w, c) array, got shape {data.shape}.")
    return data


@dataclass(frozen=True)
class ErpImage:
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_hwc(self.data))
        self.dims.require_erp()

    @property
    def dims(self) -> GridDims:
        return GridDims.from_shape(self.data.shape)

    @property
    def channels(self) -> int:
        return int(self.data.shape[2])


@dataclass(frozen=True)
class FeatureGrid:
    """H x W x C real grid; the 2:1 aspect is not required."""

    data: np.ndarray

    def __post_init__(self):
        data = _as_hwc(self.data)
        if not np.issubdtype(data.dtype, np.floating):
            data = data.astype(np.float64)
        if not np.all(np.isfinite(data)):
            raise UsageError("Feature grids must contain finite values only.")
        object.__setattr__(self, "data", data)

    @property
    def dims(self) -> GridDims:
        return GridDims.from_shape(self.data.shape)

    @property
    def channels(self) -> int:
        return int(self.data.shape[2])


@dataclass(frozen=True)
class RemapField:
    """Backward-warp field: output pixel (i, j) samples the source at (src_u[i, j], src_v[i, j])."""

    dims: GridDims
    src_u: np.ndarray
    src_v: np.ndarray

    def __post_init__(self):
        if self.src_u.shape != self.dims.shape or self.src_v.shape != self.dims.shape:
            raise UsageError(
                f"Field arrays {self.src_u.shape}/{self.src_v.shape} do not match dims {self.dims}."
            )


@dataclass(frozen=True)
class SaliencyMask:
    """Binary ground truth on the ERP plane."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise UsageError(f"Masks are 2-D, got shape {data.shape}.")
        object.__setattr__(self, "data", data != 0)
        self.dims.require_erp()

    @property
    def dims(self) -> GridDims:
        return GridDims.from_shape(self.data.shape)


@dataclass(frozen=True)
class SaliencyMap:
    """Continuous prediction in [0, 1]; values outside are clamped."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise UsageError(f"Saliency maps are 2-D, got shape {data.shape}.")
        if not np.all(np.isfinite(data)):
            raise UsageError("Saliency maps must contain finite values only.")
        object.__setattr__(self, "data", np.clip(data, 0.0, 1.0))

    @property
    def dims(self) -> GridDims:
        return GridDims.from_shape(self.data.shape)
