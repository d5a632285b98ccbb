# sphereview/io/feature_grid.py
"""
Feature-grid files: a 16-byte header (magic b"SVFG", then h, w, c as
little-endian uint32) followed by h*w*c little-endian float32 values in
(h, w, c) order.
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np

from sphereview.core.exceptions import InputFileError
from sphereview.schemas.fusion import GatingParams
from sphereview.schemas.grids import FeatureGrid

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MAGIC = b"SVFG"
HEADER_DTYPE = np.dtype([("magic", "S4"), ("h", "<u4"), ("w", "<u4"), ("c", "<u4")])
DATA_DTYPE = np.dtype("<f4")
GATING_KEYS = ("w1", "b1", "w2", "b2")


def read_feature_grid(path: PathLike) -> FeatureGrid:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise InputFileError(f"Cannot read feature grid {path}: {e}")
    if len(raw) < HEADER_DTYPE.itemsize:
        raise InputFileError(f"{path} is too short to hold a feature-grid header.")
    header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
    if header["magic"] != MAGIC:
        raise InputFileError(f"{path} is not a feature-grid file (magic {header['magic']!r}).")
    h, w, c = int(header["h"]), int(header["w"]), int(header["c"])
    expected = h * w * c * DATA_DTYPE.itemsize
    payload = raw[HEADER_DTYPE.itemsize :]
    if len(payload) != expected:
        raise InputFileError(
            f"{path}: header says {h}x{w}x{c} ({expected} bytes), found {len(payload)} bytes."
        )
    data = np.frombuffer(payload, dtype=DATA_DTYPE).reshape(h, w, c)
    return FeatureGrid(data=data.astype(np.float64))


def write_feature_grid(path: PathLike, fg: FeatureGrid):
    h, w, c = fg.data.shape
    header = np.array([(MAGIC, h, w, c)], dtype=HEADER_DTYPE)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(np.ascontiguousarray(fg.data, dtype=DATA_DTYPE).tobytes())
    logger.debug(f"Wrote feature grid {path} ({h}x{w}x{c}).")


def load_gating_params(path: PathLike) -> GatingParams:
    """Gate parameters from an .npz archive holding w1, b1, w2 and b2."""
    try:
        with np.load(path) as archive:
            missing = [k for k in GATING_KEYS if k not in archive.files]
            if missing:
                raise InputFileError(f"{path} lacks gating arrays: {', '.join(missing)}.")
            arrays = {k: archive[k] for k in GATING_KEYS}
    except (OSError, ValueError) as e:
        raise InputFileError(f"Cannot read gating parameters {path}: {e}")
    return GatingParams(**arrays)


def save_gating_params(path: PathLike, params: GatingParams):
    np.savez(path, w1=params.w1, b1=params.b1, w2=params.w2, b2=params.b2)
