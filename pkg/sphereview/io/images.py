# sphereview/io/images.py
"""PNG input/output through Pillow. Images are 8-bit grayscale or RGB."""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from sphereview.core.exceptions import InputFileError, UsageError
from sphereview.schemas.geometry import GridDims
from sphereview.schemas.grids import ErpImage, SaliencyMap, SaliencyMask

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def _open(path: PathLike) -> Image.Image:
    try:
        with Image.open(path) as img:
            img.load()
            return img
    except FileNotFoundError:
        raise InputFileError(f"File not found: {path}")
    except (UnidentifiedImageError, OSError) as e:
        raise InputFileError(f"Cannot read image {path}: {e}")


def read_array(path: PathLike) -> np.ndarray:
    """Pixel array as stored: (h, w) for single-band images, (h, w, c) otherwise."""
    img = _open(path)
    if img.mode not in ("L", "RGB", "RGBA", "I;16", "I", "F", "1", "P"):
        img = img.convert("RGB")
    return np.asarray(img)


def read_image(path: PathLike) -> ErpImage:
    img = _open(path)
    if img.mode not in ("L", "RGB"):
        img = img.convert("RGB" if img.mode in ("RGBA", "P", "CMYK", "YCbCr") else "L")
    return ErpImage(data=np.asarray(img))


def read_mask(path: PathLike) -> SaliencyMask:
    """Any nonzero value (in any band) is foreground."""
    data = read_array(path)
    if data.ndim == 3:
        data = data.any(axis=2)
    return SaliencyMask(data=data)


def resize_plane(data: np.ndarray, dims: GridDims) -> np.ndarray:
    """Bilinear resize of a single float plane to `dims`."""
    if data.shape == dims.shape:
        return data
    plane = Image.fromarray(np.asarray(data, dtype=np.float32))
    resized = plane.resize((dims.w, dims.h), Image.Resampling.BILINEAR)
    return np.asarray(resized, dtype=np.float64)


def read_prediction(path: PathLike, dims: Optional[GridDims] = None) -> SaliencyMap:
    """Grayscale prediction mapped to [0, 1] by /255, resized to `dims` when they differ."""
    img = _open(path)
    if img.mode != "L":
        img = img.convert("L")
    data = np.asarray(img, dtype=np.float64) / 255.0
    if dims is not None and data.shape != dims.shape:
        logger.debug(f"Resizing prediction {path} from {GridDims.from_shape(data.shape)} to {dims}.")
        data = resize_plane(data, dims)
    return SaliencyMap(data=data)


def resize_mask(mask: SaliencyMask, dims: GridDims) -> SaliencyMask:
    if mask.dims == dims:
        return mask
    plane = Image.fromarray(mask.data.astype(np.uint8) * 255)
    resized = plane.resize((dims.w, dims.h), Image.Resampling.NEAREST)
    return SaliencyMask(data=np.asarray(resized))


def write_png(path: PathLike, data: np.ndarray):
    data = np.asarray(data)
    if data.ndim == 3 and data.shape[2] == 1:
        data = data[:, :, 0]
    if data.dtype != np.uint8:
        raise UsageError(f"PNG output expects 8-bit data, got {data.dtype}.")
    if data.ndim == 3 and data.shape[2] not in (3, 4):
        raise UsageError(f"Cannot write {data.shape[2]} channels as PNG.")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(data).save(path, format="PNG")


def write_image(path: PathLike, img: ErpImage):
    write_png(path, img.data)


def parse_size(text: str) -> GridDims:
    """'WxH' -> GridDims."""
    try:
        w, h = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"Size must look like WIDTHxHEIGHT, got '{text}'.")
    return GridDims(w=w, h=h)
