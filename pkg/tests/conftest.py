# tests/conftest.py
from pathlib import Path
from typing import List

import numpy as np
import pytest
from PIL import Image

from sphereview.ops.geometry import lonlat_to_xyz, pixel_to_lonlat
from sphereview.ops.remap import field_cache


@pytest.fixture(autouse=True)
def _fresh_field_cache():
    field_cache.clear()
    yield
    field_cache.clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def sphere_function(h: int) -> np.ndarray:
    """A smooth function of the direction on the sphere, sampled on an h x 2h ERP grid."""
    w = 2 * h
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    lon, lat = pixel_to_lonlat(cols, rows, w, h)
    x, y, z = lonlat_to_xyz(lon, lat)
    return 128.0 + 60.0 * x + 40.0 * y * z + 20.0 * np.sin(3.0 * z)


@pytest.fixture
def smooth_erp():
    return sphere_function


def random_unit_vectors(rng, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def blob_mask(h: int, row0: int, row1: int, col0: int, col1: int) -> np.ndarray:
    """Rectangle [row0, row1) x [col0, col1) on an h x 2h grid; columns wrap."""
    mask = np.zeros((h, 2 * h), dtype=bool)
    cols = np.arange(col0, col1) % (2 * h)
    mask[row0:row1][:, cols] = True
    return mask


@pytest.fixture
def make_blob():
    return blob_mask


def write_gray(path: Path, data: np.ndarray):
    Image.fromarray(np.asarray(data, dtype=np.uint8)).save(path, format="PNG")


@pytest.fixture
def fixture_set(tmp_path) -> Path:
    """
    Ten 64x32 mask/prediction pairs: blobs at varied latitudes, two spanning the
    seam, one empty mask, one full mask.
    """
    root = tmp_path / "data"
    gt_dir, pred_dir = root / "gt", root / "pred"
    gt_dir.mkdir(parents=True)
    pred_dir.mkdir()
    h = 32
    gen = np.random.default_rng(7)
    masks: List[np.ndarray] = [
        blob_mask(h, 14, 18, 20, 30),
        blob_mask(h, 2, 6, 10, 20),
        blob_mask(h, 26, 30, 40, 52),
        blob_mask(h, 10, 20, 58, 70),
        blob_mask(h, 12, 16, 60, 66),
        blob_mask(h, 8, 24, 16, 48),
        blob_mask(h, 0, 4, 0, 64),
        blob_mask(h, 15, 17, 30, 34),
        np.zeros((h, 2 * h), dtype=bool),
        np.ones((h, 2 * h), dtype=bool),
    ]
    for k, mask in enumerate(masks):
        write_gray(gt_dir / f"img{k:02d}.png", mask * 255)
        noisy = np.clip(mask * 200.0 + gen.integers(0, 60, mask.shape), 0, 255)
        write_gray(pred_dir / f"img{k:02d}.png", noisy)
    return root


@pytest.fixture
def erp_png(tmp_path, smooth_erp) -> Path:
    path = tmp_path / "pano" / "scene.png"
    path.parent.mkdir()
    data = np.clip(np.rint(smooth_erp(32)), 0, 255).astype(np.uint8)
    Image.fromarray(np.stack([data, data[::-1], 255 - data], axis=2)).save(path, format="PNG")
    return path
