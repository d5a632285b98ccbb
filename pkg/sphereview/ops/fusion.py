# sphereview/ops/fusion.py
"""
Sample-adaptive view transformation on generic feature grids.

Each View-Transformer branch moves the grid through a family of view
transforms, applies a branch operation, moves the result back and averages
the sub-branches. The fusion step gates the original grid and every branch
output with per-branch scalar weights and concatenates the weighted blocks
along the channel axis.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.special import expit

from sphereview.core.exceptions import ConfigurationError, UsageError
from sphereview.models.enums import BranchKind, Interpolation
from sphereview.ops.mobius import rotation, zoom_about
from sphereview.ops.remap import RemapFieldCache, inverse_transform_features, transform_features
from sphereview.schemas.fusion import BranchSpec, FusionWeights, GatingParams, ZoomParam
from sphereview.schemas.geometry import UnitVector3
from sphereview.schemas.grids import FeatureGrid
from sphereview.schemas.mobius import MobiusTransform

logger = logging.getLogger(__name__)

BranchOp = Callable[[FeatureGrid], FeatureGrid]

BRANCH_AXES = {
    BranchKind.HORIZONTAL: UnitVector3(x=0.0, y=0.0, z=1.0),
    BranchKind.VERTICAL: UnitVector3(x=0.0, y=1.0, z=0.0),
}

DEFAULT_HORIZONTAL_DEG = [d for d in range(-150, 181, 30) if d != 0]
DEFAULT_VERTICAL_DEG = [-30, 30]
DEFAULT_ZOOM_RHOS = [0.8, 1.2, 0.7, 1.3]
DEFAULT_ZOOM_CENTER = UnitVector3(x=0.0, y=0.0, z=-1.0)

_branch_ops: Dict[str, BranchOp] = {}


def register_branch_op(name: str):
    """Decorator registering a grid-to-grid operation under `name`."""

    def decorator(op: BranchOp) -> BranchOp:
        _branch_ops[name] = op
        return op

    return decorator


def get_branch_op(name: str) -> BranchOp:
    try:
        return _branch_ops[name]
    except KeyError:
        known = ", ".join(sorted(_branch_ops))
        raise ConfigurationError(f"Unknown branch operation '{name}' (registered: {known}).")


@register_branch_op("identity")
def identity_op(fg: FeatureGrid) -> FeatureGrid:
    return fg


def branch_transforms(spec: BranchSpec) -> List[MobiusTransform]:
    if spec.kind is BranchKind.ZOOM:
        return [zoom_about(z.center, z.rho) for z in spec.zooms]
    axis = BRANCH_AXES[spec.kind]
    return [rotation(axis, angle) for angle in spec.angles]


def run_branch(
    fg: FeatureGrid,
    spec: BranchSpec,
    interp: Interpolation = Interpolation.BILINEAR,
    cache: Optional[RemapFieldCache] = None,
) -> FeatureGrid:
    """Mean over sub-branches of inverse_transform(op(transform(fg, f_i)), f_i)."""
    transforms = branch_transforms(spec)
    if not transforms:
        raise UsageError(f"The {spec.kind.value} branch has no sub-branch parameters.")
    op = get_branch_op(spec.branch_op)
    total = np.zeros_like(fg.data)
    for f in transforms:
        moved = op(transform_features(fg, f, interp, cache))
        if moved.dims != fg.dims or moved.channels != fg.channels:
            raise UsageError(
                f"Branch operation '{spec.branch_op}' changed the grid shape to {moved.data.shape}."
            )
        total += inverse_transform_features(moved, f, interp, cache).data
    logger.debug(f"{spec.kind.value} branch: {len(transforms)} sub-branches averaged.")
    return FeatureGrid(data=total / len(transforms))


def gate_weights(fg: FeatureGrid, params: GatingParams) -> FusionWeights:
    """Global average pool, affine, ReLU, affine, sigmoid: one weight per branch."""
    if params.channels != fg.channels:
        raise UsageError(
            f"Gating parameters expect {params.channels} channels, the grid has {fg.channels}."
        )
    pooled = fg.data.mean(axis=(0, 1))
    hidden = np.maximum(params.w1 @ pooled + params.b1, 0.0)
    return FusionWeights(w=expit(params.w2 @ hidden + params.b2))


def saf_fuse(branches: Sequence[FeatureGrid], weights: FusionWeights) -> FeatureGrid:
    """Concat(w_k * V_k) over the channel axis, in input order."""
    if not branches:
        raise UsageError("Nothing to fuse.")
    if len(branches) != len(weights):
        raise UsageError(f"{len(branches)} branches but {len(weights)} fusion weights.")
    first = branches[0].data.shape
    for k, branch in enumerate(branches):
        if branch.data.shape != first:
            raise UsageError(f"Branch {k} has shape {branch.data.shape}, expected {first}.")
    blocks = [weight * branch.data for weight, branch in zip(weights.w, branches)]
    return FeatureGrid(data=np.concatenate(blocks, axis=2))


def savt_forward(
    fg: FeatureGrid,
    specs: Sequence[BranchSpec],
    gating: GatingParams,
    interp: Interpolation = Interpolation.BILINEAR,
    jobs: int = 1,
    cache: Optional[RemapFieldCache] = None,
) -> FeatureGrid:
    """Output has (1 + len(specs)) * C channels; block 0 is the weighted input."""
    if gating.branches != 1 + len(specs):
        raise UsageError(
            f"Gating parameters produce {gating.branches} weights for {1 + len(specs)} branches."
        )
    weights = gate_weights(fg, gating)
    if jobs > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, len(specs))) as pool:
            outputs = list(pool.map(lambda spec: run_branch(fg, spec, interp, cache), specs))
    else:
        outputs = [run_branch(fg, spec, interp, cache) for spec in specs]
    logger.debug(f"Fusion weights: {np.array2string(weights.w, precision=4)}")
    return saf_fuse([fg] + outputs, weights)


def default_branch_specs(
    kinds: Optional[Iterable[BranchKind]] = None,
    zoom_centers: Optional[Sequence[UnitVector3]] = None,
) -> List[BranchSpec]:
    """
    Rotations every 30 deg for the horizontal branch, +/-30 deg for the
    vertical one and zooms {0.8, 1.2, 0.7, 1.3} about the south pole.
    """
    selected = set(BranchKind) if kinds is None else {BranchKind(k) for k in kinds}
    centers = [DEFAULT_ZOOM_CENTER] if not zoom_centers else list(zoom_centers)
    specs = []
    if BranchKind.HORIZONTAL in selected:
        specs.append(
            BranchSpec(
                kind=BranchKind.HORIZONTAL,
                angles=tuple(math.radians(d) for d in DEFAULT_HORIZONTAL_DEG),
            )
        )
    if BranchKind.VERTICAL in selected:
        specs.append(
            BranchSpec(
                kind=BranchKind.VERTICAL,
                angles=tuple(math.radians(d) for d in DEFAULT_VERTICAL_DEG),
            )
        )
    if BranchKind.ZOOM in selected:
        specs.append(
            BranchSpec(
                kind=BranchKind.ZOOM,
                zooms=tuple(ZoomParam(center=c, rho=rho) for c in centers for rho in DEFAULT_ZOOM_RHOS),
            )
        )
    return specs


def default_gating(channels: int, n_specs: int, reduction: Optional[int] = None) -> GatingParams:
    """Unit weights for the original grid and each branch, used when no gate parameters are given."""
    return GatingParams.neutral(channels, 1 + n_specs, reduction)
