# sphereview/cli/commands/savt.py
import logging
from pathlib import Path
from typing import List, Optional

import click
from click.core import ParameterSource

from sphereview.cli.deps import (
    expand_inputs,
    exit_status,
    handle_errors,
    interpolation_option,
    jobs_option,
    keep_going_option,
    output_namer,
    run_items,
    start_job,
)
from sphereview.core.config import settings
from sphereview.core.exceptions import UsageError
from sphereview.io.config_loader import load_savt_config
from sphereview.io.feature_grid import load_gating_params, read_feature_grid, write_feature_grid
from sphereview.models.enums import BranchKind, Interpolation
from sphereview.ops.fusion import default_branch_specs, default_gating, savt_forward
from sphereview.schemas.fusion import BranchSpec, GatingParams

logger = logging.getLogger(__name__)

KIND_LETTERS = {"h": BranchKind.HORIZONTAL, "v": BranchKind.VERTICAL, "z": BranchKind.ZOOM}
GRID_SUFFIXES = (".svfg",)


def parse_kinds(text: Optional[str]) -> Optional[List[BranchKind]]:
    """'h,z' -> [HORIZONTAL, ZOOM]; full kind names are accepted too."""
    if not text:
        return None
    kinds = []
    for part in (p.strip().lower() for p in text.split(",") if p.strip()):
        if part in KIND_LETTERS:
            kinds.append(KIND_LETTERS[part])
        elif part in {k.value for k in BranchKind}:
            kinds.append(BranchKind(part))
        else:
            raise UsageError(f"Unknown branch kind '{part}' (use h, v, z).")
    return kinds


@click.command("savt", short_help="Run view-transformer branches and adaptive fusion on feature grids.")
@click.argument("inputs", nargs=-1, required=True)
@click.option("--out-dir", "-o", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="YAML branch/gating configuration; defaults to the 30 deg / +-30 deg / 4-zoom setup.")
@click.option("--branches", default=None, help="Keep only these branch kinds, e.g. 'h,z'.")
@click.option("--gating", "gating_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help=".npz gate parameters (w1, b1, w2, b2); overrides the config's params_path.")
@interpolation_option
@jobs_option
@keep_going_option
@click.pass_context
@handle_errors
def savt(ctx, inputs, out_dir, config_path, branches, gating_path, interp, jobs, keep_going):
    """
    Output grids hold (1 + number of branches) x C channels: the gated input
    followed by each gated branch output.
    """
    kinds = parse_kinds(branches)
    interpolation = Interpolation(interp)
    params_path = gating_path
    reduction = settings.GATING_REDUCTION
    if config_path is not None:
        config = load_savt_config(config_path)
        specs: List[BranchSpec] = config.branch_specs()
        if kinds is not None:
            specs = [s for s in specs if s.kind in kinds]
        if params_path is None and config.gating.params_path:
            params_path = Path(config.gating.params_path)
        reduction = config.gating.reduction
        if ctx.get_parameter_source("interp") is ParameterSource.DEFAULT:
            interpolation = config.interpolation
    else:
        specs = default_branch_specs(kinds)
    if not specs:
        raise UsageError("No branches selected.")
    gating: Optional[GatingParams] = load_gating_params(params_path) if params_path else None
    job = start_job(
        subcommand="savt",
        inputs=expand_inputs(inputs, GRID_SUFFIXES),
        out_dir=out_dir,
        interpolation=interpolation,
        jobs=jobs,
        keep_going=keep_going,
        params={"branches": [s.kind.value for s in specs], "gating": str(params_path) if params_path else None},
    )

    target_for = output_namer(job.inputs, job.out_dir, ".svfg")

    def run(path: Path) -> Path:
        target = target_for(path)
        fg = read_feature_grid(path)
        gate = gating or default_gating(fg.channels, len(specs), reduction)
        fused = savt_forward(fg, specs, gate, job.interpolation)
        write_feature_grid(target, fused)
        return target

    logger.info(
        f"SAVT on {len(job.inputs)} grids: branches {', '.join(s.kind.value for s in specs)}, "
        f"{'loaded' if gating else 'unit'} gate weights."
    )
    results = run_items(run, job.inputs, job.jobs, desc="savt")
    ctx.exit(exit_status(results, job.keep_going))
