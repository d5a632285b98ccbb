# sphereview/cli/commands/viewport.py
import logging
import math
from pathlib import Path

import click
import numpy as np

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
from sphereview.io.images import IMAGE_SUFFIXES, parse_size, read_image, write_png
from sphereview.ops.geometry import lonlat_to_pixel
from sphereview.ops.viewport import extract_viewport, viewport_source_coordinates
from sphereview.schemas.geometry import GridDims
from sphereview.schemas.viewport import ViewportSpec

logger = logging.getLogger(__name__)

SELF_TEST_TOL = 1e-9


def center_pixel_offset(spec: ViewportSpec, dims: GridDims) -> float:
    """Distance in source pixels between the viewport's center sample and the viewpoint."""
    src_u, src_v = viewport_source_coordinates(spec, dims)
    row, col = spec.center_index
    u0, v0 = lonlat_to_pixel(spec.viewpoint.lon, spec.viewpoint.lat, dims.w, dims.h)
    du = abs(float(src_u[row, col]) - float(u0))
    du = min(du, dims.w - du)
    return math.hypot(du, float(src_v[row, col]) - float(v0))


@click.command("viewport", short_help="Extract perspective viewports from ERP images.")
@click.argument("inputs", nargs=-1)
@click.option("--lon", type=float, default=0.0, show_default=True, help="Viewpoint longitude, degrees.")
@click.option("--lat", type=float, default=0.0, show_default=True, help="Viewpoint latitude, degrees.")
@click.option("--fovh", type=float, default=90.0, show_default=True, help="Horizontal FoV, degrees in (0, 180).")
@click.option("--fovv", type=float, default=90.0, show_default=True, help="Vertical FoV, degrees in (0, 180).")
@click.option("--size", default="512x512", show_default=True, help="Output size WIDTHxHEIGHT.")
@click.option("--out-dir", "-o", type=click.Path(file_okay=False, path_type=Path))
@click.option("--self-test", is_flag=True, help="Check that the center pixel samples the viewpoint.")
@interpolation_option
@jobs_option
@keep_going_option
@click.pass_context
@handle_errors
def viewport(ctx, inputs, lon, lat, fovh, fovv, size, out_dir, self_test, interp, jobs, keep_going):
    """Gnomonic viewports centred on (--lon, --lat) with zero roll."""
    out = parse_size(size)
    spec = ViewportSpec.from_degrees(lon, lat, fovh, fovv, out.w, out.h)

    if self_test:
        offset = center_pixel_offset(spec, GridDims.erp(256))
        if offset > SELF_TEST_TOL:
            logger.error(f"Self-test failed: center pixel is {offset:.3g} px off the viewpoint.")
            ctx.exit(1)
        logger.info(f"Self-test passed (center offset {offset:.3g} px).")
        if not inputs:
            ctx.exit(0)

    if not inputs:
        raise click.UsageError("Give input images (or --self-test).", ctx=ctx)
    if out_dir is None:
        raise click.UsageError("--out-dir is required when extracting viewports.", ctx=ctx)

    job = start_job(
        subcommand="viewport",
        inputs=expand_inputs(inputs, IMAGE_SUFFIXES),
        out_dir=out_dir,
        interpolation=interp,
        jobs=jobs,
        keep_going=keep_going,
        size=out,
        params={"lon": lon, "lat": lat, "fovh": fovh, "fovv": fovv},
    )

    target_for = output_namer(job.inputs, job.out_dir, ".png")

    def extract(path: Path) -> Path:
        target = target_for(path)
        data = extract_viewport(read_image(path), spec, job.interpolation)
        write_png(target, np.asarray(data))
        return target

    logger.info(f"Extracting {out.w}x{out.h} viewports at ({lon:g}, {lat:g}) deg from {len(job.inputs)} images.")
    results = run_items(extract, job.inputs, job.jobs, desc="viewport")
    ctx.exit(exit_status(results, job.keep_going))
