# sphereview/cli/commands/transform.py
import logging
import math
from pathlib import Path
from typing import List, Tuple

import click

from sphereview.cli.deps import (
    expand_inputs,
    exit_status,
    handle_errors,
    interpolation_option,
    jobs_option,
    keep_going_option,
    output_namer,
    parse_vector,
    run_items,
    start_job,
)
from sphereview.core.exceptions import UsageError
from sphereview.io.images import IMAGE_SUFFIXES, read_image, write_image
from sphereview.models.enums import Interpolation
from sphereview.ops.mobius import compose_all, rotation, zoom_about
from sphereview.ops.remap import field_cache, warp_image
from sphereview.schemas.geometry import SOUTH_POLE, UnitVector3
from sphereview.schemas.mobius import MobiusTransform

logger = logging.getLogger(__name__)

STEP_FLAGS = {
    "--rotate-h": "rotate-h",
    "--rotate-v": "rotate-v",
    "--zoom": "zoom",
    "--center": "center",
}
HORIZONTAL_AXIS = UnitVector3(x=0.0, y=0.0, z=1.0)
VERTICAL_AXIS = UnitVector3(x=0.0, y=1.0, z=0.0)


class StepCommand(click.Command):
    """
    Keeps the order of the step flags: each --rotate-h/--rotate-v/--zoom/--center
    occurrence (and each --then) becomes a `--step kind:value` token before
    click parses the line.
    """

    def parse_args(self, ctx: click.Context, args: List[str]) -> List[str]:
        rewritten = []
        tokens = iter(args)
        for token in tokens:
            if token == "--":
                rewritten.append(token)
                rewritten.extend(tokens)
                break
            flag, _, inline = token.partition("=")
            if token == "--then":
                rewritten += ["--step", "then:"]
            elif flag in STEP_FLAGS:
                value = inline if inline else next(tokens, None)
                if value is None:
                    raise click.UsageError(f"Option '{flag}' requires a value.", ctx=ctx)
                rewritten += ["--step", f"{STEP_FLAGS[flag]}:{value}"]
            else:
                rewritten.append(token)
        return super().parse_args(ctx, rewritten)


def _segments(steps: Tuple[str, ...]) -> List[List[Tuple[str, str]]]:
    segments: List[List[Tuple[str, str]]] = [[]]
    for step in steps:
        kind, _, value = step.partition(":")
        if kind == "then":
            segments.append([])
        else:
            segments[-1].append((kind, value))
    return segments


def _number(kind: str, value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise UsageError(f"--{kind} expects a number, got '{value}'.")
    if not math.isfinite(number):
        raise UsageError(f"--{kind} expects a finite number, got '{value}'.")
    return number


def build_steps(steps: Tuple[str, ...]) -> List[MobiusTransform]:
    """
    Transforms in application order. --center sets the zoom center for the
    zooms of its own --then segment; the default center is (0, 0, -1).
    """
    transforms = []
    for segment in _segments(steps):
        centers = [parse_vector(value) for kind, value in segment if kind == "center"]
        if len(centers) > 1:
            raise UsageError("Only one --center per --then segment.")
        if centers and not any(kind == "zoom" for kind, _ in segment):
            raise UsageError("--center needs a --zoom in the same segment.")
        center = centers[0] if centers else SOUTH_POLE
        for kind, value in segment:
            if kind == "rotate-h":
                transforms.append(rotation(HORIZONTAL_AXIS, math.radians(_number(kind, value))))
            elif kind == "rotate-v":
                transforms.append(rotation(VERTICAL_AXIS, math.radians(_number(kind, value))))
            elif kind == "zoom":
                transforms.append(zoom_about(center, _number(kind, value)))
    if not transforms:
        raise UsageError("Give at least one of --rotate-h, --rotate-v or --zoom.")
    return transforms


def transform_file(
    path: Path, target: Path, transforms: List[MobiusTransform], compose: bool, interp: Interpolation
) -> Path:
    img = read_image(path)
    plan = [compose_all(transforms)] if compose else transforms
    for f in plan:
        img = warp_image(img, field_cache.get(f, img.dims), interp)
    write_image(target, img)
    return target


@click.command(
    "transform",
    cls=StepCommand,
    short_help="Warp ERP images by rotations and zooms.",
)
@click.argument("inputs", nargs=-1, required=True)
@click.option("--rotate-h", "_rotate_h", metavar="DEG", expose_value=False,
              help="Rotate about the polar axis (0,0,1). Repeatable; order is kept.")
@click.option("--rotate-v", "_rotate_v", metavar="DEG", expose_value=False,
              help="Rotate about (0,1,0). Repeatable; order is kept.")
@click.option("--zoom", "_zoom", metavar="RHO", expose_value=False,
              help="Zoom by RHO about the segment's --center (default 0,0,-1).")
@click.option("--center", "_center", metavar="X,Y,Z", expose_value=False,
              help="Zoom center as a Cartesian triple, normalized on input.")
@click.option("--then", "_then", is_flag=True, expose_value=False,
              help="Start a new step segment.")
@click.option("--step", "steps", multiple=True, hidden=True)
@click.option("--out-dir", "-o", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--compose/--no-compose", default=True, show_default=True,
              help="Fuse all steps into a single remap (one resample).")
@interpolation_option
@jobs_option
@keep_going_option
@click.pass_context
@handle_errors
def transform(ctx, inputs, steps, out_dir, compose, interp, jobs, keep_going):
    """
    Apply view transforms to ERP images, e.g.

        sphereview transform --rotate-h 150 in.png -o out/

        sphereview transform --zoom 1.5 --center 0,1,0 in.png -o out/
    """
    transforms = build_steps(steps)
    job = start_job(
        subcommand="transform",
        inputs=expand_inputs(inputs, IMAGE_SUFFIXES),
        out_dir=out_dir,
        interpolation=interp,
        jobs=jobs,
        keep_going=keep_going,
        params={"steps": list(steps), "compose": compose},
    )
    logger.info(
        f"Transforming {len(job.inputs)} images with {len(transforms)} steps "
        f"({'composed' if compose else 'sequential'}, {job.interpolation.value})."
    )
    target_for = output_namer(job.inputs, job.out_dir, ".png")
    results = run_items(
        lambda p: transform_file(p, target_for(p), transforms, compose, job.interpolation),
        job.inputs,
        job.jobs,
        desc="transform",
    )
    logger.info(f"Wrote {sum(r.ok for r in results)} images to {job.out_dir}.")
    ctx.exit(exit_status(results, job.keep_going))
