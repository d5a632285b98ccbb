# sphereview/cli/commands/stats.py
import logging
from pathlib import Path
from typing import Optional

import click

from sphereview.cli.deps import (
    expand_inputs,
    exit_status,
    handle_errors,
    jobs_option,
    keep_going_option,
    run_items,
    start_job,
)
from sphereview.io.images import IMAGE_SUFFIXES, parse_size, read_mask, resize_mask
from sphereview.io.reports import rows_to_frame, write_csv
from sphereview.ops.stats import compute_region_stats, dataset_histograms, edge_discontinuity_share
from sphereview.schemas.stats import STATS_CSV_COLUMNS, RegionStats

logger = logging.getLogger(__name__)

# (attribute, file prefix)
HISTOGRAMS = [
    ("distortion", "distortion"),
    ("max_hfov", "hfov"),
    ("max_vfov", "vfov"),
]


@click.command("stats", short_help="Distortion, edge and FoV statistics of ERP masks.")
@click.argument("inputs", nargs=-1)
@click.option("--out-dir", "-o", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--bins", type=click.IntRange(min=1), default=20, show_default=True, help="Histogram bin count.")
@click.option("--resize", "resize_to", default=None, help="Resize masks to WIDTHxHEIGHT (nearest) first.")
@jobs_option
@keep_going_option
@click.pass_context
@handle_errors
def stats(ctx, inputs, out_dir, bins, resize_to: Optional[str], jobs, keep_going):
    """
    Writes stats.csv (one row per mask), plain and cumulative histograms of
    distortion degree, horizontal and vertical FoV, and edge_discontinuity.csv.
    """
    job = start_job(
        subcommand="stats",
        inputs=expand_inputs(inputs, IMAGE_SUFFIXES) if inputs else [],
        out_dir=out_dir,
        jobs=jobs,
        keep_going=keep_going,
        size=parse_size(resize_to).require_erp() if resize_to else None,
        params={"bins": bins},
    )
    logger.info(f"Computing statistics for {len(job.inputs)} masks.")

    def measure(path: Path) -> RegionStats:
        mask = read_mask(path)
        if job.size is not None:
            mask = resize_mask(mask, job.size)
        return compute_region_stats(mask, path=str(path))

    results = run_items(measure, job.inputs, job.jobs, desc="stats")
    records = [r.value for r in results if r.ok]

    write_csv(rows_to_frame((s.csv_row() for s in records), STATS_CSV_COLUMNS), job.out_dir / "stats.csv")
    for attribute, prefix in HISTOGRAMS:
        for cumulative, suffix in ((False, "hist"), (True, "cumulative")):
            frame = dataset_histograms(records, attribute, bins=bins, cumulative=cumulative)
            write_csv(frame, job.out_dir / f"{prefix}_{suffix}.csv")
    yes, no = edge_discontinuity_share(records)
    write_csv(
        rows_to_frame([{"edge_disc": 1, "percent": yes}, {"edge_disc": 0, "percent": no}], ["edge_disc", "percent"]),
        job.out_dir / "edge_discontinuity.csv",
    )
    logger.info(f"Statistics for {len(records)} masks written to {job.out_dir}.")
    ctx.exit(exit_status(results, job.keep_going))
