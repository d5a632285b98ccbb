# sphereview/cli/commands/evaluate.py
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
import pandas as pd

from sphereview.cli.deps import exit_status, handle_errors, jobs_option, keep_going_option, run_items, start_job
from sphereview.core.config import settings
from sphereview.core.exceptions import InputFileError
from sphereview.io.images import IMAGE_SUFFIXES, parse_size, read_mask, read_prediction, resize_mask
from sphereview.io.reports import read_csv, rows_to_frame, write_csv
from sphereview.models.enums import Subset
from sphereview.ops.metrics import aggregate_reports, attribute_curves, evaluate_pair, evaluate_subsets
from sphereview.schemas.geometry import GridDims
from sphereview.schemas.metrics import (
    METRIC_NAMES,
    METRIC_VERSIONS,
    PER_IMAGE_CSV_COLUMNS,
    SUMMARY_CSV_COLUMNS,
    MetricsReport,
)

logger = logging.getLogger(__name__)

CURVE_ATTRIBUTES = ["fg_ratio", "max_hfov_deg", "distortion"]


def index_by_stem(directory: Path) -> Dict[str, Path]:
    if not directory.is_dir():
        raise InputFileError(f"Not a directory: {directory}")
    files = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    index: Dict[str, Path] = {}
    for path in files:
        if path.stem in index:
            logger.warning(f"Several files share the stem '{path.stem}' in {directory}; using {index[path.stem].name}.")
            continue
        index[path.stem] = path
    return index


def evaluate_stem(
    stem: str, preds: Dict[str, Path], gts: Dict[str, Path], dims: Optional[GridDims], wrap: bool
) -> MetricsReport:
    if stem not in gts:
        raise InputFileError(f"No ground truth for prediction '{preds[stem].name}'.")
    if stem not in preds:
        raise InputFileError(f"No prediction for ground truth '{gts[stem].name}'.")
    mask = read_mask(gts[stem])
    if dims is not None:
        mask = resize_mask(mask, dims)
    prediction = read_prediction(preds[stem], mask.dims)
    return evaluate_pair(prediction, mask, path=stem, wrap=wrap)


def header_lines(wrap: bool) -> List[str]:
    versions = " ".join(f"{name}={version}" for name, version in METRIC_VERSIONS.items())
    distances = "wrap" if wrap else "planar"
    return [f"sphereview metrics: {versions} distances={distances} beta2={settings.FBETA_BETA2:g}"]


def join_attributes(reports: List[MetricsReport], attrs: pd.DataFrame) -> Tuple[List[MetricsReport], pd.DataFrame]:
    """Reports that have a stats row, and the matching stats rows in the same order."""
    attrs = attrs.assign(stem=[Path(str(p)).stem for p in attrs["path"]]).drop_duplicates("stem")
    by_stem = attrs.set_index("stem")
    matched = [r for r in reports if r.path in by_stem.index]
    missing = len(reports) - len(matched)
    if missing:
        logger.warning(f"{missing} evaluated images have no row in the statistics CSV; left out of subsets and curves.")
    return matched, by_stem.loc[[r.path for r in matched]]


def curve_samples(reports: List[MetricsReport], rows: pd.DataFrame, attribute: str, metric: str) -> List[Tuple[float, float]]:
    samples = []
    for report, value in zip(reports, rows[attribute].tolist()):
        score = getattr(report, metric)
        if score is None or value is None or (isinstance(value, float) and math.isnan(value)):
            continue
        samples.append((float(value), score))
    return samples


@click.command("eval", short_help="Score saliency predictions against ERP ground truth.")
@click.option("--pred", "pred_dir", type=click.Path(file_okay=False, path_type=Path), required=True,
              help="Directory of grayscale predictions.")
@click.option("--gt", "gt_dir", type=click.Path(file_okay=False, path_type=Path), required=True,
              help="Directory of binary masks; files pair with predictions by stem.")
@click.option("--out-dir", "-o", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--attrs", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="stats.csv from `sphereview stats` for subsets and attribute curves.")
@click.option("--window", type=click.IntRange(min=1), default=lambda: settings.CURVE_WINDOW,
              show_default="50", help="Moving-average window of the attribute curves.")
@click.option("--curve-metric", type=click.Choice(METRIC_NAMES), default="w_f_beta", show_default=True)
@click.option("--size", default=lambda: settings.EVAL_SIZE, help="Evaluate at WIDTHxHEIGHT instead of the mask size.")
@click.option("--planar-distances", is_flag=True, help="Planar distance transform in the weighted F-measure.")
@jobs_option
@keep_going_option
@click.pass_context
@handle_errors
def evaluate(ctx, pred_dir, gt_dir, out_dir, attrs, window, curve_metric, size, planar_distances, jobs, keep_going):
    """
    Writes eval.csv (per image), summary.csv (dataset means) and, with
    --attrs, curve_<attribute>.csv files plus edge-effect subset rows.
    """
    job = start_job(
        subcommand="eval",
        inputs=[pred_dir, gt_dir] + ([attrs] if attrs else []),
        out_dir=out_dir,
        jobs=jobs,
        keep_going=keep_going,
        size=parse_size(size).require_erp() if size else None,
        params={"attrs": str(attrs) if attrs else None, "window": window, "curve_metric": curve_metric},
    )
    wrap = not planar_distances
    preds = index_by_stem(pred_dir)
    gts = index_by_stem(gt_dir)
    stems = sorted(set(preds) | set(gts))
    logger.info(f"Evaluating {len(stems)} samples from {pred_dir} against {gt_dir}.")

    results = run_items(lambda s: evaluate_stem(s, preds, gts, job.size, wrap), stems, job.jobs, desc="eval")
    reports = [r.value for r in results if r.ok]

    write_csv(rows_to_frame((r.csv_row() for r in reports), PER_IMAGE_CSV_COLUMNS), job.out_dir / "eval.csv")

    summaries = [aggregate_reports(reports, Subset.ALL)]
    if attrs is not None:
        table = read_csv(attrs, required=["path", "edge_disc"] + CURVE_ATTRIBUTES)
        matched, rows = join_attributes(reports, table)
        subsets = evaluate_subsets(matched, [bool(flag) for flag in rows["edge_disc"].tolist()])
        summaries += [subsets[Subset.EDGE_DISC], subsets[Subset.CONTINUOUS]]
        for attribute in CURVE_ATTRIBUTES:
            curve = attribute_curves(curve_samples(matched, rows, attribute, curve_metric), window)
            write_csv(curve, job.out_dir / f"curve_{attribute}.csv")

    write_csv(
        rows_to_frame((s.csv_row() for s in summaries), SUMMARY_CSV_COLUMNS),
        job.out_dir / "summary.csv",
        comments=header_lines(wrap),
    )
    logger.info(f"Evaluation of {len(reports)} samples written to {job.out_dir}.")
    ctx.exit(exit_status(results, job.keep_going))
