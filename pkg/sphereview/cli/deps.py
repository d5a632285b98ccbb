# sphereview/cli/deps.py
"""Helpers shared by the subcommands: input expansion, shared options, the worker pool and exit policy."""

import functools
import glob
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, List, Optional, Sequence, TypeVar

import click
from tqdm import tqdm

from sphereview.core.config import settings
from sphereview.core.exceptions import InputFileError, SphereViewError, UsageError
from sphereview.models.enums import Interpolation
from sphereview.schemas.geometry import UnitVector3
from sphereview.schemas.job import JobConfig

logger = logging.getLogger(__name__)

T = TypeVar("T")


class CliError(click.ClickException):
    """A SphereViewError surfaced as a click error: message on stderr, the error's exit code."""

    def __init__(self, error: SphereViewError):
        super().__init__(error.message)
        self.exit_code = error.exit_code


def handle_errors(command: Callable) -> Callable:
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SphereViewError as e:
            logger.debug(f"{type(e).__name__}: {e.message}")
            raise CliError(e)

    return wrapper


# --- Shared options ---

jobs_option = click.option(
    "--jobs",
    "-j",
    type=click.IntRange(min=1),
    default=lambda: settings.JOBS,
    show_default="SPHEREVIEW_JOBS or 1",
    help="Number of files processed in parallel.",
)

keep_going_option = click.option(
    "--keep-going",
    is_flag=True,
    help="Skip failing files; exit 0 if at least one file succeeded.",
)

interpolation_option = click.option(
    "--interp",
    type=click.Choice([i.value for i in Interpolation]),
    default=lambda: settings.INTERPOLATION.value,
    show_default="bilinear",
    help="Resampling used when warping.",
)


# --- Inputs ---


def expand_inputs(patterns: Sequence[str], suffixes: Sequence[str]) -> List[Path]:
    """
    Files named directly, files matching glob patterns, and files with one of
    `suffixes` inside named directories; sorted and de-duplicated.
    """
    found = set()
    for pattern in patterns:
        path = Path(pattern)
        if path.is_dir():
            found.update(p for p in path.iterdir() if p.is_file() and p.suffix.lower() in suffixes)
        elif path.is_file():
            found.add(path)
        else:
            matches = [Path(m) for m in glob.glob(pattern) if Path(m).is_file()]
            if not matches:
                raise InputFileError(f"No input matches '{pattern}'.")
            found.update(matches)
    return sorted(found)


def parse_vector(text: str) -> UnitVector3:
    """'x,y,z' -> unit vector (normalized)."""
    try:
        x, y, z = (float(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"Expected a Cartesian triple 'x,y,z', got '{text}'.")
    return UnitVector3.normalized(x, y, z)


def start_job(**fields) -> JobConfig:
    """Validate a job before any work starts and create its output directory."""
    job = JobConfig(**fields)
    job.prepare_out_dir()
    logger.debug(f"{job.subcommand} job: {job.model_dump_json(exclude={'inputs'})} ({len(job.inputs)} inputs)")
    return job


def output_namer(inputs: Sequence[Path], out_dir: Path, suffix: str) -> Callable[[Path], Path]:
    """
    Output path for each input, named by stem. Inputs sharing a stem would
    overwrite each other, so none of them gets a target and asking for one is
    that item's InputFileError.
    """
    counts = Counter(p.stem for p in inputs)
    for stem, n in counts.items():
        if n > 1:
            logger.warning(f"{n} inputs share the output name '{stem}{suffix}'; they will be skipped.")

    def target(path: Path) -> Path:
        if counts[path.stem] > 1:
            raise InputFileError(f"{path} shares the output name '{path.stem}{suffix}' with another input.")
        return out_dir / f"{path.stem}{suffix}"

    return target


# --- Worker pool ---


@dataclass
class ItemResult:
    name: str
    value: Any = None
    error: Optional[SphereViewError] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_one(fn: Callable[[T], Any], item: T, name: str) -> ItemResult:
    try:
        return ItemResult(name=name, value=fn(item))
    except SphereViewError as e:
        logger.error(f"{name}: {e.message}")
        return ItemResult(name=name, error=e)


def run_items(
    fn: Callable[[T], Any],
    items: Iterable[T],
    jobs: int,
    desc: str,
    name: Callable[[T], str] = str,
) -> List[ItemResult]:
    """Apply `fn` to every item with up to `jobs` threads; results keep the input order."""
    items = list(items)
    names = [name(item) for item in items]
    with tqdm(total=len(items), desc=desc, unit="file", disable=None, leave=False) as bar:

        def task(pair):
            result = _run_one(fn, *pair)
            bar.update(1)
            return result

        if jobs > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                return list(pool.map(task, zip(items, names)))
        return [task(pair) for pair in zip(items, names)]


def exit_status(results: Sequence[ItemResult], keep_going: bool) -> int:
    """0 if every item succeeded, or with --keep-going if at least one did; empty input is a success."""
    failures = [r for r in results if not r.ok]
    if not failures:
        return 0
    if keep_going and len(failures) < len(results):
        logger.warning(f"{len(failures)} of {len(results)} files failed and were skipped.")
        return 0
    logger.error(f"{len(failures)} of {len(results)} files failed.")
    return failures[0].error.exit_code
