# sphereview/io/reports.py
"""CSV reports through pandas: 6 significant digits, '\\n' line endings, empty fields for missing values."""

import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import pandas as pd

from sphereview.core.config import settings
from sphereview.core.exceptions import InputFileError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def rows_to_frame(rows: Iterable[dict], columns: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(columns))


def write_csv(frame: pd.DataFrame, path: PathLike, comments: Optional[List[str]] = None):
    """Write `frame` after optional '# ' comment lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        for line in comments or []:
            f.write(f"# {line}\n")
        frame.to_csv(
            f,
            index=False,
            float_format=settings.CSV_FLOAT_FORMAT,
            lineterminator="\n",
            na_rep="",
        )
    logger.debug(f"Wrote {len(frame)} rows to {path}.")


def read_csv(path: PathLike, required: Sequence[str] = ()) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, comment="#")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InputFileError(f"Cannot read CSV {path}: {e}")
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise InputFileError(f"{path} lacks columns: {', '.join(missing)}.")
    return frame
