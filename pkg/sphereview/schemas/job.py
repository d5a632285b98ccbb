# sphereview/schemas/job.py

from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import Field, field_validator

from sphereview.core.config import settings
from sphereview.core.exceptions import ConfigurationError, InputFileError
from sphereview.models.enums import Interpolation
from sphereview.schemas.base import BaseSchema
from sphereview.schemas.geometry import GridDims


class JobConfig(BaseSchema):
    """One resolved CLI invocation: what to read, where to write, and how."""

    subcommand: str
    inputs: List[Path] = Field(default_factory=list)
    out_dir: Path
    interpolation: Interpolation = Field(default_factory=lambda: settings.INTERPOLATION)
    jobs: int = Field(default=1, ge=1)
    keep_going: bool = False
    size: Optional[GridDims] = None
    params: Dict[str, Any] = Field(default_factory=dict, description="Subcommand-specific parameters.")

    @field_validator("inputs")
    @classmethod
    def _inputs_exist(cls, value: List[Path]) -> List[Path]:
        missing = [str(p) for p in value if not p.exists()]
        if missing:
            raise InputFileError(f"Inputs not found: {', '.join(missing)}")
        return value

    def prepare_out_dir(self) -> Path:
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigurationError(f"Cannot create output directory {self.out_dir}: {e}")
        return self.out_dir
