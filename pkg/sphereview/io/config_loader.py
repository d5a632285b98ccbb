# sphereview/io/config_loader.py

import logging
from pathlib import Path
from typing import Union

import yaml
from pydantic import ValidationError

from sphereview.core.exceptions import ConfigurationError, InputFileError
from sphereview.schemas.fusion import SavtConfig

logger = logging.getLogger(__name__)


def load_savt_config(path: Union[str, Path]) -> SavtConfig:
    """
    Read a SAVT YAML document, e.g.

        branches:
          - kind: horizontal
            angles_deg: [-30, 30]
          - kind: zoom
            zooms: [{center: [0, 1, 0], rho: 1.5}]
        gating:
          params_path: gate.npz

    A relative `params_path` is resolved against the config file's directory.
    """
    path = Path(path)
    try:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InputFileError(f"Cannot read SAVT config {path}: {e}")
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Malformed YAML in {path}: {e}")
    if not isinstance(document, dict):
        raise ConfigurationError(f"{path} must hold a mapping at the top level.")
    try:
        config = SavtConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid SAVT config {path}: {e}")
    params_path = config.gating.params_path
    if params_path and not Path(params_path).is_absolute():
        config.gating.params_path = str(path.parent / params_path)
    specs = config.branch_specs()
    logger.debug(f"Loaded SAVT config {path}: {len(specs)} enabled branches.")
    return config
