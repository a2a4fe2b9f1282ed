#!/usr/bin/env python3
"""
Run configuration resolution.

Layers, later wins: built-in defaults, a replayed manifest (--manifest), a
key=value config file (--config), the CTDNE_SEED environment variable, and
finally command-line flags. The merged mapping is validated by RunConfigSchema.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from apps.ctdne.errors import ConfigError
from apps.ctdne.models import RunConfig
from apps.ctdne.schemas import validate_manifest, validate_run_config
from apps.ctdne.utils.io_helper import read_json

logger = logging.getLogger(__name__)

ENV_SEED = "CTDNE_SEED"

# short flag names accepted as config keys
KEY_ALIASES = {
    "R": "walks_per_node",
    "L": "walk_length",
    "D": "dimension",
    "T": "snapshots",
    "k": "negatives",
}


def normalize_key(key: str) -> str:
    """'--walk-length' / 'walk-length' / 'L' -> 'walk_length'"""
    key = key.strip().lstrip("-")
    if key in KEY_ALIASES:
        return KEY_ALIASES[key]
    return key.replace("-", "_").lower()


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Parse key=value lines; blank lines and '#' comments are skipped"""
    values: Dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}, line {line_number}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if not key:
            raise ConfigError(f"{path}, line {line_number}: empty key")
        values[key] = value.strip()
    return values


def load_manifest_config(path: Union[str, Path]) -> Dict[str, Any]:
    """Resolved configuration block of a previously written manifest.json"""
    try:
        document = read_json(path)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read manifest {path}: {e}")
    return dict(validate_manifest(document)["config"])


def resolve_config(
    flags: Mapping[str, Any],
    config_file: Optional[Union[str, Path]] = None,
    manifest: Optional[Union[str, Path]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Merge all configuration layers into a validated RunConfig.

    Flags whose value is None count as not given. The seed environment
    variable is ignored when replaying a manifest.
    """
    environ = os.environ if environ is None else environ
    merged: Dict[str, Any] = {}
    if manifest is not None:
        merged.update(load_manifest_config(manifest))
        logger.info(f"Replaying configuration from {manifest}")
    if config_file is not None:
        merged.update(read_config_file(config_file))
    if manifest is None and environ.get(ENV_SEED):
        merged["seed"] = environ[ENV_SEED]
    merged.update({normalize_key(k): v for k, v in flags.items() if v is not None})
    return validate_run_config(merged)
