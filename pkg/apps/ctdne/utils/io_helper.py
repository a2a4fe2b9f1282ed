#!/usr/bin/env python3
"""
File helpers: gzip-transparent text streams and CSV/JSON writers with stable output.
"""

import gzip
import json
import logging
from pathlib import Path
from typing import Any, Dict, IO, Union

import pandas as pd

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def open_text(path: PathLike, mode: str = "r") -> IO[str]:
    """Open a text file, decompressing/compressing transparently when it ends in .gz"""
    path = Path(path)
    text_mode = mode if "t" in mode else mode + "t"
    if path.suffix == ".gz":
        return gzip.open(path, text_mode, encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


def ensure_dir(path: PathLike) -> Path:
    """Create a directory (and parents) if missing"""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: PathLike, data: Dict[str, Any]) -> Path:
    """Write JSON with sorted keys so reruns are byte-identical"""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    """Read a JSON document"""
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    """Write a DataFrame as CSV without the index, shortest round-trip floats"""
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.debug(f"Wrote {path} ({len(frame)} rows)")
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    """Read a CSV written by write_csv, parsing floats exactly"""
    return pd.read_csv(path, float_precision="round_trip")
