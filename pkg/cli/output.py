"""
CSV Output
----------
Plot-ready CSV files with a `#`-prefixed provenance block.

Files are written to a temporary file in the target directory and renamed
into place, so a failed run never leaves a partial CSV behind. No
timestamps are recorded: equal configs give byte-equal files.
"""

import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from core import __version__
from utils.logger import get_logger

logger = get_logger(__name__)

TOOL_NAME = "udn-capacity"
FLOAT_FORMAT = "%.10g"


def provenance_lines(command: str, config: Dict[str, Any]) -> List[str]:
    return [
        f"# tool: {TOOL_NAME} {__version__}",
        f"# command: {command}",
        f"# config: {json.dumps(config, sort_keys=True, separators=(',', ':'))}",
    ]


def render_csv(frame: pd.DataFrame, command: str, config: Dict[str, Any]) -> str:
    """CSV text with the provenance block on top."""
    buffer = io.StringIO()
    for line in provenance_lines(command, config):
        buffer.write(line + "\n")
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


def write_csv(frame: pd.DataFrame, path: Optional[Union[str, Path]], command: str,
              config: Dict[str, Any]) -> Optional[Path]:
    """
    Write a result table atomically, or to stdout when path is None.

    Returns:
        The written path, or None for stdout
    """
    text = render_csv(frame, command, config)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return None

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def quantity_table(rows: Sequence[Tuple[str, Any]]) -> pd.DataFrame:
    """Two-column `quantity,value` table for scalar results."""
    return pd.DataFrame(list(rows), columns=["quantity", "value"])


def read_csv(path: Union[str, Path]) -> Tuple[Dict[str, str], pd.DataFrame]:
    """Read a CSV written by write_csv; returns (provenance, table)."""
    header: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            header[key] = value
    return header, pd.read_csv(path, comment="#")
