"""
ncdir.src.writer

This module contains writer classes for result frames.
Every file written with ``--out`` gets a ``<out>.manifest.json`` alongside.
"""

import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, TextIO

import pandas as pd

from src import __version__


logger = logging.getLogger(__name__)


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    TABLE = "table"


@dataclass(frozen=True)
class RunManifest:
    """Provenance of one CLI run."""

    command: str
    params: Dict[str, Any]
    seed: Optional[int] = None
    library_version: str = __version__
    timestamp: str = field(default_factory=lambda: pd.Timestamp.now(tz="UTC").isoformat())

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


class BaseWriter:
    """Render a frame in one output format."""

    FLOAT_FORMAT = "%.17g"

    def __init__(self, fmt: OutputFormat = OutputFormat.CSV):
        self.fmt = OutputFormat(fmt)

    def render(self, df: pd.DataFrame) -> str:
        if self.fmt is OutputFormat.CSV:
            return df.to_csv(index=False, float_format=self.FLOAT_FORMAT)
        if self.fmt is OutputFormat.JSON:
            return json.dumps(df.to_dict(orient="records"), indent=2) + "\n"
        return df.to_string(index=False) + "\n"


class ArtifactWriter(BaseWriter):
    """Write a frame to a file (with manifest) or to a stream."""

    def manifest_path(self, out: Path) -> Path:
        return out.with_name(f"{out.name}.manifest.json")

    def write(
        self,
        df: pd.DataFrame,
        out: Optional[Path] = None,
        manifest: Optional[RunManifest] = None,
        stream: TextIO = None,
    ) -> int:
        """Write ``df``; returns the number of rows written."""
        text = self.render(df)
        if out is None:
            (stream or sys.stdout).write(text)
            return len(df)
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        logger.info(f"[WRITE] {len(df)} rows -> {out}")
        if manifest is not None:
            path = self.manifest_path(out)
            path.write_text(manifest.to_json() + "\n", encoding="utf-8")
            logger.info(f"[WRITE] manifest -> {path}")
        return len(df)
