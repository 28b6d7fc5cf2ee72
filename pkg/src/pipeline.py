"""
ncdir.src.pipeline

Report pipeline used by the validate and bench commands:
run the simulation, shape the reports into a frame, validate it, write it.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Type

import pandas as pd

from src.sim import BenchConfig, ValidationConfig, run_bench, run_validation
from src.transformer import TimingReportTransformer, ValidationReportTransformer
from src.validator import ReportValidator
from src.writer import ArtifactWriter, OutputFormat, RunManifest


@dataclass
class PipelineResult:
    """Results of a report run."""
    reports: list
    rows_written: int
    out: Optional[Path] = None


class ReportPipeline:
    """Compute, transform, validate and write one kind of report."""

    def __init__(
        self,
        kind: str,
        compute: Callable[[], List],
        transformer: Type,
        fmt: OutputFormat = OutputFormat.TABLE,
        out: Optional[Path] = None,
        manifest: Optional[RunManifest] = None,
    ):
        self.kind = kind
        self.compute_reports = compute
        self.transformer = transformer
        self.writer = ArtifactWriter(fmt)
        self.out = out
        self.manifest = manifest
        self.logger = logging.getLogger(__name__)

        self.reports: List = []
        self.frame: pd.DataFrame = None

    @classmethod
    def validation(cls, cfg: ValidationConfig, **kwargs) -> "ReportPipeline":
        return cls("validation", lambda: run_validation(cfg), ValidationReportTransformer, **kwargs)

    @classmethod
    def timing(cls, cfg: BenchConfig, **kwargs) -> "ReportPipeline":
        return cls("timing", lambda: run_bench(cfg), TimingReportTransformer, **kwargs)

    def compute(self) -> "ReportPipeline":
        self.logger.info(f"[{self.kind.upper()}] Computing reports...")
        self.reports = self.compute_reports()
        self.logger.info(f"[{self.kind.upper()}] {len(self.reports)} report(s)")
        return self

    def transform(self) -> "ReportPipeline":
        self.frame = self.transformer(self.reports).transform()
        return self

    def validate(self) -> "ReportPipeline":
        self.frame = ReportValidator(self.frame, self.kind).validate()
        return self

    def write(self) -> PipelineResult:
        rows = self.writer.write(self.frame, self.out, self.manifest)
        return PipelineResult(reports=self.reports, rows_written=rows, out=self.out)

    def run(self) -> PipelineResult:
        return (
            self.compute()
                .transform()
                .validate()
                .write()
        )
