import logging
from typing import Optional

import pandas as pd
import pandera.pandas as pa
from pandera.pandas import Check, Column, DataFrameSchema


logger = logging.getLogger(__name__)

UNIT = Check.in_range(0.0, 1.0, include_min=False, include_max=False)


# Schema for sample frames (x1..xD, one draw per row)
def sample_schema(dimension: Optional[int] = None) -> DataFrameSchema:
    """Coordinates in (0, 1) with row sums < 1; any D unless ``dimension`` is given."""
    if dimension is None:
        columns = {r"x\d+": Column(float, UNIT, nullable=False, regex=True)}
    else:
        columns = {f"x{i + 1}": Column(float, UNIT, nullable=False) for i in range(dimension)}
    return DataFrameSchema(
        columns,
        checks=Check(lambda df: df.sum(axis=1) < 1.0, error="row sums must be < 1"),
        strict=True,
    )


validation_report_schema = DataFrameSchema(
    {
        "r1": Column(int, Check.ge(0)),
        "r2": Column(int, Check.ge(0)),
        "target_mu": Column(float),
        "sample_mean": Column(float),
        "sample_sd": Column(float, Check.ge(0.0)),
        "z_stat": Column(float),
        "p_value": Column(float, Check.in_range(0.0, 1.0)),
        "n_series": Column(int, Check.ge(2)),
    },
    strict=False,  # parameter columns ride along
)


timing_report_schema = DataFrameSchema(
    {
        "method": Column(checks=Check.isin(["finite", "series"])),
        "mean_seconds": Column(float, Check.gt(0.0)),
        "sd_seconds": Column(float, Check.ge(0.0)),
        "median_seconds": Column(float, Check.ge(0.0)),
        "n_reps": Column(int, Check.ge(2)),
        "p_value": Column(float, Check.in_range(0.0, 1.0)),
        "speedup": Column(float, Check.gt(0.0)),
    },
    strict=False,
)


class ReportValidator:
    """Validate sample and report frames before they are written."""

    SCHEMAS = {
        "validation": validation_report_schema,
        "timing": timing_report_schema,
    }

    def __init__(self, df: pd.DataFrame, kind: str):
        self.df = df
        self.kind = kind

    def _schema(self) -> DataFrameSchema:
        if self.kind == "sample":
            return sample_schema()
        return self.SCHEMAS[self.kind]

    def validate(self) -> pd.DataFrame:
        try:
            validated = self._schema().validate(self.df)
            logger.info(f"[VALIDATE] {self.kind} frame valid ({len(validated)} rows)")
            return validated
        except pa.errors.SchemaError as e:
            logger.error(f"[VALIDATE] {self.kind} frame invalid: {e}")
            raise
