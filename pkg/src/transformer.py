"""
ncdir.src.transformer

This module contains transformer classes turning samples and reports
into output frames.
"""

from typing import Sequence

import numpy as np
import pandas as pd

from src.sim import TimingReport, ZTestReport


class SampleTransformer:
    """Transform an (N, D) sample array into a frame with columns x1..xD."""

    def __init__(self, sample: np.ndarray):
        self.sample = np.atleast_2d(np.asarray(sample, dtype=float))
        self.df: pd.DataFrame = None

    def build_frame(self) -> "SampleTransformer":
        columns = [f"x{i + 1}" for i in range(self.sample.shape[1])]
        self.df = pd.DataFrame(self.sample, columns=columns)
        return self

    def transform(self) -> pd.DataFrame:
        return self.build_frame().df


class ValidationReportTransformer:
    """Transform Z-test reports into one row per (parameter set, order)."""

    PARAM_COLUMNS = ["alpha1", "alpha2", "alpha3", "lambda1", "lambda2", "lambda3"]
    REPORT_COLUMNS = [
        "r1",
        "r2",
        "target_mu",
        "sample_mean",
        "sample_sd",
        "z_stat",
        "p_value",
        "n_series",
        "tail",
    ]

    def __init__(self, reports: Sequence[ZTestReport]):
        self.reports = list(reports)
        self.df: pd.DataFrame = None

    def build_frame(self) -> "ValidationReportTransformer":
        self.df = pd.DataFrame([r.as_record() for r in self.reports])
        return self

    def cast_types(self) -> "ValidationReportTransformer":
        """Orders as integers, everything numeric else as float."""
        self.df[["r1", "r2", "n_series"]] = self.df[["r1", "r2", "n_series"]].astype("int64")
        floats = [c for c in self.PARAM_COLUMNS + self.REPORT_COLUMNS if c in self.df.columns]
        floats = [c for c in floats if c not in ("r1", "r2", "n_series", "tail")]
        self.df[floats] = self.df[floats].astype("float64")
        return self

    def reorder_columns(self) -> "ValidationReportTransformer":
        order = self.PARAM_COLUMNS + self.REPORT_COLUMNS
        self.df = self.df[[c for c in order if c in self.df.columns]]
        return self

    def transform(self) -> pd.DataFrame:
        return (
            self.build_frame()
                .cast_types()
                .reorder_columns()
                .df
        )


class TimingReportTransformer:
    """Transform timing reports into two rows (sum, series) per parameter set."""

    PARAM_COLUMNS = ["alpha1", "alpha2", "alpha3", "lambda1", "lambda2", "lambda3"]
    REPORT_COLUMNS = [
        "method",
        "mean_seconds",
        "sd_seconds",
        "median_seconds",
        "n_reps",
        "p_value",
        "speedup",
        "rel_tol",
        "max_terms",
    ]

    def __init__(self, reports: Sequence[TimingReport]):
        self.reports = list(reports)
        self.df: pd.DataFrame = None

    def build_frame(self) -> "TimingReportTransformer":
        self.df = pd.DataFrame([r.as_record() for r in self.reports])
        return self

    def compute_speedup(self) -> "TimingReportTransformer":
        """mean_seconds(series) / mean_seconds(finite sum), repeated on both rows."""
        means = self.df.pivot_table(
            index=self.PARAM_COLUMNS, columns="method", values="mean_seconds", aggfunc="first"
        )
        ratio = (means["series"] / means["finite"]).rename("speedup").reset_index()
        self.df = self.df.merge(ratio, on=self.PARAM_COLUMNS, how="left", sort=False)
        return self

    def reorder_columns(self) -> "TimingReportTransformer":
        order = self.PARAM_COLUMNS + self.REPORT_COLUMNS
        self.df = self.df[[c for c in order if c in self.df.columns]]
        return self

    def transform(self) -> pd.DataFrame:
        return (
            self.build_frame()
                .compute_speedup()
                .reorder_columns()
                .df
        )
