"""
ncdir.src.parser

This module contains the RunConfigParser class, which reads a JSON run
configuration organized into named sections (``param_sets``, ``orders``
and scalar options) and builds validation or bench configurations.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from src.dist import NcDirParams, RngSeed
from src.errors import DomainError
from src.moments import MomentOrder
from src.sim import DEFAULT_SEED, BenchConfig, ValidationConfig
from src.specfun import SeriesControl


class RunConfigParser:
    """
    Parser for multi-row run configuration files.

    Attributes
    ----------
    sections : Dict[str, Any]
        Mapping between section names and their raw values.
    """

    SECTIONS = {
        "param_sets",
        "orders",
        "n_series",
        "n_draws_per_series",
        "seed",
        "alpha_level",
        "workers",
        "n_reps",
        "rel_tol",
        "max_terms",
        "guard",
        "check_values",
    }

    def __init__(self, filepath: Path, encoding: str = "utf-8") -> None:
        """
        Initialize the RunConfigParser.

        Parameters
        ----------
        filepath : Path
            Path to the JSON configuration file.
        encoding : str
            File encoding (default: "utf-8").
        """
        self._filepath = Path(filepath)
        self._encoding = encoding
        self._content: Optional[str] = None
        self.sections: Dict[str, Any] = {}

    def _read_content(self) -> None:
        """Read the entire content of the file."""
        try:
            self._content = self._filepath.read_text(encoding=self._encoding)
        except FileNotFoundError:
            raise DomainError(f"run config not found: {self._filepath}")

    def parse(self) -> Dict[str, Any]:
        """Parse the file into its named sections."""
        self._read_content()
        try:
            raw = json.loads(self._content)
        except json.JSONDecodeError as e:
            raise DomainError(f"{self._filepath} is not valid JSON: {e}")
        if not isinstance(raw, dict):
            raise DomainError(f"{self._filepath} must hold a JSON object")
        unknown = set(raw) - self.SECTIONS
        if unknown:
            raise DomainError(f"unknown section(s) in {self._filepath}: {sorted(unknown)}")
        self.sections = raw
        return self.sections

    def param_sets(self) -> Tuple[NcDirParams, ...]:
        rows = self.sections.get("param_sets")
        if not rows:
            raise DomainError("section 'param_sets' is missing or empty")
        try:
            return tuple(NcDirParams(tuple(row["alpha"]), tuple(row["lambda"])) for row in rows)
        except (KeyError, TypeError):
            raise DomainError("every param_sets entry needs 'alpha' and 'lambda' lists")

    def orders(self) -> Tuple[MomentOrder, ...]:
        rows = self.sections.get("orders")
        if not rows:
            raise DomainError("section 'orders' is missing or empty")
        try:
            return tuple(MomentOrder(*row) for row in rows)
        except (TypeError, ValueError):
            raise DomainError("every orders entry must be a pair [r1, r2]")

    def series_control(self) -> SeriesControl:
        defaults = SeriesControl()
        return SeriesControl(
            rel_tol=self.sections.get("rel_tol", defaults.rel_tol),
            max_terms=self.sections.get("max_terms", defaults.max_terms),
            guard=self.sections.get("guard", defaults.guard),
        )

    def to_validation_config(self, seed: Optional[int] = None, workers: Optional[int] = None) -> ValidationConfig:
        """Validation config; explicit arguments override the file."""
        if not self.sections:
            self.parse()
        s = self.sections
        return ValidationConfig(
            n_series=s.get("n_series", 30),
            n_draws_per_series=s.get("n_draws_per_series", 10_000),
            orders=self.orders(),
            param_sets=self.param_sets(),
            seed=RngSeed(seed if seed is not None else s.get("seed", DEFAULT_SEED)),
            alpha_level=s.get("alpha_level", 0.05),
            ctl=self.series_control(),
            workers=workers if workers is not None else s.get("workers", 1),
        )

    def to_bench_config(self, n_reps: Optional[int] = None, check_values: bool = False) -> BenchConfig:
        if not self.sections:
            self.parse()
        s = self.sections
        return BenchConfig(
            param_sets=self.param_sets(),
            orders=self.orders(),
            n_reps=n_reps if n_reps is not None else s.get("n_reps", 30),
            ctl=self.series_control(),
            check_values=check_values or bool(s.get("check_values", False)),
        )
