"""
config/settings.py
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional
import os

from dotenv import load_dotenv

from src.dist import RngSeed
from src.errors import DomainError
from src.specfun import SeriesControl

load_dotenv(override=False)


def project_root() -> Path:
    return Path(__file__).resolve().parents[1]


def _env_number(name: str, default: str, cast):
    raw = os.getenv(name, default)
    try:
        return cast(raw)
    except ValueError:
        raise DomainError(f"{name} must be a {cast.__name__}, got {raw!r}")


@dataclass(frozen=True)
class SeriesSettings:
    REL_TOL: float = 1e-14
    MAX_TERMS: int = 10_000
    GUARD: int = 3

    @staticmethod
    def from_env() -> "SeriesSettings":
        return SeriesSettings(
            REL_TOL=_env_number("NCDIR_REL_TOL", "1e-14", float),
            MAX_TERMS=_env_number("NCDIR_MAX_TERMS", "10000", int),
            GUARD=_env_number("NCDIR_GUARD", "3", int),
        )

    def control(self, rel_tol: Optional[float] = None, max_terms: Optional[int] = None) -> SeriesControl:
        """SeriesControl with command-line overrides taking precedence."""
        return SeriesControl(
            rel_tol=self.REL_TOL if rel_tol is None else rel_tol,
            max_terms=self.MAX_TERMS if max_terms is None else max_terms,
            guard=self.GUARD,
        )


@dataclass(frozen=True)
class RunSettings:
    SEED: Optional[int] = None
    WORKERS: int = 1
    LOG_LEVEL: str = "INFO"
    CONFIG_DIR: Path = project_root() / "config"

    @staticmethod
    def from_env() -> "RunSettings":
        seed = os.getenv("NCDIR_SEED")
        return RunSettings(
            SEED=None if seed is None else _env_number("NCDIR_SEED", seed, int),
            WORKERS=_env_number("NCDIR_WORKERS", "1", int),
            LOG_LEVEL=os.getenv("NCDIR_LOG_LEVEL", "INFO").upper(),
        )

    def seed(self, override: Optional[int] = None) -> RngSeed:
        """The --seed value, else NCDIR_SEED, else fresh entropy."""
        if override is not None:
            return RngSeed(override)
        if self.SEED is not None:
            return RngSeed(self.SEED)
        return RngSeed.fresh()
