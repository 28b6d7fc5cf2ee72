from pathlib import Path

import numpy as np
import pandas as pd

from src.errors import DomainError
from src.validator import sample_schema


class SampleSource:
    """Read a sample CSV written by ``sample --format csv``."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def read(self) -> pd.DataFrame:
        if not self.path.exists():
            raise DomainError(f"sample file not found: {self.path}")
        df = pd.read_csv(self.path, sep=",", float_precision="round_trip")
        return sample_schema().validate(df)

    def to_array(self) -> np.ndarray:
        return self.read().to_numpy(dtype=float)
