from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ForecastResult:
    """Point forecasts, with optional lower/upper interval bounds."""

    point: np.ndarray
    dates: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __len__(self):
        return len(self.point)

    def to_dict(self):
        out = {"point": self.point.tolist()}
        if self.dates is not None:
            out["dates"] = [str(d) for d in self.dates]
        if self.lower is not None:
            out["lower"] = self.lower.tolist()
            out["upper"] = self.upper.tolist()
        return out
