"""Per-property target standardization, fit on training data only."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TargetScaler:
    mean: float
    sd: float

    @classmethod
    def fit(cls, values):
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            raise ValueError("cannot fit a scaler on zero samples")
        sd = float(values.std())
        # constant targets standardize to zero; inverse still exact
        return cls(mean=float(values.mean()), sd=sd if sd > 0 else 1.0)

    def transform(self, values):
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.sd

    def inverse(self, values):
        return np.asarray(values, dtype=np.float64) * self.sd + self.mean

    def to_dict(self):
        return {"mean": self.mean, "sd": self.sd}

    @classmethod
    def from_dict(cls, data):
        return cls(mean=data["mean"], sd=data["sd"])
