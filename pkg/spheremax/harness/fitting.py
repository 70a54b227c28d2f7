"""Least-squares slopes on log2-log2 axes."""

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError

logger = logging.getLogger(__name__)


@dataclass
class FitReport:
    slope: float
    intercept: float
    r_squared: float
    points: list = field(default_factory=list)
    config_hash: str = ""

    def predict(self, x):
        return 2.0 ** (self.intercept + self.slope * np.log2(x))

    def to_dict(self):
        return {
            'slope': self.slope,
            'intercept': self.intercept,
            'r_squared': self.r_squared,
            'points': [list(p) for p in self.points],
            'config_hash': self.config_hash,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data['slope'],
            data['intercept'],
            data['r_squared'],
            [tuple(p) for p in data.get('points', [])],
            data.get('config_hash', ""),
        )


def fit_loglog(points, config_hash=""):
    """Ordinary least squares of log2(y) on log2(x).

    ``points`` is a sequence of (x, y) pairs with x, y > 0 and at least three
    distinct abscissae.
    """
    data = np.asarray(points, dtype=float)
    if data.ndim != 2 or data.shape[0] < 3 or data.shape[1] != 2:
        raise DomainError(f"fit_loglog: need at least 3 (x, y) pairs, got {len(points)}")
    if np.any(data <= 0) or not np.all(np.isfinite(data)):
        raise DomainError("fit_loglog: coordinates must be positive and finite")

    lx, ly = np.log2(data[:, 0]), np.log2(data[:, 1])
    if np.ptp(lx) == 0 or len(np.unique(lx)) < 3:
        raise DomainError("fit_loglog: abscissae are degenerate")

    slope, intercept = np.polyfit(lx, ly, 1)
    residual = ly - (intercept + slope * lx)
    total = np.sum((ly - ly.mean()) ** 2)
    r_squared = 1.0 if total == 0 else float(max(0.0, 1.0 - np.sum(residual ** 2) / total))

    logger.debug("fit_loglog: slope=%.4f intercept=%.4f r2=%.6f", slope, intercept, r_squared)
    return FitReport(float(slope), float(intercept), r_squared,
                     [(float(a), float(b)) for a, b in zip(lx, ly)], config_hash)
