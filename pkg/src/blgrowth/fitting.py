"""Least-squares power-law fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    r2: float


def fit_loglog(xs, ys) -> LogLogFit:
    """Ordinary least squares of ``log y`` against ``log x``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("xs and ys must be 1-d sequences of equal length")
    if len(x) < 3:
        raise InvalidInputError("need at least 3 points for a fit")
    if np.any(x <= 0) or np.any(y <= 0) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("log-log fit needs finite positive values")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return LogLogFit(float(slope), float(intercept), r2)
