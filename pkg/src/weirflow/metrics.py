"""Regression error metrics.

Log-family metrics (MSLE, RMSLE, MPD, MGD) use the natural log of the raw
values, not ``log1p``.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import ArgumentError, DomainError

KINDS = ("MSE", "RMSE", "MAE", "MAPE", "MSLE", "RMSLE", "MPD", "MGD")
LOG_KINDS = frozenset({"MSLE", "RMSLE", "MPD", "MGD"})
CLAMP = 1e-6
LOG_FLOOR = -16.0


@dataclass(frozen=True)
class MetricReport:
    mse: float
    rmse: float
    mae: float
    mape: float
    msle: float
    rmsle: float
    mpd: float
    mgd: float
    clamped_count: int = 0

    def values(self) -> tuple[float, ...]:
        """The eight metrics in canonical order."""
        return astuple(self)[:8]

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _pair(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if y.shape != yhat.shape:
        raise ArgumentError(f"length mismatch: {y.size} targets vs {yhat.size} predictions")
    if y.size == 0:
        raise ArgumentError("metrics need at least one pair")
    return y, yhat


def _require(kind: str, values: np.ndarray, name: str, strict_positive: bool) -> None:
    bad = values <= 0 if strict_positive else values == 0
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        rule = "> 0" if strict_positive else "!= 0"
        raise DomainError(f"{kind}: {name}[{i}] = {values[i]!r} must be {rule}")


def _evaluate(kind: str, y: np.ndarray, yhat: np.ndarray) -> float:
    if kind == "MSE":
        return float(np.mean((y - yhat) ** 2))
    if kind == "RMSE":
        return math.sqrt(np.mean((y - yhat) ** 2))
    if kind == "MAE":
        return float(np.mean(np.abs(y - yhat)))
    if kind == "MAPE":
        return float(100.0 * np.mean(np.abs((y - yhat) / y)))
    if kind == "MSLE":
        return float(np.mean((np.log(y) - np.log(yhat)) ** 2))
    if kind == "RMSLE":
        return math.sqrt(np.mean((np.log(y) - np.log(yhat)) ** 2))
    # Deviances in terms of d = y / yhat - 1, which avoids the cancellation of
    # the textbook forms when yhat is close to y:
    #   y ln(y/yhat) + yhat - y   = yhat ((1 + d) log1p(d) - d)
    #   ln(yhat/y) + y/yhat - 1   = d - log1p(d)
    if kind == "MPD":
        d = (y - yhat) / yhat
        return float(np.mean(2.0 * yhat * ((1.0 + d) * np.log1p(d) - d)))
    if kind == "MGD":
        d = (y - yhat) / yhat
        return float(np.mean(2.0 * (d - np.log1p(d))))
    raise ArgumentError(f"unknown metric {kind!r}; expected one of {', '.join(KINDS)}")


def compute_metric(kind: str, y, yhat) -> float:
    """Evaluate a single metric. ``kind`` is case-insensitive."""
    kind = kind.upper()
    y, yhat = _pair(y, yhat)
    if kind == "MAPE":
        _require(kind, y, "y", strict_positive=False)
    elif kind in LOG_KINDS:
        _require(kind, y, "y", strict_positive=True)
        _require(kind, yhat, "yhat", strict_positive=True)
    return _evaluate(kind, y, yhat)


def compute_report(y, yhat) -> MetricReport:
    """All eight metrics.

    Predictions at or below 1e-6 are clamped to 1e-6 for the log-family
    metrics only; ``clamped_count`` says how many.
    """
    y, yhat = _pair(y, yhat)
    _require("report", y, "y", strict_positive=True)
    low = yhat <= CLAMP
    clamped = np.where(low, CLAMP, yhat)
    values = {}
    for kind in KINDS:
        values[kind.lower()] = _evaluate(kind, y, clamped if kind in LOG_KINDS else yhat)
    return MetricReport(**values, clamped_count=int(low.sum()))


def log_report(report: MetricReport) -> tuple[float, ...]:
    """Base-10 logs of the eight metrics, floored at -16."""
    return tuple(LOG_FLOOR if v <= 1e-16 else max(math.log10(v), LOG_FLOOR) for v in report.values())
