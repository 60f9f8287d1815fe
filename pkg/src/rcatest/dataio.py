"""CSV ingestion and series export for the command-line workflow."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import IngestError
from .simulate import Series

__all__ = ["EmpiricalConfig", "ingest", "write_series_csv", "read_series_csv"]

MIN_OBSERVATIONS = 10


@dataclass(frozen=True)
class EmpiricalConfig:
    """How to turn a CSV file into a test-ready series.

    ``column`` selects by header name (str) or position (int).  ``take_log``
    is applied before ``detrend``; detrending regresses the series on an
    intercept and linear time trend and keeps the residuals.
    """

    path: str
    column: str | int = "y"
    take_log: bool = False
    detrend: str = "none"

    def __post_init__(self):
        if self.detrend not in ("none", "linear"):
            raise IngestError(f"unknown detrend option {self.detrend!r}")


def ingest(cfg: EmpiricalConfig) -> tuple[Series, dict]:
    """Load, transform, and validate a series; returns it with a meta dict."""
    try:
        frame = pd.read_csv(cfg.path)
    except FileNotFoundError:
        raise IngestError(f"no such file: {cfg.path}") from None
    except Exception as exc:  # malformed CSV
        raise IngestError(f"could not parse {cfg.path}: {exc}") from exc
    if frame.shape[1] == 0:
        raise IngestError(f"{cfg.path} has no columns")

    if isinstance(cfg.column, int):
        if not 0 <= cfg.column < frame.shape[1]:
            raise IngestError(
                f"column index {cfg.column} out of range "
                f"(file has {frame.shape[1]} columns)"
            )
        raw = frame.iloc[:, cfg.column]
        column_label = str(frame.columns[cfg.column])
    else:
        if cfg.column not in frame.columns:
            raise IngestError(
                f"no column {cfg.column!r}; available: {list(frame.columns)}"
            )
        raw = frame[cfg.column]
        column_label = cfg.column

    vals = pd.to_numeric(raw, errors="coerce")
    bad = vals.isna()
    if bad.any():
        where = [int(i) for i in bad.index[bad][:10]]
        raise IngestError(
            f"column {column_label!r} has {int(bad.sum())} missing or "
            f"non-numeric entries (first rows: {where})"
        )
    x = vals.to_numpy(dtype=float)
    if x.size < MIN_OBSERVATIONS:
        raise IngestError(
            f"need at least {MIN_OBSERVATIONS} observations, got {x.size}"
        )
    if cfg.take_log:
        if np.any(x <= 0.0):
            where = [int(i) for i in np.nonzero(x <= 0.0)[0][:10]]
            raise IngestError(
                f"log transform needs positive values (bad rows: {where})"
            )
        x = np.log(x)
    if cfg.detrend == "linear":
        t = np.arange(x.size, dtype=float)
        slope, intercept = np.polyfit(t, x, 1)
        x = x - (intercept + slope * t)
    meta = {
        "path": str(cfg.path),
        "column": column_label,
        "n": int(x.size),
        "take_log": cfg.take_log,
        "detrend": cfg.detrend,
    }
    return Series(x), meta


def write_series_csv(series: Series, path) -> None:
    """One-column CSV with header ``y``."""
    pd.DataFrame({"y": series.values}).to_csv(path, index=False)


def read_series_csv(path) -> Series:
    """Inverse of :func:`write_series_csv` (no transforms)."""
    series, _ = ingest(EmpiricalConfig(path=str(path), column="y"))
    return series
