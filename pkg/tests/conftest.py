"""Shared fixtures: simulated critical-value tables, cached on disk.

The full-scale table (default drift grid, 200k replications) takes about
90 seconds to build single-threaded, so it is built at most once and kept
under ``tests/_cache/``.  Delete that directory to force a rebuild.
"""

from pathlib import Path

import numpy as np
import pytest

from rcatest.limitdist import CriticalValueTable, PathConfig, build_cv_table

CACHE_DIR = Path(__file__).parent / "_cache"
SESSION_TABLE = CACHE_DIR / "cvtable-session.csv"
SMALL_TABLE = CACHE_DIR / "cvtable-small.csv"


def _cached_table(path: Path, **build_kwargs) -> CriticalValueTable:
    if path.exists():
        return CriticalValueTable.from_csv(path)
    tab = build_cv_table(**build_kwargs)
    CACHE_DIR.mkdir(exist_ok=True)
    tab.to_csv(path)
    return tab


@pytest.fixture(scope="session")
def cv_table() -> CriticalValueTable:
    """Full-scale table: shipped drift grid and levels, 200k replications."""
    return _cached_table(SESSION_TABLE)


@pytest.fixture(scope="session")
def cv_table_path(cv_table) -> Path:
    """Path of the full-scale table (built by the ``cv_table`` fixture)."""
    return SESSION_TABLE


@pytest.fixture(scope="session")
def small_cv_table() -> CriticalValueTable:
    """Coarse, low-replication table for cheap structural tests.

    20k replications on a short drift grid keep the build under two
    seconds; the quantiles are too noisy for tolerance checks but fine for
    exercising interfaces.
    """
    return _cached_table(
        SMALL_TABLE,
        a_grid=np.array([-60.0, -30.0, -15.0, -8.0, -4.0, -2.0, 0.0, 2.0,
                         5.0, 10.0]),
        cfg=PathConfig(steps=400, reps=20_000, seed=5),
    )


@pytest.fixture(scope="session")
def small_cv_table_path(small_cv_table) -> Path:
    return SMALL_TABLE
