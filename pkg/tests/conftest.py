import json
import warnings
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from alphabrush.brushlet2d import BrushletSystem
from alphabrush.config import RunConfig
from alphabrush.covering import AlphaParams, build_covering
from alphabrush.signals import annulus_window

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BOUNDS = json.loads((Path(__file__).parent / "oracle_bounds.json").read_text())

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE: dict = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def default_cov():
    return build_covering(AlphaParams(0.5, 1.0, -2, 4))


@pytest.fixture(scope="session")
def default_cfg():
    return RunConfig()


@pytest.fixture(scope="session")
def system(default_cfg, default_cov):
    """Default configuration grid (1760 nodes per axis)."""
    return BrushletSystem(default_cov, default_cfg.grid.axis(default_cov))


@pytest.fixture(scope="session")
def window(default_cov):
    return annulus_window(default_cov)


@pytest.fixture(scope="session")
def small_cov():
    return build_covering(AlphaParams(0.5, 1.0, -1, 3))


@pytest.fixture(scope="session")
def small_system(small_cov):
    from alphabrush.grid import axis_for_covering

    return BrushletSystem(small_cov, axis_for_covering(small_cov, spatial_extent=2.0, n_res=10, q_collar=12))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _quiet_numeric_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        yield
