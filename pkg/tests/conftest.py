"""Shared fixtures.

The homotopy and multistart solves are expensive (tens of seconds), so
everything downstream of a solver run is session scoped and computed
once.  Acceptance tests record one summary line per criterion; the
lines are printed after the run.
"""

import time
from pathlib import Path

import pytest

from snapkit import analysis, critical
from snapkit.model import load_framework

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"

# reference coordinates (4 decimals) for the six-bar example; knots 1-3
# are pinned at (0,0), (9,0), (7,4)
GREEN = [(10.3238, 3.7970), (3.9493, 8.6308), (8.9493, 8.6043)]
RED = [(9.8218, 4.9528), (2.1773, 7.3110), (6.8838, 8.9986)]
WITNESS_CYAN = [(10.1071, 4.3844), (3.0084, 8.0281), (7.9382, 8.9006)]
WITNESS_BLUE = [(10.1168, 4.3957), (3.0101, 8.0463), (7.9343, 8.8931)]
WITNESS_MAGENTA = [(10.1071, 4.3845), (3.0084, 8.0282), (7.9382, 8.9006)]


def fixture_path(name):
    return str(FIXTURE_DIR / f"{name}.json")


def _load(name):
    return load_framework(fixture_path(name))


@pytest.fixture(scope="session")
def bars_gl():
    return _load("ex1_bars_gl")


@pytest.fixture(scope="session")
def bars_gl_red():
    return _load("ex1_bars_gl_red")


@pytest.fixture(scope="session")
def plate_gl():
    return _load("ex1_plate_gl")


@pytest.fixture(scope="session")
def plate_gl_red():
    return _load("ex1_plate_gl_red")


@pytest.fixture(scope="session")
def bars_ce():
    return _load("ex1_bars_ce")


@pytest.fixture(scope="session")
def bars_ce_red():
    return _load("ex1_bars_ce_red")


# -- solver runs ------------------------------------------------------------

@pytest.fixture(scope="session")
def bars_gl_solution(bars_gl):
    fw, cfg = bars_gl
    points, stats = critical.solve_critical_homotopy(fw, seed=0, base_cfg=cfg)
    quotient = critical.build_quotient_set(points, fw)
    return fw, points, stats, quotient


@pytest.fixture(scope="session")
def plate_gl_solution(plate_gl):
    fw, cfg = plate_gl
    points, stats = critical.solve_critical_homotopy(fw, seed=0, base_cfg=cfg)
    quotient = critical.build_quotient_set(points, fw)
    return fw, points, stats, quotient


@pytest.fixture(scope="session")
def bars_ce_solution(bars_ce):
    fw, cfg = bars_ce
    points = critical.solve_critical_newton(fw, cfg, starts=20000, seed=0)
    quotient = critical.build_quotient_set(points, fw)
    return fw, points, None, quotient


def _timed_snap(pair):
    fw, cfg = pair
    t0 = time.monotonic()
    report = analysis.snappability(fw, cfg, seed=0)
    return report, time.monotonic() - t0


@pytest.fixture(scope="session")
def snap_bars_gl(bars_gl):
    return _timed_snap(bars_gl)


@pytest.fixture(scope="session")
def snap_bars_gl_red(bars_gl_red):
    return _timed_snap(bars_gl_red)


@pytest.fixture(scope="session")
def snap_plate_gl(plate_gl):
    return _timed_snap(plate_gl)


@pytest.fixture(scope="session")
def snap_plate_gl_red(plate_gl_red):
    return _timed_snap(plate_gl_red)


@pytest.fixture(scope="session")
def snap_bars_ce(bars_ce):
    return _timed_snap(bars_ce)


@pytest.fixture(scope="session")
def snap_bars_ce_red(bars_ce_red):
    return _timed_snap(bars_ce_red)


@pytest.fixture(scope="session")
def singdist_bars_gl(bars_gl):
    fw, cfg = bars_gl
    return analysis.singularity_distance(fw, cfg, method="constrained", seed=0)


@pytest.fixture(scope="session")
def singdist_plate_gl(plate_gl):
    fw, cfg = plate_gl
    return analysis.singularity_distance(fw, cfg, method="constrained", seed=0)


# -- acceptance bookkeeping --------------------------------------------------

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance():
    """Record sub-checks for one criterion and assert them all."""

    def record(criterion, checks):
        failed = [label for label, ok in checks if not ok]
        _ACCEPTANCE.append((criterion, len(checks), failed))
        assert not failed, f"criterion {criterion} failed: {failed}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, total, failed in sorted(_ACCEPTANCE):
        if failed:
            line = (f"criterion {criterion}: FAIL "
                    f"({len(failed)}/{total} checks failed: {failed})")
        else:
            line = f"criterion {criterion}: PASS ({total} checks)"
        terminalreporter.write_line(line)
