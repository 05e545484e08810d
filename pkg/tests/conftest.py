import os

import pytest

from robust_welfare.demand_shape import CurvatureBand, GradientBand, ShapeTransform, Support
from robust_welfare.model import (
    ConductInterval,
    InversePassThroughBounds,
    PolicyChange,
    Snapshot,
    build_ad_valorem_change,
)
from robust_welfare.scenario import make_scenario

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "scenarios")

PRE = Snapshot(10.0, 100.0, 0.0)
POST = Snapshot(12.0, 80.0, 3.0)


def linear_q(p):
    return 200.0 - 10.0 * p


@pytest.fixture
def pc():
    return PolicyChange(PRE, POST)


@pytest.fixture
def inv():
    return InversePassThroughBounds(1.0, 2.0)


@pytest.fixture
def linear_curve(pc):
    """The straight line through both snapshots, as a point gradient band."""
    t = ShapeTransform()
    from robust_welfare.demand_shape import ExtremalDemandCurve

    return ExtremalDemandCurve(t, GradientBand(-10.0, -10.0), (), Support.from_change(pc, t))


@pytest.fixture
def canonical():
    return make_scenario(PRE, POST, (0.5, 1.0), (0.0, 0.5), GradientBand(-15.0, -5.0))


@pytest.fixture
def ad_valorem():
    return make_scenario(Snapshot(10.0, 100.0), Snapshot(12.0, 80.0), (0.5, 1.0), (0.0, 0.5),
                         GradientBand(-15.0, -5.0), xi=(0.0, 0.25))


@pytest.fixture
def canonical_path():
    return os.path.join(SCENARIO_DIR, "canonical.json")


def shape_cases():
    """(transform, band) pairs covering all four transforms and both classes."""
    return [
        ("level-level", GradientBand(-15.0, -5.0)),
        ("level-level", CurvatureBand(-20.0, 20.0, 0.0)),
        ("log-log", GradientBand(-3.0, -0.5)),
        ("log-log", CurvatureBand(-3.0, 3.0, 0.5)),
        ("log-level", GradientBand(-0.3, -0.05)),
        ("log-level", CurvatureBand(-0.05, 0.05, 0.0)),
        ("level-log", GradientBand(-200.0, -50.0)),
        ("level-log", CurvatureBand(-300.0, 300.0, 0.0)),
    ]


def unit_conduct():
    return ConductInterval(0.0, 0.5)


def unit_ad_valorem_change():
    return build_ad_valorem_change(Snapshot(10.0, 100.0), Snapshot(12.0, 80.0), 0.0, 0.25, 0.5, 1.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(mod.line(n, *results[n]))
