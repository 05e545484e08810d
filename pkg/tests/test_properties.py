import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from robust_welfare import oracle
from robust_welfare.demand_shape import CurvatureBand, GradientBand
from robust_welfare.errors import InfeasibleShape
from robust_welfare.model import Snapshot
from robust_welfare.oracle import SampleConfig, path_grid_for
from robust_welfare.scenario import emit_scenario, make_scenario, parse_scenario
from robust_welfare.welfare_engine import four_corner_bounds


@st.composite
def scenarios(draw):
    p0 = draw(st.floats(1.0, 50.0))
    dp = draw(st.floats(0.05, 0.5)) * p0
    q0 = draw(st.floats(10.0, 1000.0))
    q1 = q0 * draw(st.floats(0.5, 0.95))
    tau0 = draw(st.floats(0.0, 0.2)) * p0
    u_mid = draw(st.floats(0.5, 3.0))
    spread = draw(st.floats(0.0, 0.9))
    alpha, beta = u_mid * (1 - spread), u_mid * (1 + spread)
    dtau = u_mid * dp
    k_lo = draw(st.floats(0.0, 1.0))
    k_hi = draw(st.floats(k_lo, 1.0))
    slope = (q1 - q0) / dp
    f_lo = slope * draw(st.floats(1.0, 2.0))
    f_hi = slope * draw(st.floats(0.3, 1.0))
    return make_scenario(Snapshot(p0, q0, tau0), Snapshot(p0 + dp, q1, tau0 + dtau),
                         (1 / beta, 1 / alpha), (k_lo, k_hi), GradientBand(f_lo, f_hi))


@settings(max_examples=40, deadline=None)
@given(scenarios())
def test_bounds_are_ordered_and_consistent(sc):
    b = four_corner_bounds(sc)
    for ob in b.objects.values():
        assert ob.lower <= ob.upper
    assert b["DWL"].lower == -b["TS"].upper and b["DWL"].upper == -b["TS"].lower
    # the straight line is admissible, so its consumer surplus lies inside
    cs_line = -(sc.pre.quantity + sc.post.quantity) / 2 * sc.change.delta_p
    scale = 1e-9 * max(abs(cs_line), 1.0)
    assert b["CS"].lower - scale <= cs_line <= b["CS"].upper + scale


@settings(max_examples=15, deadline=None)
@given(scenarios(), st.integers(0, 2**32 - 1))
def test_sampled_welfare_inside_bounds(sc, seed):
    try:
        rep = oracle.verify_containment(sc, SampleConfig(300, seed, path_grid_for(sc, 256)))
    except InfeasibleShape:
        assume(False)
    assert rep.n_violations == 0, rep.violations[:3]


@settings(max_examples=30, deadline=None)
@given(scenarios(), st.floats(-2.0, 2.0))
def test_round_trip(sc, h):
    assert parse_scenario(emit_scenario(sc)) == sc
    curv = make_scenario(sc.pre, sc.post, (sc.pass_through.rho_lo, sc.pass_through.rho_hi),
                         (sc.conduct.kappa_lo, sc.conduct.kappa_hi),
                         CurvatureBand(-abs(h), abs(h), 0.0), "log-log")
    assert parse_scenario(emit_scenario(curv)) == curv
