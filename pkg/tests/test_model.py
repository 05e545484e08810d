import math

import pytest

from robust_welfare.errors import SignConventionViolated
from robust_welfare.model import (
    AdValoremChange,
    ConductInterval,
    InversePassThroughBounds,
    PassThroughInterval,
    PolicyChange,
    Snapshot,
    build_ad_valorem_change,
    build_policy_change,
    check_path_feasibility,
    delta_tr,
    inverse_passthrough_bounds,
    require_path_feasible,
)
from robust_welfare.errors import InfeasibleScenario


def test_deltas_on_fixture(pc):
    assert pc.delta_p == 2.0
    assert pc.delta_q == -20.0
    assert pc.delta_tau == 3.0
    assert (pc.p0, pc.p1) == (10.0, 12.0)


@pytest.mark.parametrize("post", [
    Snapshot(10.0, 80.0, 3.0),   # price unchanged
    Snapshot(12.0, 100.0, 3.0),  # quantity unchanged
    Snapshot(12.0, 120.0, 3.0),  # quantity up
    Snapshot(12.0, 80.0, 0.0),   # no tax change
])
def test_sign_conventions_rejected(post):
    with pytest.raises(SignConventionViolated):
        build_policy_change(Snapshot(10.0, 100.0, 0.0), post)


def test_sign_violation_lists_every_problem():
    with pytest.raises(SignConventionViolated) as exc:
        PolicyChange(Snapshot(10.0, 100.0, 1.0), Snapshot(9.0, 120.0, 1.0))
    msg = str(exc.value)
    assert "price" in msg and "quantity" in msg and "tax" in msg


@pytest.mark.parametrize("price,qty,tax", [(0.0, 1.0, 0.0), (1.0, -1.0, 0.0), (1.0, 1.0, -0.1),
                                           (math.nan, 1.0, 0.0), (1.0, math.inf, 0.0)])
def test_snapshot_rejects_bad_values(price, qty, tax):
    with pytest.raises(ValueError):
        Snapshot(price, qty, tax)


def test_positive_initial_tax_allowed():
    pc = PolicyChange(Snapshot(10.0, 100.0, 1.0), Snapshot(12.0, 80.0, 3.0))
    assert pc.delta_tau == 2.0
    assert delta_tr(pc) == 3.0 * 80.0 - 1.0 * 100.0


@pytest.mark.parametrize("rho,expected", [((0.5, 1.0), (1.0, 2.0)), ((0.25, 0.5), (2.0, 4.0)),
                                          ((1.0, 1.0), (1.0, 1.0))])
def test_inverse_passthrough(rho, expected):
    inv = inverse_passthrough_bounds(PassThroughInterval(*rho))
    assert (inv.alpha, inv.beta) == expected


@pytest.mark.parametrize("rho", [(0.0, 1.0), (-0.5, 1.0), (1.0, 0.5), (0.5, math.inf)])
def test_passthrough_interval_validation(rho):
    with pytest.raises(ValueError):
        PassThroughInterval(*rho)


@pytest.mark.parametrize("kappa", [(-0.1, 0.5), (0.2, 1.5), (0.6, 0.4)])
def test_conduct_interval_validation(kappa):
    with pytest.raises(ValueError):
        ConductInterval(*kappa)


def test_conduct_endpoints_collapse():
    assert ConductInterval(0.3, 0.3).endpoints == (0.3,)
    assert ConductInterval(0.0, 0.5).endpoints == (0.0, 0.5)


def test_near_degenerate_flag():
    assert InversePassThroughBounds(1.0, 1.0 + 1e-12).near_degenerate
    assert not InversePassThroughBounds(1.0, 1.0).near_degenerate
    assert not InversePassThroughBounds(1.0, 2.0).near_degenerate


def test_feasibility(pc):
    assert check_path_feasibility(pc, InversePassThroughBounds(1.0, 2.0))
    # budget 3 above beta * dp = 2.5
    assert not check_path_feasibility(pc, InversePassThroughBounds(1.0, 1.25))
    with pytest.raises(InfeasibleScenario):
        require_path_feasible(pc, InversePassThroughBounds(1.0, 1.25))
    # exactly on the boundary: dtau = beta * dp
    assert check_path_feasibility(pc, InversePassThroughBounds(1.0, 1.5))
    assert check_path_feasibility(pc, InversePassThroughBounds(1.5, 2.0))


def test_delta_tr():
    assert delta_tr(PolicyChange(Snapshot(10, 100, 0), Snapshot(12, 80, 3))) == 240.0
    assert delta_tr(PolicyChange(Snapshot(1, 2, 1), Snapshot(2, 1, 8))) == 6.0
    assert delta_tr(PolicyChange(Snapshot(1, 10, 2), Snapshot(2, 5, 4))) == 0.0


def test_ad_valorem_change():
    av = build_ad_valorem_change(Snapshot(1.0, 10.0), Snapshot(math.e, 5.0), 0.1, 0.4, 2.0, 5.0)
    assert isinstance(av, AdValoremChange)
    assert av.x0 == 0.0 and av.x1 == pytest.approx(1.0, rel=1e-15)
    assert av.delta_xi == pytest.approx(0.3)
    assert (av.w_lo, av.w_hi) == (0.2, 0.5)
    with pytest.raises(SignConventionViolated):
        build_ad_valorem_change(Snapshot(1.0, 10.0), Snapshot(2.0, 5.0), 0.4, 0.1, 2.0, 5.0)
