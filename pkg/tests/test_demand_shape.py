import math

import numpy as np
import pytest
from scipy.optimize import linprog

from robust_welfare.demand_shape import (
    Axis,
    CurvatureBand,
    Direction,
    ExtremalDemandCurve,
    GradientBand,
    PhiProfile,
    ShapeTransform,
    SignClass,
    Support,
    WelfareObject,
    build_curvature_extremal,
    build_extremal,
    build_gradient_extremal,
    curvature_block_length,
    elasticity_at,
    eval_demand,
    eval_demand_slope,
    gradient_block_length,
    phi_coefficients,
    remark_blocks,
    transform_point,
)
from robust_welfare.errors import (
    DegenerateBand,
    DomainError,
    InfeasibleShape,
    NonmonotoneDemand,
    OutOfSupport,
    ZeroQuantity,
)
from robust_welfare.model import InversePassThroughBounds, PolicyChange, Snapshot
from robust_welfare.supply_path import PathBranch

from conftest import shape_cases

LL = ShapeTransform()


def test_transform_point():
    log = ShapeTransform.parse("log-log")
    assert transform_point(log, Axis.PRICE_FORWARD, math.e) == pytest.approx(1.0)
    assert transform_point(LL, Axis.QTY_INVERSE, 7.0) == 7.0
    assert transform_point(log, Axis.QTY_INVERSE, 0.0) == 1.0
    with pytest.raises(DomainError):
        transform_point(log, Axis.PRICE_FORWARD, 0.0)


def test_transform_names_round_trip():
    for name in ("level-level", "log-log", "log-level", "level-log"):
        assert ShapeTransform.parse(name).name == name
    with pytest.raises(ValueError):
        ShapeTransform.parse("cubic-level")


def test_phi_table(pc, inv):
    cs = phi_coefficients(WelfareObject.CS, PathBranch.MAX, 0.3, inv, pc)
    assert (cs.a0, cs.a1, cs.sign_class) == (-1.0, 0.0, SignClass.ALL_NONPOS)
    ps = phi_coefficients(WelfareObject.PS, PathBranch.MAX, 0.0, inv, pc)
    assert (ps.a0, ps.a1, ps.sign_class) == (0.0, -1.0, SignClass.ALL_NONPOS)
    ts = phi_coefficients(WelfareObject.TS, PathBranch.MIN, 0.25, inv, pc)
    assert (ts.a0, ts.a1, ts.c0) == (-1.25, -1.0, 240.0)
    assert ts.region_p == (11.0, 12.0)
    assert ps.region_p == (10.0, 11.0)


def test_phi_single_switch():
    pc = PolicyChange(Snapshot(10, 100, 0), Snapshot(12, 80, 1.2))
    inv = InversePassThroughBounds(0.4, 0.9)
    prof = phi_coefficients(WelfareObject.PS, PathBranch.MAX, 0.3, inv, pc)
    assert prof.sign_class is SignClass.SINGLE_SWITCH
    assert prof.switch_s == pytest.approx(prof.region_j[1])
    # endpoints of the switch interval count as one-signed
    for kappa in (0.1, 0.6):
        edge = phi_coefficients(WelfareObject.PS, PathBranch.MAX, kappa, inv, pc)
        assert edge.sign_class in (SignClass.ALL_NONNEG, SignClass.ALL_NONPOS)


def test_gradient_block_length():
    band = GradientBand(-15.0, -5.0)
    assert gradient_block_length(band, 10.0, 12.0, -20.0) == pytest.approx(1.0)
    assert gradient_block_length(band, 10.0, 12.0, -30.0) == 0.0
    assert gradient_block_length(band, 10.0, 12.0, -10.0) == 2.0
    with pytest.raises(InfeasibleShape):
        gradient_block_length(band, 10.0, 12.0, -40.0)
    with pytest.raises(DegenerateBand):
        gradient_block_length(GradientBand(-8.0, -8.0), 10.0, 12.0, -20.0)


def test_curvature_block_length():
    assert curvature_block_length(CurvatureBand(-1.0, 1.0, 0.0), 0.0, 2.0) == pytest.approx(1.0)
    assert curvature_block_length(CurvatureBand(-1.0, 1.0, -2.0), 0.0, 2.0) == 0.0
    assert curvature_block_length(CurvatureBand(-1.0, 1.0, 2.0), 0.0, 2.0) == 2.0
    with pytest.raises(InfeasibleShape):
        curvature_block_length(CurvatureBand(-1.0, 1.0, 3.0), 0.0, 2.0)
    with pytest.raises(DegenerateBand):
        curvature_block_length(CurvatureBand(0.0, 0.0, 1.0), 0.0, 2.0)


def test_band_validation():
    with pytest.raises(ValueError):
        GradientBand(-5.0, -15.0)
    with pytest.raises(ValueError):
        GradientBand(-5.0, 1.0)
    with pytest.raises(ValueError):
        CurvatureBand(0.5, 1.0, 0.0)


def test_cs_upper_block_at_right_end(pc, inv):
    band = GradientBand(-15.0, -5.0)
    prof = phi_coefficients(WelfareObject.CS, PathBranch.MAX, 0.0, inv, pc)
    up = build_gradient_extremal(prof, band, LL, Direction.UPPER, pc)
    lo = build_gradient_extremal(prof, band, LL, Direction.LOWER, pc)
    assert up.block == pytest.approx((11.0, 12.0))
    assert lo.block == pytest.approx((10.0, 11.0))
    # by hand: kinks at Q = 85 and Q = 95
    assert up.integral(10.0, 12.0) == pytest.approx((100 + 85) / 2 + (85 + 80) / 2)
    assert lo.integral(10.0, 12.0) == pytest.approx((100 + 95) / 2 + (95 + 80) / 2)


def _profile(region_j, a0, a1, sign_class):
    return PhiProfile(a0, a1, 0.0, region_j, region_j, sign_class)


def test_remark_single_switch_placements():
    support = Support(0.0, 4.0, 10.0, 2.0, 0.0, 4.0, 10.0, 2.0)
    left = _profile((0.0, 1.5), 1.0, -2.0, SignClass.SINGLE_SWITCH)
    # m <= L- = 2.5, upper
    assert remark_blocks(left, support, 1.0, Direction.UPPER) == ((1.5, 2.5),)
    # m > L+ = 1.5, lower
    assert remark_blocks(left, support, 2.0, Direction.LOWER) == ((0.0, 2.0),)
    assert remark_blocks(left, support, 1.0, Direction.LOWER) == ((0.5, 1.5),)
    # mirrored when J sits on the right
    right = _profile((2.5, 4.0), 1.0, -2.0, SignClass.SINGLE_SWITCH)
    assert remark_blocks(right, support, 1.0, Direction.UPPER) == ((1.5, 2.5),)


def test_remark_one_signed_placements():
    support = Support(0.0, 4.0, 10.0, 2.0, 0.0, 4.0, 10.0, 2.0)
    pos = _profile((0.0, 1.0), 1.0, 0.0, SignClass.ALL_NONNEG)
    neg = _profile((0.0, 1.0), -1.0, 0.0, SignClass.ALL_NONPOS)
    assert remark_blocks(pos, support, 1.0, Direction.UPPER) == ((0.0, 1.0),)
    assert remark_blocks(pos, support, 1.0, Direction.LOWER) == ((3.0, 4.0),)
    assert remark_blocks(neg, support, 1.0, Direction.UPPER) == ((3.0, 4.0),)


def test_curvature_degenerate_block_is_quadratic(pc):
    band = CurvatureBand(-2.0, 2.0, -4.0)  # n = 0, h = -2 everywhere
    c = ExtremalDemandCurve(LL, band, (), Support.from_change(pc, LL))
    p = np.linspace(10.0, 12.0, 9)
    q = c.eval(p)
    # G'' = -2 through (10,100) and (12,80): Q = 100 + f0 (p-10) - (p-10)^2
    f0 = (-20.0 + 4.0) / 2.0
    assert q == pytest.approx(100 + f0 * (p - 10) - (p - 10) ** 2, rel=1e-13)


def test_curvature_remark_and_optimal(pc, inv):
    band = CurvatureBand(-20.0, 20.0, 0.0)
    prof = phi_coefficients(WelfareObject.CS, PathBranch.MAX, 0.0, inv, pc)
    remark = build_curvature_extremal(prof, band, LL, Direction.LOWER, pc, placement="remark")
    best = build_curvature_extremal(prof, band, LL, Direction.LOWER, pc)
    n = curvature_block_length(band, 10.0, 12.0)
    assert remark.block == pytest.approx((10.0, 10.0 + n))
    assert prof.evaluate(best) <= prof.evaluate(remark) + 1e-9


def test_endpoint_pinning_all_shapes(pc):
    for name, band in shape_cases():
        t = ShapeTransform.parse(name)
        prof = phi_coefficients(WelfareObject.PS, PathBranch.MIN, 0.5, InversePassThroughBounds(1, 2), pc, t)
        for d in Direction:
            c = build_extremal(prof, band, t, d, pc)
            assert eval_demand(c, 10.0) == 100.0
            assert eval_demand(c, 12.0) == pytest.approx(80.0, rel=1e-10)
            q = c.eval(np.linspace(10.0, 12.0, 201))
            assert np.all(np.diff(q) <= 1e-9) and np.all(q >= 0)


def test_linear_interpolation_constant_slope(linear_curve):
    p = np.array([10.0, 10.3, 11.0, 11.9, 12.0])
    assert linear_curve.eval(p) == pytest.approx(200 - 10 * p, rel=1e-14)
    assert eval_demand_slope(linear_curve, 10.7) == -10.0
    assert elasticity_at(linear_curve, 10.0) == pytest.approx(-1.0)
    with pytest.raises(OutOfSupport):
        linear_curve.eval(12.5)


def test_constant_elasticity(pc):
    t = ShapeTransform.parse("log-log")
    sup = Support.from_change(pc, t)
    c_el = sup.delta_a / sup.length
    curve = ExtremalDemandCurve(t, GradientBand(c_el, c_el), (), sup)
    for p in (10.0, 10.5, 11.3, 12.0):
        assert elasticity_at(curve, p) == pytest.approx(c_el, rel=1e-12)
        assert eval_demand_slope(curve, p) == pytest.approx(c_el * curve.eval(p) / p, rel=1e-12)


def test_zero_quantity_at_choke():
    pc = PolicyChange(Snapshot(10.0, 20.0, 0.0), Snapshot(12.0, 0.0, 3.0))
    curve = ExtremalDemandCurve(LL, GradientBand(-10.0, -10.0), (), Support.from_change(pc, LL))
    assert curve.eval(12.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ZeroQuantity):
        elasticity_at(curve, 12.0)


def test_nonmonotone_curvature_rejected(pc):
    band = CurvatureBand(-100.0, 100.0, 0.0)
    with pytest.raises(NonmonotoneDemand):
        ExtremalDemandCurve(LL, band, ((11.9, 12.0),), Support.from_change(pc, LL))


def test_closed_forms_match_quadrature(pc):
    from robust_welfare.quadrature import QuadratureSettings, integrate

    q = QuadratureSettings(rel_tol=1e-14, abs_tol=1e-14)
    for name, band in shape_cases():
        t = ShapeTransform.parse(name)
        sup = Support.from_change(pc, t)
        n = (sup.s1 - sup.s0)
        blocks = ((sup.s0 + 0.3 * n, sup.s0 + 0.3 * n + 0.5 * n * _fraction(band, sup)),)
        try:
            c = ExtremalDemandCurve(t, band, blocks, sup)
        except InfeasibleShape:
            continue
        for a, b in ((10.0, 12.0), (10.4, 11.7)):
            ref = integrate(c.eval, a, b, q, c.kink_prices)
            assert c.integral(a, b) == pytest.approx(ref, rel=1e-12)
            ref_j = integrate(lambda p: c.eval(p) / p, a, b, q, c.kink_prices)
            assert c.price_weighted_integral(a, b) == pytest.approx(ref_j, rel=1e-12)


def _fraction(band, sup):
    from robust_welfare.demand_shape import high_set_length

    return high_set_length(band, sup) / (sup.s1 - sup.s0)


def test_slope_matches_finite_differences(pc):
    rng = np.random.default_rng(7)
    for name, band in shape_cases():
        t = ShapeTransform.parse(name)
        prof = phi_coefficients(WelfareObject.TS, PathBranch.MAX, 0.25, InversePassThroughBounds(1, 2), pc, t)
        c = build_extremal(prof, band, t, Direction.UPPER, pc)
        eps = 1e-5 * 2.0
        kinks = np.array(c.kink_prices)
        pts = rng.uniform(10.0 + 2 * eps, 12.0 - 2 * eps, 200)
        if len(kinks):
            pts = pts[np.min(np.abs(pts[:, None] - kinks[None, :]), axis=1) > 2 * eps]
        scale = max(abs(c.slope(10.0)), abs(c.slope(12.0)), 1.0)
        for p in pts[:50]:
            fd = (c.eval(p + eps) - c.eval(p - eps)) / (2 * eps)
            assert abs(fd - c.slope(p)) <= 1e-6 * scale


def _lp_best(prof, band, sup, maximize, n_cells=200, n_fine=4000):
    """Best step-f curve on ``n_cells`` cells for ``prof`` (Level/Level).

    The linear program uses a midpoint approximation of the objective; its
    solution is then rebuilt as a curve and scored exactly.
    """
    ds = (sup.s1 - sup.s0) / n_cells
    dt = (sup.s1 - sup.s0) / n_fine
    t = sup.s0 + (np.arange(n_fine) + 0.5) * dt
    starts = sup.s0 + ds * np.arange(n_cells)
    overlap = np.clip(t[:, None] - starts[None, :], 0.0, ds)
    c = overlap.T @ (np.vectorize(prof.coefficient)(t) * dt)
    res = linprog(-c if maximize else c, A_eq=np.ones((1, n_cells)) * ds, b_eq=[sup.delta_a],
                  bounds=[(band.f_lo, band.f_hi)] * n_cells, method="highs")
    assert res.status == 0
    raised = np.nonzero(res.x > band.f_lo + 1e-9)[0]
    blocks = [(starts[i], starts[i] + ds * (res.x[i] - band.f_lo) / (band.f_hi - band.f_lo))
              for i in raised]
    curve = ExtremalDemandCurve(LL, band, blocks, sup, validate=False)
    return prof.evaluate(curve)


def test_optimal_placement_matches_linear_program():
    # a scenario where producer-surplus weights change sign
    pc = PolicyChange(Snapshot(10, 100, 0), Snapshot(12, 80, 2))
    inv = InversePassThroughBounds(0.5, 1.25)
    band = GradientBand(-15.0, -5.0)
    sup = Support.from_change(pc, LL)
    checked = 0
    for br in PathBranch:
        for kappa in (0.0, 0.25):
            prof = phi_coefficients(WelfareObject.PS, br, kappa, inv, pc)
            if prof.sign_class is not SignClass.SINGLE_SWITCH:
                continue
            for d in Direction:
                got = prof.evaluate(build_extremal(prof, band, LL, d, pc))
                lp = _lp_best(prof, band, sup, d is Direction.UPPER)
                if d is Direction.UPPER:
                    assert got >= lp - 1e-9
                else:
                    assert got <= lp + 1e-9
                checked += 1
    assert checked >= 4
