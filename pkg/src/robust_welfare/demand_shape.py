"""Shape-restricted demand curves and their extremal members.

Demand is described in transformed coordinates: ``s = B(p)`` on the price
axis and ``G(s) = A(Q(p))`` on the quantity axis, each axis either in levels
or logs.  A gradient band bounds ``f = G'``; a curvature band bounds
``h = G''``.  Every curve built here is bang-bang in the bounded derivative:
it sits at the band's lower edge except on a *high set* made of at most two
intervals.

Welfare objects are linear functionals ``W(Q) = c0 + int c(p) Q(p) dp``
where ``c`` is piecewise of the form ``a + b/p`` with a jump at the path
cutoff.  Transplanted to ``s``, the first-order conditions say the optimal
high set is a super/sub-level set of a function whose shape is fixed by the
sign pattern of ``c``; with at most one sign change that set is a single
interval or a pair of tail intervals.  :func:`build_gradient_extremal` and
:func:`build_curvature_extremal` therefore search exactly those two
one-parameter families (``placement="optimal"``).  The fixed placement table
(``placement="remark"``) is kept for comparison; for one-signed weights in
the gradient class both agree, since the placed curve dominates pointwise.
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import exprel

from .errors import (
    DegenerateBand,
    DomainError,
    InfeasibleShape,
    NegativeDemand,
    NonmonotoneDemand,
    OutOfSupport,
    ZeroQuantity,
)
from .model import InversePassThroughBounds, PolicyChange
from .quadrature import QuadratureSettings, integrate
from .supply_path import PathBranch, extremal_cutoff

# Tolerances for chord consistency and sign tests.
CHORD_TOL = 1e-10
SIGN_TOL = 1e-12

_PIECE_QUAD = QuadratureSettings(rel_tol=1e-13, abs_tol=1e-300, max_depth=30)


class Scale(enum.Enum):
    LEVEL = "level"
    LOG = "log"


class Axis(enum.Enum):
    PRICE_FORWARD = "price_forward"
    PRICE_INVERSE = "price_inverse"
    QTY_FORWARD = "qty_forward"
    QTY_INVERSE = "qty_inverse"


class ShapeClass(enum.Enum):
    GRADIENT = "gradient"
    CURVATURE = "curvature"


class Direction(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def flipped(self) -> "Direction":
        return Direction.LOWER if self is Direction.UPPER else Direction.UPPER


class WelfareObject(enum.Enum):
    CS = "CS"
    PS = "PS"
    TS_PRIV = "TS_priv"
    TS = "TS"


class SignClass(enum.Enum):
    ALL_NONNEG = "all_nonneg"
    ALL_NONPOS = "all_nonpos"
    SINGLE_SWITCH = "single_switch"
    MULTI_SWITCH = "multi_switch"


@dataclass(frozen=True)
class ShapeTransform:
    """Axis scales: ``a_kind`` for quantity (``A``), ``b_kind`` for price (``B``)."""

    a_kind: Scale = Scale.LEVEL
    b_kind: Scale = Scale.LEVEL

    @classmethod
    def parse(cls, name: str) -> "ShapeTransform":
        """``"<quantity>-<price>"``, e.g. ``"log-log"`` for an elasticity band."""
        try:
            a, b = name.lower().split("-")
            return cls(Scale(a), Scale(b))
        except ValueError:
            raise ValueError(f"unknown transform {name!r}") from None

    @property
    def name(self) -> str:
        return f"{self.a_kind.value}-{self.b_kind.value}"

    def qty_forward(self, q):
        return _forward(self.a_kind, q)

    def qty_inverse(self, g):
        return np.exp(g) if self.a_kind is Scale.LOG else g

    def price_forward(self, p):
        return _forward(self.b_kind, p)

    def price_inverse(self, s):
        return np.exp(s) if self.b_kind is Scale.LOG else s


def _forward(kind: Scale, v):
    if kind is Scale.LEVEL:
        return v
    if np.any(np.asarray(v) <= 0):
        raise DomainError(f"log transform needs positive input, got {v}")
    return np.log(v)


def transform_point(t: ShapeTransform, axis: Axis, v: float) -> float:
    if axis is Axis.PRICE_FORWARD:
        return float(t.price_forward(v))
    if axis is Axis.PRICE_INVERSE:
        return float(t.price_inverse(v))
    if axis is Axis.QTY_FORWARD:
        return float(t.qty_forward(v))
    return float(t.qty_inverse(v))


@dataclass(frozen=True)
class GradientBand:
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.f_lo <= self.f_hi <= 0:
            raise ValueError(f"need f_lo <= f_hi <= 0, got [{self.f_lo}, {self.f_hi}]")

    @property
    def lo(self) -> float:
        return self.f_lo

    @property
    def hi(self) -> float:
        return self.f_hi


@dataclass(frozen=True)
class CurvatureBand:
    h_lo: float
    h_hi: float
    delta_f: float

    def __post_init__(self):
        if not self.h_lo <= 0 <= self.h_hi:
            raise ValueError(f"need h_lo <= 0 <= h_hi, got [{self.h_lo}, {self.h_hi}]")

    @property
    def lo(self) -> float:
        return self.h_lo

    @property
    def hi(self) -> float:
        return self.h_hi


Band = Union[GradientBand, CurvatureBand]


def shape_class_of(band: Band) -> ShapeClass:
    return ShapeClass.CURVATURE if isinstance(band, CurvatureBand) else ShapeClass.GRADIENT


@dataclass(frozen=True)
class Support:
    """Endpoints of the demand curve in price and transformed coordinates."""

    p0: float
    p1: float
    q0: float
    q1: float
    s0: float
    s1: float
    g0: float
    g1: float

    @classmethod
    def from_change(cls, pc, t: ShapeTransform) -> "Support":
        p0, p1 = pc.pre.price, pc.post.price
        q0, q1 = pc.pre.quantity, pc.post.quantity
        if t.a_kind is Scale.LOG and (q0 <= 0 or q1 <= 0):
            raise InfeasibleShape("log quantity axis needs positive quantities at both snapshots")
        return cls(
            p0, p1, q0, q1,
            float(t.price_forward(p0)), float(t.price_forward(p1)),
            float(t.qty_forward(q0)), float(t.qty_forward(q1)),
        )

    @property
    def length(self) -> float:
        return self.s1 - self.s0

    @property
    def delta_a(self) -> float:
        return self.g1 - self.g0


# ---------------------------------------------------------------------------
# weight profiles


@dataclass(frozen=True)
class PhiProfile:
    """Weights of a welfare functional after the path has been optimised out.

    ``W(Q) = c0 + int (a0 + b0/p) Q dp + int_J (a1 + b1/p) Q dp``; ``J`` is
    the high-weight region of the path, ``region_p`` in prices and
    ``region_j`` in transformed prices. ``b0``/``b1`` are nonzero only in
    the ad valorem variant.
    """

    a0: float
    a1: float
    c0: float
    region_p: tuple[float, float]
    region_j: tuple[float, float]
    sign_class: SignClass
    switch_s: float | None = None
    b0: float = 0.0
    b1: float = 0.0

    def coefficient(self, p: float) -> float:
        inside = self.region_p[0] <= p < self.region_p[1] or (
            p == self.region_p[1] and self.region_p[1] == self.region_p[0]
        )
        c = self.a0 + self.b0 / p
        if inside:
            c += self.a1 + self.b1 / p
        return c

    def evaluate(self, curve: "ExtremalDemandCurve") -> float:
        lo, hi = curve.support.p0, curve.support.p1
        ja, jb = self.region_p
        w = self.c0
        if self.a0:
            w += self.a0 * curve.integral(lo, hi)
        if self.b0:
            w += self.b0 * curve.price_weighted_integral(lo, hi)
        if jb > ja:
            if self.a1:
                w += self.a1 * curve.integral(ja, jb)
            if self.b1:
                w += self.b1 * curve.price_weighted_integral(ja, jb)
        return w


def _is_zero(x: float, scale: float) -> bool:
    return abs(x) <= SIGN_TOL * max(scale, 1.0)


def _classify(pieces, region_p, t: ShapeTransform):
    """Sign class of a piecewise ``a + b/p`` weight.

    ``pieces`` lists ``(p_start, p_end, a, b)`` in price order.  Each piece
    is monotone in ``p``, so signs at its endpoints settle whether it
    changes sign inside.
    """
    samples = []
    for lo, hi, a, b in pieces:
        if hi <= lo:
            continue
        scale = abs(a) + abs(b) / lo
        for p in (lo, hi):
            v = a + b / p
            samples.append((p, 0.0 if _is_zero(v, scale) else v, a, b))
    signs = [(p, math.copysign(1.0, v), a, b) for p, v, a, b in samples if v != 0.0]
    changes = []
    for (pl, sl, al, bl), (pr, sr, ar, br) in zip(signs, signs[1:]):
        if sl != sr:
            if pl == pr or (al, bl) != (ar, br):
                changes.append(pl if pl == pr else region_edge(pl, pr, region_p))
            else:
                changes.append(-bl / al if al else pl)
    if not changes:
        nonneg = all(s > 0 for _, s, _, _ in signs)
        return (SignClass.ALL_NONNEG if nonneg else SignClass.ALL_NONPOS), None
    if len(changes) == 1:
        return SignClass.SINGLE_SWITCH, float(t.price_forward(changes[0]))
    return SignClass.MULTI_SWITCH, None


def region_edge(pl: float, pr: float, region_p) -> float:
    for e in region_p:
        if pl <= e <= pr:
            return e
    return pl


def _weight_pieces(p0, p1, region_p, a0, b0, a1, b1):
    ja, jb = region_p
    raw = [(p0, ja, a0, b0), (ja, jb, a0 + a1, b0 + b1), (jb, p1, a0, b0)]
    return [pc for pc in raw if pc[1] > pc[0]]


def _make_profile(a0, a1, c0, region_p, support: Support, t: ShapeTransform, b0=0.0, b1=0.0):
    pieces = _weight_pieces(support.p0, support.p1, region_p, a0, b0, a1, b1)
    sign_class, switch_s = _classify(pieces, region_p, t)
    region_j = (float(t.price_forward(region_p[0])), float(t.price_forward(region_p[1])))
    return PhiProfile(a0, a1, c0, region_p, region_j, sign_class, switch_s, b0, b1)


def phi_coefficients(
    obj: WelfareObject,
    branch: PathBranch,
    kappa: float,
    inv: InversePassThroughBounds,
    pc: PolicyChange,
    transform: ShapeTransform = ShapeTransform(),
) -> PhiProfile:
    """Weights of ``obj`` along the ``branch`` path at constant conduct ``kappa``."""
    if not 0 <= kappa <= 1:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    from .model import delta_tr

    path = extremal_cutoff(pc, inv, branch)
    support = Support.from_change(pc, transform)
    alpha, beta = inv.alpha, inv.beta
    if obj is WelfareObject.CS:
        a0, a1, c0 = -1.0, 0.0, 0.0
    elif obj is WelfareObject.PS:
        a0, a1, c0 = 1.0 - alpha - kappa, alpha - beta, 0.0
    elif obj is WelfareObject.TS_PRIV:
        a0, a1, c0 = -alpha - kappa, alpha - beta, 0.0
    else:
        a0, a1, c0 = -alpha - kappa, alpha - beta, delta_tr(pc)
    return _make_profile(a0, a1, c0, path.high_region, support, transform)


def ad_valorem_phi(
    obj: WelfareObject,
    branch: PathBranch,
    kappa: float,
    av,
    transform: ShapeTransform = ShapeTransform(),
) -> PhiProfile:
    """Weights with the log-price path term ``w_lo J(p0,p1) + (w_hi-w_lo) J(region)``."""
    from .supply_path import ad_valorem_cutoff

    if obj is WelfareObject.TS:
        raise ValueError("total surplus including revenue is not available in ad valorem mode")
    path = ad_valorem_cutoff(av, branch)
    support = Support.from_change(av, transform)
    lo, hi = path.high_region
    region_p = (max(lo, support.p0), min(hi, support.p1))
    if obj is WelfareObject.CS:
        return _make_profile(-1.0, 0.0, 0.0, region_p, support, transform)
    b0, b1 = -path.w_lo, -(path.w_hi - path.w_lo)
    a0 = 1.0 - kappa if obj is WelfareObject.PS else -kappa
    return _make_profile(a0, 0.0, 0.0, region_p, support, transform, b0=b0, b1=b1)


# ---------------------------------------------------------------------------
# block lengths


def _band_fraction(total, lo, hi, span, what):
    """Length of the high set for a bang-bang profile with mean ``total/span``."""
    scale = max(abs(lo), abs(hi), abs(total) / span if span else 0.0, 1.0) * max(span, 1.0)
    if lo == hi:
        if abs(total - lo * span) > CHORD_TOL * scale:
            raise DegenerateBand(
                f"point {what} band {lo} needs total {lo * span}, data imply {total}"
            )
        return 0.0
    if total < lo * span - SIGN_TOL * scale or total > hi * span + SIGN_TOL * scale:
        raise InfeasibleShape(
            f"{what} total {total} outside [{lo * span}, {hi * span}] allowed by the band"
        )
    length = (total - lo * span) / (hi - lo)
    return min(max(length, 0.0), span)


def gradient_block_length(band: GradientBand, s0: float, s1: float, delta_a: float) -> float:
    """Length ``m`` of the interval on which ``f`` sits at ``f_hi``."""
    return _band_fraction(delta_a, band.f_lo, band.f_hi, s1 - s0, "gradient")


def curvature_block_length(band: CurvatureBand, s0: float, s1: float) -> float:
    """Length ``n`` of the interval on which ``h`` sits at ``h_hi``."""
    return _band_fraction(band.delta_f, band.h_lo, band.h_hi, s1 - s0, "curvature")


# ---------------------------------------------------------------------------
# curves


def _normalise_blocks(blocks, s0, s1):
    clean = []
    for lo, hi in sorted((max(float(a), s0), min(float(b), s1)) for a, b in blocks):
        if hi - lo <= 0:
            continue
        if clean and lo <= clean[-1][1]:
            clean[-1] = (clean[-1][0], max(clean[-1][1], hi))
        else:
            clean.append((lo, hi))
    return tuple(clean)


class ExtremalDemandCurve:
    """Demand whose bounded derivative is at the band's top on ``blocks``.

    ``G`` is piecewise linear (gradient class) or piecewise quadratic
    (curvature class) in ``s``. For the curvature class the starting slope
    ``f0`` is solved so that ``G`` reaches ``A(Q1)`` at ``s1``.
    """

    def __init__(
        self, transform: ShapeTransform, band: Band, blocks, support: Support, validate: bool = True
    ):
        self.transform = transform
        self.band = band
        self.shape_class = shape_class_of(band)
        self.support = support
        s0, s1 = support.s0, support.s1
        self.blocks = _normalise_blocks(blocks, s0, s1)

        edges = sorted({s0, s1, *(e for b in self.blocks for e in b)})
        knots = np.array(edges)
        mids = 0.5 * (knots[:-1] + knots[1:])
        high = np.zeros(len(mids), dtype=bool)
        for lo, hi in self.blocks:
            high |= (mids > lo) & (mids < hi)
        level = np.where(high, band.hi, band.lo)
        widths = np.diff(knots)

        if self.shape_class is ShapeClass.GRADIENT:
            slopes = level
            curv = np.zeros_like(level)
            f0 = float(slopes[0])
            g = np.concatenate([[support.g0], support.g0 + np.cumsum(slopes * widths)])
            f_knots = np.append(slopes, slopes[-1])
        else:
            curv = level
            moment = float(np.sum(curv * ((s1 - knots[:-1]) ** 2 - (s1 - knots[1:]) ** 2) / 2))
            f0 = (support.delta_a - moment) / support.length
            f_knots = np.concatenate([[f0], f0 + np.cumsum(curv * widths)])
            slopes = f_knots[:-1]
            g = np.concatenate(
                [[support.g0], support.g0 + np.cumsum(slopes * widths + 0.5 * curv * widths**2)]
            )
        self.f0 = f0
        self.knots = knots
        self._g = g
        self._f = np.asarray(slopes, dtype=float)
        self._h = np.asarray(curv, dtype=float)
        self._f_knots = f_knots
        self._knot_list = list(knots)
        if validate:
            self._check()

    # -- construction checks -------------------------------------------------

    def _check(self):
        sup = self.support
        scale = max(abs(sup.g0), abs(sup.g1), 1.0)
        if abs(self._g[-1] - sup.g1) > CHORD_TOL * scale:
            raise InfeasibleShape(
                f"curve misses the second snapshot: G(s1)={self._g[-1]}, expected {sup.g1}"
            )
        slope_scale = max(abs(sup.delta_a) / sup.length, abs(self.band.lo), abs(self.band.hi), 1.0)
        if np.max(self._f_knots) > SIGN_TOL * slope_scale * 1e3:
            raise NonmonotoneDemand(
                f"implied slope reaches {np.max(self._f_knots):.6g} > 0; demand would rise"
            )
        if self.transform.a_kind is Scale.LEVEL and np.min(self._g) < -CHORD_TOL * scale:
            raise NegativeDemand(f"implied quantity reaches {np.min(self._g):.6g} < 0")

    # -- pointwise -----------------------------------------------------------

    @property
    def block(self) -> tuple[float, float]:
        """The single high block (empty ``(s0, s0)`` when there is none)."""
        if not self.blocks:
            return (self.support.s0, self.support.s0)
        if len(self.blocks) > 1:
            raise ValueError(f"curve has {len(self.blocks)} high blocks")
        return self.blocks[0]

    @property
    def g0(self) -> float:
        return self.support.g0

    @property
    def s0(self) -> float:
        return self.support.s0

    @property
    def s1(self) -> float:
        return self.support.s1

    @property
    def kink_prices(self) -> list[float]:
        return [float(self.transform.price_inverse(k)) for k in self.knots[1:-1]]

    def _locate(self, s):
        idx = np.searchsorted(self.knots, s, side="right") - 1
        return np.clip(idx, 0, len(self._f) - 1)

    def _g_at(self, s):
        i = self._locate(s)
        x = s - self.knots[i]
        return self._g[i] + self._f[i] * x + 0.5 * self._h[i] * x * x, i, x

    def _check_support(self, p):
        lo, hi = self.support.p0, self.support.p1
        tol = 1e-12 * hi
        if np.any(np.asarray(p) < lo - tol) or np.any(np.asarray(p) > hi + tol):
            raise OutOfSupport(f"price outside [{lo}, {hi}]")

    def __call__(self, p):
        return self.eval(p)

    def eval(self, p):
        self._check_support(p)
        s = self.transform.price_forward(np.clip(p, self.support.p0, self.support.p1))
        g, _, _ = self._g_at(s)
        q = self.transform.qty_inverse(g)
        if self.transform.a_kind is Scale.LEVEL:
            q = np.maximum(q, 0.0)
        if np.ndim(p) == 0:
            return self.support.q0 if p == self.support.p0 else float(q)
        return np.where(np.asarray(p) == self.support.p0, self.support.q0, q)

    def slope(self, p):
        """``dQ/dp``; right-hand value at kinks."""
        self._check_support(p)
        p = np.clip(p, self.support.p0, self.support.p1)
        s = self.transform.price_forward(p)
        g, i, x = self._g_at(s)
        dg = self._f[i] + self._h[i] * x
        dq_dg = np.exp(g) if self.transform.a_kind is Scale.LOG else 1.0
        ds_dp = 1.0 / p if self.transform.b_kind is Scale.LOG else 1.0
        out = dq_dg * dg * ds_dp
        return float(out) if np.ndim(out) == 0 else out

    def gradient_at_s(self, s: float) -> float:
        """``f(s) = G'(s)``, right-hand value at kinks."""
        i = int(self._locate(s))
        return float(self._f[i] + self._h[i] * (s - self.knots[i]))

    # -- integrals -----------------------------------------------------------

    def integral(self, a: float, b: float) -> float:
        """``int_a^b Q(p) dp``."""
        return self._integrate(a, b, deflate=False)

    def price_weighted_integral(self, a: float, b: float) -> float:
        """``int_a^b Q(p)/p dp``."""
        return self._integrate(a, b, deflate=True)

    def _integrate(self, a: float, b: float, deflate: bool) -> float:
        if b < a:
            raise ValueError(f"need a <= b, got [{a}, {b}]")
        self._check_support([a, b])
        lo, hi = self.support.p0, self.support.p1
        a, b = min(max(a, lo), hi), min(max(b, lo), hi)
        if a == b:
            return 0.0
        sa = float(self.transform.price_forward(a))
        sb = float(self.transform.price_forward(b))
        first = max(bisect_right(self._knot_list, sa) - 1, 0)
        total = []
        for i in range(first, len(self._f)):
            k0, k1 = self._knot_list[i], self._knot_list[i + 1]
            u, v = max(sa, k0), min(sb, k1)
            if v > u:
                total.append(self._piece_integral(i, u - k0, v - k0, deflate))
            if k1 >= sb:
                break
        return math.fsum(total)

    def _piece_integral(self, i: int, xu: float, xv: float, deflate: bool) -> float:
        k = self._knot_list[i]
        g, f, h = float(self._g[i]), float(self._f[i]), float(self._h[i])
        a_log = self.transform.a_kind is Scale.LOG
        b_log = self.transform.b_kind is Scale.LOG
        c0, c1, c2 = g, f, 0.5 * h
        span = xv - xu
        if not a_log:
            if b_log and not deflate:
                # int poly(x) e^(k+x) dx
                def anti(x):
                    poly = c0 + c1 * x + c2 * x * x
                    d1 = c1 + 2 * c2 * x
                    return math.exp(k + x) * (poly - d1 + 2 * c2)

                return anti(xv) - anti(xu)
            if b_log or not deflate:
                def prim(x):
                    return c0 * x + c1 * x * x / 2 + c2 * x**3 / 3

                return prim(xv) - prim(xu)
            # int poly(x)/(k+x) dx with s = k + x = p
            q1 = c1 - c2 * k
            rem = c0 - k * q1
            return (
                c2 * (xv * xv - xu * xu) / 2
                + q1 * span
                + rem * math.log1p(span / (k + xu))
            )
        if h == 0.0:
            if b_log and not deflate:
                rate = f + 1.0
                return math.exp(g + k + rate * xu) * span * float(exprel(rate * span))
            if b_log or not deflate:
                return math.exp(g + f * xu) * span * float(exprel(f * span))
        return integrate(
            lambda x: self._piece_integrand(i, x, deflate), xu, xv, _PIECE_QUAD
        )

    def _piece_integrand(self, i, x, deflate):
        k = self._knot_list[i]
        g = self._g[i] + self._f[i] * x + 0.5 * self._h[i] * x * x
        q = self.transform.qty_inverse(g)
        if self.transform.b_kind is Scale.LOG:
            return q if deflate else q * np.exp(k + x)
        return q / (k + x) if deflate else q

    def __repr__(self):
        return (
            f"ExtremalDemandCurve({self.transform.name}, {self.shape_class.value}, "
            f"blocks={self.blocks})"
        )


def curve_from_blocks(pc, transform: ShapeTransform, band: Band, blocks) -> ExtremalDemandCurve:
    return ExtremalDemandCurve(transform, band, blocks, Support.from_change(pc, transform))


def high_set_length(band: Band, support: Support) -> float:
    if isinstance(band, GradientBand):
        return gradient_block_length(band, support.s0, support.s1, support.delta_a)
    return curvature_block_length(band, support.s0, support.s1)


# ---------------------------------------------------------------------------
# placement


def remark_blocks(profile: PhiProfile, support: Support, length: float, direction: Direction):
    """High block from the fixed placement table.

    One-signed weights put the block at an end of the support; a single
    sign switch puts it against the switch point ``s*``, falling back to an
    end of the support when it does not fit on the relevant side.
    """
    s0, s1 = support.s0, support.s1
    upper = direction is Direction.UPPER
    if profile.sign_class in (SignClass.ALL_NONNEG, SignClass.ALL_NONPOS):
        at_start = upper == (profile.sign_class is SignClass.ALL_NONNEG)
        return ((s0, s0 + length),) if at_start else ((s1 - length, s1),)
    if profile.sign_class is SignClass.MULTI_SWITCH:
        raise InfeasibleShape("placement table undefined for weights with several sign changes")
    j_lo, j_hi = profile.region_j
    j_left = j_lo <= s0 + SIGN_TOL * max(abs(s0), 1.0)
    s_star = j_hi if j_left else j_lo
    len_j = j_hi - j_lo
    len_c = (s1 - s0) - len_j
    if j_left:
        if upper:
            return ((s_star, s_star + length),) if length <= len_c else ((s1 - length, s1),)
        return ((s_star - length, s_star),) if length <= len_j else ((s0, s0 + length),)
    if upper:
        return ((s_star - length, s_star),) if length <= len_c else ((s0, s0 + length),)
    return ((s_star, s_star + length),) if length <= len_j else ((s1 - length, s1),)


_SCAN_POINTS = 33


def _family_interval(s0, s1, length):
    room = (s1 - s0) - length
    return lambda t: ((s0 + t * room, s0 + t * room + length),)


def _family_tails(s0, s1, length):
    return lambda t: ((s0, s0 + t * length), (s1 - (1.0 - t) * length, s1))


def optimise_high_set(
    make: Callable[[tuple], ExtremalDemandCurve],
    objective: Callable[[ExtremalDemandCurve], float],
    support: Support,
    length: float,
    maximize: bool,
    seeds: Sequence[tuple] = (),
) -> ExtremalDemandCurve:
    """Best curve over single-interval and two-tail high sets of ``length``.

    Each family is scanned on a fixed grid and the best scan points are
    polished with a bounded Brent search; infeasible candidates are skipped.
    Deterministic for identical inputs.
    """
    s0, s1 = support.s0, support.s1
    sign = 1.0 if maximize else -1.0
    cache: dict[tuple, tuple[float, ExtremalDemandCurve | None]] = {}

    def score(blocks):
        key = tuple((round(a, 15), round(b, 15)) for a, b in blocks)
        if key not in cache:
            try:
                curve = make(blocks)
                cache[key] = (sign * objective(curve), curve)
            except InfeasibleShape:
                cache[key] = (-math.inf, None)
        return cache[key]

    best_val, best_curve = -math.inf, None

    def consider(blocks):
        nonlocal best_val, best_curve
        val, curve = score(blocks)
        if curve is not None and val > best_val:
            best_val, best_curve = val, curve

    for blocks in seeds:
        consider(blocks)

    span = s1 - s0
    if length <= SIGN_TOL * max(span, 1.0) or length >= span * (1 - SIGN_TOL):
        consider(((s0, s0 + length),))
    else:
        grid = np.linspace(0.0, 1.0, _SCAN_POINTS)
        for family in (_family_interval(s0, s1, length), _family_tails(s0, s1, length)):
            vals = np.array([score(family(t))[0] for t in grid])
            for t in grid:
                consider(family(t))
            if not np.any(np.isfinite(vals)):
                continue
            # polish around the two best local maxima of the scan
            peaks = [
                i for i in range(len(grid))
                if np.isfinite(vals[i])
                and (i == 0 or vals[i] >= vals[i - 1])
                and (i == len(grid) - 1 or vals[i] >= vals[i + 1])
            ]
            peaks.sort(key=lambda i: -vals[i])
            for i in peaks[:2]:
                lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
                res = minimize_scalar(
                    lambda t: -score(family(t))[0] if np.isfinite(score(family(t))[0]) else 1e300,
                    bounds=(lo, hi),
                    method="bounded",
                    options={"xatol": 1e-12},
                )
                consider(family(float(res.x)))
    if best_curve is None:
        raise InfeasibleShape("no admissible curve in the shape class")
    return best_curve


def _build_extremal(profile, band, t, direction, pc, placement):
    support = Support.from_change(pc, t)
    length = high_set_length(band, support)

    def make(blocks):
        return ExtremalDemandCurve(t, band, blocks, support)

    if placement == "remark":
        return make(remark_blocks(profile, support, length, direction))
    if placement != "optimal":
        raise ValueError(f"unknown placement {placement!r}")
    one_signed = profile.sign_class in (SignClass.ALL_NONNEG, SignClass.ALL_NONPOS)
    if isinstance(band, GradientBand) and one_signed:
        # pointwise-dominant curve; optimal for any one-signed weight
        return make(remark_blocks(profile, support, length, direction))
    seeds = []
    if profile.sign_class is not SignClass.MULTI_SWITCH:
        seeds.append(remark_blocks(profile, support, length, direction))
    return optimise_high_set(
        make, profile.evaluate, support, length, direction is Direction.UPPER, seeds
    )


def build_gradient_extremal(
    profile: PhiProfile,
    band: GradientBand,
    t: ShapeTransform,
    direction: Direction,
    pc,
    placement: str = "optimal",
) -> ExtremalDemandCurve:
    """Gradient-class curve maximising (``UPPER``) or minimising ``profile``."""
    return _build_extremal(profile, band, t, direction, pc, placement)


def build_curvature_extremal(
    profile: PhiProfile,
    band: CurvatureBand,
    t: ShapeTransform,
    direction: Direction,
    pc,
    placement: str = "optimal",
) -> ExtremalDemandCurve:
    """Curvature-class curve maximising (``UPPER``) or minimising ``profile``."""
    return _build_extremal(profile, band, t, direction, pc, placement)


def build_extremal(profile, band: Band, t, direction, pc, placement="optimal"):
    return _build_extremal(profile, band, t, direction, pc, placement)


def eval_demand(curve: ExtremalDemandCurve, p: float) -> float:
    return curve.eval(p)


def eval_demand_slope(curve: ExtremalDemandCurve, p: float) -> float:
    return curve.slope(p)


def elasticity_at(curve: ExtremalDemandCurve, p: float) -> float:
    """Price elasticity ``Q'(p) p / Q(p)`` (negative for downward demand)."""
    q = curve.eval(p)
    if q <= 0:
        raise ZeroQuantity(f"quantity is zero at price {p}")
    return curve.slope(p) * p / q
