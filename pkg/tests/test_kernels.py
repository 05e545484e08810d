import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robust_welfare import _pykernels, kernels

try:
    from robust_welfare import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@needs_ext
def test_repair_matches():
    rng = np.random.default_rng(0)
    v = rng.uniform(1.0, 2.0, (50, 33))
    a = _pykernels.repair_to_mean(v.copy(), 1.0, 2.0, 1.3)
    b = _ckernels.repair_to_mean(v.copy(), 1.0, 2.0, 1.3)
    assert np.allclose(a, b, rtol=1e-14, atol=1e-15)


@needs_ext
@pytest.mark.parametrize("curvature", [False, True])
def test_cumulative_and_eval_match(curvature):
    rng = np.random.default_rng(1)
    cells = rng.uniform(-3.0, 1.0, (20, 40))
    Ga, Fa = _pykernels.cumulative_curve(cells, 0.05, 4.0, -1.5, curvature)
    Gb, Fb = _ckernels.cumulative_curve(cells, 0.05, 4.0, -1.5, curvature)
    assert np.allclose(Ga, Gb, rtol=1e-13, atol=1e-13)
    assert np.allclose(Fa, Fb, rtol=1e-13, atol=1e-13)
    H = cells if curvature else np.zeros_like(cells)
    s = np.sort(rng.uniform(0.0, 2.0, 300))
    ea = _pykernels.eval_uniform_piecewise(Ga, Fa, H, 0.0, 0.05, s)
    eb = _ckernels.eval_uniform_piecewise(Gb, Fb, H, 0.0, 0.05, s)
    assert np.allclose(ea, eb, rtol=1e-13, atol=1e-13)


def test_curvature_chord_condition():
    cells = np.random.default_rng(2).uniform(-1.0, 1.0, (5, 16))
    G, F = kernels.cumulative_curve(cells, 0.125, 10.0, -3.0, True)
    assert np.allclose(G[:, -1], 7.0, rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(
    lo=st.floats(-5.0, 0.0),
    width=st.floats(0.01, 5.0),
    frac=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_repair_keeps_box_and_mean(lo, width, frac, seed):
    hi = lo + width
    target = lo + frac * width
    v = np.random.default_rng(seed).uniform(lo - 1.0, hi + 1.0, (8, 17))
    out = kernels.repair_to_mean(v, lo, hi, target)
    tol = 1e-12 * max(abs(lo), abs(hi), 1.0)
    assert out.min() >= lo - tol and out.max() <= hi + tol
    assert np.allclose(out.mean(axis=1), target, rtol=0, atol=1e-12 * max(abs(target), 1.0))
