"""Vectorised numpy versions of the sampling kernels.

Same signatures and results as the compiled module; used when the extension
is unavailable or ``ROBUST_WELFARE_PURE_PYTHON`` is set.
"""

from __future__ import annotations

import numpy as np


def repair_to_mean(v: np.ndarray, lo: float, hi: float, target: float) -> np.ndarray:
    """Shrink each row toward ``target`` until it has mean ``target`` and stays in ``[lo, hi]``.

    Row ``r`` becomes ``target + lam * (r - mean(r))`` with the largest
    ``lam <= 1`` keeping every entry inside the box. Works in place.
    """
    mean = v.mean(axis=1, keepdims=True)
    dev = v - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(dev > 0, (hi - target) / dev, np.inf)
        down = np.where(dev < 0, (lo - target) / dev, np.inf)
    lam = np.minimum(np.minimum(up, down).min(axis=1, keepdims=True), 1.0)
    lam = np.maximum(lam, 0.0)
    v[...] = target + lam * dev
    return v


def cumulative_curve(cells: np.ndarray, ds: float, g0: float, delta_a: float, curvature: bool):
    """Knot values ``(G, F)`` of curves whose cell-wise ``f`` (or ``h``) is ``cells``.

    For curvature profiles the starting slope is chosen so that
    ``G(s1) = g0 + delta_a``.
    """
    b, n = cells.shape
    G = np.empty((b, n + 1))
    F = np.empty((b, n + 1))
    G[:, 0] = g0
    if not curvature:
        F[:, :n] = cells
        F[:, n] = cells[:, n - 1]
        np.cumsum(cells * ds, axis=1, out=G[:, 1:])
        G[:, 1:] += g0
        return G, F
    length = n * ds
    weights = (n - np.arange(n) - 0.5) * ds * ds
    f0 = (delta_a - cells @ weights) / length
    F[:, 0] = f0
    np.cumsum(cells * ds, axis=1, out=F[:, 1:])
    F[:, 1:] += f0[:, None]
    steps = F[:, :n] * ds + 0.5 * cells * ds * ds
    np.cumsum(steps, axis=1, out=G[:, 1:])
    G[:, 1:] += g0
    return G, F


def eval_uniform_piecewise(G, F, H, s0: float, ds: float, s):
    """``G`` at points ``s`` for piecewise-quadratic curves on a uniform grid."""
    n = H.shape[1]
    idx = np.clip(((s - s0) / ds).astype(np.int64), 0, n - 1)
    x = s - (s0 + idx * ds)
    return G[:, idx] + F[:, idx] * x + 0.5 * H[:, idx] * x * x
