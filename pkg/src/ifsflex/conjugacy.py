"""Piecewise-linear approximations of the boundary correspondence between two affine systems.

At level ``n`` the approximation maps the convex hull of ``phi_w(Lambda_Phi)``
linearly onto the hull of ``psi_w(Lambda_Psi)`` for every word ``w`` of length
``n``, and interpolates linearly across the gaps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ifs_model import AffineSystem
from .shift_space import DEFAULT_CAP, check_cap


def limit_set_hull(system: AffineSystem) -> tuple[float, float]:
    """Extreme points of the limit set: fixed points of the leftmost and rightmost branches."""
    left = min(range(system.d), key=lambda i: system.offsets[i])
    right = max(range(system.d), key=lambda i: system.offsets[i] + system.rates[i])
    fix = lambda i: system.offsets[i] / (1.0 - system.rates[i])
    return fix(left), fix(right)


def _hulls(system: AffineSystem, n: int):
    """Left and right hull endpoints of every depth-n cylinder of the limit set (lexicographic)."""
    lo, hi = limit_set_hull(system)
    r = np.asarray(system.rates)
    t = np.asarray(system.offsets)
    a, b = np.ones(1), np.zeros(1)
    for _ in range(n):
        # phi_{w s} = phi_w o phi_s
        a, b = (a[:, None] * r[None, :]).ravel(), (a[:, None] * t[None, :] + b[:, None]).ravel()
    return a * lo + b, a * hi + b


@dataclass(frozen=True)
class ConjugacyApprox:
    level: int
    breakpoints: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        out = np.interp(np.asarray(x, dtype=float), self.breakpoints, self.values)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])


def build_h(phi: AffineSystem, psi: AffineSystem, n: int, cap: int = DEFAULT_CAP) -> ConjugacyApprox:
    if phi.d != psi.d:
        raise ValueError("systems must share the alphabet")
    if n < 0:
        raise ValueError("level must be non-negative")
    check_cap(phi.d, n, cap)
    x0, x1 = _hulls(phi, n)
    y0, y1 = _hulls(psi, n)
    xs = np.column_stack([x0, x1]).ravel()
    ys = np.column_stack([y0, y1]).ravel()
    order = np.argsort(xs, kind="stable")
    xs, ys = xs[order], ys[order]
    # touching cylinders share an endpoint
    keep = np.concatenate(([True], np.diff(xs) > 0))
    dup = ~keep
    if np.any(dup) and np.any(ys[dup] != ys[np.flatnonzero(dup) - 1]):
        raise ValueError("cylinders touch in the first system but not in the second")
    xs, ys = xs[keep], ys[keep]
    if np.any(np.diff(ys) <= 0):
        raise ValueError("cylinder order differs between the systems; no increasing correspondence")
    return ConjugacyApprox(n, xs, ys)


def holder_exponent_theory(phi: AffineSystem, psi: AffineSystem) -> float:
    """``min_i log(rho_i) / log(lam_i)``."""
    if phi.d != psi.d:
        raise ValueError("systems must share the alphabet")
    return float(np.min(psi.log_rates / phi.log_rates))


def cauchy_profile(phi: AffineSystem, psi: AffineSystem, levels) -> list[float]:
    """``sup |h_{n+1} - h_n|`` for each ``n`` in ``levels`` (exact: both are piecewise linear)."""
    out = []
    for n in levels:
        h0, h1 = build_h(phi, psi, n), build_h(phi, psi, n + 1)
        pts = np.union1d(h0.breakpoints, h1.breakpoints)
        out.append(float(np.max(np.abs(h1(pts) - h0(pts)))))
    return out


@dataclass(frozen=True)
class HolderEstimate:
    slope: float
    intercept: float
    residual: float
    ratio_min: float
    ratio_max: float
    pairs: int


def estimate_holder(
    h: ConjugacyApprox, phi: AffineSystem, psi: AffineSystem, pairs: int = 400, seed: int = 0
) -> HolderEstimate:
    """Log-log slope of ``|h(x) - h(y)|`` against ``|x - y|`` over sampled limit-set pairs.

    Each pair consists of midpoints of two level-``n`` cylinders that share a
    random prefix and then branch, so the sample spans all scales down to
    the level of ``h``.
    """
    n = h.level
    if pairs < 100:
        raise ValueError("need at least 100 pairs")
    if n < 6:
        raise ValueError("approximation level must be at least 6")
    rng = np.random.default_rng(seed)
    d = phi.d
    x0, x1 = _hulls(phi, n)
    mids = 0.5 * (x0 + x1)
    radix = d ** np.arange(n - 1, -1, -1)
    dx, dy = np.empty(pairs), np.empty(pairs)
    for k in range(pairs):
        prefix_len = int(rng.integers(0, n - 1))
        w1 = rng.integers(0, d, size=n)
        w2 = w1.copy()
        a, b = rng.choice(d, size=2, replace=False)
        w1[prefix_len], w2[prefix_len] = a, b
        w2[prefix_len + 1:] = rng.integers(0, d, size=n - prefix_len - 1)
        x, y = mids[int(w1 @ radix)], mids[int(w2 @ radix)]
        dx[k] = abs(x - y)
        dy[k] = abs(h(x) - h(y))
    lx, ly = np.log(dx), np.log(dy)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - ly) ** 2)))
    ratio = dy / dx
    return HolderEstimate(float(slope), float(intercept), resid, float(ratio.min()), float(ratio.max()), pairs)
