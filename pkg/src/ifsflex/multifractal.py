"""Lyapunov spectrum of an IFS.

For a non-degenerate system and ``alpha`` in ``[alpha_-, alpha_+]``

    ell(alpha) = beta(alpha) + P(beta(alpha)) / alpha,

where ``beta`` inverts ``alpha(u) = -P'(u)``; ``ell`` vanishes outside that
interval.  Curves are sampled uniformly in ``u`` rather than in ``alpha``
because ``alpha(u)`` flattens exponentially fast near the endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import thermo
from ._roots import solve_monotone
from .errors import DegenerateSystemError, NoRootError, SpectrumDomainError
from .ifs_model import AffineSystem, System

U_MAX = 40.0


@dataclass(frozen=True)
class SpectrumCurve:
    alpha_minus: float
    alpha_plus: float
    samples: tuple[tuple[float, float], ...]
    dimension: float
    alpha_at_dimension: float
    # half-widths of ell propagated from the pressure enclosure (conformal systems only)
    errors: Optional[tuple[float, ...]] = None

    @property
    def alphas(self) -> np.ndarray:
        return np.array([a for a, _ in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples])


def _require_nondegenerate(system):
    if isinstance(system, AffineSystem) and system.is_degenerate():
        raise DegenerateSystemError(
            "degenerate system: the Lyapunov spectrum is a single point, use point_spectrum()"
        )


def point_spectrum(system: AffineSystem) -> tuple[float, float]:
    """(alpha, dimension) carried by a degenerate affine system."""
    if not system.is_degenerate():
        raise ValueError("point_spectrum applies to degenerate systems only")
    alpha = -math.log(system.rates[0])
    return alpha, math.log(system.d) / alpha


def alpha_bounds(system: System, depth: int = thermo.DEFAULT_DEPTH) -> tuple[float, float]:
    """Limits of ``alpha(u)`` as ``u -> +inf`` and ``u -> -inf``.

    Affine: extreme values of ``-log rate``.  Conformal: the same limits of the
    depth-``depth`` midpoint pressure oracle, which is what the rest of the
    conformal computations use.
    """
    if isinstance(system, AffineSystem):
        logs = -system.log_rates
        return float(np.min(logs)), float(np.max(logs))
    cp = thermo.CylinderPressure(system, depth)
    n = cp.depth
    lo = -0.5 * (np.max(cp.sup) + np.max(cp.inf)) / n
    hi = -0.5 * (np.min(cp.sup) + np.min(cp.inf)) / n
    return float(lo), float(hi)


def _alpha_fn(system, depth):
    return lambda u: thermo.pressure_derivative(system, u, depth)


def _alpha_slope(system):
    if not isinstance(system, AffineSystem):
        return None
    logs = system.log_rates

    def slope(u):
        w = np.exp(u * logs - np.max(u * logs))
        w /= w.sum()
        mean = np.dot(w, logs)
        return -float(np.dot(w, (logs - mean) ** 2))

    return slope


def beta_of_alpha(system: System, alpha: float, depth: int = thermo.DEFAULT_DEPTH, tol: float = 1e-13) -> float:
    """The unique ``u`` with ``alpha(u) == alpha``."""
    _require_nondegenerate(system)
    a_lo, a_hi = alpha_bounds(system, depth)
    if not a_lo < alpha < a_hi:
        raise SpectrumDomainError(f"alpha outside spectrum interior ({a_lo}, {a_hi}): {alpha}")
    alpha_fn = _alpha_fn(system, depth)
    f = lambda u: alpha_fn(u) - alpha
    lo, hi = -1.0, 1.0
    for _ in range(64):
        if f(lo) > 0 > f(hi) or f(lo) == 0 or f(hi) == 0:
            break
        if f(lo) <= 0:
            hi, lo = lo, 2.0 * lo
        else:
            lo, hi = hi, 2.0 * hi
    else:
        raise NoRootError(f"could not bracket beta({alpha})")
    slope = _alpha_slope(system)
    return solve_monotone(f, lo, hi, tol=tol, df=slope)


def _ell_at_u(system, u, depth):
    alpha = thermo.pressure_derivative(system, u, depth)
    return alpha, u + thermo.pressure(system, u, depth) / alpha


def lyapunov_spectrum(system: System, alpha: float, depth: int = thermo.DEFAULT_DEPTH) -> float:
    """``ell(alpha)``; zero outside ``[alpha_-, alpha_+]``.

    At the endpoints themselves the value is extrapolated from ``u = +-40``.
    """
    _require_nondegenerate(system)
    a_lo, a_hi = alpha_bounds(system, depth)
    if alpha < a_lo or alpha > a_hi:
        return 0.0
    if alpha == a_lo:
        return _ell_at_u(system, U_MAX, depth)[1]
    if alpha == a_hi:
        return _ell_at_u(system, -U_MAX, depth)[1]
    beta = beta_of_alpha(system, alpha, depth)
    return beta + thermo.pressure(system, beta, depth) / alpha


def _u_grid(m, u_max, specials):
    grid = np.linspace(-u_max, u_max, m)
    taken = set()
    for s in specials:
        order = np.argsort(np.abs(grid - s))
        k = next(int(j) for j in order if int(j) not in taken)
        grid[k] = s
        taken.add(k)
    return np.sort(grid)


def spectrum_curve(
    system: System, m: int = 101, u_max: float = U_MAX, depth: int = thermo.DEFAULT_DEPTH
) -> SpectrumCurve:
    """``m`` samples ``(alpha(u), ell(alpha(u)))`` on a uniform ``u`` grid that contains 0 and delta."""
    if m < 3:
        raise ValueError("need at least 3 samples")
    _require_nondegenerate(system)
    delta = thermo.hausdorff_dimension(system, depth=depth).value
    a_lo, a_hi = alpha_bounds(system, depth)
    us = _u_grid(m, u_max, (0.0, delta))
    rows, errs = [], []
    cp = None if isinstance(system, AffineSystem) else thermo.CylinderPressure(system, depth)
    for u in us[::-1]:
        alpha, ell = _ell_at_u(system, float(u), depth)
        alpha = min(max(alpha, a_lo), a_hi)
        rows.append((alpha, ell))
        if cp is not None:
            up, low = cp.bounds(float(u))
            errs.append(0.5 * (up - low) / alpha)
    alpha_delta = thermo.pressure_derivative(system, delta, depth)
    return SpectrumCurve(a_lo, a_hi, tuple(rows), delta, alpha_delta, tuple(errs) if errs else None)


def dim_spectrum_tau(system: System, tau: float, depth: int = thermo.DEFAULT_DEPTH) -> float:
    """Local-dimension spectrum ``f(tau) = ell(log d / tau)`` of the maximal-entropy measure."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    alpha = math.log(system.d) / tau
    if isinstance(system, AffineSystem) and system.is_degenerate():
        a0, dim = point_spectrum(system)
        return dim if math.isclose(alpha, a0, rel_tol=1e-12) else 0.0
    return lyapunov_spectrum(system, alpha, depth)


def legendre_value(system: System, u: float, depth: int = thermo.DEFAULT_DEPTH) -> float:
    """``alpha(u) * ell(alpha(u))`` through the shortcut ``u * alpha(u) + P(u)``."""
    return u * thermo.pressure_derivative(system, u, depth) + thermo.pressure(system, u, depth)
