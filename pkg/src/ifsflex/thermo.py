"""Pressure, Bowen dimension, Gibbs weights and conformal Jacobians.

For an affine system the pressure of ``u * I`` is ``log sum_i rates_i**u``.
For a conformal system it is approximated at a fixed cylinder depth ``n`` by
the enclosure

    (1/n) log sum_w exp(u * S_w),    S_w = sup or inf of S_n I over [w],

whose midpoint is used as "the" pressure.  Both bounds are always available.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from ._roots import bracket_up, solve_monotone
from .errors import NoRootError
from .ifs_model import AffineSystem, System, branch_derivative, cylinder_potential_bounds
from .shift_space import as_word

DEFAULT_DEPTH = 10


def _logsumexp(a: np.ndarray) -> float:
    m = float(np.max(a))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(a - m))))


def _softmax_mean(a: np.ndarray, values: np.ndarray) -> float:
    w = np.exp(a - np.max(a))
    return float(np.dot(w, values) / np.sum(w))


def pressure_affine(system: AffineSystem, u: float) -> float:
    return _logsumexp(u * system.log_rates)


def _affine_alpha(system: AffineSystem, u: float) -> float:
    logs = system.log_rates
    return -_softmax_mean(u * logs, logs)


@dataclass(frozen=True)
class CylinderPressure:
    """Depth-``n`` pressure enclosure of a system, built once from the cylinder bounds."""

    system: System
    depth: int = DEFAULT_DEPTH
    sup: np.ndarray = field(init=False, repr=False, compare=False)
    inf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sup, inf = cylinder_potential_bounds(self.system, self.depth)
        object.__setattr__(self, "sup", sup)
        object.__setattr__(self, "inf", inf)

    def _f(self, u, s):
        return _logsumexp(u * s) / self.depth

    def bounds(self, u: float) -> tuple[float, float]:
        """(upper, lower) estimate of the pressure at ``u``."""
        a, b = self._f(u, self.sup), self._f(u, self.inf)
        return max(a, b), min(a, b)

    def midpoint(self, u: float) -> float:
        # upper + lower == F_sup + F_inf for either sign of u
        return 0.5 * (self._f(u, self.sup) + self._f(u, self.inf))

    def midpoint_derivative(self, u: float) -> float:
        n = self.depth
        return 0.5 * (_softmax_mean(u * self.sup, self.sup) + _softmax_mean(u * self.inf, self.inf)) / n

    def sup_estimate(self, u: float) -> float:
        return self._f(u, self.sup)

    def inf_estimate(self, u: float) -> float:
        return self._f(u, self.inf)

    def gibbs_spread(self, u: float) -> float:
        """Largest gap, over depth-n cylinders, between log of sup- and inf-based Gibbs masses."""
        return float(np.max(np.abs(u) * (self.sup - self.inf)))


class PressureOracle:
    """A callable ``u -> P(u)`` with provenance metadata.

    ``method`` is one of ``"exact-affine"``, ``"cylinder"``, ``"operator"`` or
    ``"tabulated"``.  ``derivative`` is optional.
    """

    def __init__(
        self,
        func: Callable[[float], float],
        method: str,
        derivative: Optional[Callable[[float], float]] = None,
        depth: Optional[int] = None,
        grid: Optional[int] = None,
        points: Optional[tuple] = None,
    ):
        self._func = func
        self._derivative = derivative
        self.method = method
        self.depth = depth
        self.grid = grid
        self.points = points

    def __call__(self, u: float) -> float:
        return self._func(float(u))

    def derivative(self, u: float) -> float:
        if self._derivative is None:
            h = 1e-4
            return (self(u + h) - self(u - h)) / (2 * h)
        return self._derivative(float(u))

    def __repr__(self):
        extra = f", depth={self.depth}" if self.depth else ""
        extra += f", grid={self.grid}" if self.grid else ""
        return f"PressureOracle(method={self.method!r}{extra})"


def pressure_oracle(system: System, depth: int = DEFAULT_DEPTH) -> PressureOracle:
    if isinstance(system, AffineSystem):
        return PressureOracle(
            lambda u: pressure_affine(system, u), "exact-affine", lambda u: -_affine_alpha(system, u)
        )
    cp = CylinderPressure(system, depth)
    return PressureOracle(cp.midpoint, "cylinder", cp.midpoint_derivative, depth=depth)


def tabulated_oracle(samples) -> PressureOracle:
    """Oracle restricted to given ``(u, P)`` samples; other arguments raise ``KeyError``."""
    table = {float(u): float(p) for u, p in samples}

    def lookup(u):
        if u not in table:
            raise KeyError(f"pressure not tabulated at u={u}")
        return table[u]

    return PressureOracle(lookup, "tabulated", points=tuple(sorted(table)))


def pressure_cylinder(system: System, u: float, depth: int = DEFAULT_DEPTH) -> tuple[float, float]:
    """(upper, lower) depth-``depth`` pressure estimate."""
    return CylinderPressure(system, depth).bounds(u)


def pressure(system: System, u: float, depth: int = DEFAULT_DEPTH) -> float:
    """Exact for affine systems, enclosure midpoint otherwise."""
    if isinstance(system, AffineSystem):
        return pressure_affine(system, u)
    return CylinderPressure(system, depth).midpoint(u)


def pressure_derivative(system: System, u: float, depth: int = DEFAULT_DEPTH) -> float:
    """Mean Lyapunov exponent ``alpha(u) = -P'(u)``."""
    if isinstance(system, AffineSystem):
        return _affine_alpha(system, u)
    return -CylinderPressure(system, depth).midpoint_derivative(u)


class DimensionResult(NamedTuple):
    value: float
    lower: float
    upper: float
    method: str
    depth: Optional[int] = None
    grid: Optional[int] = None


def _bowen_root(f, df, tol):
    try:
        lo, hi = bracket_up(f, 0.0, 1.0, max_doublings=12)
    except NoRootError:
        raise NoRootError("pressure does not cross zero") from None
    return solve_monotone(f, lo, hi, tol=tol, df=df)


def hausdorff_dimension(
    system: System, depth: int = DEFAULT_DEPTH, method: str = "auto", grid: int = 256
) -> DimensionResult:
    """Root of ``P(delta) = 0``.

    ``method="cylinder"`` reports the roots of the lower/upper depth-``depth``
    pressure estimates as an enclosure; ``method="operator"`` uses the leading
    eigenvalue of the discretised transfer operator on ``grid`` points.
    """
    if method == "auto":
        method = "exact-affine" if isinstance(system, AffineSystem) else "cylinder"
    if method == "exact-affine":
        if not isinstance(system, AffineSystem):
            raise ValueError("exact-affine method needs an affine system")
        f = lambda u: pressure_affine(system, u)
        df = lambda u: -_affine_alpha(system, u)
        delta = _bowen_root(f, df, 1e-14)
        return DimensionResult(delta, delta, delta, method)
    if method == "cylinder":
        cp = CylinderPressure(system, depth)
        mid = _bowen_root(cp.midpoint, cp.midpoint_derivative, 1e-12)
        r_sup = _bowen_root(cp.sup_estimate, None, 1e-12)
        r_inf = _bowen_root(cp.inf_estimate, None, 1e-12)
        return DimensionResult(mid, min(r_sup, r_inf), max(r_sup, r_inf), method, depth=depth)
    if method == "operator":
        from .transfer_operator import operator_dimension

        delta = operator_dimension(system, grid)
        return DimensionResult(delta, delta, delta, method, grid=grid)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class GibbsWeights:
    weights: tuple[float, ...]
    u: float
    pressure_at_u: float

    def __len__(self):
        return len(self.weights)


def gibbs_weights(system: AffineSystem, u: float) -> GibbsWeights:
    """Bernoulli weights ``rates_i**u * exp(-P(u))`` of the equilibrium state at ``u``."""
    logs = u * system.log_rates
    p = _logsumexp(logs)
    w = np.exp(logs - p)
    w = w / math.fsum(w)
    return GibbsWeights(tuple(float(x) for x in w), float(u), p)


def cylinder_mass(weights: GibbsWeights, word) -> float:
    word = as_word(word, len(weights.weights))
    return math.prod(weights.weights[s - 1] for s in word)


def conformal_jacobian(
    system: System, i: int, u: float, x: float, pressure_value: Optional[float] = None
) -> float:
    """``|phi_i'(x)|**u * exp(-P(u))``.

    Unless ``pressure_value`` is given, P is exact for affine systems and the
    transfer-operator estimate (256 grid points) for conformal ones.
    """
    deriv = branch_derivative(system, i, x)
    if pressure_value is None:
        if isinstance(system, AffineSystem):
            pressure_value = pressure_affine(system, u)
        else:
            from .transfer_operator import operator_pressure

            pressure_value = operator_pressure(system, u)
    return math.exp(u * math.log(deriv) - pressure_value)
