"""Discretised transfer operator ``(L g)(x) = sum_i |phi_i'(x)|**u g(phi_i(x))``.

The operator is not normalised, so its leading eigenvalue is ``exp(P(u))``.
Functions on X are represented by their values on ``N`` equispaced points and
``g(phi_i(x_j))`` is obtained by linear interpolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._roots import bracket_up, solve_monotone
from .errors import ConvergenceError, DomainError, NoRootError
from .ifs_model import System, branch_matrices, log_derivatives, word_matrices
from .shift_space import DEFAULT_CAP, as_word

DEFAULT_GRID = 256


@dataclass(frozen=True)
class GridDensity:
    grid: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        lo, hi = self.grid[0], self.grid[-1]
        xa = np.asarray(x, dtype=float)
        slack = 1e-12 * (hi - lo)
        if np.any((xa < lo - slack) | (xa > hi + slack)):
            raise DomainError("density evaluated outside the domain")
        out = np.interp(xa, self.grid, self.values)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TransferOperator:
    system: System
    u: float
    n: int
    grid: np.ndarray = field(repr=False)
    # per branch: left interpolation index, fractional weight, |phi_i'|**u at grid points
    index: np.ndarray = field(repr=False)
    frac: np.ndarray = field(repr=False)
    scale: np.ndarray = field(repr=False)

    def matvec(self, g: np.ndarray) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        vals = (1.0 - self.frac) * g[self.index] + self.frac * g[self.index + 1]
        return np.sum(self.scale * vals, axis=0)

    def rmatvec(self, m: np.ndarray) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        w = self.scale * m[None, :]
        out = np.bincount(self.index.ravel(), (w * (1.0 - self.frac)).ravel(), minlength=self.n)
        out += np.bincount((self.index + 1).ravel(), (w * self.frac).ravel(), minlength=self.n)
        return out

    def matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        rows = np.broadcast_to(np.arange(self.n), self.index.shape)
        np.add.at(a, (rows, self.index), self.scale * (1.0 - self.frac))
        np.add.at(a, (rows, self.index + 1), self.scale * self.frac)
        return a


def build_operator(system: System, u: float, n: int = DEFAULT_GRID) -> TransferOperator:
    if n < 16:
        raise ValueError("grid size must be at least 16")
    lo, hi = system.domain
    grid = np.linspace(lo, hi, n)
    mats = branch_matrices(system)
    h = (hi - lo) / (n - 1)
    idx, frac, scale = [], [], []
    for m in mats:
        y = (m[0, 0] * grid + m[0, 1]) / (m[1, 0] * grid + m[1, 1])
        t = np.clip((y - lo) / h, 0.0, n - 1)
        k = np.minimum(np.floor(t).astype(int), n - 2)
        idx.append(k)
        frac.append(t - k)
        logd = log_derivatives(m[None], grid)[0]
        scale.append(np.exp(u * logd))
    return TransferOperator(system, float(u), n, grid, np.array(idx), np.array(frac), np.array(scale))


@dataclass(frozen=True)
class LeadingEigen:
    pressure: float
    eigenvalue: float
    density: GridDensity
    adjoint: np.ndarray
    iterations: int
    residual: float


def _power(apply, n, tol, max_iter):
    x = np.ones(n)
    lam = None
    for k in range(1, max_iter + 1):
        y = apply(x)
        lam_new = float(np.dot(x, y) / np.dot(x, x))
        y /= np.max(np.abs(y))
        resid = float(np.max(np.abs(apply(y) - lam_new * y)) / np.max(np.abs(y)))
        x = y
        if lam is not None and abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)) and resid <= 1e-10 * abs(lam_new):
            return lam_new, x, k, resid
        lam = lam_new
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps", resid)


def leading_eigen(op: TransferOperator, tol: float = 1e-12, max_iter: int = 10_000) -> LeadingEigen:
    """Leading eigenpair by power iteration, plus the left eigenvector.

    The left vector ``m`` is normalised to total mass 1 and the density ``rho``
    so that ``sum(rho * m) == 1``.
    """
    lam, rho, iters, resid = _power(op.matvec, op.n, tol, max_iter)
    _, m, iters_l, _ = _power(op.rmatvec, op.n, tol, max_iter)
    m = np.abs(m)
    m /= np.sum(m)
    rho = rho / np.dot(rho, m)
    return LeadingEigen(
        math.log(lam), lam, GridDensity(op.grid, rho), m, max(iters, iters_l), resid
    )


def operator_pressure(system: System, u: float, n: int = DEFAULT_GRID) -> float:
    return leading_eigen(build_operator(system, u, n)).pressure


def operator_dimension(system: System, n: int = DEFAULT_GRID, tol: float = 1e-12) -> float:
    f = lambda u: operator_pressure(system, u, n)
    try:
        lo, hi = bracket_up(f, 0.0, 1.0, max_doublings=12)
    except NoRootError:
        raise NoRootError("pressure does not cross zero") from None
    return solve_monotone(f, lo, hi, tol=tol)


def bn_profile(system: System, u: float, pressure: float, n: int, points, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``b_n(z) = sum_{|w|=n} |phi_w'(z)|**u exp(-n P)`` at each sample point."""
    z = np.atleast_1d(np.asarray(points, dtype=float))
    if n == 0:
        return np.ones_like(z)
    logd = log_derivatives(word_matrices(system, n, cap), z)
    a = u * logd - n * pressure
    mx = np.max(a, axis=0)
    return np.exp(mx) * np.sum(np.exp(a - mx), axis=0)


def jacobian_cocycle(system: System, u: float, word, x: float, density: GridDensity, pressure: float) -> float:
    """``rho(phi_w x) / rho(x) * |phi_w'(x)|**u * exp(-|w| P)``; ``word`` may be a single symbol."""
    if isinstance(word, (int, np.integer)):
        word = (int(word),)
    word = as_word(word, system.d)
    lo, hi = system.domain
    slack = 1e-12 * (hi - lo)
    if not lo - slack <= x <= hi + slack:
        raise DomainError(f"point {x!r} outside domain [{lo}, {hi}]")
    mats = branch_matrices(system)
    m = np.eye(2)
    for s in word:
        m = m @ mats[s - 1]
    y = (m[0, 0] * x + m[0, 1]) / (m[1, 0] * x + m[1, 1])
    logd = float(log_derivatives(m[None], x)[0, 0])
    return density(y) / density(x) * math.exp(u * logd - len(word) * pressure)
