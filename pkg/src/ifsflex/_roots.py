"""Bracketed root finding for monotone functions: bisection, then Newton/secant polish."""
from __future__ import annotations

from typing import Callable, Optional

from .errors import NoRootError


def bracket_up(f: Callable[[float], float], lo: float, hi: float, max_doublings: int = 60):
    """Grow ``hi`` until ``f`` changes sign on ``[lo, hi]``."""
    flo = f(lo)
    fhi = f(hi)
    for _ in range(max_doublings):
        if (flo > 0) != (fhi > 0) or fhi == 0.0:
            return lo, hi
        lo, flo = hi, fhi
        hi = 2.0 * hi if hi > 0 else hi + 1.0
        fhi = f(hi)
    raise NoRootError("no sign change found while expanding bracket")


def solve_monotone(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    df: Optional[Callable[[float], float]] = None,
    coarse: float = 1e-3,
    max_iter: int = 200,
) -> float:
    """Root of a monotone ``f`` on ``[lo, hi]``; raises when there is no sign change."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoRootError(f"no sign change on [{lo}, {hi}]: f = {flo}, {fhi}")
    increasing = fhi > flo
    for _ in range(max_iter):
        if hi - lo < coarse:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == increasing:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    fx = f(x)
    x_prev, f_prev = (lo, f(lo)) if df is None else (None, None)
    for _ in range(max_iter):
        if fx == 0.0:
            return x
        if (fx > 0) == increasing:
            hi = x
        else:
            lo = x
        if df is not None:
            slope = df(x)
        else:
            slope = (fx - f_prev) / (x - x_prev) if x != x_prev else 0.0
        step_ok = slope != 0.0
        x_new = x - fx / slope if step_ok else 0.5 * (lo + hi)
        if not lo <= x_new <= hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= tol or hi - lo <= tol:
            return x_new
        x_prev, f_prev = x, fx
        x, fx = x_new, f(x_new)
    return x
