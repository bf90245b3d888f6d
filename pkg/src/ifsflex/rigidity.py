"""Rigidity and flexibility procedures for (essentially) affine systems.

An essentially affine system is represented by the affine system in its
class, i.e. by its contraction-rate vector up to permutation.  Permutations
are 0-based index tuples: ``perm[i] = j`` pairs entry ``i`` of the first
vector with entry ``j`` of the second.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import multifractal, thermo
from .errors import InadmissibleTripleError, PeelingPrecisionError
from .ifs_model import AffineSystem
from .shift_space import periodic_orbit_sums
from .thermo import GibbsWeights, PressureOracle, gibbs_weights, pressure_affine

STRUCT_TOL = 1e-9
RECOVERY_TOL = 1e-6
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class AdmissibleTriple:
    u: float
    v: float
    p: float

    def __post_init__(self):
        if self.v == 0:
            raise ValueError("admissible triple needs v != 0")


@dataclass(frozen=True)
class LyapunovWitness:
    """``rho[perm[i]] = t * lam[i]**s`` up to ``residual`` (max abs error in log space)."""

    s: float
    t: float
    residual: float
    permutation: tuple[int, ...]

    def inverse(self) -> "LyapunovWitness":
        inv = [0] * len(self.permutation)
        for i, j in enumerate(self.permutation):
            inv[j] = i
        return LyapunovWitness(1.0 / self.s, self.t ** (-1.0 / self.s), self.residual, tuple(inv))

    def then(self, other: "LyapunovWitness") -> "LyapunovWitness":
        """Compose with a witness from the second system to a third one."""
        perm = tuple(other.permutation[j] for j in self.permutation)
        return LyapunovWitness(
            self.s * other.s, other.t * self.t**other.s, self.residual + other.residual, perm
        )


def canonical_form(system: AffineSystem) -> tuple[float, ...]:
    """Rates sorted in descending order: the moduli-space representative."""
    return tuple(sorted(system.rates, reverse=True))


def _sort_perm(a: Sequence[float], b: Sequence[float]) -> tuple[int, ...]:
    """Permutation pairing the k-th largest of ``a`` with the k-th largest of ``b`` (stable)."""
    ia = sorted(range(len(a)), key=lambda i: -a[i])
    ib = sorted(range(len(b)), key=lambda i: -b[i])
    perm = [0] * len(a)
    for i, j in zip(ia, ib):
        perm[i] = j
    return tuple(perm)


def _same_d(phi, psi):
    if phi.d != psi.d:
        raise ValueError(f"alphabet sizes differ: {phi.d} != {psi.d}")


def equivalent_eas(phi: AffineSystem, psi: AffineSystem, tol: float = STRUCT_TOL) -> bool:
    _same_d(phi, psi)
    return all(abs(x - y) <= tol for x, y in zip(canonical_form(phi), canonical_form(psi)))


def gibbs_equal_up_to_permutation(
    w1: GibbsWeights, w2: GibbsWeights, tol: float = STRUCT_TOL
) -> Optional[tuple[int, ...]]:
    """Permutation with ``w2[perm[i]] == w1[i]`` within ``tol``, or None."""
    a, b = w1.weights, w2.weights
    if len(a) != len(b):
        raise ValueError("weight vectors of different length")
    perm = _sort_perm(a, b)
    if all(abs(a[i] - b[perm[i]]) <= tol for i in range(len(a))):
        return perm
    return None


def cohomologous_depth1(
    phi: AffineSystem,
    psi: AffineSystem,
    max_period: int = 6,
    tol: float = STRUCT_TOL,
    allow_constant: bool = True,
) -> Optional[tuple[tuple[int, ...], float]]:
    """Find ``perm`` and ``c`` with ``log lam_i = log rho_perm(i) + c``.

    The candidate from sorting is confirmed on the Birkhoff sums of every
    periodic orbit up to ``max_period``.  With ``allow_constant=False`` only
    ``c = 0`` (plain cohomology) is accepted.
    """
    _same_d(phi, psi)
    if max_period < 2:
        raise ValueError("max_period must be at least 2")
    a, b = phi.log_rates, psi.log_rates
    perm = _sort_perm(list(a), list(b))
    diffs = a - b[list(perm)]
    c = float(np.mean(diffs)) if allow_constant else 0.0
    if np.max(np.abs(diffs - c)) > tol:
        return None
    sums_a = periodic_orbit_sums(list(a), max_period)
    b_aligned = [float(b[perm[i]]) for i in range(phi.d)]
    sums_b = periodic_orbit_sums(b_aligned, max_period)
    for w, s in sums_a.items():
        if abs(s - sums_b[w] - c * len(w)) > tol * len(w):
            return None
    return perm, c


# -- rate recovery ----------------------------------------------------------


@dataclass(frozen=True)
class RecoveredRates:
    rates: tuple[float, ...]
    errors: tuple[float, ...]
    polished: bool = False


def _peel_grid(u0):
    # quarter-octave steps from u0 / 1024 up to u0 * 2**20
    return [u0 * 2.0 ** (m / 4) for m in range(-40, 81)]


def _peel(P, d, grid):
    rates: list[float] = []
    errors: list[float] = []
    for k in range(d):
        known = np.log(rates) if rates else np.zeros(0)
        rel_err = np.asarray([e / r for r, e in zip(rates, errors)])

        def estimate(u):
            pu = P(u)
            terms = np.exp(u * known - pu)
            remain = 1.0 - math.fsum(terms)
            # relative error of S_k: rounding in P plus propagated error of earlier entries
            noise = 8 * _EPS * (1.0 + abs(pu)) + float(np.dot(u * rel_err, terms))
            if remain <= 0 or noise >= 0.5 * remain:
                return None
            return math.exp((pu + math.log(remain)) / u), noise / remain / u

        ests = [(u, estimate(u)) for u in grid]
        best, best_err = None, math.inf
        prev = None
        for u, cur in ests:
            if cur is None:
                prev = None
                continue
            val, noise = cur
            if k == d - 1 and noise * val < best_err:
                # last entry: nothing left to suppress, only rounding matters
                best, best_err = val, noise * val
            if prev is not None:
                err = abs(val - prev) + noise * val
                if err < best_err:
                    best, best_err = val, err
            prev = val
        if best is None:
            raise PeelingPrecisionError(f"peeling lost precision at entry {k + 1}", k + 1, tuple(rates))
        rates.append(best)
        errors.append(best_err)
    return rates, errors


def _polish(P, rates, us, max_iter=60):
    """Gauss-Newton on ``P(u) = log sum exp(u * l_i)`` in the log-rates ``l``."""
    us = np.asarray(us, dtype=float)
    target = np.array([P(u) for u in us])
    logs = np.log(np.asarray(rates, dtype=float))

    def model(l):
        a = us[:, None] * l[None, :]
        mx = a.max(axis=1, keepdims=True)
        w = np.exp(a - mx)
        s = w.sum(axis=1)
        return mx[:, 0] + np.log(s), us[:, None] * (w / s[:, None])

    val, jac = model(logs)
    r = val - target
    for _ in range(max_iter):
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        lam = 1.0
        while lam > 1e-6:
            trial = logs + lam * step
            tv, tj = model(trial)
            tr = tv - target
            if np.linalg.norm(tr) <= np.linalg.norm(r):
                break
            lam *= 0.5
        else:
            break
        logs, jac, r = trial, tj, tr
        if np.max(np.abs(lam * step)) < 1e-15:
            break
    sigma = max(float(np.sqrt(np.mean(r**2))), 4 * _EPS * float(np.max(np.abs(target)) + 1.0))
    try:
        cov = np.linalg.inv(jac.T @ jac) * sigma**2
        err_l = 3.0 * np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        err_l = np.full(len(logs), np.inf)
    return np.exp(logs), np.exp(logs) * err_l


def recover_rates_from_pressure(
    oracle,
    d: int,
    tol: float = RECOVERY_TOL,
    u0: float = 30.0,
    u_grid: Optional[Sequence[float]] = None,
    polish: bool = True,
) -> RecoveredRates:
    """Recover the descending rate vector of an affine system from its pressure alone.

    Peeling: entry k is ``lim exp(log S_k(u) / u)`` with ``S_1(u) = exp(P(u))``
    and ``S_{k+1}(u) = S_k(u) - rate_k**u``.  Each stage evaluates the
    estimate on a quarter-octave grid around ``u0`` (``u0 / 1024`` to
    ``u0 * 2**20``) and keeps the one whose step to its neighbour plus
    rounding noise is smallest.  The subtraction is done relative to
    ``exp(P(u))``, so large ``u`` never overflows.

    Polish: when the Jacobian of ``u -> P(u)`` in the log-rates is well
    conditioned on moderate ``u``, a Gauss-Newton refinement removes the
    cancellation error of the lower entries.  Exact ties (degenerate systems)
    keep the peeled values.
    """
    tabulated = getattr(oracle, "points", None)
    if u_grid is None:
        u_grid = tabulated or _peel_grid(u0)
    grid = sorted(float(u) for u in u_grid if u > 0)
    if not grid:
        raise ValueError("recovery needs positive u values")
    cache: dict[float, float] = {}

    def P(u):
        if u not in cache:
            cache[u] = float(oracle(u))
        return cache[u]

    rates, errors = _peel(P, d, grid)
    polished = False
    if polish:
        if tabulated:
            us = [u for u in tabulated if u != 0 and abs(u) <= 40]
        else:
            us = [u for u in np.linspace(-8.0, 8.0, 33) if u != 0]
        if len(us) >= d:
            new, new_err = _polish(P, rates, us)
            if np.all(np.isfinite(new_err)) and np.max(new_err) < np.max(errors):
                order = np.argsort(-new)
                rates, errors = list(new[order]), list(new_err[order])
                polished = True
    worst = int(np.argmax(errors))
    if errors[worst] > tol:
        raise PeelingPrecisionError(
            f"peeling lost precision at entry {worst + 1} (error estimate {errors[worst]:.3g})",
            worst + 1,
            tuple(float(r) for r in rates[:worst]),
        )
    return RecoveredRates(tuple(float(r) for r in rates), tuple(float(e) for e in errors), polished)


# -- flexibility ------------------------------------------------------------


def _admissibility_sides(phi, triple):
    lhs = pressure_affine(phi, triple.u / triple.v)
    rhs = (pressure_affine(phi, triple.u) - triple.p) / triple.v
    return lhs, rhs


def is_admissible(phi: AffineSystem, triple: AdmissibleTriple) -> bool:
    """``P(u/v) < (P(u) - p) / v``, evaluated exactly as written."""
    lhs, rhs = _admissibility_sides(phi, triple)
    return lhs < rhs


def deformed_rates(phi: AffineSystem, triple: AdmissibleTriple) -> np.ndarray:
    """``(exp(p - P(u)) * lam**u)**(1/v)``, without any admissibility check."""
    u, v, p = triple.u, triple.v, triple.p
    return np.exp((p - pressure_affine(phi, u) + u * phi.log_rates) / v)


def deform(phi: AffineSystem, triple: AdmissibleTriple) -> AffineSystem:
    """Affine system Psi with ``mu_{Phi,u} = mu_{Psi,v}`` and ``P_Psi(v) = p``."""
    lhs, rhs = _admissibility_sides(phi, triple)
    if not lhs < rhs:
        raise InadmissibleTripleError(
            f"inadmissible triple: P(u/v) = {lhs!r} is not < (P(u) - p)/v = {rhs!r}", lhs, rhs
        )
    rho = deformed_rates(phi, triple)
    psi = AffineSystem(tuple(float(r) for r in rho))
    scale = max(1.0, abs(triple.p), abs(pressure_affine(phi, triple.u)))
    got = pressure_affine(psi, triple.v)
    if abs(got - triple.p) > 1e-12 * scale:
        raise ArithmeticError(f"deformation check failed: P_Psi(v) = {got!r}, expected {triple.p!r}")
    if gibbs_equal_up_to_permutation(
        gibbs_weights(phi, triple.u), gibbs_weights(psi, triple.v), 1e-12
    ) is None:
        raise ArithmeticError("deformation check failed: Gibbs weights do not match")
    return psi


def best_lyapunov_fit(phi: AffineSystem, psi: AffineSystem) -> Optional[LyapunovWitness]:
    """Best log-space fit ``rho[perm[i]] = t * lam[i]**s`` over sort-compatible alignments.

    Alignments are the same order (``s > 0``) and the reversed order
    (``s < 0``), expanded over every ordering inside groups of tied rates.
    For ``d = 2`` both fit exactly; fits equal up to rounding keep the
    same-order one.  Returns None when either system is degenerate.
    """
    _same_d(phi, psi)
    if phi.is_degenerate() or psi.is_degenerate():
        return None
    a = phi.log_rates
    b = psi.log_rates
    A = np.column_stack([a, np.ones_like(a)])
    best = None
    for perm in _alignments(list(a), list(b)):
        y = b[list(perm)]
        (s, logt), *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = float(np.max(np.abs(A @ np.array([s, logt]) - y)))
        if best is None or resid < best.residual - 1e-12:
            best = LyapunovWitness(float(s), float(math.exp(logt)), resid, tuple(perm))
    return best


def lyapunov_related(
    phi: AffineSystem, psi: AffineSystem, tol: float = STRUCT_TOL
) -> Optional[LyapunovWitness]:
    """Witness ``rho[perm[i]] = t * lam[i]**s``, or None.

    Degenerate systems are related exactly to the degenerate ones (reported
    with ``s = 1``).
    """
    _same_d(phi, psi)
    dphi, dpsi = phi.is_degenerate(), psi.is_degenerate()
    if dphi or dpsi:
        if dphi and dpsi:
            return LyapunovWitness(1.0, psi.rates[0] / phi.rates[0], 0.0, tuple(range(phi.d)))
        return None
    best = best_lyapunov_fit(phi, psi)
    if best is not None and best.residual < tol and abs(best.s) > tol:
        return best
    return None


def _alignments(a, b, max_expansions: int = 5040):
    """Sort-induced alignments (both orientations); ties in ``b`` expanded exhaustively."""
    ia = sorted(range(len(a)), key=lambda i: -a[i])
    groups = []
    for _, grp in itertools.groupby(sorted(range(len(b)), key=lambda j: -b[j]), key=lambda j: round(b[j], 12)):
        groups.append(list(grp))
    seen = set()
    for orientation in (1, -1):
        gs = groups if orientation == 1 else groups[::-1]
        count = 0
        for choice in itertools.product(*(itertools.permutations(g) for g in gs)):
            order = [j for g in choice for j in g]
            perm = [0] * len(a)
            for i, j in zip(ia, order):
                perm[i] = j
            key = tuple(perm)
            if key not in seen:
                seen.add(key)
                yield key
            count += 1
            if count >= max_expansions:
                break


@dataclass(frozen=True)
class MultiflexReport:
    pressure_identity_residual: float
    spectrum_identity_residual: float
    legendre_phi: float
    legendre_psi: float


def multiflex_check(
    phi: AffineSystem, u: float, psi: AffineSystem, v: float, s_grid: Optional[Sequence[float]] = None
) -> MultiflexReport:
    """Residuals of the pressure identity and of the ``alpha * ell`` identity.

    pressure: ``max_s |P_Phi(s) - P_Psi(s v/u) - s (P_Phi(u) - P_Psi(v)) / u|``;
    spectrum: ``|(u alpha_Phi(u) + P_Phi(u)) - (v alpha_Psi(v) + P_Psi(v))|``.
    """
    if u == 0 or v == 0:
        raise ValueError("u and v must be non-zero")
    if s_grid is None:
        s_grid = np.linspace(-5.0, 5.0, 21)
    shift = (pressure_affine(phi, u) - pressure_affine(psi, v)) / u
    res_p = max(
        abs(pressure_affine(phi, s) - pressure_affine(psi, s * v / u) - s * shift) for s in s_grid
    )
    a = multifractal.legendre_value(phi, u)
    b = multifractal.legendre_value(psi, v)
    return MultiflexReport(float(res_p), abs(a - b), a, b)


def pressure_curves_agree(phi: AffineSystem, psi: AffineSystem, u_grid=None, tol: float = 1e-10) -> bool:
    if u_grid is None:
        u_grid = np.linspace(-5.0, 5.0, 20)
    return all(abs(pressure_affine(phi, u) - pressure_affine(psi, u)) <= tol for u in u_grid)


def spectra_agree(phi: AffineSystem, psi: AffineSystem, samples: int = 20, tol: float = 1e-8) -> bool:
    """Compare Lyapunov spectra on the support interval and at interior sample points."""
    if phi.is_degenerate() or psi.is_degenerate():
        if not (phi.is_degenerate() and psi.is_degenerate()):
            return False
        a, b = multifractal.point_spectrum(phi), multifractal.point_spectrum(psi)
        return abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol
    lo1, hi1 = multifractal.alpha_bounds(phi)
    lo2, hi2 = multifractal.alpha_bounds(psi)
    if abs(lo1 - lo2) > tol or abs(hi1 - hi2) > tol:
        return False
    for u in np.linspace(-10.0, 10.0, samples):
        alpha = thermo.pressure_derivative(phi, float(u))
        if not lo2 < alpha < hi2:
            return False
        if abs(multifractal.lyapunov_spectrum(phi, alpha) - multifractal.lyapunov_spectrum(psi, alpha)) > tol:
            return False
    return True
