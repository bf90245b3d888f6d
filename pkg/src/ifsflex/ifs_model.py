"""Affine and conformal (Möbius) iterated function systems on an interval.

Every branch is stored as a 2x2 matrix ``[[a, b], [c, e]]`` acting by
``x -> (a x + b) / (c x + e)``; an affine branch ``x -> r x + b`` is the
matrix ``[[r, b], [0, 1]]``.  A composition of branches is again such a map,
so cylinder images and derivative bounds are computed from matrix products.
Off the pole the derivative ``|det| / (c x + e)**2`` is monotone, hence its
extremes over the domain sit at the endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import DomainError, SchemaError
from .shift_space import DEFAULT_CAP, as_word, check_cap

VALIDATION_GRID = 256
_SLACK = 1e-12


@dataclass(frozen=True)
class AffineBranch:
    rate: float
    offset: float

    def matrix(self):
        return ((self.rate, self.offset), (0.0, 1.0))


@dataclass(frozen=True)
class MoebiusBranch:
    a: float
    b: float
    c: float
    e: float

    def matrix(self):
        return ((self.a, self.b), (self.c, self.e))


Branch = Union[AffineBranch, MoebiusBranch]


def canonical_offsets(rates: Sequence[float]) -> tuple[float, ...]:
    """Left-to-right placement in [0, 1] with equal gaps between consecutive images."""
    d = len(rates)
    gap = (1.0 - math.fsum(rates)) / (d - 1) if d > 1 else 0.0
    offsets, pos = [], 0.0
    for r in rates:
        offsets.append(pos)
        pos += r + gap
    if d > 1:
        # pin the last image to the right endpoint exactly
        offsets[-1] = 1.0 - rates[-1]
    return tuple(offsets)


@dataclass(frozen=True)
class AffineSystem:
    """Branches ``x -> rates[i] * x + offsets[i]`` on ``[0, 1]``."""

    rates: tuple[float, ...]
    offsets: tuple[float, ...] = None
    domain: tuple[float, float] = field(default=(0.0, 1.0), init=False)

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        object.__setattr__(self, "rates", rates)
        if self.offsets is None:
            object.__setattr__(self, "offsets", canonical_offsets(rates) if rates else ())
        else:
            object.__setattr__(self, "offsets", tuple(float(b) for b in self.offsets))
        if len(self.offsets) != len(rates):
            raise ValueError("rates and offsets must have the same length")

    @property
    def d(self) -> int:
        return len(self.rates)

    @property
    def branches(self) -> tuple[AffineBranch, ...]:
        return tuple(AffineBranch(r, b) for r, b in zip(self.rates, self.offsets))

    @property
    def log_rates(self) -> np.ndarray:
        return np.log(np.asarray(self.rates))

    def is_degenerate(self, tol: float = 1e-12) -> bool:
        return max(self.rates) - min(self.rates) < tol


@dataclass(frozen=True)
class ConformalSystem:
    domain: tuple[float, float]
    branches: tuple[Branch, ...]

    def __post_init__(self):
        lo, hi = (float(t) for t in self.domain)
        if not lo < hi:
            raise ValueError("domain must be a non-degenerate interval [lo, hi]")
        object.__setattr__(self, "domain", (lo, hi))
        object.__setattr__(self, "branches", tuple(self.branches))

    @property
    def d(self) -> int:
        return len(self.branches)


System = Union[AffineSystem, ConformalSystem]


def branch_matrices(system: System) -> np.ndarray:
    return np.array([br.matrix() for br in system.branches], dtype=float)


def _check_symbol(system, i):
    if not 1 <= i <= system.d:
        raise ValueError(f"symbol {i} outside alphabet 1..{system.d}")


def _check_point(system, x):
    lo, hi = system.domain
    slack = _SLACK * (hi - lo)
    if not lo - slack <= x <= hi + slack:
        raise DomainError(f"point {x!r} outside domain [{lo}, {hi}]")


def _mobius(m, x):
    return (m[0, 0] * x + m[0, 1]) / (m[1, 0] * x + m[1, 1])


def _mobius_deriv(m, x):
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return abs(det) / (m[1, 0] * x + m[1, 1]) ** 2


def apply_branch(system: System, i: int, x: float) -> float:
    _check_symbol(system, i)
    _check_point(system, x)
    return float(_mobius(branch_matrices(system)[i - 1], x))


def branch_derivative(system: System, i: int, x: float) -> float:
    """``|phi_i'(x)|``."""
    _check_symbol(system, i)
    _check_point(system, x)
    return float(_mobius_deriv(branch_matrices(system)[i - 1], x))


# -- validation -------------------------------------------------------------


class Violation(NamedTuple):
    condition: str
    detail: str
    witness: float | None = None


@dataclass
class ValidationReport:
    violations: list[Violation]
    distortion: float | None = None

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.valid


def validate(system: System, grid: int = VALIDATION_GRID, distortion_depth: int = 8) -> ValidationReport:
    """Check the defining conditions; violations are returned, not raised.

    Affine systems are checked exactly.  For conformal systems the contraction
    and into-interior conditions are checked at the endpoints (exact for this
    branch catalogue) plus ``grid`` equispaced points.
    """
    out: list[Violation] = []
    if system.d < 2:
        out.append(Violation("alphabet", f"need at least two branches, got {system.d}"))
    if isinstance(system, AffineSystem):
        _validate_affine(system, out)
    else:
        _validate_conformal(system, grid, out)
    if out:
        return ValidationReport(out)
    return ValidationReport(out, distortion_constant(system, distortion_depth))


def _validate_affine(system, out):
    for i, r in enumerate(system.rates, 1):
        if not 0.0 < r < 1.0:
            out.append(Violation("rate", f"rate of branch {i} is {r}, need 0 < rate < 1"))
    total = math.fsum(system.rates)
    if total > 1.0 + 1e-12:
        out.append(Violation("rate_sum", f"sum of rates {total} exceeds 1"))
    if any(not 0.0 < r < 1.0 for r in system.rates):
        return
    images = []
    for i, (r, b) in enumerate(zip(system.rates, system.offsets), 1):
        a0, a1 = b, r + b
        if a0 < -_SLACK or a1 > 1.0 + _SLACK:
            witness = 0.0 if a0 < -_SLACK else 1.0
            out.append(Violation("into_domain", f"image of branch {i} is [{a0}, {a1}], not inside [0, 1]", witness))
        images.append((a0, a1))
    _check_osc(images, out)


def _check_osc(images, out):
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            lo = max(images[i][0], images[j][0])
            hi = min(images[i][1], images[j][1])
            if hi - lo > _SLACK:
                out.append(
                    Violation(
                        "open_set_condition",
                        f"images of branches {i + 1} and {j + 1} overlap on ({lo}, {hi})",
                        0.5 * (lo + hi),
                    )
                )


def _validate_conformal(system, grid, out):
    lo, hi = system.domain
    xs = np.concatenate(([lo, hi], np.linspace(lo, hi, grid)))
    images = []
    for i, br in enumerate(system.branches, 1):
        m = np.array(br.matrix(), dtype=float)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if det == 0.0:
            out.append(Violation("determinant", f"branch {i} is constant (a*e - b*c = 0)"))
            continue
        den_lo, den_hi = m[1, 0] * lo + m[1, 1], m[1, 0] * hi + m[1, 1]
        if den_lo == 0.0 or den_hi == 0.0 or (den_lo > 0) != (den_hi > 0):
            pole = -m[1, 1] / m[1, 0]
            out.append(Violation("pole", f"branch {i} has a pole at {pole} inside the domain", pole))
            continue
        vals = _mobius(m, xs)
        ders = _mobius_deriv(m, xs)
        k = int(np.argmax(ders))
        if ders[k] >= 1.0:
            out.append(Violation("contraction", f"|phi_{i}'| = {ders[k]} >= 1", float(xs[k])))
        outside = np.flatnonzero((vals <= lo) | (vals >= hi))
        if outside.size:
            x = float(xs[outside[0]])
            out.append(Violation("into_interior", f"phi_{i}({x}) = {vals[outside[0]]} not in the interior", x))
        images.append((float(min(vals[0], vals[1])), float(max(vals[0], vals[1]))))
    _check_osc(images, out)


def require_valid(system: System) -> System:
    report = validate(system)
    if not report.valid:
        raise ValueError("invalid system: " + "; ".join(v.detail for v in report.violations))
    return system


# -- cylinders --------------------------------------------------------------


class Cylinder(NamedTuple):
    lo: float
    hi: float
    deriv_inf: float
    deriv_sup: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _word_matrix(mats, word):
    m = np.eye(2)
    for s in word:
        m = m @ mats[s - 1]
        m /= np.abs(m).max()
    return m


def _log_deriv(m, x):
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return math.log(abs(det)) - 2.0 * math.log(abs(m[1, 0] * x + m[1, 1]))


def cylinder_interval(system: System, word) -> Cylinder:
    """``phi_w(X)`` together with the infimum and supremum of ``|phi_w'|`` on X."""
    word = as_word(word, system.d)
    lo, hi = system.domain
    if len(word) == 0:
        return Cylinder(lo, hi, 1.0, 1.0)
    m = _word_matrix(branch_matrices(system), word)
    if isinstance(system, AffineSystem):
        # exact affine composition without the projective rescaling
        a, b = 1.0, 0.0
        for s in reversed(word.symbols):
            r, t = system.rates[s - 1], system.offsets[s - 1]
            a, b = r * a, r * b + t
        return Cylinder(b, a + b, a, a)
    y0, y1 = float(_mobius(m, lo)), float(_mobius(m, hi))
    g0, g1 = math.exp(_log_deriv(m, lo)), math.exp(_log_deriv(m, hi))
    return Cylinder(min(y0, y1), max(y0, y1), min(g0, g1), max(g0, g1))


def code_point(system: System, word) -> tuple[float, float]:
    """Midpoint of the cylinder of ``word`` and the half-width error bound."""
    word = as_word(word, system.d)
    if len(word) == 0:
        raise ValueError("code_point needs a non-empty word")
    cyl = cylinder_interval(system, word)
    return 0.5 * (cyl.lo + cyl.hi), 0.5 * cyl.width


def birkhoff_potential(system: System, word) -> tuple[float, float]:
    """(sup, inf) over the cylinder of the Birkhoff sum of the geometric potential."""
    word = as_word(word, system.d)
    if len(word) == 0:
        raise ValueError("birkhoff_potential needs a non-empty word")
    if isinstance(system, AffineSystem):
        s = math.fsum(math.log(system.rates[k - 1]) for k in word)
        return s, s
    m = _word_matrix(branch_matrices(system), word)
    lo, hi = system.domain
    a, b = _log_deriv(m, lo), _log_deriv(m, hi)
    return max(a, b), min(a, b)


def word_matrices(system: System, n: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Projectively normalised matrices of all depth-``n`` words, lexicographic order."""
    check_cap(system.d, n, cap)
    mats = branch_matrices(system)
    out = np.eye(2)[None]
    for _ in range(n):
        out = np.einsum("kij,sjl->ksil", out, mats).reshape(-1, 2, 2)
        out /= np.abs(out).max(axis=(1, 2), keepdims=True)
    return out


def log_derivatives(mats: np.ndarray, x) -> np.ndarray:
    """``log|phi_w'(x)|`` for stacked word matrices; shape ``(words, points)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    det = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    den = mats[:, 1, 0, None] * x[None, :] + mats[:, 1, 1, None]
    return np.log(np.abs(det))[:, None] - 2.0 * np.log(np.abs(den))


@lru_cache(maxsize=64)
def cylinder_potential_bounds(system: System, n: int, cap: int = DEFAULT_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Sup and inf of ``S_n I`` on every depth-``n`` cylinder (read-only arrays)."""
    if isinstance(system, AffineSystem):
        logs = np.log(np.asarray(system.rates))
        check_cap(system.d, n, cap)
        s = np.zeros(1)
        for _ in range(n):
            s = (s[:, None] + logs[None, :]).reshape(-1)
        sup = inf = s
    else:
        ld = log_derivatives(word_matrices(system, n, cap), system.domain)
        sup, inf = ld.max(axis=1), ld.min(axis=1)
    sup = np.array(sup)
    inf = np.array(inf)
    sup.flags.writeable = False
    inf.flags.writeable = False
    return sup, inf


def distortion_constant(system: System, depth: int = 8) -> float:
    """Empirical bounded-distortion constant: max over words of length <= depth of sup/inf |phi_w'|."""
    worst = 0.0
    for n in range(1, depth + 1):
        sup, inf = cylinder_potential_bounds(system, n)
        worst = max(worst, float(np.max(sup - inf)))
    return math.exp(worst)


# -- JSON schema ------------------------------------------------------------


def system_from_dict(obj: dict) -> System:
    """Parse the JSON system schema.  A wrapper ``{"system": {...}}`` is accepted too."""
    if not isinstance(obj, dict):
        raise SchemaError("system description must be a JSON object")
    if "system" in obj and "type" not in obj:
        obj = obj["system"]
        if not isinstance(obj, dict):
            raise SchemaError("'system' must be a JSON object")
    kind = obj.get("type")
    try:
        if kind == "affine":
            rates = [float(r) for r in obj["rates"]]
            offsets = obj.get("offsets")
            if offsets is not None:
                offsets = [float(b) for b in offsets]
            return AffineSystem(tuple(rates), None if offsets is None else tuple(offsets))
        if kind == "conformal":
            lo, hi = (float(t) for t in obj["domain"])
            branches = []
            for br in obj["branches"]:
                if br["kind"] == "affine":
                    branches.append(AffineBranch(float(br["rate"]), float(br["offset"])))
                elif br["kind"] == "moebius":
                    a, b, c, e = (float(t) for t in br["coeffs"])
                    branches.append(MoebiusBranch(a, b, c, e))
                else:
                    raise SchemaError(f"unknown branch kind {br['kind']!r}")
            return ConformalSystem((lo, hi), tuple(branches))
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed {kind} system: {exc}") from exc
    raise SchemaError(f"unknown system type {kind!r}")


def system_to_dict(system: System) -> dict:
    if isinstance(system, AffineSystem):
        return {"type": "affine", "rates": list(system.rates), "offsets": list(system.offsets)}
    branches = []
    for br in system.branches:
        if isinstance(br, AffineBranch):
            branches.append({"kind": "affine", "rate": br.rate, "offset": br.offset})
        else:
            branches.append({"kind": "moebius", "coeffs": [br.a, br.b, br.c, br.e]})
    return {"type": "conformal", "domain": list(system.domain), "branches": branches}


def continued_fraction_system(digits: Sequence[int], domain: tuple[float, float]) -> ConformalSystem:
    """Gauss-map inverse branches ``x -> 1 / (k + x)`` for the given digits."""
    return ConformalSystem(domain, tuple(MoebiusBranch(0.0, 1.0, 1.0, float(k)) for k in digits))


# Limit set of continued fractions with partial quotients in {1, 2}; the domain
# hugs the limit set [(sqrt 3 - 1)/2, sqrt 3 - 1] to keep distortion small.
CF12 = continued_fraction_system((1, 2), (0.36, 0.74))
