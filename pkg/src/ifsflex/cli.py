"""``ifsflex`` command-line front end.

Every command reads JSON system descriptions and writes either a JSON
payload (sorted keys) or a CSV table with a header row.  Floats are printed
with 12 significant digits so repeated runs are byte-identical.

Exit codes: 0 success, 2 parse/schema error, 3 validation failure,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import conjugacy, multifractal, rigidity, thermo, transfer_operator
from .errors import (
    DegenerateSystemError,
    InadmissibleTripleError,
    PeelingPrecisionError,
    SchemaError,
)
from .ifs_model import AffineSystem, System, system_from_dict, system_to_dict, validate

EXIT_OK, EXIT_SCHEMA, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3, 4
DIGITS = 12


@dataclass
class CommandResult:
    command: str
    input_digest: str
    payload: Optional[dict] = None
    header: Optional[list] = None
    rows: list = field(default_factory=list)
    exit_code: int = EXIT_OK

    def render(self) -> str:
        if self.payload is not None:
            body = dict(self.payload, command=self.command, input_digest=self.input_digest)
            return json.dumps(_round(body), sort_keys=True, indent=2) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(x) for x in row])
        return buf.getvalue()


class _Failure(Exception):
    def __init__(self, code: int, message: str, payload: Optional[dict] = None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    return f"{x:.{DIGITS}g}"


def _round(obj):
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{DIGITS}g}") + 0.0  # +0.0 folds -0.0
    return obj


# -- input ------------------------------------------------------------------


class _Inputs:
    """Collects raw input bytes so the result carries a digest of everything read."""

    def __init__(self):
        self.h = hashlib.sha256()

    def read(self, path: str) -> bytes:
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise _Failure(EXIT_SCHEMA, f"cannot read {path}: {exc.strerror}") from None
        self.h.update(data)
        return data

    def system(self, path: str, check: bool = True) -> System:
        try:
            obj = json.loads(self.read(path).decode("utf-8"))
            system = system_from_dict(obj)
        except (UnicodeDecodeError, json.JSONDecodeError, SchemaError) as exc:
            raise _Failure(EXIT_SCHEMA, f"{path}: {exc}") from None
        except ValueError as exc:
            raise _Failure(EXIT_SCHEMA, f"{path}: {exc}") from None
        if check:
            report = validate(system)
            if not report.valid:
                raise _Failure(EXIT_INVALID, f"{path}: system is not valid", _report_payload(report))
        return system

    def affine(self, path: str) -> AffineSystem:
        system = self.system(path)
        if not isinstance(system, AffineSystem):
            raise _Failure(EXIT_SCHEMA, f"{path}: this command needs an affine system")
        return system

    @property
    def digest(self) -> str:
        return "sha256:" + self.h.hexdigest()


def _report_payload(report) -> dict:
    return {
        "valid": report.valid,
        "distortion": report.distortion,
        "violations": [
            {"condition": v.condition, "detail": v.detail, "witness": v.witness} for v in report.violations
        ],
    }


# -- commands ---------------------------------------------------------------


def cmd_validate(args, inp):
    system = inp.system(args.file, check=False)
    report = validate(system)
    code = EXIT_OK if report.valid else EXIT_INVALID
    return CommandResult("validate", inp.digest, _report_payload(report), exit_code=code)


def cmd_dim(args, inp):
    system = inp.system(args.file)
    res = thermo.hausdorff_dimension(system, depth=args.depth, method=args.method, grid=args.grid)
    payload = {"delta": res.value, "lower": res.lower, "upper": res.upper, "method": res.method}
    if res.depth is not None:
        payload["depth"] = res.depth
    if res.grid is not None:
        payload["grid"] = res.grid
    return CommandResult("dim", inp.digest, payload)


def _u_samples(args):
    if args.samples < 1:
        raise _Failure(EXIT_SCHEMA, "--samples must be positive")
    if args.samples == 1:
        return [args.u_min]
    if args.geometric:
        if not 0 < args.u_min < args.u_max:
            raise _Failure(EXIT_SCHEMA, "--geometric needs 0 < u-min < u-max")
        return list(np.geomspace(args.u_min, args.u_max, args.samples))
    return list(np.linspace(args.u_min, args.u_max, args.samples))


def cmd_pressure(args, inp):
    system = inp.system(args.file)
    rows = [(u, thermo.pressure(system, u, depth=args.depth)) for u in _u_samples(args)]
    return CommandResult("pressure", inp.digest, header=["u", "P"], rows=rows)


def cmd_spectrum(args, inp):
    system = inp.system(args.file)
    if isinstance(system, AffineSystem) and system.is_degenerate():
        alpha, ell = multifractal.point_spectrum(system)
        rows = [(alpha, ell)]
    else:
        curve = multifractal.spectrum_curve(system, m=args.samples, depth=args.depth)
        rows = list(zip(curve.alphas, curve.values))
    return CommandResult("spectrum", inp.digest, header=["alpha", "ell"], rows=rows)


def cmd_gibbs(args, inp):
    system = inp.affine(args.file)
    gw = thermo.gibbs_weights(system, args.u)
    payload = {"u": gw.u, "pressure": gw.pressure_at_u, "weights": list(gw.weights)}
    return CommandResult("gibbs", inp.digest, payload)


def cmd_density(args, inp):
    system = inp.system(args.file)
    op = transfer_operator.build_operator(system, args.u, args.grid)
    eig = transfer_operator.leading_eigen(op, tol=min(args.tol, 1e-12) if args.tol else 1e-12)
    rows = list(zip(eig.density.grid, eig.density.values, eig.adjoint))
    return CommandResult("density", inp.digest, header=["x", "rho", "m"], rows=rows)


def cmd_deform(args, inp):
    phi = inp.affine(args.file)
    triple = rigidity.AdmissibleTriple(args.u, args.v, args.p)
    psi = rigidity.deform(phi, triple)
    perm = rigidity.gibbs_equal_up_to_permutation(
        thermo.gibbs_weights(phi, args.u), thermo.gibbs_weights(psi, args.v), 1e-12
    )
    payload = {
        "system": system_to_dict(psi),
        "triple": {"u": args.u, "v": args.v, "p": args.p},
        "verification": {
            "pressure_at_v": thermo.pressure_affine(psi, args.v),
            "gibbs_permutation": list(perm),
        },
    }
    return CommandResult("deform", inp.digest, payload)


def cmd_relate(args, inp):
    phi, psi = inp.affine(args.first), inp.affine(args.second)
    if phi.d != psi.d:
        raise _Failure(EXIT_SCHEMA, "systems must have the same number of branches")
    tol = args.tol if args.tol is not None else rigidity.STRUCT_TOL
    w = rigidity.lyapunov_related(phi, psi, tol=tol)
    if w is not None:
        payload = {
            "related": True,
            "s": w.s,
            "t": w.t,
            "residual": w.residual,
            "permutation": list(w.permutation),
        }
    else:
        best = rigidity.best_lyapunov_fit(phi, psi)
        payload = {"related": False, "residual": None if best is None else best.residual}
    return CommandResult("relate", inp.digest, payload)


def _read_samples(inp, path):
    text = inp.read(path).decode("utf-8", errors="replace")
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise _Failure(EXIT_SCHEMA, f"{path}: empty CSV") from None
    if header[:2] != ["u", "P"]:
        raise _Failure(EXIT_SCHEMA, f"{path}: expected header 'u,P'")
    samples = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            samples.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError):
            raise _Failure(EXIT_SCHEMA, f"{path}:{lineno}: malformed row") from None
    if not samples:
        raise _Failure(EXIT_SCHEMA, f"{path}: no samples")
    return samples


def cmd_recover(args, inp):
    if args.d < 2:
        raise _Failure(EXIT_SCHEMA, "--d must be at least 2")
    oracle = thermo.tabulated_oracle(_read_samples(inp, args.samples))
    tol = args.tol if args.tol is not None else rigidity.RECOVERY_TOL
    rec = rigidity.recover_rates_from_pressure(oracle, args.d, tol=tol)
    payload = {"rates": list(rec.rates), "errors": list(rec.errors), "polished": rec.polished}
    return CommandResult("recover", inp.digest, payload)


def cmd_conjugacy(args, inp):
    phi, psi = inp.affine(args.first), inp.affine(args.second)
    if phi.d != psi.d:
        raise _Failure(EXIT_SCHEMA, "systems must have the same number of branches")
    depth = args.depth
    h = conjugacy.build_h(phi, psi, depth)
    est = conjugacy.estimate_holder(h, phi, psi, args.pairs, args.seed)
    diffs = conjugacy.cauchy_profile(phi, psi, range(1, depth))
    ratios = [b / a for a, b in zip(diffs, diffs[1:]) if a > 0]
    payload = {
        "depth": depth,
        "pairs": args.pairs,
        "seed": args.seed,
        "theoretical_exponent": conjugacy.holder_exponent_theory(phi, psi),
        "empirical_exponent": est.slope,
        "fit_residual": est.residual,
        "ratio_min": est.ratio_min,
        "ratio_max": est.ratio_max,
        "cauchy_ratio": max(ratios) if ratios else None,
    }
    return CommandResult("conjugacy", inp.digest, payload)


def _parse_levels(text):
    try:
        levels = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise _Failure(EXIT_SCHEMA, f"bad --levels {text!r}") from None
    if not levels:
        raise _Failure(EXIT_SCHEMA, "--levels is empty")
    for lv in levels:
        if not 0 < lv <= 1:
            raise _Failure(EXIT_SCHEMA, f"dimension level {lv!r} outside (0, 1]")
    return levels


def iso_dimensional(delta: float, resolution: int) -> list[tuple[float, float]]:
    """Points of ``lam1**delta + lam2**delta = 1`` with ``lam1`` on an open uniform grid."""
    lam1 = np.arange(1, resolution + 1) / (resolution + 1)
    lam2 = (1.0 - lam1**delta) ** (1.0 / delta)
    return list(zip(lam1, lam2))


def cmd_moduli(args, inp):
    levels = _parse_levels(args.levels)
    if args.resolution < 1:
        raise _Failure(EXIT_SCHEMA, "--resolution must be positive")
    if args.jobs and args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            curves = list(pool.map(lambda lv: iso_dimensional(lv, args.resolution), levels))
    else:
        curves = [iso_dimensional(lv, args.resolution) for lv in levels]
    rows = []
    for lv, pts in zip(levels, curves):
        rows.extend(("level", lv, a, b) for a, b in pts)
    # degenerate locus lam1 = lam2 (valid up to 1/2)
    for lam in np.arange(1, args.resolution + 1) / (2 * (args.resolution + 1)):
        rows.append(("diagonal", math.log(2.0) / -math.log(lam), lam, lam))
    return CommandResult("moduli", inp.digest, header=["curve", "delta", "lambda1", "lambda2"], rows=rows)


# -- parser -----------------------------------------------------------------


def _common(p):
    p.add_argument("--tol", type=float, default=None, help="tolerance where applicable")
    p.add_argument("--depth", type=int, default=thermo.DEFAULT_DEPTH, help="cylinder / conjugacy depth")
    p.add_argument("--grid", type=int, default=transfer_operator.DEFAULT_GRID, help="transfer-operator grid size")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--out", default=None, help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ifsflex", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the standing assumptions")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dim", help="Hausdorff dimension of the limit set")
    p.add_argument("file")
    p.add_argument("--method", default="auto", choices=["auto", "exact-affine", "cylinder", "operator"])
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("pressure", help="pressure samples as CSV u,P")
    p.add_argument("file")
    p.add_argument("--u-min", type=float, default=0.0)
    p.add_argument("--u-max", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=11)
    p.add_argument("--geometric", action="store_true", help="geometric instead of uniform spacing")
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("spectrum", help="Lyapunov spectrum as CSV alpha,ell")
    p.add_argument("file")
    p.add_argument("--samples", type=int, default=101)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("gibbs", help="Bernoulli weights of the equilibrium state")
    p.add_argument("file")
    p.add_argument("--u", type=float, required=True)
    p.set_defaults(func=cmd_gibbs)

    p = sub.add_parser("density", help="leading eigenfunction and eigenmeasure as CSV x,rho,m")
    p.add_argument("file")
    p.add_argument("--u", type=float, required=True)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("deform", help="deform along an admissible triple (u, v, p)")
    p.add_argument("file")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("relate", help="Lyapunov relation witness between two affine systems")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_relate)

    p = sub.add_parser("recover", help="recover rates from a CSV of pressure samples")
    p.add_argument("samples")
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("conjugacy", help="Hoelder exponents of the conjugacy between two affine systems")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--pairs", type=int, default=400)
    p.set_defaults(func=cmd_conjugacy)

    p = sub.add_parser("moduli", help="iso-dimensional curves for d = 2 as CSV")
    p.add_argument("--levels", required=True, help="comma-separated dimension levels in (0, 1]")
    p.add_argument("--resolution", type=int, default=99)
    p.add_argument("--jobs", type=int, default=None, help="sample curves in parallel")
    p.set_defaults(func=cmd_moduli)

    for name in sub.choices:
        _common(sub.choices[name])
    # conjugacy defaults to a deeper level than the pressure commands
    sub.choices["conjugacy"].set_defaults(depth=10)
    return parser


def run(argv=None) -> tuple[int, str, str]:
    """Run a command, returning ``(exit code, output text, stderr message)``."""
    return _run(build_parser().parse_args(argv))


def _run(args) -> tuple[int, str, str]:
    inp = _Inputs()
    msg = ""
    try:
        result = args.func(args, inp)
    except _Failure as exc:
        msg = str(exc)
        result = CommandResult(args.command, inp.digest, dict(exc.payload, error=msg), exit_code=exc.code)
    except InadmissibleTripleError as exc:
        msg = str(exc)
        payload = {"error": msg, "lhs": exc.lhs, "rhs": exc.rhs}
        result = CommandResult(args.command, inp.digest, payload, exit_code=EXIT_NUMERICAL)
    except PeelingPrecisionError as exc:
        msg = str(exc)
        payload = {"error": msg, "entry": exc.entry, "partial": list(exc.partial)}
        result = CommandResult(args.command, inp.digest, payload, exit_code=EXIT_NUMERICAL)
    except (ArithmeticError, DegenerateSystemError, ValueError) as exc:
        msg = str(exc)
        result = CommandResult(args.command, inp.digest, {"error": msg}, exit_code=EXIT_NUMERICAL)
    return result.exit_code, result.render(), msg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code, text, msg = _run(args)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if msg:
        print(f"ifsflex: {msg}", file=sys.stderr)
    return code
