"""Command-line pipeline: spectrum, bounds, detgrid, localize, verify, contour, report.

Exit-code contract: 0 success or advisory, 2 certificate violation,
3 numerical failure, 64 usage error.  All outputs are JSON except detgrid
(CSV); every JSON document carries a "schema": "graph-sturm/1" field and is
serialized with sorted keys so identical configs produce byte-identical
output.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import bounds as bounds_mod
from . import oracle as oracle_mod
from .determinant import (KernelContext, delta_q_grid, eval_delta_q, phi_bound,
                          shooting_delta_q)
from .errors import (CertificateUnavailableError, CertificateViolationError,
                     ContourError, GraphSturmError, ProblemError, SearchError,
                     SeriesError, SolverError)
from .problem import (SegmentGraphProblem, derive_shape, potential_norms,
                      problem_from_json)
from .unperturbed import SpectrumTable, eval_delta0, unperturbed_spectrum

SCHEMA = "graph-sturm/1"

EXIT_OK = 0
EXIT_CERTIFICATE = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64


@dataclass(frozen=True)
class RunConfig:
    """Echo of the global run parameters carried into every report."""

    problem_path: str
    constants: str = "corrected"
    seed: int = 0


# ---------------------------------------------------------------------------
# Localization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalizationRow:
    s: int
    lambda0: float
    rho: float
    scan_radius: float
    lambda_q: float
    residual: float
    unique: bool
    certified: bool
    oracle_dev: float | None = None


@dataclass(frozen=True)
class LocalizationReport:
    rows: tuple[LocalizationRow, ...]
    advisory: bool
    smallness: bounds_mod.SmallnessReport


def _delta_q_real_grid(problem: SegmentGraphProblem, lams: np.ndarray,
                       ctx: KernelContext, norms) -> np.ndarray:
    d0, phi = delta_q_grid(problem, np.asarray(lams, dtype=complex), ctx, norms)
    vals = d0 + phi
    bad = np.abs(vals.imag) > 1e-10 * (1.0 + np.abs(vals.real))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise SeriesError(f"Dq at real lam={lams[i]} has imaginary residue "
                          f"{vals.imag[i]:.3e}")
    return vals.real


def _delta_q_real(problem: SegmentGraphProblem, lam: float, ctx: KernelContext,
                  norms) -> float:
    return float(_delta_q_real_grid(problem, np.array([lam]), ctx, norms)[0])


def _circle_winding(problem: SegmentGraphProblem, center: float, radius: float,
                    ctx: KernelContext, norms, nodes: int = 128) -> int:
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * theta)
    d0, phi = delta_q_grid(problem, z, ctx, norms)
    vals = d0 + phi
    closed = np.concatenate([vals, vals[:1]])
    w = float(np.sum(np.angle(closed[1:] / closed[:-1])) / (2.0 * math.pi))
    if abs(w - round(w)) > 1e-2:
        raise SeriesError(f"uniqueness winding did not settle: {w:.4f}")
    return int(round(w))


def localize(problem: SegmentGraphProblem, count: int,
             ctx: KernelContext | None = None,
             constants: str = "corrected",
             scan_divisions: int = 64,
             verify_m: int | None = None,
             check_uniqueness_winding: bool = True) -> LocalizationReport:
    """Bracket one perturbed root inside each certified interval.

    When the smallness condition fails (or the geometry is degenerate) the
    scan runs in advisory mode over the outer radius R (or a gap-based
    fallback).  A missing or non-unique sign change inside a *certified*
    interval raises CertificateViolationError.
    """
    if ctx is None:
        ctx = KernelContext(grid_n=257)
    norms = potential_norms(problem)
    table = unperturbed_spectrum(problem, n_max=count)
    shape = derive_shape(problem)
    small = bounds_mod.smallness_condition(problem, constants=constants, norms=norms)
    zero_potential = norms.sigma1 == 0.0 and norms.sigma2 == 0.0

    rho = 0.0
    certified = False
    if not shape.degenerate:
        rad = bounds_mod.localization_radius(problem, 1, constants=constants, norms=norms)
        rho = rad.rho
        certified = rad.valid
    advisory = not certified

    lams = [e.lam for e in table.positive]
    rows = []
    for idx, entry in enumerate(table.positive):
        lam0 = entry.lam
        if zero_potential:
            # Dq == D0 identically; the root is the unperturbed one
            residual = abs(complex(eval_delta0(shape, problem.p, complex(lam0))))
            rows.append(LocalizationRow(s=entry.s, lambda0=lam0, rho=rho,
                                        scan_radius=0.0, lambda_q=lam0,
                                        residual=residual, unique=True,
                                        certified=certified))
            continue
        if certified:
            radius = rho
        elif shape.R > 0.0:
            radius = shape.R
        else:
            gaps = []
            if idx > 0:
                gaps.append(lam0 - lams[idx - 1])
            if idx + 1 < len(lams):
                gaps.append(lams[idx + 1] - lam0)
            gaps.append(lam0)
            radius = 0.25 * min(gaps)

        grid = np.linspace(lam0 - radius, lam0 + radius, 2 * scan_divisions + 1)
        vals = _delta_q_real_grid(problem, grid, ctx, norms)
        signs = np.sign(vals)
        changes = [i for i in range(len(grid) - 1)
                   if signs[i] != 0 and signs[i + 1] != 0 and signs[i] != signs[i + 1]]
        exact_hits = [i for i in range(len(grid)) if signs[i] == 0]

        if len(changes) + len(exact_hits) == 0:
            msg = (f"certified interval around lam_{entry.s}={lam0:.8f} "
                   f"(radius {radius:.3e}) contains no sign change of Dq")
            if certified:
                raise CertificateViolationError(msg)
            rows.append(LocalizationRow(s=entry.s, lambda0=lam0, rho=rho,
                                        scan_radius=radius, lambda_q=math.nan,
                                        residual=math.nan, unique=False,
                                        certified=False))
            continue
        if certified and (len(changes) + len(exact_hits)) > 1:
            raise CertificateViolationError(
                f"certified interval around lam_{entry.s}={lam0:.8f} contains "
                f"{len(changes) + len(exact_hits)} sign changes; expected exactly one")

        if exact_hits:
            lam_q = float(grid[exact_hits[0]])
        else:
            lo, hi = float(grid[changes[0]]), float(grid[changes[0] + 1])
            flo = _delta_q_real(problem, lo, ctx, norms)
            for _ in range(80):
                if hi - lo <= 1e-12:
                    break
                mid = 0.5 * (lo + hi)
                fmid = _delta_q_real(problem, mid, ctx, norms)
                if flo * fmid <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fmid
            lam_q = 0.5 * (lo + hi)

        residual = abs(_delta_q_real(problem, lam_q, ctx, norms))
        unique = len(changes) + len(exact_hits) == 1
        if unique and check_uniqueness_winding:
            wind = _circle_winding(problem, lam0, radius, ctx, norms)
            unique = wind == 1
            if certified and not unique:
                raise CertificateViolationError(
                    f"winding on the certified circle around lam_{entry.s} is "
                    f"{wind}, expected 1")
        rows.append(LocalizationRow(s=entry.s, lambda0=lam0, rho=rho,
                                    scan_radius=radius, lambda_q=lam_q,
                                    residual=residual, unique=unique,
                                    certified=certified))

    if verify_m is not None:
        localized = [(r.s, r.lambda_q) for r in rows if math.isfinite(r.lambda_q)]
        table_dev = oracle_mod.compare_spectra(problem, localized, m=verify_m)
        devs = {r.s: r.deviation for r in table_dev.rows}
        rows = [LocalizationRow(s=r.s, lambda0=r.lambda0, rho=r.rho,
                                scan_radius=r.scan_radius, lambda_q=r.lambda_q,
                                residual=r.residual, unique=r.unique,
                                certified=r.certified, oracle_dev=devs.get(r.s))
                for r in rows]
    return LocalizationReport(rows=tuple(rows), advisory=advisory, smallness=small)


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(doc: dict, out: str | None) -> None:
    doc = dict(doc)
    doc["schema"] = SCHEMA
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def spectrum_doc(table: SpectrumTable) -> dict:
    return {
        "spectrum": [
            {"s": e.s, "w": e.w, "lambda": e.lam, "multiplicity": e.multiplicity,
             "simplicity_margin": (None if math.isinf(e.simplicity_margin)
                                   else e.simplicity_margin)}
            for e in table.entries
        ],
        "n_max": table.n_max,
        "w1_below_pi": table.w1_below_pi,
    }


def localization_doc(report: LocalizationReport) -> dict:
    return {
        "advisory": report.advisory,
        "smallness": asdict(report.smallness),
        "roots": [asdict(r) for r in report.rows],
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_spectrum(problem, args) -> int:
    table = unperturbed_spectrum(problem, n_max=args.count, root_tol=args.tol)
    write_json(spectrum_doc(table), args.out)
    return EXIT_OK


def _cmd_bounds(problem, args) -> int:
    small = bounds_mod.smallness_condition(problem, constants=args.constants)
    doc = {"smallness": asdict(small), "radii": []}
    shape = derive_shape(problem)
    if shape.degenerate:
        doc["certificate"] = "unavailable (degenerate geometry)"
    else:
        for s in range(1, args.count + 1):
            rad = bounds_mod.localization_radius(problem, s, constants=args.constants)
            doc["radii"].append(asdict(rad))
        doc["certificate"] = "valid" if (small.holds and doc["radii"]
                                         and doc["radii"][0]["valid"]) else "unavailable"
    write_json(doc, args.out)
    return EXIT_OK


def _dump_kernels(problem, lam: float, path: str) -> None:
    """Debug dump of the transformation-kernel grids as (segment, x, t, absN)."""
    from .transform import build_kernel_series
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["segment", "x", "t", "abs_n"])
        for segment in ("left", "right"):
            ser = build_kernel_series(problem, segment, complex(lam))
            mask = ser.triangle_mask()
            for i in range(ser.x.size):
                for j in range(ser.x.size):
                    if mask[i, j]:
                        writer.writerow([segment, repr(float(ser.x[i])),
                                         repr(float(ser.x[j])),
                                         repr(float(abs(ser.values[i, j])))])


def _cmd_detgrid(problem, args) -> int:
    lams = np.arange(args.lmin, args.lmax + 0.5 * args.step, args.step)
    if args.dump_kernels:
        _dump_kernels(problem, float(lams[0]), args.dump_kernels)
    norms = potential_norms(problem)
    ctx = KernelContext()
    rows = []
    for lam in lams:
        lam = float(lam)
        if args.method in ("series", "both"):
            ev = eval_delta_q(problem, lam, ctx, norms)
            rows.append(("series", lam, ev.delta_q.real, ev.delta_q.imag,
                         abs(ev.phi), ev.phi_bound))
        if args.method in ("shooting", "both"):
            val = shooting_delta_q(problem, lam)
            shape = derive_shape(problem)
            phi = val - complex(eval_delta0(shape, problem.p, lam))
            rows.append(("shooting", lam, val.real, val.imag,
                         abs(phi), phi_bound(problem, lam, norms)))
    out = args.out or "-"
    fh = sys.stdout if out == "-" else open(out, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(fh)
        writer.writerow(["method", "lambda", "re_delta", "im_delta", "abs_phi", "phi_bound"])
        for row in rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _cmd_localize(problem, args) -> int:
    report = localize(problem, count=args.count, constants=args.constants,
                      verify_m=args.m if args.verify else None)
    write_json(localization_doc(report), args.out)
    return EXIT_OK


def _cmd_verify(problem, args) -> int:
    report = localize(problem, count=args.count, constants=args.constants,
                      check_uniqueness_winding=False)
    localized = [(r.s, r.lambda_q) for r in report.rows if math.isfinite(r.lambda_q)]
    dev = oracle_mod.compare_spectra(problem, localized, m=args.m)
    doc = {
        "mesh": dev.mesh,
        "richardson": dev.richardson,
        "tol_fd": dev.tol_fd,
        "excluded_low_eigenvalues": list(dev.excluded),
        "deviations": [asdict(r) for r in dev.rows],
    }
    write_json(doc, args.out)
    return EXIT_OK


def _cmd_contour(problem, args) -> int:
    count = bounds_mod.rouche_count(problem, args.l)
    write_json(asdict(count), args.out)
    return EXIT_OK


def _cmd_report(problem, args) -> int:
    from .report import run_report
    paths = run_report(problem, out_dir=args.out_dir, count=args.count,
                       constants=args.constants,
                       verify_m=args.m if args.verify else None)
    sys.stdout.write("\n".join(str(p) for p in paths) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphsturm",
        description="Spectra and localization certificates for a coupled "
                    "two-segment Sturm-Liouville operator")
    parser.add_argument("--config", required=True, help="problem JSON file")
    parser.add_argument("--out", default=None, help="output file (default stdout)")
    parser.add_argument("--constants", choices=["corrected", "paper"],
                        default="corrected", help="constant set for bounds")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed echoed into reports (sampling lives in tests)")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="unperturbed secular roots")
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--tol", type=float, default=1e-12)

    bp = sub.add_parser("bounds", help="smallness condition and radii")
    bp.add_argument("--count", type=int, default=10)

    dp = sub.add_parser("detgrid", help="characteristic function on a real grid")
    dp.add_argument("--lmin", type=float, required=True)
    dp.add_argument("--lmax", type=float, required=True)
    dp.add_argument("--step", type=float, required=True)
    dp.add_argument("--method", choices=["series", "shooting", "both"], default="series")
    dp.add_argument("--dump-kernels", default=None, metavar="FILE",
                    help="also dump the (x, t, |N|) kernel grids at lmin as CSV")

    lp = sub.add_parser("localize", help="bracket perturbed roots in certified intervals")
    lp.add_argument("--count", type=int, default=10)
    lp.add_argument("--verify", action="store_true", help="attach FD oracle deviations")
    lp.add_argument("--m", type=int, default=oracle_mod.DEFAULT_MESH)

    vp = sub.add_parser("verify", help="FD oracle deviation table")
    vp.add_argument("--count", type=int, default=8)
    vp.add_argument("--m", type=int, default=oracle_mod.DEFAULT_MESH)

    cp = sub.add_parser("contour", help="argument-principle zero counts on a square")
    cp.add_argument("--l", type=int, required=True)

    rp = sub.add_parser("report", help="full pipeline with figures")
    rp.add_argument("--count", type=int, default=10)
    rp.add_argument("--out-dir", default="report_out")
    rp.add_argument("--verify", action="store_true")
    rp.add_argument("--m", type=int, default=oracle_mod.DEFAULT_MESH)

    return parser


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "bounds": _cmd_bounds,
    "detgrid": _cmd_detgrid,
    "localize": _cmd_localize,
    "verify": _cmd_verify,
    "contour": _cmd_contour,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        problem = problem_from_json(args.config)
        return _COMMANDS[args.command](problem, args)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificateViolationError as exc:
        print(f"CERTIFICATE VIOLATION: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (SearchError, SeriesError, SolverError, ContourError,
            CertificateUnavailableError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except GraphSturmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
