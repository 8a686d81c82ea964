"""Combined report: JSON + CSV tables and matplotlib figures rendered to files.

Figures are written alongside the delimited output; nothing is shown
interactively (Agg backend).
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .cli import localization_doc, localize, spectrum_doc, write_json
from .determinant import KernelContext, delta_q_grid, phi_bound
from .problem import SegmentGraphProblem, derive_shape, potential_norms
from .unperturbed import eval_secular_f, unperturbed_spectrum

_RC = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "savefig.bbox": "tight",
}


def _style():
    return plt.rc_context(_RC)


def fig_secular(problem: SegmentGraphProblem, table, path: Path) -> None:
    shape = derive_shape(problem)
    w_max = max(e.w for e in table.positive) + math.pi
    w = np.linspace(0.0, w_max, 2000)
    with _style():
        fig, ax = plt.subplots()
        ax.plot(w, eval_secular_f(shape, w), label="f(w)")
        ax.axhline(0.0, color="k", lw=0.6)
        roots = [e.w for e in table.positive]
        ax.plot(roots, np.zeros(len(roots)), "o", ms=4, color="C3", label="roots")
        ax.set_xlabel("w")
        ax.set_ylabel("f(w)")
        ax.set_title("secular function and bracketed roots")
        ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)


def fig_determinant(problem: SegmentGraphProblem, table, report, path: Path) -> None:
    norms = potential_norms(problem)
    ctx = KernelContext(grid_n=257)
    lam_max = max(e.lam for e in table.positive) * 1.15
    lams = np.linspace(0.05, lam_max, 400)
    d0c, phic = delta_q_grid(problem, lams, ctx, norms)
    d0 = d0c.real
    dq = (d0c + phic).real
    with _style():
        fig, ax = plt.subplots()
        ax.plot(lams, d0, label="unperturbed", color="C0", alpha=0.8)
        ax.plot(lams, dq, label="perturbed", color="C1", ls="--")
        for row in report.rows:
            ax.axvspan(row.lambda0 - row.scan_radius, row.lambda0 + row.scan_radius,
                       color="C2", alpha=0.15)
            if math.isfinite(row.lambda_q):
                ax.plot([row.lambda_q], [0.0], "x", color="C3", ms=6)
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_xlabel("lambda")
        ax.set_ylabel("characteristic function")
        ax.set_title("characteristic functions with localization intervals")
        ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)


def fig_radii(problem: SegmentGraphProblem, report, path: Path) -> None:
    rows = [r for r in report.rows if math.isfinite(r.lambda_q)]
    if not rows:
        return
    shape = derive_shape(problem)
    with _style():
        fig, ax = plt.subplots()
        s = [r.s for r in rows]
        shift = [abs(r.lambda_q - r.lambda0) for r in rows]
        ax.semilogy(s, shift, "o-", label="|lambda_q - lambda_0|")
        if rows[0].rho > 0.0:
            ax.axhline(rows[0].rho, color="C3", ls="--", label="certified radius rho")
        if shape.R > 0.0:
            ax.axhline(shape.R, color="C2", ls=":", label="outer radius R")
        ax.set_xlabel("root index s")
        ax.set_ylabel("shift")
        ax.set_title("measured root shifts vs certified radii")
        ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)


def fig_phi_bound(problem: SegmentGraphProblem, table, path: Path) -> None:
    norms = potential_norms(problem)
    ctx = KernelContext(grid_n=257)
    lam_max = max(e.lam for e in table.positive) * 1.15
    lams = np.linspace(0.05, lam_max, 200)
    _, phic = delta_q_grid(problem, lams, ctx, norms)
    phi_abs = np.abs(phic)
    bound = np.array([phi_bound(problem, float(x), norms) for x in lams])
    with _style():
        fig, ax = plt.subplots()
        ax.semilogy(lams, np.maximum(phi_abs, 1e-300), label="|Phi|")
        ax.semilogy(lams, np.maximum(bound, 1e-300), ls="--", label="norm bound")
        ax.set_xlabel("lambda")
        ax.set_ylabel("magnitude")
        ax.set_title("correction term against its norm bound")
        ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)


def run_report(problem: SegmentGraphProblem, out_dir: str, count: int = 10,
               constants: str = "corrected", verify_m: int | None = None) -> list[Path]:
    """Run the pipeline and write report.json, roots.csv, and figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = unperturbed_spectrum(problem, n_max=count)
    report = localize(problem, count=count, constants=constants, verify_m=verify_m)
    small = report.smallness

    doc = {
        "problem": {"a": problem.a, "b": problem.b, "p": problem.p},
        "constants": constants,
        "spectrum": spectrum_doc(table)["spectrum"],
        "localization": localization_doc(report),
        "smallness": asdict(small),
    }
    paths = [out / "report.json"]
    write_json(doc, str(paths[0]))

    csv_path = out / "roots.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "lambda0", "rho", "scan_radius", "lambda_q",
                         "residual", "unique", "certified", "oracle_dev"])
        for r in report.rows:
            writer.writerow([r.s, repr(r.lambda0), repr(r.rho), repr(r.scan_radius),
                             repr(r.lambda_q), repr(r.residual), r.unique,
                             r.certified,
                             "" if r.oracle_dev is None else repr(r.oracle_dev)])
    paths.append(csv_path)

    figures = [
        (out / "fig_secular.png", lambda p: fig_secular(problem, table, p)),
        (out / "fig_determinant.png", lambda p: fig_determinant(problem, table, report, p)),
        (out / "fig_radii.png", lambda p: fig_radii(problem, report, p)),
        (out / "fig_phi_bound.png", lambda p: fig_phi_bound(problem, table, p)),
    ]
    for path, fn in figures:
        fn(path)
        if path.exists():
            paths.append(path)
    return paths
