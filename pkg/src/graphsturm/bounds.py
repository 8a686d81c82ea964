"""Localization radii, smallness condition, and contour zero counting.

All enclosure constants exist in two sets.  The "paper" set uses the leading
factor (1 + p^2) in the factorization of D0; the "corrected" set uses
(1 + p^2)/2, which is the identity the direct expansion actually satisfies.
Certificates are emitted with the corrected (weaker-radius, sound) set; the
paper set is computed alongside for comparison.  With c = a + b,

    lhs            = 2 delta1 + 4 delta2 c / (pi - 2 r)
    rhs_paper      = (1 + p^2) q^2 r^2 / (1 + |k|)
    rhs_corrected  = rhs_paper / 2
    rho            = lhs / (C c |q| r),   C = (1+p^2)/2 corrected, (1+p^2) paper
    R              = |q| r / (c (1 + |k|))

If lhs < rhs_corrected then rho < R and the interval |lam - lam_s(0)| < rho
traps exactly one zero of the perturbed characteristic function, while the
annulus rho < |lam - lam_s(0)| < R is zero free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .determinant import KernelContext, delta_q_grid
from .errors import (CertificateUnavailableError, ContourError, DomainError,
                     ProblemError)
from .problem import (PotentialNorms, SegmentGraphProblem, active_deltas,
                      derive_shape, potential_norms)
from .unperturbed import SpectrumTable, unperturbed_spectrum

_CONSTANT_SETS = ("corrected", "paper")


def _leading(p: float, constants: str) -> float:
    if constants not in _CONSTANT_SETS:
        raise ProblemError(f"constants must be one of {_CONSTANT_SETS}, got {constants!r}")
    return (1.0 + p * p) * (0.5 if constants == "corrected" else 1.0)


@dataclass(frozen=True)
class SmallnessReport:
    lhs: float
    rhs_paper: float
    rhs_corrected: float
    holds: bool
    margin: float
    constants: str
    degenerate: bool


def smallness_condition(problem: SegmentGraphProblem, constants: str = "corrected",
                        norms: PotentialNorms | None = None) -> SmallnessReport:
    """Check the explicit smallness inequality for the active constant set."""
    shape = derive_shape(problem)
    d1, d2 = active_deltas(problem, norms)
    lhs = 2.0 * d1 + 4.0 * d2 * shape.c / (math.pi - 2.0 * shape.r)
    rhs_paper = (1.0 + problem.p ** 2) * shape.q ** 2 * shape.r ** 2 / (1.0 + abs(shape.k))
    rhs_corrected = 0.5 * rhs_paper
    rhs_active = rhs_corrected if constants == "corrected" else rhs_paper
    if constants not in _CONSTANT_SETS:
        raise ProblemError(f"constants must be one of {_CONSTANT_SETS}, got {constants!r}")
    holds = (not shape.degenerate) and (lhs < rhs_active)
    return SmallnessReport(lhs=lhs, rhs_paper=rhs_paper, rhs_corrected=rhs_corrected,
                           holds=holds, margin=rhs_active - lhs, constants=constants,
                           degenerate=shape.degenerate)


@dataclass(frozen=True)
class LocalizationRadius:
    s: int
    rho: float
    R: float
    valid: bool
    constants: str


def localization_radius(problem: SegmentGraphProblem, s: int,
                        constants: str = "corrected",
                        norms: PotentialNorms | None = None) -> LocalizationRadius:
    """Enclosure radius around lam_s(0); uniform in s by the Q' lower bound."""
    if s < 1:
        raise ProblemError(f"localization radius is defined for s >= 1, got s={s}")
    shape = derive_shape(problem)
    if shape.degenerate:
        raise CertificateUnavailableError(
            "degenerate geometry (a = b or |p| = 1): enclosure radius is vacuous")
    small = smallness_condition(problem, constants=constants, norms=norms)
    denom = _leading(problem.p, constants) * shape.c * abs(shape.q) * shape.r
    rho = small.lhs / denom
    return LocalizationRadius(s=s, rho=rho, R=shape.R,
                              valid=bool(small.holds and rho < shape.R),
                              constants=constants)


def delta0_lower_bound(problem: SegmentGraphProblem, lam: float, s: int,
                       table: SpectrumTable | None = None,
                       constants: str = "corrected") -> float:
    """Lower bound on |D0(lam)| for real lam near lam_s(0).

    Valid inside |lam - lam_s(0)| < R; outside that neighborhood the bound
    statement does not apply and a DomainError is raised.
    """
    if table is None:
        table = unperturbed_spectrum(problem, n_max=s)
    lam_s = table.entry(s).lam
    shape = derive_shape(problem)
    dist = abs(lam - lam_s)
    if dist >= shape.R:
        raise DomainError(
            f"lam={lam} is outside the R-neighborhood of lam_{s}={lam_s} (R={shape.R})")
    return 0.5 * dist * abs(lam) * _leading(problem.p, constants) \
        * shape.c * abs(shape.q) * shape.r


def qprime_lower_check(problem: SegmentGraphProblem, s: int,
                       table: SpectrumTable | None = None) -> float:
    """Margin |Q'(lam_s)| - (a+b)|q| r; positive confirms the slope bound."""
    if s < 1:
        raise ProblemError(f"slope check is defined for s >= 1, got s={s}")
    if table is None:
        table = unperturbed_spectrum(problem, n_max=s)
    shape = derive_shape(problem)
    lam_s = table.entry(s).lam
    qprime = shape.c * (math.cos(lam_s * shape.c)
                        - shape.k * shape.q * math.cos(shape.q * lam_s * shape.c))
    return abs(qprime) - shape.c * abs(shape.q) * shape.r


def complex_lower_bound(problem: SegmentGraphProblem, lam: complex) -> float:
    """Reported (not asserted) lower bound for |D0| at complex lam.

    Evaluates the displayed square-root bound with the corrected leading
    constant; returns 0 when the bracket is nonpositive (vacuous).
    """
    shape = derive_shape(problem)
    alpha, beta = complex(lam).real, complex(lam).imag
    c, k, q = shape.c, shape.k, shape.q
    ch_qc = math.cosh(beta * q * c)
    bracket = (1.0
               - abs(math.sin(alpha * c) * math.sin(alpha * q * c))
               - (math.cos(alpha * c) ** 2 + k * k * math.cos(alpha * q * c) ** 2)
               * (1.0 + math.cosh(beta * c) ** 2) / (ch_qc ** 2 * (1.0 + k * k)))
    if bracket <= 0.0:
        return 0.0
    lead = abs(complex(lam)) * _leading(problem.p, "corrected")
    return lead * ch_qc * math.sqrt(1.0 + k * k) * math.sqrt(bracket)


# ---------------------------------------------------------------------------
# Contour counting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourCount:
    l: int
    half_width: float
    winding0: int
    windingq: int
    refinement_nodes: int
    min_delta0_minus_phi: float


def _square_contour(half: float, nodes_per_side: int) -> np.ndarray:
    corners = np.array([half + 1j * half, -half + 1j * half,
                        -half - 1j * half, half - 1j * half])
    pts = []
    for m in range(4):
        z0, z1 = corners[m], corners[(m + 1) % 4]
        seg = z0 + (z1 - z0) * (np.arange(nodes_per_side) / nodes_per_side)
        pts.append(seg)
    return np.concatenate(pts)


def _winding(values: np.ndarray) -> float:
    closed = np.concatenate([values, values[:1]])
    ratios = closed[1:] / closed[:-1]
    return float(np.sum(np.angle(ratios)) / (2.0 * math.pi))


def rouche_count(problem: SegmentGraphProblem, l: int,
                 ctx: KernelContext | None = None,
                 nodes_per_side: int = 1024,
                 max_refinements: int = 3,
                 norms: PotentialNorms | None = None) -> ContourCount:
    """Integer zero counts of D0 and Dq inside the square contour of index l.

    The contour has half-width pi l / (a + b).  Real secular roots that fall
    on (or numerically too close to) the vertical sides make the count
    ill-posed; such l are rejected with a suggested replacement.  Windings
    are computed by argument accumulation and refined by node doubling until
    both are integers within 1e-3.
    """
    if l < 1:
        raise ProblemError(f"contour index must be >= 1, got l={l}")
    shape = derive_shape(problem)
    if ctx is None:
        ctx = KernelContext(grid_n=129)
    if norms is None:
        norms = potential_norms(problem)
    half = math.pi * l / shape.c

    table = unperturbed_spectrum(problem, n_max=max(2 * l + 8, 8))
    lams = np.array([e.lam for e in table.positive])
    gap = 4.0 * (2.0 * half) / nodes_per_side + shape.R
    dist = np.min(np.abs(lams - half)) if lams.size else math.inf
    if dist < gap:
        suggestion = _suggest_l(problem, l, nodes_per_side)
        raise ContourError(
            f"contour l={l} passes within {dist:.3e} of a real zero of D0 "
            f"(need > {gap:.3e}); try l={suggestion}", suggested_l=suggestion)

    n = nodes_per_side
    for _ in range(max_refinements + 1):
        z = _square_contour(half, n)
        d0, phi = delta_q_grid(problem, z, ctx, norms)
        dq = d0 + phi
        w0 = _winding(d0)
        wq = _winding(dq)
        ok0 = abs(w0 - round(w0)) < 1e-3
        okq = abs(wq - round(wq)) < 1e-3
        if ok0 and okq:
            min_margin = float(np.min(np.abs(d0) - np.abs(phi)))
            return ContourCount(l=l, half_width=half, winding0=int(round(w0)),
                                windingq=int(round(wq)), refinement_nodes=n,
                                min_delta0_minus_phi=min_margin)
        n *= 2
    raise ContourError(
        f"winding numbers failed to stabilize on contour l={l} "
        f"(w0={w0:.6f}, wq={wq:.6f} at {n // 2} nodes/side)", suggested_l=None)


def _suggest_l(problem: SegmentGraphProblem, l: int, nodes_per_side: int) -> int | None:
    shape = derive_shape(problem)
    table = unperturbed_spectrum(problem, n_max=max(2 * l + 12, 12))
    lams = np.array([e.lam for e in table.positive])
    for cand in (l + 1, l - 1, l + 2, l - 2, l + 3):
        if cand < 1:
            continue
        half = math.pi * cand / shape.c
        gap = 4.0 * (2.0 * half) / nodes_per_side + shape.R
        if np.min(np.abs(lams - half)) > gap:
            return cand
    return None
