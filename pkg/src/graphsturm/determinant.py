"""Perturbed characteristic function via the boundary-system determinant.

With the kernel slices at the junction,

    I1  = int_{-a}^0 N1(0,t)    q1(t) cos lam(t+a) dt
    I1p = int_{-a}^0 dxN1(0,t)  q1(t) cos lam(t+a) dt
    I2  = int_0^b    N2(0,t)    q2(t) cos lam(b-t) dt
    I2p = int_0^b    dxN2(0,t)  q2(t) cos lam(b-t) dt

the characteristic function is the 2x2 determinant

    Dq(lam) = | p (cos lam a + I1)        cos lam b - I2          |
              | -lam sin lam a + I1p      p (lam sin lam b - I2p) |

which expands exactly into D0(lam) + Phi(lam) with

    Phi = p^2 { lam sin(lam b) I1 - cos(lam a) I2p - I1 I2p }
          - lam sin(lam a) I2 - cos(lam b) I1p + I2 I1p.

A classical fixed-step RK4 shooting determinant provides the independent
oracle for the same entire function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ProblemError, SeriesError
from .problem import (PotentialNorms, SegmentGraphProblem, active_deltas,
                      derive_shape, eval_potential, potential_norms)
from .transform import MAX_TERMS, _SINC_SWITCH, _tail_sum, series_tail_bound
from .unperturbed import eval_delta0

DEFAULT_DET_GRID_N = 513
DEFAULT_RK_STEPS = 4096


@dataclass(frozen=True)
class KernelContext:
    """Settings for the kernel slices behind the series determinant."""

    grid_n: int = DEFAULT_DET_GRID_N
    series_tol: float = 1e-10
    max_terms: int = MAX_TERMS

    def __post_init__(self):
        if self.grid_n < 17 or self.grid_n % 2 == 0:
            raise ProblemError(f"grid_n must be odd and >= 17, got {self.grid_n}")
        if not (0.0 < self.series_tol <= 1e-6):
            raise ProblemError(f"series_tol must lie in (0, 1e-6], got {self.series_tol}")


@dataclass(frozen=True)
class BoundarySlices:
    """N_k(0, t) and its x-derivative on the slice grid of one segment."""

    segment: str
    t: np.ndarray
    n0: np.ndarray
    np0: np.ndarray
    n_terms: int


def _junction_slices_batch(problem: SegmentGraphProblem, segment: str,
                           lams: np.ndarray, ctx: KernelContext,
                           norms: PotentialNorms
                           ) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """K_n(0, t) and dxK_n(0, t) summed over n, batched over spectral values.

    Both recurrences compose on the inner side (K_{n+1} = K_n o K1), so only
    vectors are iterated per lam; the derivative seeds with the cosine
    kernel.  Returns (t, N0[b, j], Np0[b, j], n_terms).
    """
    lams = np.asarray(lams, dtype=complex)
    lo, hi = problem.segment_bounds(segment)
    length = hi - lo
    n = ctx.grid_n
    t = np.linspace(lo, hi, n)
    h = length / (n - 1)
    q = np.asarray(eval_potential(problem, segment, t), dtype=float)
    sigma = norms.sigma1 if segment == "left" else norms.sigma2
    beta = float(np.max(np.abs(lams.imag))) if lams.size else 0.0

    if sigma == 0.0:
        zero = np.zeros((lams.size, n), dtype=complex)
        return t, zero, zero.copy(), 1

    # the grid is uniform, so the kernel matrix is Toeplitz: only the n
    # distinct sinc/cos values per lam are evaluated, the matrix is a gather
    sv = _sinc_kernel_batch(lams, h * np.arange(n))        # sin(lam m h)/lam
    cv = np.cos(lams[:, None] * (h * np.arange(n))[None, :])
    offsets = np.arange(n)[:, None] - np.arange(n)[None, :]
    if segment == "left":
        # kernel K1(t_s, t_j), nonzero for s >= j; the outer (s = 0) endpoint
        # of the composition integral is the last node
        mask = offsets >= 0
        idx = np.where(mask, offsets, 0)
        v = sv[:, ::-1].copy()                             # K1(0, t_j), |t_j| = (n-1-j)h
        w = cv[:, ::-1].copy()                             # dxK1(0, t_j) = cos(lam t_j)
        edge_row = n - 1
        sign = 1.0
    else:
        mask = offsets <= 0
        idx = np.where(mask, -offsets, 0)
        v = sv.copy()                                      # K1(0, t_j) = sinc(lam t_j)
        w = -cv.copy()
        edge_row = 0
        sign = -1.0

    k1 = np.where(mask[None, :, :], sv[:, idx], 0.0)
    update = k1 * (q[None, :, None] * h)   # U[b, s, j] = K1_b(t_s, t_j) q(t_s) h
    # the diagonal endpoint vanishes (kernel zero); only the junction-side
    # trapezoid endpoint needs halving, and only the derivative slice is
    # nonzero there
    update[:, edge_row, :] *= 0.5

    n0 = v.copy()
    np0 = w.copy()
    n_terms = 1
    tail = series_tail_bound(length, sigma, beta, n_terms)
    tail_w = _deriv_tail_bound(length, sigma, beta, n_terms)
    while max(tail, tail_w) >= ctx.series_tol:
        if n_terms >= ctx.max_terms:
            raise SeriesError(
                f"junction slice series did not converge in {ctx.max_terms} terms")
        v = np.einsum("bs,bsj->bj", v, update)
        w = np.einsum("bs,bsj->bj", w, update)
        n0 += v
        np0 += w
        n_terms += 1
        tail = series_tail_bound(length, sigma, beta, n_terms)
        tail_w = _deriv_tail_bound(length, sigma, beta, n_terms)
    return t, sign * n0, sign * np0, n_terms


def _sinc_kernel_batch(lams: np.ndarray, d: np.ndarray) -> np.ndarray:
    """sin(lam d)/lam broadcast over a batch of lam values."""
    z = lams.reshape(lams.shape + (1,) * d.ndim) * d[None, ...]
    z2 = z * z
    series = d[None, ...] * (1.0 - z2 / 6.0 * (1.0 - z2 / 20.0))
    small = np.abs(z) < _SINC_SWITCH
    lam_safe = np.where(lams == 0, 1.0, lams).reshape(lams.shape + (1,) * d.ndim)
    full = np.sin(np.where(small, 0.0, z)) / lam_safe
    return np.where(small, series, full).astype(complex)


def _junction_slices(problem: SegmentGraphProblem, segment: str, lam: complex,
                     ctx: KernelContext, norms: PotentialNorms) -> BoundarySlices:
    t, n0, np0, n_terms = _junction_slices_batch(
        problem, segment, np.array([complex(lam)]), ctx, norms)
    return BoundarySlices(segment=segment, t=t, n0=n0[0], np0=np0[0], n_terms=n_terms)


def _deriv_tail_bound(length: float, sigma: float, beta: float, n_done: int) -> float:
    """Tail majorant for the derivative slice: |dxK_n| <= ch(beta L)(L s)^{n-1}/(n-1)!."""
    return math.cosh(beta * length) * _tail_sum(length * sigma, n_done)


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


@dataclass(frozen=True)
class BoundaryIntegrals:
    i1: complex
    i1p: complex
    i2: complex
    i2p: complex


def _boundary_integrals_batch(problem: SegmentGraphProblem, lams: np.ndarray,
                              ctx: KernelContext, norms: PotentialNorms
                              ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    a, b = problem.a, problem.b
    t1, n1, n1p, _ = _junction_slices_batch(problem, "left", lams, ctx, norms)
    t2, n2, n2p, _ = _junction_slices_batch(problem, "right", lams, ctx, norms)

    q1 = np.asarray(eval_potential(problem, "left", t1), dtype=float)
    q2 = np.asarray(eval_potential(problem, "right", t2), dtype=float)
    w1 = _simpson_weights(t1.size, a / (t1.size - 1))
    w2 = _simpson_weights(t2.size, b / (t2.size - 1))
    cos1 = np.cos(lams[:, None] * (t1 + a)[None, :])
    cos2 = np.cos(lams[:, None] * (b - t2)[None, :])
    # n2/n2p already carry the minus-sign display convention for N2
    i1 = (n1 * q1[None, :] * cos1) @ w1
    i1p = (n1p * q1[None, :] * cos1) @ w1
    i2 = (n2 * q2[None, :] * cos2) @ w2
    i2p = (n2p * q2[None, :] * cos2) @ w2
    return i1, i1p, i2, i2p


def boundary_integrals(problem: SegmentGraphProblem, lam: complex,
                       ctx: KernelContext | None = None,
                       norms: PotentialNorms | None = None) -> BoundaryIntegrals:
    """The four junction integrals entering the boundary determinant."""
    if ctx is None:
        ctx = KernelContext()
    if norms is None:
        norms = potential_norms(problem)
    lams = np.array([complex(lam)])
    i1, i1p, i2, i2p = _boundary_integrals_batch(problem, lams, ctx, norms)
    return BoundaryIntegrals(i1=complex(i1[0]), i1p=complex(i1p[0]),
                             i2=complex(i2[0]), i2p=complex(i2p[0]))


def delta_q_grid(problem: SegmentGraphProblem, lams,
                 ctx: KernelContext | None = None,
                 norms: PotentialNorms | None = None,
                 chunk: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """(delta0, phi) over an array of spectral parameters; Dq = delta0 + phi.

    Chunked batching keeps the kernel tensors small while amortizing the
    trigonometric setup across many evaluation points.
    """
    if ctx is None:
        ctx = KernelContext()
    if norms is None:
        norms = potential_norms(problem)
    lams = np.asarray(lams, dtype=complex).ravel()
    a, b, p = problem.a, problem.b, problem.p
    shape = derive_shape(problem)
    delta0 = np.asarray(eval_delta0(shape, p, lams), dtype=complex)
    phi = np.empty_like(delta0)
    for start in range(0, lams.size, chunk):
        batch = lams[start:start + chunk]
        i1, i1p, i2, i2p = _boundary_integrals_batch(problem, batch, ctx, norms)
        sin_a, cos_a = np.sin(batch * a), np.cos(batch * a)
        sin_b, cos_b = np.sin(batch * b), np.cos(batch * b)
        phi[start:start + chunk] = (
            p * p * (batch * sin_b * i1 - cos_a * i2p - i1 * i2p)
            - batch * sin_a * i2 - cos_b * i1p + i2 * i1p)
    return delta0, phi


def _phi_from_integrals(problem: SegmentGraphProblem, lam: complex,
                        ints: BoundaryIntegrals) -> complex:
    a, b, p = problem.a, problem.b, problem.p
    lam = complex(lam)
    sin_a, cos_a = np.sin(lam * a), np.cos(lam * a)
    sin_b, cos_b = np.sin(lam * b), np.cos(lam * b)
    return complex(
        p * p * (lam * sin_b * ints.i1 - cos_a * ints.i2p - ints.i1 * ints.i2p)
        - lam * sin_a * ints.i2 - cos_b * ints.i1p + ints.i2 * ints.i1p)


def eval_phi(problem: SegmentGraphProblem, lam: complex,
             ctx: KernelContext | None = None,
             norms: PotentialNorms | None = None) -> complex:
    """Correction term Phi(lam) = Dq(lam) - D0(lam)."""
    return _phi_from_integrals(problem, lam,
                               boundary_integrals(problem, lam, ctx, norms))


@dataclass(frozen=True)
class DeterminantEval:
    lam: complex
    delta0: complex
    phi: complex
    delta_q: complex
    phi_bound: float
    method: str


def eval_delta_q(problem: SegmentGraphProblem, lam: complex,
                 ctx: KernelContext | None = None,
                 norms: PotentialNorms | None = None) -> DeterminantEval:
    """Assemble the 2x2 boundary determinant and cross-check D0 + Phi."""
    if norms is None:
        norms = potential_norms(problem)
    lam = complex(lam)
    a, b, p = problem.a, problem.b, problem.p
    ints = boundary_integrals(problem, lam, ctx, norms)
    shape = derive_shape(problem)
    delta0 = complex(eval_delta0(shape, p, lam))
    phi = _phi_from_integrals(problem, lam, ints)

    e11 = p * (np.cos(lam * a) + ints.i1)
    e12 = np.cos(lam * b) - ints.i2
    e21 = -lam * np.sin(lam * a) + ints.i1p
    e22 = p * (lam * np.sin(lam * b) - ints.i2p)
    det = complex(e11 * e22 - e12 * e21)
    if abs(det - (delta0 + phi)) > 1e-10 * (1.0 + abs(delta0)):
        raise AssertionError(
            f"determinant expansion identity failed at lam={lam}: "
            f"det={det}, delta0+phi={delta0 + phi}")
    return DeterminantEval(lam=lam, delta0=delta0, phi=phi, delta_q=delta0 + phi,
                           phi_bound=phi_bound(problem, lam, norms), method="series")


def phi_bound(problem: SegmentGraphProblem, lam: complex,
              norms: PotentialNorms | None = None) -> float:
    """Majorant cosh(beta a) cosh(beta b) (delta1 |lam| + delta2).

    Safe (max(1, p^2)-scaled) constants are substituted whenever |p| > 1.
    """
    d1, d2 = active_deltas(problem, norms)
    beta = complex(lam).imag
    return math.cosh(beta * problem.a) * math.cosh(beta * problem.b) \
        * (d1 * abs(lam) + d2)


def shooting_delta_q(problem: SegmentGraphProblem, lam,
                     rk_steps: int = DEFAULT_RK_STEPS):
    """Independent oracle: RK4 shooting from both outer ends.

    Integrates -u'' + q u = lam^2 u with unit Neumann data at x = -a and
    x = b and returns det [[p u1(0), u2(0)], [u1'(0), p u2'(0)]]; this agrees
    with D0 exactly at q = 0 and with the series determinant in general.
    """
    if rk_steps < 64:
        raise ProblemError(f"rk_steps must be >= 64, got {rk_steps}")
    scalar = np.ndim(lam) == 0
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    mu = lam_arr * lam_arr
    p = problem.p

    u1, du1 = _rk4_halfline(problem, "left", mu, rk_steps)
    u2, du2 = _rk4_halfline(problem, "right", mu, rk_steps)
    det = p * p * u1 * du2 - u2 * du1
    return complex(det[0]) if scalar else det


def _rk4_halfline(problem: SegmentGraphProblem, segment: str, mu: np.ndarray,
                  rk_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Integrate u'' = (q - mu) u to the junction with u = 1, u' = 0 outside."""
    lo, hi = problem.segment_bounds(segment)
    if segment == "left":
        x0, x1 = lo, hi
    else:
        x0, x1 = hi, lo
    h = (x1 - x0) / rk_steps
    xs = x0 + h * np.arange(rk_steps + 1)
    xmid = xs[:-1] + 0.5 * h
    seg_lo, seg_hi = problem.segment_bounds(segment)
    q_nodes = np.asarray(eval_potential(problem, segment, np.clip(xs, seg_lo, seg_hi)),
                         dtype=float)
    q_mid = np.asarray(eval_potential(problem, segment, np.clip(xmid, seg_lo, seg_hi)),
                       dtype=float)

    u = np.ones_like(mu)
    v = np.zeros_like(mu)
    for i in range(rk_steps):
        qa, qm, qb = q_nodes[i], q_mid[i], q_nodes[i + 1]
        k1u = v
        k1v = (qa - mu) * u
        k2u = v + 0.5 * h * k1v
        k2v = (qm - mu) * (u + 0.5 * h * k1u)
        k3u = v + 0.5 * h * k2v
        k3v = (qm - mu) * (u + 0.5 * h * k2u)
        k4u = v + h * k3v
        k4v = (qb - mu) * (u + h * k3u)
        u = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return u, v
