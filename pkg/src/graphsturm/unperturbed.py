"""Zero-potential characteristic function, secular roots, and eigenfunctions.

With q1 = q2 = 0 the characteristic function of the coupled problem is

    D0(lam) = lam p^2 cos(lam a) sin(lam b) + lam cos(lam b) sin(lam a)
            = lam (p^2 + 1)/2 * (sin(lam c) - k sin(q lam c)),   c = a + b.

The rescaled secular function f(w) = sin(w) - k sin(q w), w = lam c, is odd
and has only simple positive zeros w_1 < w_2 < ...; lam = 0 is a double zero
of D0.  Note the factorization constant is (p^2 + 1)/2, not (p^2 + 1): both
are computed here and the half form is verified against the direct expansion
on every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ProblemError, SearchError
from .problem import DerivedShape, SegmentGraphProblem, derive_shape

DEFAULT_ROOT_TOL = 1e-12
_SCAN_STEP_W = math.pi / 8.0


def eval_secular_f(shape: DerivedShape, w):
    """f(w) = sin(w) - k sin(q w); accepts scalars or arrays."""
    if np.ndim(w) == 0:
        return math.sin(w) - shape.k * math.sin(shape.q * w)
    w = np.asarray(w, dtype=float)
    return np.sin(w) - shape.k * np.sin(shape.q * w)


def secular_fprime(shape: DerivedShape, w):
    """f'(w) = cos(w) - k q cos(q w)."""
    if np.ndim(w) == 0:
        return math.cos(w) - shape.k * shape.q * math.cos(shape.q * w)
    w = np.asarray(w, dtype=float)
    return np.cos(w) - shape.k * shape.q * np.cos(shape.q * w)


def delta0_factorized(shape: DerivedShape, p: float, lam, constants: str = "corrected"):
    """Factorized D0: lam * C(p) * (sin(lam c) - k sin(q lam c)).

    constants="corrected" uses C = (p^2+1)/2 (the identity that actually
    holds); constants="paper" uses C = p^2+1 for side-by-side comparison.
    """
    if constants not in ("corrected", "paper"):
        raise ProblemError(f"constants must be 'corrected' or 'paper', got {constants!r}")
    lead = (p * p + 1.0) * (0.5 if constants == "corrected" else 1.0)
    lam = np.asarray(lam) if np.ndim(lam) else lam
    return lam * lead * (np.sin(lam * shape.c) - shape.k * np.sin(shape.q * lam * shape.c))


def eval_delta0(shape: DerivedShape, p: float, lam):
    """D0(lam) by direct expansion; cross-checked against the half-factorized form."""
    a, b = shape.a, shape.b
    lam_arr = np.asarray(lam)
    direct = lam_arr * (p * p * np.cos(lam_arr * a) * np.sin(lam_arr * b)
                        + np.cos(lam_arr * b) * np.sin(lam_arr * a))
    fact = delta0_factorized(shape, p, lam, "corrected")
    scale = 1.0 + np.abs(lam_arr) * (p * p + 1.0) + np.abs(direct) + np.abs(fact)
    if np.any(np.abs(direct - fact) > 1e-12 * scale):
        raise AssertionError("direct and factorized forms of D0 disagree")
    if np.ndim(lam) == 0:
        return complex(direct) if np.iscomplexobj(direct) else float(direct)
    return direct


def simplicity_margin(shape: DerivedShape, w: float) -> float:
    """Slack of the simple-root criterion at a secular root.

    A repeated root would force sin^2(q w) + q^2 cos^2(q w) = 1/k^2; since the
    left side is <= 1 and 1/k^2 > 1 for k != 0, the margin
    1/k^2 - (sin^2(q w) + q^2 cos^2(q w)) is strictly positive at every root.
    For k = 0 the roots of sin are simple and the margin is +inf.
    """
    if shape.k == 0.0:
        return math.inf
    s, c = math.sin(shape.q * w), math.cos(shape.q * w)
    return 1.0 / (shape.k * shape.k) - (s * s + shape.q * shape.q * c * c)


@dataclass(frozen=True)
class SpectrumEntry:
    s: int
    w: float
    lam: float
    multiplicity: int
    simplicity_margin: float


@dataclass(frozen=True)
class SpectrumTable:
    """lam = 0 (double) plus the first n_max positive secular roots.

    Negative roots follow by oddness (lam_{-s} = -lam_s) and are not stored.
    w1_below_pi only reports whether the first root also sits under pi; the
    provable statement used downstream is w1 > pi/2.
    """

    entries: tuple[SpectrumEntry, ...]
    n_max: int
    root_tol: float
    w1_below_pi: bool

    @property
    def positive(self) -> tuple[SpectrumEntry, ...]:
        return self.entries[1:]

    def entry(self, s: int) -> SpectrumEntry:
        for e in self.entries:
            if e.s == s:
                return e
        raise IndexError(f"no spectrum entry with index s={s}")

    def lambdas(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])


def _bracket_roots(shape: DerivedShape, n_max: int) -> list[tuple[float, float]]:
    """Scan f on R+ with step pi/8 and collect the first n_max sign brackets."""
    w_cap = 4.0 * (n_max + 16) * math.pi
    n_steps = int(math.ceil(w_cap / _SCAN_STEP_W))
    grid = np.arange(n_steps + 1) * _SCAN_STEP_W
    vals = eval_secular_f(shape, grid)
    brackets: list[tuple[float, float]] = []
    for i in range(1, len(grid) - 1):
        if len(brackets) >= n_max:
            break
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            brackets.append((grid[i], grid[i]))
        elif v0 * v1 < 0.0:
            brackets.append((grid[i], grid[i + 1]))
    if len(brackets) < n_max:
        last = brackets[-1] if brackets else (0.0, 0.0)
        raise SearchError(
            f"found only {len(brackets)} of {n_max} secular roots scanning w <= {w_cap:.3f}",
            last_interval=last)
    return brackets[:n_max]


def _refine_roots(shape: DerivedShape, brackets: list[tuple[float, float]],
                  root_tol: float) -> np.ndarray:
    lo = np.array([b[0] for b in brackets])
    hi = np.array([b[1] for b in brackets])
    exact = lo == hi
    flo = eval_secular_f(shape, lo)
    # bisection to interval width 1e-13 (vectorized over all brackets)
    width = hi - lo
    for _ in range(60):
        if np.all(width <= 1e-13):
            break
        mid = 0.5 * (lo + hi)
        fmid = eval_secular_f(shape, mid)
        take_lo = (flo * fmid <= 0.0) & ~exact
        hi = np.where(take_lo, mid, hi)
        lo = np.where(take_lo | exact, lo, mid)
        flo = np.where(take_lo | exact, flo, fmid)
        width = hi - lo
    w = 0.5 * (lo + hi)
    w = np.where(exact, lo, w)
    # Newton polish; f' is bounded away from 0 at simple roots
    for _ in range(3):
        f = eval_secular_f(shape, w)
        if np.all(np.abs(f) < root_tol):
            break
        fp = secular_fprime(shape, w)
        step = np.where(fp != 0.0, f / np.where(fp == 0.0, 1.0, fp), 0.0)
        w = w - step
    f = eval_secular_f(shape, w)
    bad = np.abs(f) >= root_tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise SearchError(
            f"root refinement stalled at w={w[i]!r}, |f|={abs(f[i]):.3e} >= {root_tol}",
            last_interval=(float(lo[i]), float(hi[i])))
    return w


def unperturbed_spectrum(problem: SegmentGraphProblem, n_max: int,
                         root_tol: float = DEFAULT_ROOT_TOL) -> SpectrumTable:
    """First n_max positive secular roots plus the double root at lam = 0."""
    if n_max < 1:
        raise ProblemError(f"n_max must be >= 1, got {n_max}")
    if not (0.0 < root_tol <= 1e-6):
        raise ProblemError(f"root_tol must lie in (0, 1e-6], got {root_tol}")
    shape = derive_shape(problem)
    if shape.k == 0.0:
        # |p| = 1: f(w) = sin(w), roots are exactly pi*n
        w = np.array([math.pi * n for n in range(1, n_max + 1)])
    else:
        w = _refine_roots(shape, _bracket_roots(shape, n_max), root_tol)
    if np.any(np.diff(w) <= 0.0):
        raise SearchError("secular roots are not strictly ordered")
    if w[0] <= math.pi / 2.0:
        raise SearchError(f"first root w1={w[0]!r} violates the lower bound pi/2")
    entries = [SpectrumEntry(s=0, w=0.0, lam=0.0, multiplicity=2,
                             simplicity_margin=math.inf)]
    for s, ws in enumerate(w, start=1):
        margin = simplicity_margin(shape, float(ws))
        if not margin > 0.0:
            raise SearchError(f"root w_{s}={ws!r} has nonpositive simplicity margin")
        entries.append(SpectrumEntry(s=s, w=float(ws), lam=float(ws / shape.c),
                                     multiplicity=1, simplicity_margin=margin))
    return SpectrumTable(entries=tuple(entries), n_max=n_max, root_tol=root_tol,
                         w1_below_pi=bool(w[0] < math.pi))


@dataclass(frozen=True)
class Eigenfunction0:
    """Sampled eigenfunction of the zero-potential operator at root index s.

    component1(x) = A cos(lam b) cos(lam (x + a)) on [-a, 0],
    component2(x) = -A p cos(lam a) cos(lam (x - b)) on [0, b].
    Outer Neumann conditions hold exactly by construction; junction residuals
    are bounded by the root tolerance.
    """

    s: int
    lam: float
    amplitude: float
    x1: np.ndarray
    y1: np.ndarray
    y1p: np.ndarray
    x2: np.ndarray
    y2: np.ndarray
    y2p: np.ndarray
    junction_value_residual: float
    junction_derivative_residual: float
    neumann_left_residual: float
    neumann_right_residual: float


def eigenfunction0(problem: SegmentGraphProblem, table: SpectrumTable, s: int,
                   x_grid, amplitude: float = 1.0,
                   normalize: bool = False) -> Eigenfunction0:
    """Sample the unperturbed eigenfunction for table entry s on x_grid.

    x_grid spans [-a, b]; points <= 0 sample component 1, points >= 0 sample
    component 2 (x = 0 lands in both). With normalize=True the amplitude is
    divided by the discrete L2 norm on the grid.
    """
    entry = table.entry(s)
    lam = entry.lam
    a, b, p = problem.a, problem.b, problem.p
    grid = np.asarray(x_grid, dtype=float)
    x1 = grid[grid <= 0.0]
    x2 = grid[grid >= 0.0]

    def comp1(x):
        return math.cos(lam * b) * np.cos(lam * (x + a))

    def comp1p(x):
        return -lam * math.cos(lam * b) * np.sin(lam * (x + a))

    def comp2(x):
        return -p * math.cos(lam * a) * np.cos(lam * (x - b))

    def comp2p(x):
        return p * lam * math.cos(lam * a) * np.sin(lam * (x - b))

    amp = float(amplitude)
    if normalize:
        norm2 = 0.0
        if x1.size > 1:
            norm2 += np.trapezoid(comp1(x1) ** 2, x1)
        if x2.size > 1:
            norm2 += np.trapezoid(comp2(x2) ** 2, x2)
        if norm2 > 0.0:
            amp /= math.sqrt(norm2)

    jv = abs(comp2(np.array([0.0]))[0] + p * comp1(np.array([0.0]))[0]) * abs(amp)
    jd = abs(comp1p(np.array([0.0]))[0] + p * comp2p(np.array([0.0]))[0]) * abs(amp)
    nl = abs(comp1p(np.array([-a]))[0]) * abs(amp)
    nr = abs(comp2p(np.array([b]))[0]) * abs(amp)
    return Eigenfunction0(
        s=s, lam=lam, amplitude=amp,
        x1=x1, y1=amp * comp1(x1), y1p=amp * comp1p(x1),
        x2=x2, y2=amp * comp2(x2), y2p=amp * comp2p(x2),
        junction_value_residual=jv, junction_derivative_residual=jd,
        neumann_left_residual=nl, neumann_right_residual=nr,
    )
