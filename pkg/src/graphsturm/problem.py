"""Problem instances: geometry, coupling, potentials, and every derived constant.

A problem is the operator -y'' + q(x) y on the two segments [-a, 0] and [0, b],
outer Neumann ends, coupled at x = 0 through

    y2(0) + p * y1(0) = 0,        y1'(0) + p * y2'(0) = 0.

Everything downstream (secular roots, transformation kernels, localization
radii) is a function of (a, b, p, q1, q2) only, so this module is the single
source of truth for derived quantities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DomainError, ProblemError

DEFAULT_QUAD_NODES = 1025


# ---------------------------------------------------------------------------
# Potential profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    """Constant potential q(x) = value."""

    value: float

    def evaluate(self, x, lo: float, hi: float):
        x = np.asarray(x, dtype=float)
        return np.full_like(x, float(self.value))


@dataclass(frozen=True)
class Table:
    """Piecewise-linear potential through (nodes, values); nodes span the segment."""

    nodes: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        nodes = tuple(float(v) for v in self.nodes)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if len(nodes) < 2:
            raise ProblemError("table profile needs at least two nodes")
        if len(nodes) != len(values):
            raise ProblemError("table profile nodes and values differ in length")
        if any(n2 <= n1 for n1, n2 in zip(nodes, nodes[1:])):
            raise ProblemError("table profile nodes must be strictly ascending")

    def evaluate(self, x, lo: float, hi: float):
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.nodes, self.values)


@dataclass(frozen=True)
class CosineSeries:
    """Cosine series on the segment: sum_j coeffs[j] * cos(j*pi*(x - lo)/(hi - lo))."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(v) for v in self.coeffs))

    def evaluate(self, x, lo: float, hi: float):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        scale = math.pi / (hi - lo)
        for j, cj in enumerate(self.coeffs):
            if cj != 0.0:
                out += cj * np.cos(j * scale * (x - lo))
        return out


PotentialProfile = Union[Constant, Table, CosineSeries]


# ---------------------------------------------------------------------------
# Problem container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentGraphProblem:
    """Two segments [-a, 0], [0, b] with coupling constant p and potentials q1, q2."""

    a: float
    b: float
    p: float
    q1: PotentialProfile
    q2: PotentialProfile

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "p", float(self.p))
        if not (self.a > 0.0) or not math.isfinite(self.a):
            raise ProblemError(f"segment length a must be positive, got {self.a}")
        if not (self.b > 0.0) or not math.isfinite(self.b):
            raise ProblemError(f"segment length b must be positive, got {self.b}")
        if self.p == 0.0 or not math.isfinite(self.p):
            raise ProblemError(f"coupling constant p must be nonzero, got {self.p}")
        for name, prof in (("q1", self.q1), ("q2", self.q2)):
            if not isinstance(prof, (Constant, Table, CosineSeries)):
                raise ProblemError(f"{name} is not a supported potential profile")
        lo, hi = -self.a, 0.0
        if isinstance(self.q1, Table):
            _check_table_span(self.q1, lo, hi, "q1")
        if isinstance(self.q2, Table):
            _check_table_span(self.q2, 0.0, self.b, "q2")

    def segment_bounds(self, segment: str) -> tuple[float, float]:
        if segment == "left":
            return (-self.a, 0.0)
        if segment == "right":
            return (0.0, self.b)
        raise ProblemError(f"unknown segment {segment!r}, expected 'left' or 'right'")

    def potential(self, segment: str) -> PotentialProfile:
        self.segment_bounds(segment)  # validates the name
        return self.q1 if segment == "left" else self.q2


def _check_table_span(table: Table, lo: float, hi: float, name: str) -> None:
    tol = 1e-12 * (1.0 + abs(lo) + abs(hi))
    if table.nodes[0] > lo + tol or table.nodes[-1] < hi - tol:
        raise ProblemError(
            f"{name} table nodes [{table.nodes[0]}, {table.nodes[-1]}] do not span "
            f"the segment [{lo}, {hi}]")


def eval_potential(problem: SegmentGraphProblem, segment: str, x):
    """Evaluate the named segment's potential at x (scalar or array)."""
    lo, hi = problem.segment_bounds(segment)
    arr = np.asarray(x, dtype=float)
    tol = 1e-12 * (1.0 + abs(lo) + abs(hi))
    if np.any(arr < lo - tol) or np.any(arr > hi + tol):
        raise DomainError(f"x={x} outside segment {segment} = [{lo}, {hi}]")
    out = problem.potential(segment).evaluate(np.clip(arr, lo, hi), lo, hi)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# JSON ingestion
# ---------------------------------------------------------------------------

_PROFILE_KEYS = {
    "constant": {"kind", "value"},
    "table": {"kind", "nodes", "values"},
    "cosine": {"kind", "coeffs"},
}


def profile_from_dict(spec: dict) -> PotentialProfile:
    if not isinstance(spec, dict):
        raise ProblemError(f"potential spec must be an object, got {type(spec).__name__}")
    kind = spec.get("kind")
    if kind not in _PROFILE_KEYS:
        raise ProblemError(f"unknown potential kind {kind!r}; expected constant|table|cosine")
    unknown = set(spec) - _PROFILE_KEYS[kind]
    if unknown:
        raise ProblemError(f"unknown keys in {kind} potential spec: {sorted(unknown)}")
    try:
        if kind == "constant":
            return Constant(float(spec["value"]))
        if kind == "table":
            return Table(tuple(spec["nodes"]), tuple(spec["values"]))
        return CosineSeries(tuple(spec["coeffs"]))
    except KeyError as exc:
        raise ProblemError(f"{kind} potential spec missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"bad {kind} potential spec: {exc}") from exc


def problem_from_dict(doc: dict) -> SegmentGraphProblem:
    """Build a problem from {"a":..., "b":..., "p":..., "q1":{...}, "q2":{...}}."""
    if not isinstance(doc, dict):
        raise ProblemError("problem document must be a JSON object")
    required = {"a", "b", "p", "q1", "q2"}
    missing = required - set(doc)
    if missing:
        raise ProblemError(f"problem document missing keys: {sorted(missing)}")
    unknown = set(doc) - required
    if unknown:
        raise ProblemError(f"unknown keys in problem document: {sorted(unknown)}")
    try:
        a, b, p = float(doc["a"]), float(doc["b"]), float(doc["p"])
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"a, b, p must be numbers: {exc}") from exc
    return SegmentGraphProblem(a, b, p, profile_from_dict(doc["q1"]),
                               profile_from_dict(doc["q2"]))


def problem_from_json(path: str) -> SegmentGraphProblem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ProblemError(f"cannot read problem file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemError(f"problem file {path} is not valid JSON: {exc}") from exc
    return problem_from_dict(doc)


# ---------------------------------------------------------------------------
# Derived dimensionless shape constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DerivedShape:
    """Dimensionless constants of the rescaled secular problem.

    c = a + b, k = (1 - p^2)/(1 + p^2), q = (b - a)/(b + a),
    r = (1 - |q|)(1 - |k|), R = |q| r / ((a + b)(1 + |k|)).
    degenerate marks exact symmetry (a = b) or exact |p| = 1, where an
    enclosure radius would be vacuous.
    """

    c: float
    k: float
    q: float
    r: float
    R: float
    degenerate: bool

    @property
    def a(self) -> float:
        return 0.5 * self.c * (1.0 - self.q)

    @property
    def b(self) -> float:
        return 0.5 * self.c * (1.0 + self.q)


def derive_shape(problem: SegmentGraphProblem) -> DerivedShape:
    """Compute the shape constants; the two closed forms of r must agree.

    1 - |q| and 1 - |k| are evaluated through their cancellation-free
    equivalents 2 min(a,b)/(a+b) and 2 min(1,p^2)/(1+p^2); the naive
    subtractions lose ~|log10(1-|k|)| digits for small p.
    """
    a, b, p = problem.a, problem.b, problem.p
    c = a + b
    k = (1.0 - p * p) / (1.0 + p * p)
    q = (b - a) / (b + a)
    one_minus_abs_q = 2.0 * min(a, b) / (a + b)
    one_minus_abs_k = 2.0 * min(1.0, p * p) / (1.0 + p * p)
    r = one_minus_abs_q * one_minus_abs_k
    r_alt = 4.0 * min(a, b) * min(1.0, p * p) / ((a + b) * (p * p + 1.0))
    if abs(r - r_alt) > 1e-12 * max(abs(r), abs(r_alt), 1e-300):
        raise ProblemError(f"shape constant mismatch: r={r!r} vs {r_alt!r}")
    degenerate = (a == b) or (abs(p) == 1.0)
    R = abs(q) * r / (c * (1.0 + abs(k)))
    return DerivedShape(c=c, k=k, q=q, r=r, R=R, degenerate=degenerate)


# ---------------------------------------------------------------------------
# Potential norms and perturbation constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialNorms:
    """Cumulative L1 norms of the potentials and the perturbation constants.

    sigma1_fn(x) = integral of |q1| over [-a, x]   (nondecreasing on [-a, 0]),
    sigma2_fn(x) = integral of |q2| over [x, b]    (nonincreasing on [0, b]),
    sigma1 = sigma1_fn(0), sigma2 = sigma2_fn(0), and

      delta1 = sigma1 a e^{sigma1 a} + sigma2 b e^{sigma2 b}
      delta2 = sigma1 e^{sigma1 a} + sigma2 e^{sigma2 b}
               + sigma1 sigma2 (a + b) e^{sigma1 a + sigma2 b}

    The *_safe variants multiply by max(1, p^2); they coincide with the plain
    constants for |p| <= 1 and keep the correction bound valid for |p| > 1.
    """

    sigma1_fn: Callable[[float], float]
    sigma2_fn: Callable[[float], float]
    sigma1: float
    sigma2: float
    delta1: float
    delta2: float
    delta1_safe: float
    delta2_safe: float
    quad_nodes: int


def _simpson(values: np.ndarray, h: float) -> float:
    """Composite Simpson over uniformly spaced samples (odd count)."""
    n = values.shape[0]
    if n % 2 == 0:
        raise ValueError("Simpson needs an odd sample count")
    if n == 1:
        return 0.0
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(h / 3.0 * np.dot(w, values))


def _cumulative_abs_integral(problem: SegmentGraphProblem, segment: str,
                             quad_nodes: int) -> Callable[[float], float]:
    lo, hi = problem.segment_bounds(segment)
    prof = problem.potential(segment)

    def integral(x0: float, x1: float) -> float:
        if x1 <= x0:
            return 0.0
        frac = (x1 - x0) / (hi - lo)
        n = max(3, int(math.ceil(quad_nodes * frac)))
        if n % 2 == 0:
            n += 1
        xs = np.linspace(x0, x1, n)
        vals = np.abs(prof.evaluate(xs, lo, hi))
        return _simpson(vals, (x1 - x0) / (n - 1))

    if segment == "left":
        return lambda x: integral(lo, min(x, hi))
    return lambda x: integral(max(x, lo), hi)


def potential_norms(problem: SegmentGraphProblem,
                    quad_nodes: int = DEFAULT_QUAD_NODES) -> PotentialNorms:
    """Compute sigma/delta constants by composite Simpson over |q_k|."""
    if quad_nodes < 3 or quad_nodes % 2 == 0:
        raise ProblemError(f"quad_nodes must be odd and >= 3, got {quad_nodes}")
    a, b, p = problem.a, problem.b, problem.p
    sigma1_fn = _cumulative_abs_integral(problem, "left", quad_nodes)
    sigma2_fn = _cumulative_abs_integral(problem, "right", quad_nodes)
    s1 = sigma1_fn(0.0)
    s2 = sigma2_fn(0.0)
    e1 = math.exp(s1 * a)
    e2 = math.exp(s2 * b)
    delta1 = s1 * a * e1 + s2 * b * e2
    delta2 = s1 * e1 + s2 * e2 + s1 * s2 * (a + b) * e1 * e2
    boost = max(1.0, p * p)
    return PotentialNorms(
        sigma1_fn=sigma1_fn, sigma2_fn=sigma2_fn,
        sigma1=s1, sigma2=s2,
        delta1=delta1, delta2=delta2,
        delta1_safe=boost * delta1, delta2_safe=boost * delta2,
        quad_nodes=quad_nodes,
    )


def active_deltas(problem: SegmentGraphProblem,
                  norms: PotentialNorms | None = None) -> tuple[float, float]:
    """(delta1, delta2) with the safe variants substituted whenever |p| > 1."""
    if norms is None:
        norms = potential_norms(problem)
    if abs(problem.p) > 1.0:
        return norms.delta1_safe, norms.delta2_safe
    return norms.delta1, norms.delta2
