import math

import numpy as np
import pytest

from graphsturm import (Constant, CosineSeries, SegmentGraphProblem, Table,
                        build_kernel_series, kernel_base, kernel_bound_margin,
                        series_bound_margin, solve_halfline, term_bound_margins)
from graphsturm.transform import series_tail_bound

# int_0^1 sin(u) sin(1-u) du = (sin 1 - cos 1)/2, the single-iterate weight of
# the first potential-dependent kernel at lam=1, x=0, t=-1
K2_WEIGHT = 0.1505843394698784


def test_kernel_base_limits():
    assert kernel_base(0.0, 0.3, -0.4) == pytest.approx(0.7, abs=1e-15)
    assert kernel_base(1e-9, 0.5, 0.0) == pytest.approx(0.5, rel=1e-12)
    assert kernel_base(1.0, math.pi / 2, 0.0) == pytest.approx(1.0, rel=1e-14)
    # hyperbolic identity at purely imaginary lam
    val = kernel_base(1j, 1.0, 0.0)
    assert val.real == pytest.approx(math.sinh(1.0), rel=1e-14)
    assert abs(val.imag) < 1e-15


def test_kernel_base_series_matches_direct():
    # continuity across the small-argument switch
    for z in (0.99e-4, 1.01e-4):
        lam = z / 0.5
        direct = math.sin(z) / lam
        assert kernel_base(lam, 0.5, 0.0) == pytest.approx(direct, rel=1e-13)


def test_zero_potential_series_is_empty(config_a_bare):
    ser = build_kernel_series(config_a_bare, "left", 1.0, grid_n=33)
    assert ser.n_terms == 1
    assert ser.tail_bound == 0.0
    assert np.all(ser.values == 0.0)


def test_first_iterate_against_analytic_weight():
    eps = 0.01
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(eps), Constant(0.0))
    ser = build_kernel_series(prob, "left", 1.0, grid_n=257)
    # x = 0 is the last node, t = -1 the first
    k2 = ser.terms[1][-1, 0]
    assert complex(k2).real == pytest.approx(eps * K2_WEIGHT, rel=2e-5)
    assert abs(complex(k2).imag) == 0.0
    # remaining terms are O(eps^2)
    k3 = ser.terms[2][-1, 0]
    assert abs(k3) < 10.0 * eps ** 2


def test_series_margins_nonnegative():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.01), Constant(0.01))
    for lam in (1.0, 2j, 3 + 2j):
        for segment in ("left", "right"):
            ser = build_kernel_series(prob, segment, lam, grid_n=65)
            assert kernel_bound_margin(ser) >= -1e-12
            assert min(term_bound_margins(ser, sharp=False)) >= -1e-12
            # the sharpened per-term bound is checked and reported, not relied on
            assert min(term_bound_margins(ser, sharp=True)) >= -1e-9


def test_series_off_diagonal_ratio_below_one():
    # away from the trivial diagonal the majorant dominates |N| strictly
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.05), Constant(0.05))
    ser = build_kernel_series(prob, "left", 2.0, grid_n=65)
    mask = ser.triangle_mask()
    d = np.where(mask, ser.distances(), 0.0)
    maj = np.cosh(ser.beta * d) * d * np.exp(d * ser.sigma_nodes[:, None])
    off = mask & (d > 0.05)
    assert np.all(np.abs(ser.values)[off] < maj[off])


def test_displayed_sigma_argument_can_fail():
    # potential mass concentrated at the junction: the integration-side
    # variant of the majorant is falsified while the solution-side holds
    tab = Table(nodes=(-1.0, -0.2, -0.1, 0.0), values=(0.0, 0.0, 0.5, 0.5))
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, tab, Constant(0.0))
    ser = build_kernel_series(prob, "left", 0.01, grid_n=129)
    assert kernel_bound_margin(ser) >= -1e-12
    assert series_bound_margin(ser, "integration") < -1e-3


def test_tail_bound_certifies_truncation():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.05), Constant(0.05))
    ser = build_kernel_series(prob, "left", 1.0, grid_n=65, series_tol=1e-10)
    assert ser.tail_bound < 1e-10 * (1.0 + float(np.max(np.abs(ser.values))))
    # the dropped next term is genuinely below the recorded tail bound
    bigger = build_kernel_series(prob, "left", 1.0, grid_n=65, series_tol=1e-14)
    if bigger.n_terms > ser.n_terms:
        nxt = bigger.terms[ser.n_terms]
        assert float(np.max(np.abs(nxt))) <= ser.tail_bound


def test_term_decay_is_factorial():
    # every successive kernel iterate is controlled by the analytic majorant term
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.08), Constant(0.08))
    for lam in (1.0, 1.5 + 1.0j):
        ser = build_kernel_series(prob, "left", lam, grid_n=65, series_tol=1e-12)
        length = 1.0
        for n, term in enumerate(ser.terms, start=1):
            cap = series_tail_bound(length, ser.sigma_total, ser.beta, n - 1)
            assert float(np.max(np.abs(term))) <= cap * (1.0 + 1e-6)


def test_halfline_zero_potential(config_a_bare):
    lam = 1.3
    sol = solve_halfline(config_a_bare, "left", lam, grid_n=65)
    assert np.allclose(sol.y, np.cos(lam * (sol.x + 1.0)), atol=1e-14)
    sol2 = solve_halfline(config_a_bare, "right", lam, grid_n=65)
    assert np.allclose(sol2.y, np.cos(lam * (2.0 - sol2.x)), atol=1e-14)


def test_halfline_initial_data():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.02), CosineSeries((0.01, 0.01)))
    for segment, x0 in (("left", -1.0), ("right", 2.0)):
        sol = solve_halfline(prob, segment, 1.7, grid_n=129)
        idx = 0 if segment == "left" else -1
        assert sol.y[idx] == pytest.approx(1.0, abs=1e-12)
        assert abs(sol.yp[idx]) < 1e-12


def test_halfline_constant_potential_analytic():
    c = 0.01
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(c), Constant(c))
    lam = 2.0
    m = math.sqrt(lam * lam - c)
    sol = solve_halfline(prob, "left", lam, grid_n=257, series_tol=1e-12)
    assert np.max(np.abs(sol.y - np.cos(m * (sol.x + 1.0)))) < 1e-10
    # the right segment is twice as long; match the node spacing
    sol2 = solve_halfline(prob, "right", lam, grid_n=513, series_tol=1e-12)
    assert np.max(np.abs(sol2.y - np.cos(m * (2.0 - sol2.x)))) < 1e-10


def test_halfline_ode_residual():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, CosineSeries((0.02, 0.01)),
                               Constant(0.015))
    lam = 2.0
    for segment in ("left", "right"):
        sol = solve_halfline(prob, segment, lam, grid_n=513, series_tol=1e-12)
        x, y = sol.x, sol.y.real
        h = x[1] - x[0]
        # 4th-order central second derivative on interior nodes
        ypp = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)
        from graphsturm import eval_potential
        q = np.asarray(eval_potential(prob, segment, x[2:-2]))
        resid = -ypp + q * y[2:-2] - lam * lam * y[2:-2]
        assert np.max(np.abs(resid)) < 1e-6 * (1.0 + lam * lam)


def test_halfline_grid_refinement():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.05), Constant(0.05))
    lam = 1.5
    tol = 1e-8
    coarse = solve_halfline(prob, "left", lam, grid_n=129, series_tol=tol)
    fine = solve_halfline(prob, "left", lam, grid_n=257, series_tol=tol)
    dev = np.max(np.abs(coarse.y[::2] - fine.y[::4]))
    assert dev < 4.0 * tol


def test_halfline_real_lambda_real_solution():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.05), Constant(0.05))
    sol = solve_halfline(prob, "left", 3.0, grid_n=129)
    assert np.max(np.abs(sol.y.imag)) < 1e-14


def test_halfline_mirror_symmetry():
    # right-segment solve through the left code path via reflection
    coeffs = (0.03, -0.01, 0.004)
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.0), CosineSeries(coeffs))
    mirrored = SegmentGraphProblem(2.0, 1.0, 0.5,
                                   CosineSeries(tuple((-1.0) ** j * c
                                                      for j, c in enumerate(coeffs))),
                                   Constant(0.0))
    lam = 1.8
    right = solve_halfline(prob, "right", lam, grid_n=129, series_tol=1e-12)
    left = solve_halfline(mirrored, "left", lam, grid_n=129, series_tol=1e-12)
    assert np.max(np.abs(right.y - left.y[::-1])) < 1e-12
    assert np.max(np.abs(right.yp + left.yp[::-1])) < 1e-12
