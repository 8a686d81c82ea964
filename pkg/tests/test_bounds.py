import math

import numpy as np
import pytest

from graphsturm import (CertificateUnavailableError, Constant, ContourError,
                        DomainError, SegmentGraphProblem, complex_lower_bound,
                        delta0_lower_bound, derive_shape, eval_delta0,
                        localization_radius, qprime_lower_check, rouche_count,
                        smallness_condition, unperturbed_spectrum)


def test_smallness_zero_potential(config_a_bare):
    rep = smallness_condition(config_a_bare)
    assert rep.lhs == 0.0
    assert rep.holds
    assert rep.rhs_paper == pytest.approx(2.0 * rep.rhs_corrected, rel=1e-15)


def test_smallness_certified_config(config_a):
    rep = smallness_condition(config_a)
    # frozen from the closed-form chain with exact constant-potential integrals
    assert rep.lhs == pytest.approx(2.3812612526e-3, rel=1e-8)
    assert rep.rhs_corrected == pytest.approx(3.0864197531e-3, rel=1e-10)
    assert rep.holds and rep.margin > 0.0


def test_smallness_fails_for_larger_potentials():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.01), Constant(0.02))
    rep = smallness_condition(prob)
    assert rep.lhs == pytest.approx(0.44540, rel=1e-3)
    assert not rep.holds
    assert rep.margin < 0.0


def test_smallness_degenerate_geometry():
    prob = SegmentGraphProblem(1.0, 1.0, 0.5, Constant(0.0), Constant(0.0))
    rep = smallness_condition(prob)
    assert rep.degenerate
    assert not rep.holds


def test_localization_radius_values(config_a):
    rad = localization_radius(config_a, 1)
    assert rad.rho == pytest.approx(0.0142876, rel=1e-4)
    assert rad.R == pytest.approx(1.0 / 54.0, rel=1e-12)
    assert rad.valid
    # rho is independent of the root index
    assert localization_radius(config_a, 7).rho == rad.rho


def test_localization_radius_zero_potential(config_a_bare):
    rad = localization_radius(config_a_bare, 1)
    assert rad.rho == 0.0
    assert rad.valid


def test_localization_radius_constant_sets(config_a):
    corr = localization_radius(config_a, 1, constants="corrected")
    paper = localization_radius(config_a, 1, constants="paper")
    assert corr.rho == pytest.approx(2.0 * paper.rho, rel=1e-14)


def test_localization_radius_degenerate_raises():
    prob = SegmentGraphProblem(2.0, 2.0, 0.5, Constant(0.0), Constant(0.0))
    with pytest.raises(CertificateUnavailableError):
        localization_radius(prob, 1)


def test_smallness_implies_radius_inside_outer(config_a):
    rad = localization_radius(config_a, 1)
    assert rad.rho < rad.R


def test_radius_scales_linearly_with_potential():
    rhos = {}
    for eps in (1e-3, 1e-4):
        prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(eps), Constant(eps))
        rhos[eps] = localization_radius(prob, 1).rho
    ratio = rhos[1e-3] / rhos[1e-4]
    assert ratio == pytest.approx(10.0, rel=1e-2)


def test_radius_monotone_in_deltas_and_small_r():
    # monotone nondecreasing in each delta (linear form); nonincreasing in r
    # on r <= pi/4, where the (pi - 2r) pole has not taken over
    lhs = lambda d1, d2, c, r: 2 * d1 + 4 * d2 * c / (math.pi - 2 * r)
    rho = lambda d1, d2, c, r, q, p: lhs(d1, d2, c, r) / (
        (1 + p * p) / 2 * c * q * r)
    base = rho(1e-4, 1e-4, 3.0, 0.2, 1 / 3, 0.5)
    assert rho(2e-4, 1e-4, 3.0, 0.2, 1 / 3, 0.5) >= base
    assert rho(1e-4, 2e-4, 3.0, 0.2, 1 / 3, 0.5) >= base
    for r1, r2 in [(0.1, 0.2), (0.2, 0.4), (0.4, math.pi / 4)]:
        assert rho(1e-4, 1e-4, 3.0, r2, 1 / 3, 0.5) <= rho(1e-4, 1e-4, 3.0, r1, 1 / 3, 0.5)


def test_delta0_lower_bound_hand_value(config_a):
    table = unperturbed_spectrum(config_a, n_max=1)
    lam1 = table.positive[0].lam
    bound = delta0_lower_bound(config_a, lam1 + 0.01, 1, table)
    expected = 0.005 * (lam1 + 0.01) * 0.625 * 3.0 * (1.0 / 3.0) * (4.0 / 15.0)
    assert bound == pytest.approx(expected, rel=1e-12)
    assert bound == pytest.approx(7.47e-4, rel=2e-2)
    shape = derive_shape(config_a)
    assert abs(eval_delta0(shape, config_a.p, lam1 + 0.01)) > bound


def test_delta0_lower_bound_sweep(config_a):
    shape = derive_shape(config_a)
    table = unperturbed_spectrum(config_a, n_max=3)
    rng = np.random.default_rng(4242)
    for s in (1, 2, 3):
        lam_s = table.entry(s).lam
        for _ in range(50):
            lam = lam_s + shape.R * rng.uniform(-0.999, 0.999)
            bound = delta0_lower_bound(config_a, lam, s, table)
            assert abs(eval_delta0(shape, config_a.p, lam)) >= bound - 1e-15


def test_delta0_lower_bound_domain(config_a):
    table = unperturbed_spectrum(config_a, n_max=1)
    with pytest.raises(DomainError):
        delta0_lower_bound(config_a, table.positive[0].lam + 0.2, 1, table)


def test_delta0_lower_bound_tight_at_center(config_a):
    table = unperturbed_spectrum(config_a, n_max=1)
    lam1 = table.positive[0].lam
    assert delta0_lower_bound(config_a, lam1, 1, table) == 0.0
    shape = derive_shape(config_a)
    assert abs(eval_delta0(shape, config_a.p, lam1)) < 1e-11


def test_qprime_margins(config_a):
    table = unperturbed_spectrum(config_a, n_max=10)
    for s in range(1, 11):
        assert qprime_lower_check(config_a, s, table) > 0.0


def test_qprime_symmetric_case(config_symmetric):
    # k = 0: |Q'(lam_n)| = a + b exactly, and the r-term vanishes with q = 0
    table = unperturbed_spectrum(config_symmetric, n_max=3)
    for s in (1, 2, 3):
        assert qprime_lower_check(config_symmetric, s, table) == pytest.approx(2.0,
                                                                               abs=1e-12)


def test_qpp_bound_on_grid(config_a_bare):
    # |Q''| <= (a+b)^2 (1+|k|) everywhere
    shape = derive_shape(config_a_bare)
    lam = np.linspace(0.0, 15.0, 1501)
    qpp = -(shape.c ** 2) * (np.sin(lam * shape.c)
                             - shape.k * shape.q ** 2 * np.sin(shape.q * lam * shape.c))
    assert np.max(np.abs(qpp)) <= shape.c ** 2 * (1.0 + abs(shape.k)) + 1e-12


def test_complex_lower_bound_reported(config_a_bare):
    shape = derive_shape(config_a_bare)
    # between consecutive roots on the real axis the bound should be positive
    lam = 0.5 * (math.pi / 2.0 + 2.658) / 3.0 + 0.0j
    val = complex_lower_bound(config_a_bare, lam)
    assert val >= 0.0
    # vacuous (bracket <= 0) regions return exactly 0
    assert complex_lower_bound(config_a_bare, 0.886 + 0.0j) >= 0.0


def test_complex_lower_bound_growth(config_a_bare):
    shape = derive_shape(config_a_bare)
    vals, actual = [], []
    for beta in (1.0, 2.0, 3.0, 4.0, 5.0):
        lam = complex(math.pi / (2 * shape.c), beta)
        vals.append(complex_lower_bound(config_a_bare, lam))
        actual.append(abs(complex(eval_delta0(shape, 0.5, lam))))
    ratios = [a / max(v, 1e-300) for a, v in zip(actual, vals) if v > 0.0]
    # wherever the reported bound is nonvacuous it must hold, with bounded ratio
    assert all(r >= 1.0 for r in ratios)
    assert all(r < 1e4 for r in ratios)


def test_rouche_counts_config_a(config_a):
    c1 = rouche_count(config_a, 1)
    assert c1.winding0 == 4 and c1.windingq == 4
    assert c1.min_delta0_minus_phi > 0.0
    c2 = rouche_count(config_a, 2)
    assert c2.winding0 == c2.windingq == 4


def test_rouche_rejects_contour_through_zero(config_a):
    # the shape ratio is rational here, so lam = pi sits exactly on the l=3
    # square; the operation must refuse rather than miscount
    with pytest.raises(ContourError) as exc_info:
        rouche_count(config_a, 3)
    assert exc_info.value.suggested_l == 4


def test_rouche_zero_potential(config_a_bare):
    cnt = rouche_count(config_a_bare, 1)
    assert cnt.winding0 == cnt.windingq == 4


def test_winding_stable_under_refinement(config_a):
    c1 = rouche_count(config_a, 1, nodes_per_side=512)
    c2 = rouche_count(config_a, 1, nodes_per_side=1024)
    assert c1.winding0 == c2.winding0
    assert c1.windingq == c2.windingq
