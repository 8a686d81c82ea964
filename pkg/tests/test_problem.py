import math

import numpy as np
import pytest

from graphsturm import (Constant, CosineSeries, DomainError, ProblemError,
                        SegmentGraphProblem, Table, derive_shape, eval_potential,
                        potential_norms, problem_from_dict)
from graphsturm.problem import active_deltas
from tests.conftest import random_geometry


def test_construction_rejects_bad_inputs():
    with pytest.raises(ProblemError):
        SegmentGraphProblem(0.0, 1.0, 1.0, Constant(0.0), Constant(0.0))
    with pytest.raises(ProblemError):
        SegmentGraphProblem(1.0, -2.0, 1.0, Constant(0.0), Constant(0.0))
    with pytest.raises(ProblemError):
        SegmentGraphProblem(1.0, 1.0, 0.0, Constant(0.0), Constant(0.0))
    with pytest.raises(ProblemError):
        SegmentGraphProblem(1.0, 1.0, 1.0, Table((0.0, 1.0), (1.0, 1.0)),
                            Constant(0.0))  # does not span [-1, 0]
    with pytest.raises(ProblemError):
        Table((0.0, 0.0, 1.0), (1.0, 1.0, 1.0))  # not strictly ascending


def test_derive_shape_hand_values():
    # closed forms at a=1, b=2, p=0.5
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.0), Constant(0.0))
    shape = derive_shape(prob)
    assert shape.k == pytest.approx(0.6, abs=1e-15)
    assert shape.q == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert shape.r == pytest.approx(4.0 / 15.0, abs=1e-15)
    assert shape.R == pytest.approx(1.0 / 54.0, abs=1e-15)
    assert not shape.degenerate


def test_derive_shape_degenerate_and_large_p():
    shape = derive_shape(SegmentGraphProblem(1.0, 1.0, 1.0, Constant(0.0), Constant(0.0)))
    assert shape.k == 0.0 and shape.q == 0.0 and shape.degenerate

    shape2 = derive_shape(SegmentGraphProblem(1.0, 2.0, 2.0, Constant(0.0), Constant(0.0)))
    assert shape2.k == pytest.approx(-0.6, abs=1e-15)
    assert abs(shape2.k) < 1.0


def test_shape_closed_forms_agree_randomized():
    rng = np.random.default_rng(20240817)
    for _ in range(10_000):
        a, b, p = random_geometry(rng)
        shape = derive_shape(SegmentGraphProblem(a, b, p, Constant(0.0), Constant(0.0)))
        # construction itself asserts the two closed forms of r at 1e-12
        assert abs(shape.k) < 1.0
        assert abs(shape.q) < 1.0
        if a != b and p * p != 1.0:
            assert 0.0 < shape.r < 1.0


def test_potential_norms_zero():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.0), Constant(0.0))
    norms = potential_norms(prob)
    assert norms.sigma1 == norms.sigma2 == 0.0
    assert norms.delta1 == norms.delta2 == 0.0
    assert norms.delta1_safe == norms.delta2_safe == 0.0


def test_potential_norms_constant_hand_values():
    # exact integrals: sigma1 = 0.01, sigma2 = 0.04, then direct substitution
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.01), Constant(0.02))
    norms = potential_norms(prob)
    assert norms.sigma1 == pytest.approx(0.01, rel=1e-12)
    assert norms.sigma2 == pytest.approx(0.04, rel=1e-12)
    d1 = 0.01 * math.exp(0.01) + 0.08 * math.exp(0.08)
    d2 = (0.01 * math.exp(0.01) + 0.04 * math.exp(0.08)
          + 0.01 * 0.04 * 3.0 * math.exp(0.09))
    assert norms.delta1 == pytest.approx(d1, rel=1e-12)
    assert norms.delta2 == pytest.approx(d2, rel=1e-12)
    assert norms.delta1 == pytest.approx(0.0967634670848, rel=1e-10)
    assert norms.delta2 == pytest.approx(0.0547449935183, rel=1e-10)


def test_potential_norms_small_constant():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(1e-4), Constant(1e-4))
    norms = potential_norms(prob)
    assert norms.sigma1 == pytest.approx(1e-4, rel=1e-12)
    assert norms.sigma2 == pytest.approx(2e-4, rel=1e-12)
    assert norms.delta1 == pytest.approx(5.001700325e-4, rel=1e-9)
    assert norms.delta2 == pytest.approx(3.001500465e-4, rel=1e-9)


def test_safe_deltas_track_coupling():
    small = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.01), Constant(0.01))
    large = SegmentGraphProblem(1.0, 2.0, 2.0, Constant(0.01), Constant(0.01))
    ns, nl = potential_norms(small), potential_norms(large)
    assert ns.delta1_safe == ns.delta1 and ns.delta2_safe == ns.delta2
    assert nl.delta1_safe == pytest.approx(4.0 * nl.delta1, rel=1e-14)
    assert nl.delta2_safe == pytest.approx(4.0 * nl.delta2, rel=1e-14)
    assert active_deltas(small, ns) == (ns.delta1, ns.delta2)
    assert active_deltas(large, nl) == (nl.delta1_safe, nl.delta2_safe)


def test_sigma_functions_monotone():
    prob = SegmentGraphProblem(1.0, 2.0, 0.5, CosineSeries((0.02, 0.01)),
                               Table((0.0, 1.0, 2.0), (0.0, 0.03, 0.01)))
    norms = potential_norms(prob)
    xs1 = np.linspace(-1.0, 0.0, 21)
    vals1 = [norms.sigma1_fn(float(x)) for x in xs1]
    assert all(v2 >= v1 - 1e-14 for v1, v2 in zip(vals1, vals1[1:]))
    assert all(v >= 0.0 for v in vals1)
    xs2 = np.linspace(0.0, 2.0, 21)
    vals2 = [norms.sigma2_fn(float(x)) for x in xs2]
    assert all(v2 <= v1 + 1e-14 for v1, v2 in zip(vals2, vals2[1:]))
    assert all(v >= 0.0 for v in vals2)


def test_sigma_quadrature_converged():
    # doubling the Simpson resolution moves sigma by < 1e-10 on smooth profiles
    for prof1, prof2 in [(Constant(0.3), Constant(0.1)),
                         (CosineSeries((0.1, 0.05, 0.02)), CosineSeries((0.2,)))]:
        prob = SegmentGraphProblem(1.0, 2.0, 0.5, prof1, prof2)
        n1 = potential_norms(prob, quad_nodes=513)
        n2 = potential_norms(prob, quad_nodes=1025)
        for x in (-0.7, -0.3, 0.0):
            assert abs(n1.sigma1_fn(x) - n2.sigma1_fn(x)) < 1e-10
        for x in (0.0, 0.9, 1.7):
            assert abs(n1.sigma2_fn(x) - n2.sigma2_fn(x)) < 1e-10


def test_delta_monotone_under_scaling():
    base = np.array([0.04, 0.02, 0.01])
    prev1 = prev2 = -1.0
    for eps in (0.25, 0.5, 1.0):
        prob = SegmentGraphProblem(1.0, 2.0, 0.5,
                                   CosineSeries(tuple(eps * base)),
                                   Constant(eps * 0.05))
        norms = potential_norms(prob)
        assert norms.delta1 >= prev1 and norms.delta2 >= prev2
        prev1, prev2 = norms.delta1, norms.delta2


def test_eval_potential_profiles():
    prob = SegmentGraphProblem(
        1.0, 2.0, 0.5,
        Table((-1.0, 0.0), (1.0, 3.0)),
        CosineSeries((0.0, 1.0)),
    )
    assert eval_potential(prob, "left", -0.5) == pytest.approx(2.0, abs=1e-15)
    assert eval_potential(prob, "right", 0.0) == pytest.approx(1.0, abs=1e-15)
    const = SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.5), Constant(0.5))
    for x in (-1.0, -0.25, 0.0):
        assert eval_potential(const, "left", x) == 0.5
    with pytest.raises(DomainError):
        eval_potential(prob, "left", 0.5)
    with pytest.raises(DomainError):
        eval_potential(prob, "right", -0.5)


def test_problem_from_dict_schema():
    doc = {"a": 1.0, "b": 2.0, "p": 0.5,
           "q1": {"kind": "constant", "value": 1e-4},
           "q2": {"kind": "cosine", "coeffs": [1e-4, 0.0]}}
    prob = problem_from_dict(doc)
    assert prob.a == 1.0 and prob.p == 0.5

    with pytest.raises(ProblemError):
        problem_from_dict({**doc, "extra": 1})
    with pytest.raises(ProblemError):
        problem_from_dict({"a": 1.0, "b": 2.0, "p": 0.5,
                           "q1": {"kind": "constant", "value": 0, "junk": 1},
                           "q2": {"kind": "constant", "value": 0}})
    bad = dict(doc)
    del bad["p"]
    with pytest.raises(ProblemError):
        problem_from_dict(bad)
    with pytest.raises(ProblemError):
        problem_from_dict({**doc, "q1": {"kind": "spline"}})
