import json

import numpy as np
import pytest

from graphsturm import Constant, SegmentGraphProblem


@pytest.fixture
def config_a() -> SegmentGraphProblem:
    """a=1, b=2, p=0.5 with tiny constant potentials (certified regime)."""
    return SegmentGraphProblem(1.0, 2.0, 0.5, Constant(1e-4), Constant(1e-4))


@pytest.fixture
def config_a_bare() -> SegmentGraphProblem:
    """a=1, b=2, p=0.5 with zero potentials."""
    return SegmentGraphProblem(1.0, 2.0, 0.5, Constant(0.0), Constant(0.0))


@pytest.fixture
def config_symmetric() -> SegmentGraphProblem:
    """a=b=1, p=1: closed-form spectrum pi*n/2."""
    return SegmentGraphProblem(1.0, 1.0, 1.0, Constant(0.0), Constant(0.0))


def random_geometry(rng: np.random.Generator) -> tuple[float, float, float]:
    a = float(rng.uniform(0.1, 10.0))
    b = float(rng.uniform(0.1, 10.0))
    p = 0.0
    while abs(p) < 1e-3:
        p = float(rng.uniform(-5.0, 5.0))
    return a, b, p


@pytest.fixture
def problem_json(tmp_path):
    def write(doc: dict) -> str:
        path = tmp_path / "problem.json"
        path.write_text(json.dumps(doc))
        return str(path)

    return write
