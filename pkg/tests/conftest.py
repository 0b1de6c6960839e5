import math
import os

import numpy as np
import pytest

from manifold.builtins import sphere
from sde.examples import example_coefficients

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIO_DIR = os.path.join(REPO_ROOT, "scenarios")


def scenario_path(name):
    return os.path.join(SCENARIO_DIR, f"{name}.scenario")


def polar_angle_sin2(x):
    """sin^2 of the angle between x and the x1 axis."""
    return 1.0 - x[0] ** 2 / float(x @ x)


@pytest.fixture
def s2():
    return sphere(3)


@pytest.fixture
def ex33():
    return example_coefficients("ex33")


@pytest.fixture
def ex34():
    return example_coefficients("ex34")


@pytest.fixture
def ex35():
    return example_coefficients("ex35", 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write_scenario(tmp_path):
    """Write scenario text to a temporary file and return its path."""

    def write(text, name="test.scenario"):
        file_path = tmp_path / name
        file_path.write_text(text)
        return str(file_path)

    return write


@pytest.fixture
def half_pi():
    return math.pi / 2
