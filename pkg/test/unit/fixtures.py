import pytest
import numpy as np

import heislab.model
from heislab.model import Window, LatticeConfig
from heislab.util import derive_rng


@pytest.fixture
def rng():
    return derive_rng(1)


@pytest.fixture
def gaussian():
    "One spin with density r^3 exp(-d^2); E d^k = Gamma(2 + k/2)."
    return heislab.model.mu_p(1.0, 2.0)


@pytest.fixture
def ex1():
    return heislab.model.example1(1.5, 0.01)


@pytest.fixture
def ex2():
    return heislab.model.example2(1.5, 0.01)


@pytest.fixture
def ipq():
    return heislab.model.ip_quadratic(1.0, 0.02)


@pytest.fixture
def site():
    return Window(0, 0)


@pytest.fixture
def three_sites():
    return Window(0, 2)


@pytest.fixture
def omega():
    "Boundary neighbour distances (left, right)."
    return (0.5, 1.0)


@pytest.fixture
def config3():
    return LatticeConfig.from_distances(Window(0, 2), [0.3, 1.2, 0.7], (0.5, 1.0))


@pytest.fixture
def ex1_file(tmp_path):
    path = tmp_path / "ex1.cfg"
    path.write_text(
        "[heislab]\n"
        "schema = 1\n"
        "\n"
        "[model]\n"
        "family = example1\n"
        "s = 1.5\n"
        "J = 0.01\n"
        "\n"
        "[window]\n"
        "lo = 0\n"
        "hi = 0\n"
        "\n"
        "[boundary]\n"
        "-1 = 0.5, 0.0, 0.0\n"
        "1 = 1.0, 0.0, 0.0\n"
    )
    return str(path)


def gaussian_moment(k):
    "E d^k under r^3 exp(-r^2) dr."
    from scipy.special import gamma
    return gamma(2.0 + k / 2.0)
