import numpy as np
import pytest

from toricspec.inverse import roundtrip
from toricspec.profiles import make_perturbed_well, make_round_sphere


@pytest.fixture(scope="session")
def round_sphere():
    return make_round_sphere()


@pytest.fixture(scope="session")
def quadratic_well():
    return make_perturbed_well([0.0, 0.0, 1.0])


@pytest.fixture(scope="session")
def asymmetric_well():
    return make_perturbed_well([0.0, 0.0, 1.0, 0.3])


@pytest.fixture(scope="session")
def roundtrips():
    """Full-pipeline reports, computed once per session."""
    cache = {}

    def get(name, alpha=1.0):
        key = (name, alpha)
        if key not in cache:
            p = {
                "round": make_round_sphere(),
                "quadratic": make_perturbed_well([0.0, 0.0, 1.0]),
                "asymmetric": make_perturbed_well([0.0, 0.0, 1.0, 0.3]),
                "mirrored": make_perturbed_well([0.0, 0.0, 1.0, -0.3]),
            }[name]
            cache[key] = roundtrip(p, alpha)
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = []


def record_acceptance(number, title, passed, detail):
    """Store one acceptance line and echo it (visible with ``-s``)."""
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {title}  [{detail}]"
    ACCEPTANCE.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
