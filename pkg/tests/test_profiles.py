import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricspec.errors import DegenerateMinimum, MultiWell, NotPoleRegular
from toricspec.profiles import (
    MetricProfile,
    certify_sampled_well,
    certify_single_well,
    check_pole_regularity,
    make_perturbed_well,
    make_round_sphere,
    make_tabulated_profile,
    profile_from_spec,
)


def test_round_sphere_values():
    p = make_round_sphere()
    assert p.v(0.0) == 1.0
    assert p.v(0.5) == pytest.approx(4 / 3, rel=1e-15)
    assert p.v1(0.5) == pytest.approx(16 / 9, rel=1e-15)
    assert (1 - 0.999**2) * p.v(0.999) == pytest.approx(1.0, rel=1e-12)


def test_round_sphere_is_exact_pole_term():
    p = make_round_sphere()
    x = np.linspace(-0.99, 0.99, 101)
    np.testing.assert_allclose(p.v(x), 1.0 / (1.0 - x * x), rtol=1e-14)


def test_quadratic_perturbation_curvature():
    p = make_perturbed_well([0, 0, 1])
    assert p.v(0.0) == 1.0
    assert p.v2(0.0) == pytest.approx(4.0, rel=1e-14)


def test_zero_perturbation_is_round():
    x = np.linspace(-0.9, 0.9, 31)
    np.testing.assert_allclose(make_perturbed_well([0.0]).v(x), make_round_sphere().v(x), rtol=1e-15)


def test_asymmetric_well_certified(asymmetric_well):
    cert = certify_single_well(asymmetric_well, 10_000)
    assert cert.c == 1.0


def test_round_sphere_certificate():
    cert = certify_single_well(make_round_sphere())
    assert cert.c == 1.0
    assert cert.curvature == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("grid", [16, 17, 100, 1000, 10_000])
def test_round_sphere_certified_for_any_grid(grid):
    certify_single_well(make_round_sphere(), grid)


def test_negative_curvature_rejected():
    with pytest.raises((DegenerateMinimum, MultiWell)):
        certify_single_well(make_perturbed_well([0, 0, -3]))


def test_linear_term_rejected():
    with pytest.raises(ValueError):
        make_perturbed_well([0, 0.5, 1])


def test_off_centre_minimum_rejected():
    knots = np.linspace(-1, 1, 81)
    p = make_tabulated_profile(knots, 2.0 * (knots - 0.3) ** 2)
    with pytest.raises(MultiWell):
        certify_single_well(p)


def test_mirror_pair_has_same_minimum():
    a = certify_single_well(make_perturbed_well([0, 0, 1, 0.3]))
    b = certify_single_well(make_perturbed_well([0, 0, 1, -0.3]))
    assert a.c == b.c


def test_mirrored_profile(asymmetric_well):
    x = np.linspace(-0.9, 0.9, 19)
    np.testing.assert_allclose(asymmetric_well.mirrored().v(x), asymmetric_well.v(-x), rtol=1e-14)


def test_pole_regularity_passes_for_polynomials(asymmetric_well):
    check_pole_regularity(asymmetric_well)


def test_tabulated_profile_roundtrip():
    knots = np.linspace(-1, 1, 41)
    p = make_tabulated_profile(knots, 0.5 * knots**2)
    x = np.linspace(-0.8, 0.8, 9)
    np.testing.assert_allclose(p.v(x), 1 / (1 - x * x) + 0.5 * x * x, rtol=1e-6)
    certify_single_well(p)


def test_profile_from_spec():
    assert profile_from_spec("round_sphere").family == "RoundSphere"
    p = profile_from_spec("perturbed_well", [0, 0, 1, 0.3])
    assert p.v(0.5) == pytest.approx(4 / 3 + 0.25 + 0.3 * 0.125)
    with pytest.raises(ValueError):
        profile_from_spec("torus")


def test_sampled_well_certificate():
    x = np.linspace(-0.5, 0.5, 101)
    cert = certify_sampled_well(x, 1 / (1 - x * x))
    assert cert.c == 1.0
    with pytest.raises(MultiWell):
        certify_sampled_well(x, np.cos(6 * x) + 2)


def test_nonregular_poles_detected():
    # a correction 0.5/(1-x^2) doubles the pole coefficient: (1-x^2) v -> 1.5
    def smooth(x, order):
        return 0.5 * MetricProfile("RoundSphere").derivative(x, order)

    p = MetricProfile("TabulatedSpline", (), smooth)
    with pytest.raises(NotPoleRegular):
        check_pole_regularity(p)


@settings(max_examples=25, deadline=None)
@given(
    a2=st.floats(0.0, 3.0),
    a3=st.floats(-0.5, 0.5),
    a4=st.floats(0.0, 2.0),
    x=st.floats(-0.9, 0.9),
)
def test_derivative_matches_central_difference(a2, a3, a4, x):
    p = make_perturbed_well([0.0, 0.0, a2, a3, a4])
    errs = []
    for h in (1e-2, 5e-3):
        fd = (p.v(x + h) - p.v(x - h)) / (2 * h)
        errs.append(abs(fd - p.v1(x)))
    if errs[1] > 1e-11:
        assert np.log2(errs[0] / errs[1]) >= 1.8


@settings(max_examples=25, deadline=None)
@given(a2=st.floats(0.0, 3.0), a4=st.floats(0.0, 2.0))
def test_even_wells_are_certified_and_positive(a2, a4):
    p = make_perturbed_well([0.0, 0.0, a2, 0.0, a4])
    cert = certify_single_well(p, 2000)
    assert cert.c == 1.0
    assert np.all(p.v(np.linspace(-0.999, 0.999, 999)) > 0)
