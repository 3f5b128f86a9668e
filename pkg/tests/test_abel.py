from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special
from scipy.interpolate import make_interp_spline, PPoly

from toricspec.abel import (
    SampledFunction,
    abel_invert_threehalves,
    differentiated_kernel,
    forward_volterra,
    frac_integrate,
    half_integral_ppoly,
    homogeneous_solution,
    kernel_A,
    kernel_A_terms,
    kernel_B,
    kernel_B_terms,
    parts_kernel,
    partial_fraction_residues,
    volterra_solve,
)
from toricspec.errors import NoiseDominated

GAMMA32 = special.gamma(1.5)


def grid(top=1.2, h=1e-3):
    return np.arange(0.0, top + 0.5 * h, h)


# ---------------------------------------------------------------------------
# fractional integration


def test_sampled_function_validation():
    with pytest.raises(ValueError):
        SampledFunction(np.array([0.0, 0.1, 0.3]), np.zeros(3))
    with pytest.raises(ValueError):
        SampledFunction(np.array([0.0, 0.1]), np.array([0.0, np.nan]))
    assert SampledFunction(np.linspace(0, 1, 11), np.zeros(11)).step == pytest.approx(0.1)


def test_power_rule_is_exact():
    S = np.linspace(0, 2, 201)
    out = frac_integrate(SampledFunction(S, np.ones_like(S)), 1.5).values
    np.testing.assert_allclose(out, S**1.5 / special.gamma(2.5), rtol=1e-13, atol=1e-15)


def test_first_order_is_integration():
    S = np.linspace(0, 2, 201)
    out = frac_integrate(SampledFunction(S, S), 1.0).values
    np.testing.assert_allclose(out, S**2 / 2, rtol=1e-13, atol=1e-15)


def test_semigroup():
    S = grid(1.0)
    g = SampledFunction(S, np.cos(S))
    lhs = frac_integrate(frac_integrate(g, 1.0), 0.5).values
    rhs = frac_integrate(g, 1.5).values
    assert np.max(np.abs(lhs - rhs)) < 1e-5
    # and both against the exact J^{3/2} cos
    s = S[-1]
    exact = integrate.quad(lambda nu: np.sqrt(s - nu) * np.cos(nu), 0, s, epsabs=1e-14)[0] / GAMMA32
    assert rhs[-1] == pytest.approx(exact, abs=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0, 5), min_size=3, max_size=30), st.floats(0.2, 2.5))
def test_positive_and_monotone(incs, a):
    y = np.cumsum(incs)
    S = np.linspace(0, 1, len(y))
    out = frac_integrate(SampledFunction(S, y), a).values
    assert np.all(out >= 0)
    assert np.all(np.diff(out) >= -1e-12 * max(1.0, out.max()))


def test_half_integral_of_polynomial_is_exact():
    x = np.linspace(0, 1, 11)
    pp = PPoly.from_spline(make_interp_spline(x, x**2, k=3))
    s = np.array([0.3, 0.7, 1.0])
    # J^{1/2} x^2 = Gamma(3) s^{5/2} / Gamma(7/2)
    np.testing.assert_allclose(half_integral_ppoly(pp, s), 2 * s**2.5 / special.gamma(3.5), rtol=1e-12)


# ---------------------------------------------------------------------------
# inversion


@pytest.mark.parametrize("method", ["savgol", "spline"])
def test_invert_power_rule(method):
    S = grid(1.0)
    G = SampledFunction(S, GAMMA32 * S**1.5 / special.gamma(2.5))
    h = abel_invert_threehalves(G, method=method).values
    assert np.max(np.abs(h[S >= 0.02] - 1.0)) < 1e-4


@pytest.mark.parametrize("method, bound", [("savgol", 1e-4), ("spline", 1e-4)])
def test_invert_round_trip(method, bound):
    S = grid()
    h = np.sqrt(S + 1) * (2 + np.cos(S))
    G = SampledFunction(S, GAMMA32 * frac_integrate(SampledFunction(S, h), 1.5).values)
    rec = abel_invert_threehalves(G, method=method).values
    sel = (S >= 0.02) & (S <= 1.0)
    assert np.max(np.abs(rec - h)[sel]) <= bound


def test_invert_zero():
    S = grid(0.5)
    assert np.all(abel_invert_threehalves(SampledFunction(S, np.zeros_like(S))).values == 0)


def test_noise_detected(rng):
    S = grid(1.0)
    G = GAMMA32 * S**1.5 / special.gamma(2.5) + 1e-4 * rng.standard_normal(S.size)
    with pytest.raises(NoiseDominated):
        abel_invert_threehalves(SampledFunction(S, G))


def test_unknown_method():
    S = grid(0.1)
    with pytest.raises(ValueError):
        abel_invert_threehalves(SampledFunction(S, S), method="fft")


# ---------------------------------------------------------------------------
# kernel algebra


def test_partial_fraction_constants():
    expected = (Fraction(-5, 4), Fraction(-3, 4), Fraction(6))
    for beta, c in [(Fraction(1, 3), Fraction(2, 7)), (Fraction(5), Fraction(1, 11)), (Fraction(2, 9), Fraction(3))]:
        assert partial_fraction_residues(beta, c) == expected


def test_factored_and_term_forms_agree(rng):
    S, b, c = rng.uniform(0, 2, 200), rng.uniform(0.1, 3, 200), rng.uniform(0.2, 3, 200)
    np.testing.assert_allclose(kernel_A(S, b, c), kernel_A_terms(S, b, c), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(kernel_B(S, b, c), kernel_B_terms(S, b, c), rtol=1e-10, atol=1e-13)


def test_homogeneous_solution_annihilated(rng):
    worst = 0.0
    for _ in range(100):
        c = rng.uniform(0.2, 3)
        b = rng.uniform(0.1, 3)
        s = rng.uniform(0, 0.95 * b)
        f = homogeneous_solution(s, b, c)
        df = np.imag(homogeneous_solution(s + 1e-30j, b, c)) / 1e-30
        A, B = kernel_A(s, b, c), kernel_B(s, b, c)
        worst = max(worst, abs(A * f + B * df) / max(abs(A * f), abs(B * df)))
    assert worst < 1e-8


def test_homogeneous_solution_nonzero_at_origin(rng):
    for _ in range(50):
        c, b, C = rng.uniform(0.2, 3), rng.uniform(0.1, 3), rng.uniform(0.5, 2)
        f0 = homogeneous_solution(0.0, b, c, C)
        assert abs(f0) > 0.1 * C * c**1.25 * b**-0.75 * (3 * b + 5 * c) ** -3


def test_parts_kernel_consistent():
    c, b = 1.0, 0.7
    F = lambda s: s * (1 + s)
    direct = forward_volterra(F, lambda s: 1 + 2 * s, np.array([b]), c)[0]
    parts = integrate.quad(lambda s: np.sqrt(b - s) * parts_kernel(s, b, c) * F(s), 0, b, epsabs=1e-14)[0]
    assert parts == pytest.approx(direct, rel=1e-10)


def test_differentiated_kernel_consistent():
    c, b, h = 1.0, 0.7, 1e-5
    F, dF = (lambda s: s * (1 + s)), (lambda s: 1 + 2 * s)
    G = forward_volterra(F, dF, np.array([b - h, b + h]), c)
    fd = (G[1] - G[0]) / (2 * h)
    exact = integrate.quad(
        lambda s: differentiated_kernel(s, b, c) * F(s), 0, b, weight="alg", wvar=(0, -0.5), epsabs=1e-14
    )[0]
    assert exact == pytest.approx(fd, rel=1e-7)


# ---------------------------------------------------------------------------
# Volterra solver


def manufactured(c=1.0, top=1.0, n=401):
    S = np.linspace(0, top, n)
    G = forward_volterra(lambda s: s * (1 + s), lambda s: 1 + 2 * s, S, c)
    return S, G


def test_volterra_manufactured():
    S, G = manufactured()
    F = volterra_solve(SampledFunction(S, G), 1.0).values
    sel = S <= 0.8
    assert np.max(np.abs(F - S * (1 + S))[sel]) <= 1e-3


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_volterra_other_shifts(c):
    S, G = manufactured(c)
    F = volterra_solve(SampledFunction(S, G), c).values
    assert np.max(np.abs(F - S * (1 + S))[S <= 0.8]) <= 1e-3


def test_volterra_zero():
    S = np.linspace(0, 1, 51)
    assert np.all(volterra_solve(SampledFunction(S, np.zeros_like(S)), 1.0).values == 0)


def test_volterra_linear():
    S, G = manufactured(n=201)
    a = volterra_solve(SampledFunction(S, G), 1.0).values
    b = volterra_solve(SampledFunction(S, 2 * G), 1.0).values
    np.testing.assert_allclose(b, 2 * a, rtol=1e-12, atol=1e-15)


def test_volterra_rejects_bad_input():
    S = np.linspace(0, 1, 21)
    with pytest.raises(ValueError):
        volterra_solve(SampledFunction(S, S), 0.0)
    with pytest.raises(ValueError):
        volterra_solve(SampledFunction(S + 1, S), 1.0)
