import numpy as np
import pytest
from scipy import integrate

from toricspec.invariants import (
    InvariantCurve,
    PhaseRegion,
    area,
    area_curve,
    boundary_point,
    default_lambda_grid,
    first_invariant_smooth,
    invariant_curves,
    q_branch_s_form,
    q_curve,
    q_direct_2d,
    second_area,
    second_invariant_smooth,
)
from toricspec.profiles import MetricProfile, make_perturbed_well, make_round_sphere
from toricspec.testfunctions import mollified_indicator, smooth_bump, zero_function

ROUND = make_round_sphere()
ASYM = make_perturbed_well([0, 0, 1, 0.3])

# frozen values of Q on the round sphere at alpha = 1, cross-checked by the
# independent two-dimensional quadrature below
Q_ROUND = {1.5: 0.057716091840098516, 2.0: 0.33366766572616907, 3.0: 2.1805884106007163}


def one_plus_x2():
    """``v = 1 + x^2`` (not pole regular; used for a quadrature check only)."""

    def smooth(x, order):
        pole = MetricProfile("RoundSphere").derivative(x, order)
        poly = {0: 1 + x * x, 1: 2 * x, 2: 2 + 0 * x}.get(order, 0 * x)
        return poly - pole

    return MetricProfile("TabulatedSpline", (), smooth)


# ---------------------------------------------------------------------------
# regions


def test_boundary_point():
    r = boundary_point(ROUND, 2.0, 1)
    assert r == pytest.approx(1 / np.sqrt(2), abs=1e-13)


def test_phase_region_extent():
    reg = PhaseRegion(ASYM, 3.0, 1.0)
    lo, hi = reg.extent
    assert -1 < lo < 0 < hi < 1
    assert ASYM.v(lo) == pytest.approx(3.0) and ASYM.v(hi) == pytest.approx(3.0)
    x = np.linspace(lo, hi, 101)
    assert np.all(np.isfinite(reg.xi_max(x)))
    assert PhaseRegion(ASYM, 0.9, 1.0).extent == (0.0, 0.0)


# ---------------------------------------------------------------------------
# W


@pytest.mark.parametrize("alpha", [1.0, 2.0, -1.5])
@pytest.mark.parametrize("level", [1.2, 2.0, 3.0, 7.5])
def test_round_sphere_area_closed_form(alpha, level):
    # the round sphere has W(lam) = pi (sqrt(lam) - |alpha|)
    lam = level * alpha**2
    assert area(ROUND, alpha, lam) == pytest.approx(np.pi * (np.sqrt(lam) - abs(alpha)), rel=1e-12)


def test_area_vanishes_below_threshold():
    assert area(ASYM, 1.0, 0.99) == 0.0
    assert area(ASYM, 2.0, 3.99) == 0.0
    assert second_area(ASYM, 1.0, 1.0) == 0.0


def test_area_of_simple_well():
    p = one_plus_x2()
    ref = 2 * integrate.quad(lambda x: np.sqrt((1 + x * x) * (0.25 - x * x)), 0, 0.5, epsabs=1e-14)[0]
    assert area(p, 1.0, 1.25) == pytest.approx(ref, rel=1e-10)
    n = 400
    x = -0.5 + (np.arange(n) + 0.5) / n
    xi = (np.arange(n) + 0.5) * (0.6 / n)
    X, XI = np.meshgrid(x, xi, indexing="ij")
    V = 1 + X * X
    grid = np.count_nonzero(XI**2 / V + V < 1.25) * (1.0 / n) * (0.6 / n)
    assert area(p, 1.0, 1.25) == pytest.approx(grid, abs=2e-3)


def test_round_sphere_area_grid_oracle():
    n = 2000
    x = -0.75 + (np.arange(n) + 0.5) * (1.5 / n)
    xi = (np.arange(n) + 0.5) * (1.0 / n)
    X, XI = np.meshgrid(x, xi, indexing="ij")
    V = ROUND.v(X)
    grid = np.count_nonzero(XI**2 / V + V < 2.0) * (1.5 / n) * (1.0 / n)
    assert area(ROUND, 1.0, 2.0) == pytest.approx(grid, abs=1e-4)


@pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
def test_area_against_line_integral(lam):
    xs = np.linspace(-1 + 1e-9, 1 - 1e-9, 400001)
    V = ASYM.v(xs)
    ref = np.trapezoid(np.sqrt(np.clip(lam * V - V * V, 0, None)), xs)
    assert area(ASYM, 1.0, lam) == pytest.approx(ref, abs=1e-4)


@pytest.mark.parametrize("p", [ROUND, ASYM])
def test_endpoint_rules_agree(p):
    for lam in (1.5, 3.0):
        assert area(p, 1.0, lam) == pytest.approx(area(p, 1.0, lam, endpoint_rule="gauss_jacobi"), rel=1e-12)
        assert second_area(p, 1.0, lam) == pytest.approx(
            second_area(p, 1.0, lam, endpoint_rule="gauss_jacobi"), rel=1e-10
        )


def test_curves_monotone_and_continuous():
    lam = default_lambda_grid(ASYM, 1.0, 200)
    W = area_curve(ASYM, 1.0, lam).W
    assert np.all(np.diff(W) >= 0)
    slope = np.diff(W) / np.diff(lam)
    assert np.max(slope) < 10 * np.median(slope)


def test_curves_even_in_alpha():
    lam = np.linspace(1.1, 4, 9)
    a = invariant_curves(ASYM, 1.3, lam)
    b = invariant_curves(ASYM, -1.3, lam)
    assert np.array_equal(a.W, b.W) and np.array_equal(a.Q, b.Q)


def test_curve_helpers():
    lam = np.linspace(1.1, 3, 5)
    assert area_curve(ROUND, 1.0, lam).Q is None
    assert q_curve(ROUND, 1.0, lam).W is None
    with pytest.raises(ValueError):
        invariant_curves(ROUND, 1.0, lam[::-1])
    c = invariant_curves(ROUND, 1.0, lam).with_c(1.0)
    assert isinstance(c, InvariantCurve) and c.c == 1.0


def test_default_grid():
    lam = default_lambda_grid(ASYM, 2.0, 50)
    assert lam.size == 50
    assert lam[0] == pytest.approx(4 * 1.001)
    assert lam[-1] == pytest.approx(4 * min(ASYM.v(0.95), ASYM.v(-0.95)))


# ---------------------------------------------------------------------------
# Q


@pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
def test_q_frozen(lam):
    assert second_area(ROUND, 1.0, lam) == pytest.approx(Q_ROUND[lam], rel=1e-10)


@pytest.mark.parametrize("p", [ROUND, ASYM])
@pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
def test_q_one_dimensional_vs_two_dimensional(p, lam):
    assert second_area(p, 1.0, lam) == pytest.approx(q_direct_2d(p, 1.0, lam), rel=1e-6)


@pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
def test_q_level_variable_form(lam):
    # inverse branch of 1/(1-x^2): f(s) = sqrt(1 - 1/s)
    df = lambda s: 0.5 / (s * s * np.sqrt(1 - 1 / s))
    d2f = lambda s: -(1 / s**3) * (1 - 1 / s) ** -0.5 - 0.25 / s**4 * (1 - 1 / s) ** -1.5
    both = 2 * q_branch_s_form(df, d2f, 1.0, 1.0, lam)
    assert both == pytest.approx(second_area(ROUND, 1.0, lam), rel=1e-6)


# ---------------------------------------------------------------------------
# smooth invariants


def test_smooth_invariants_of_zero():
    assert first_invariant_smooth(ROUND, zero_function(), 1.0) == 0.0
    assert second_invariant_smooth(ROUND, zero_function(), 1.0) == 0.0


@pytest.mark.parametrize("p", [ROUND, ASYM])
def test_smooth_first_invariant_brackets_area(p):
    lam, eps = 3.0, 0.1
    val = first_invariant_smooth(p, mollified_indicator(lam, eps), 1.0)
    assert 2 * area(p, 1.0, lam - eps) <= val <= 2 * area(p, 1.0, lam + eps)


def test_mollifier_limit():
    lam = 3.0
    target = 2 * area(ASYM, 1.0, lam)
    errs = [abs(first_invariant_smooth(ASYM, mollified_indicator(lam, e), 1.0) - target) for e in (0.4, 0.2, 0.1)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_first_invariant_monte_carlo(rng):
    rho = smooth_bump(2.0, 0.5)
    n = 2_000_000
    x = rng.uniform(-0.9, 0.9, n)
    xi = rng.uniform(-1.2, 1.2, n)
    V = ROUND.v(x)
    samples = rho(xi * xi / V + V) * (1.8 * 2.4)
    est, sigma = samples.mean(), samples.std() / np.sqrt(n)
    assert abs(first_invariant_smooth(ROUND, rho, 1.0) - est) < 3 * sigma


@pytest.mark.parametrize("p", [ROUND, ASYM])
@pytest.mark.parametrize("rho", [smooth_bump(2.0, 0.5), mollified_indicator(4.0, 0.1)])
def test_integration_by_parts_identity(p, rho):
    a, b = second_invariant_smooth(p, rho, 1.0, form="both")
    assert a == pytest.approx(b, rel=1e-6)


def test_smooth_invariants_reflection():
    rho = smooth_bump(2.5, 0.7)
    for fn in (first_invariant_smooth, second_invariant_smooth):
        assert fn(ASYM, rho, 1.0) == pytest.approx(fn(ASYM.mirrored(), rho, 1.0), rel=1e-10)


def test_unknown_form():
    with pytest.raises(ValueError):
        second_invariant_smooth(ROUND, smooth_bump(2.0, 0.5), 1.0, form="fourth")
