"""Second derivatives of symplectic potentials on the moment interval.

A profile is the function ``v = g''`` on ``(-1, 1)`` defining the
S^1-invariant metric ``v dx^2 + dtheta^2 / v`` on the sphere.  Every profile
here has the form ``v = 1/(1 - x^2) + w(x)`` with ``w`` smooth on
``[-1, 1]``, which is exactly the condition for the metric to close up
smoothly at the poles.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import make_interp_spline

from .errors import DegenerateMinimum, MultiWell, NotPoleRegular

__all__ = [
    "MetricProfile",
    "SingleWellCertificate",
    "make_round_sphere",
    "make_perturbed_well",
    "make_tabulated_profile",
    "profile_from_spec",
    "check_pole_regularity",
    "certify_single_well",
    "certify_sampled_well",
]

POLE_OFFSET = 1e-4
POLE_TOL = 1e-6


def _pole_term(x, order):
    # d^n/dx^n of 1/(1-x^2) = n!/2 * ((1-x)^-(n+1) + (-1)^n (1+x)^-(n+1))
    x = np.asarray(x, dtype=float)
    n = order
    return 0.5 * factorial(n) * ((1.0 - x) ** (-(n + 1)) + (-1) ** n * (1.0 + x) ** (-(n + 1)))


@dataclass(frozen=True)
class MetricProfile:
    """Immutable profile ``v(x) = 1/(1-x^2) + w(x)``.

    Parameters
    ----------
    family : {"RoundSphere", "PolynomialPerturbation", "TabulatedSpline"}
        Construction tag.
    params : tuple
        Coefficients of ``w`` (constant term first) for polynomial
        perturbations, or ``(knots, values)`` for tabulated corrections.
    """

    family: str
    params: tuple = ()
    _smooth: object = field(default=None, repr=False, compare=False)

    def derivative(self, x, order=0):
        """Evaluate ``d^order v / dx^order`` at ``x``."""
        out = _pole_term(x, order)
        if self._smooth is not None:
            out = out + self._smooth(np.asarray(x, dtype=float), order)
        return out

    def v(self, x):
        return self.derivative(x, 0)

    def v1(self, x):
        return self.derivative(x, 1)

    def v2(self, x):
        return self.derivative(x, 2)

    def v3(self, x):
        return self.derivative(x, 3)

    def __call__(self, x):
        return self.derivative(x, 0)

    def mirrored(self):
        """Profile ``x -> v(-x)``."""
        if self.family == "RoundSphere":
            return self
        if self.family == "PolynomialPerturbation":
            coef = np.array(self.params, dtype=float)
            coef[1::2] *= -1.0
            return make_perturbed_well(coef)
        knots, values = self.params
        return make_tabulated_profile(-np.asarray(knots)[::-1], np.asarray(values)[::-1])

    @property
    def minimum_value(self):
        return float(self.v(0.0))


def make_round_sphere():
    """Profile of the round metric, ``v(x) = 1/(1-x^2)``."""
    return MetricProfile("RoundSphere", ())


def make_perturbed_well(coefficients):
    """Profile ``1/(1-x^2) + P(x)`` for a polynomial ``P`` with ``P'(0) = 0``.

    Parameters
    ----------
    coefficients : sequence of float
        Coefficients of ``P``, constant term first.

    Raises
    ------
    ValueError
        If ``P`` has a nonzero linear term.
    """
    coef = np.atleast_1d(np.asarray(coefficients, dtype=float))
    if coef.ndim != 1 or not np.all(np.isfinite(coef)):
        raise ValueError("coefficients must be a finite 1-d sequence")
    if coef.size > 1 and coef[1] != 0.0:
        raise ValueError("the perturbation must have no linear term (P'(0) = 0)")
    coef = np.trim_zeros(coef, "b")
    if coef.size == 0:
        return MetricProfile("PolynomialPerturbation", (0.0,))
    polys = [Polynomial(coef)]
    for _ in range(4):
        polys.append(polys[-1].deriv())

    def smooth(x, order):
        if order < len(polys):
            return polys[order](x)
        return polys[-1].deriv(order - len(polys) + 1)(x)

    return MetricProfile("PolynomialPerturbation", tuple(float(c) for c in coef), smooth)


def make_tabulated_profile(knots, values):
    """Profile ``1/(1-x^2) + w(x)`` with ``w`` a quintic interpolating spline.

    The tabulated values describe the smooth correction ``w`` on knots
    covering ``[-1, 1]``; the pole term is always added analytically.
    """
    knots = np.asarray(knots, dtype=float)
    values = np.asarray(values, dtype=float)
    if knots.ndim != 1 or knots.shape != values.shape or knots.size < 6:
        raise ValueError("need at least 6 matching knots and values")
    if np.any(np.diff(knots) <= 0):
        raise ValueError("knots must be strictly increasing")
    spl = make_interp_spline(knots, values, k=5)

    def smooth(x, order):
        return spl(x, nu=order) if order <= 5 else np.zeros_like(x)

    return MetricProfile("TabulatedSpline", (tuple(knots), tuple(values)), smooth)


def profile_from_spec(family, coefficients=()):
    """Build a profile from a family tag and coefficient list."""
    key = family.replace("_", "").replace("-", "").lower()
    if key in ("roundsphere", "round"):
        return make_round_sphere()
    if key in ("polynomialperturbation", "perturbedwell", "polynomial"):
        return make_perturbed_well(coefficients if len(coefficients) else [0.0])
    raise ValueError(f"unknown profile family {family!r}")


def check_pole_regularity(p, offset=POLE_OFFSET, tol=POLE_TOL):
    """Check that ``(1-x^2) v(x) -> 1`` at both poles.

    The limit is estimated from samples at distances ``offset`` and
    ``2*offset`` from each pole by linear extrapolation in the distance,
    which removes the ``O(offset)`` contribution of a smooth correction.

    Raises
    ------
    NotPoleRegular
        If either extrapolated limit differs from 1 by more than ``tol``.
    """
    for pole in (1.0, -1.0):
        x1 = pole * (1.0 - offset)
        x2 = pole * (1.0 - 2.0 * offset)
        r1 = (1.0 - x1 * x1) * p.v(x1)
        r2 = (1.0 - x2 * x2) * p.v(x2)
        limit = 2.0 * r1 - r2
        if not np.isfinite(limit) or abs(limit - 1.0) >= tol:
            raise NotPoleRegular(f"(1-x^2)v -> {limit:.8g} at x = {pole:+.0f}, expected 1")
    return True


@dataclass(frozen=True)
class SingleWellCertificate:
    """Evidence that a profile is a single well with minimum at the origin."""

    c: float
    curvature: float
    grid: np.ndarray = field(repr=False)


def certify_single_well(p, grid_size=10_000):
    """Certify that ``v`` decreases on ``(-1, 0)`` and increases on ``(0, 1)``.

    Parameters
    ----------
    p : MetricProfile
    grid_size : int
        Number of interior sample points used for the sign check of ``v'``.

    Returns
    -------
    SingleWellCertificate

    Raises
    ------
    DegenerateMinimum
        If ``v''(0) <= 0``.
    MultiWell
        If ``v`` is not positive or ``v'`` has the wrong sign somewhere.
    """
    grid_size = int(grid_size)
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    curv = float(p.v2(0.0))
    if not curv > 0.0:
        raise DegenerateMinimum(f"v''(0) = {curv:.6g} is not positive")
    x = np.linspace(-1.0, 1.0, grid_size + 2)[1:-1]
    x = x[x != 0.0]
    if np.any(p.v(x) <= 0.0):
        raise MultiWell("v is not positive on the grid")
    slope = p.v1(x)
    left, right = slope[x < 0], slope[x > 0]
    if np.any(left >= 0.0) or np.any(right <= 0.0):
        bad = x[((x < 0) & (slope >= 0)) | ((x > 0) & (slope <= 0))]
        raise MultiWell(f"v' has the wrong sign at {bad.size} grid points, first x = {bad[0]:.6g}")
    return SingleWellCertificate(float(p.v(0.0)), curv, x)


def certify_sampled_well(x, v):
    """Single-well check for a sampled profile (e.g. a reconstruction).

    The minimum must be attained at the sample closest to ``x = 0`` and the
    samples must be strictly monotone on either side of it.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    order = np.argsort(x)
    x, v = x[order], v[order]
    i0 = int(np.argmin(np.abs(x)))
    if np.any(v <= 0.0):
        raise MultiWell("sampled v is not positive")
    if np.any(np.diff(v[: i0 + 1]) >= 0.0) or np.any(np.diff(v[i0:]) <= 0.0):
        raise MultiWell("sampled v is not monotone on each side of the origin")
    d2 = np.gradient(np.gradient(v, x), x)[i0]
    if not d2 > 0.0:
        raise DegenerateMinimum("sampled curvature at the origin is not positive")
    return SingleWellCertificate(float(v[i0]), float(d2), x)
