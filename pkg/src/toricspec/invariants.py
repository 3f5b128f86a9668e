"""The first two semiclassical invariants of a single-well profile.

With ``tau = xi^2/v + alpha^2 v`` the invariants are

* ``I1(rho) = ∫∫ rho(tau) dx dxi``,
* ``I2(rho)``, a combination of integrals of ``rho''``, ``rho'''`` and
  ``rho''''`` against explicit functions of ``(x, xi)``; integrating by parts
  in ``xi`` turns it into a single integral against ``rho'''``.

Replacing ``rho`` by the indicator of ``[0, lam]`` gives the area function

    W(lam) = ∫_{v < lam/alpha^2} sqrt(lam v - alpha^2 v^2) dx

and the analogous second-invariant function ``Q(lam)``, the integral of
the ``rho'''``-kernel over the part of the sublevel set with ``xi > 0``.
``Q`` is computed from the form already integrated in ``xi``.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize, special

from .errors import QuadratureError

__all__ = [
    "PhaseRegion",
    "InvariantCurve",
    "boundary_point",
    "first_invariant_smooth",
    "second_invariant_smooth",
    "area",
    "second_area",
    "area_curve",
    "q_curve",
    "invariant_curves",
    "q_direct_2d",
    "q_branch_s_form",
    "default_lambda_grid",
    "expanded_integrands",
    "third_derivative_kernel",
]


def boundary_point(p, level, side):
    """Distance ``r > 0`` from the origin with ``v(side * r) = level``.

    Parameters
    ----------
    p : MetricProfile
        A single well; ``v(0) < level``.
    level : float
    side : {1, -1}
    """
    f = lambda r: float(p.v(side * r)) - level
    hi = 1.0 - 1e-15
    if f(0.0) >= 0.0:
        return 0.0
    return optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class PhaseRegion:
    """Sublevel set ``{tau < lam}`` in the half plane ``xi > 0``."""

    profile: object
    level: float
    alpha: float

    @property
    def extent(self):
        """``(x_minus, x_plus)``; empty region gives ``(0, 0)``."""
        L = self.level / self.alpha**2
        if L <= self.profile.minimum_value:
            return (0.0, 0.0)
        return (-boundary_point(self.profile, L, -1), boundary_point(self.profile, L, 1))

    def xi_max(self, x):
        v = self.profile.v(x)
        return np.sqrt(np.maximum(self.level * v - self.alpha**2 * v * v, 0.0))


@dataclass(frozen=True)
class InvariantCurve:
    """λ-resolved invariants.

    Attributes
    ----------
    alpha : float
    lambdas : ndarray
        Ascending levels.
    W, Q : ndarray or None
        First invariant (area) and second invariant at each level.
    c : float or None
        Detected minimum of ``v``.
    """

    alpha: float
    lambdas: np.ndarray
    W: np.ndarray = None
    Q: np.ndarray = None
    c: float = None

    def with_c(self, c):
        return replace(self, c=float(c))


def default_lambda_grid(p, alpha, points=200):
    """``points`` levels from ``alpha^2 c (1 + 1e-3)`` to ``alpha^2 v(0.95)``."""
    c = p.minimum_value
    top = float(min(p.v(0.95), p.v(-0.95)))
    return np.linspace(alpha**2 * c * (1 + 1e-3), alpha**2 * top, int(points))


# ---------------------------------------------------------------------------
# integrands


def expanded_integrands(V, V1, V2, xi, alpha):
    """Coefficients of ``rho''``, ``rho'''`` and ``rho''''`` in the second invariant."""
    a2 = alpha * alpha
    x2 = xi * xi
    w = a2 - x2 / V**2
    r2 = (0.5 / V) * (x2 * (V2 / V**2 - 2 * V1**2 / V**3) - a2 * V2)
    r3 = -(2.0 / 3.0) * (x2 / V) * (x2 * (3 * V1**2 / V**4 - V2 / V**3) + a2 * (V2 / V - V1**2 / V**2))
    r3 = r3 - (1.0 / 3.0) * (V1**2 / V) * w**2
    r4 = -0.5 * (x2 * V1**2 / V**2) * w**2
    return r2, r3, r4


def third_derivative_kernel(V, V1, V2, xi, alpha):
    """Coefficient of ``rho'''`` after integrating by parts in ``xi``."""
    a2 = alpha * alpha
    x2 = xi * xi
    x4 = x2 * x2
    k = -0.5 * ((2 * x4 / (3 * V**2)) * (V2 / V**2 - 2 * V1**2 / V**3) - 2 * a2 * V2 * x2 / V**2)
    k = k - (2 * x2 / (3 * V)) * (x2 * (3 * V1**2 / V**4 - V2 / V**3) + a2 * (V2 / V - V1**2 / V**2))
    k = k - (V1**2 / (3 * V)) * (a2 - x2 / V**2) ** 2
    k = k + (V1**2 / (2 * V)) * (5 * x4 / (2 * V**4) - 3 * x2 * a2 / V**2 + a2 * a2 / 2)
    return k


def _xi_integrated_bracket(V, V1, V2, lam, alpha):
    # Q integrand after the xi-integration, divided by sqrt(lam v - alpha^2 v^2)
    a2 = alpha * alpha
    a4 = a2 * a2
    return (
        -a4 / 9 * V1**2 / V
        - lam * a2 / 45 * V2 / V
        + lam * a2 / 9 * V1**2 / V**2
        + lam**2 / 15 * V2 / V**2
        - 2 * a4 * V2 / 45
        - lam**2 / 12 * V1**2 / V**3
    )


# ---------------------------------------------------------------------------
# smooth-test-function forms


def _gl(n):
    u, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (u + 1.0), 0.5 * w


def _tensor_integral(p, alpha, breaks, fn, n):
    """∫_x ∫ fn dxi dx over ``{tau < breaks[-1], xi > 0}``.

    ``breaks`` are the levels of ``tau`` where the test function changes
    character (support ends, edges of transitions).  Every fibre is split
    at those levels and the x-range at the points where ``alpha^2 v``
    crosses them; each x piece uses a cosine map, which absorbs the
    square-root behaviour of the split points at both of its ends.
    """
    breaks = np.asarray(sorted(breaks), dtype=float)
    top = breaks[-1]
    L = top / alpha**2
    if L <= p.minimum_value:
        return None
    region = PhaseRegion(p, top, alpha)
    t, wt = _gl(n)
    eta, weta = _gl(n)
    inner = [b for b in breaks[:-1] if np.isfinite(b) and b / alpha**2 > p.minimum_value]
    total = 0.0
    for side in (1, -1):
        cuts = [0.0] + [boundary_point(p, b / alpha**2, side) for b in inner]
        cuts.append(boundary_point(p, L, side))
        for a0, a1 in zip(cuts[:-1], cuts[1:]):
            if a1 <= a0:
                continue
            x = side * (a0 + (a1 - a0) * 0.5 * (1.0 - np.cos(np.pi * t)))
            jac = (a1 - a0) * 0.5 * np.pi * np.sin(np.pi * t) * wt
            V, V1, V2 = p.v(x), p.v1(x), p.v2(x)
            xm = region.xi_max(x)
            levels = [np.zeros_like(x)]
            for b in breaks[:-1]:
                if np.isfinite(b):
                    levels.append(np.minimum(np.sqrt(np.clip(b * V - alpha**2 * V * V, 0.0, None)), xm))
            levels.append(xm)
            for lo_xi, hi_xi in zip(levels[:-1], levels[1:]):
                width = hi_xi - lo_xi
                if not np.any(width > 0):
                    continue
                # chunk along x to bound memory for large node counts
                for start in range(0, n, _CHUNK):
                    sl = slice(start, start + _CHUNK)
                    xi = lo_xi[sl, None] + width[sl, None] * eta[None, :]
                    vals = fn(V[sl, None], V1[sl, None], V2[sl, None], xi)
                    contrib = np.tensordot(vals, weta, axes=([-1], [0])) * width[sl] * jac[sl]
                    total = total + contrib.sum(axis=-1)
    return total


_CHUNK = 256


def _converged(p, alpha, breaks, fn, rtol, n0=64, nmax=1024, stage="invariants"):
    prev = None
    n = n0
    while n <= nmax:
        val = _tensor_integral(p, alpha, breaks, fn, n)
        if val is None:
            return None
        if prev is not None:
            scale = np.maximum(np.abs(val), 1e-300)
            if np.all(np.abs(val - prev) <= rtol * np.max(scale)):
                return val
        prev = val
        n *= 2
    raise QuadratureError(f"region quadrature did not reach rtol={rtol} at {nmax} nodes", stage)


def first_invariant_smooth(p, rho, alpha, rtol=1e-9):
    """``∫∫ rho(xi^2/v + alpha^2 v) dx dxi`` over ``(-1, 1) x R``."""
    if rho.family == "Zero" or rho.scale == 0:
        return 0.0
    lo, hi = rho.support
    fn = lambda V, V1, V2, xi: rho(xi * xi / V + alpha**2 * V)
    val = _converged(p, alpha, rho.breakpoints, fn, rtol)
    return 0.0 if val is None else 2.0 * float(val)


def second_invariant_smooth(p, rho, alpha, form="expanded", rtol=1e-8):
    """Second invariant of ``rho``.

    Parameters
    ----------
    form : {"expanded", "third", "both"}
        ``"expanded"`` integrates against ``rho''``, ``rho'''`` and
        ``rho''''``; ``"third"`` uses the single ``rho'''`` kernel;
        ``"both"`` returns the pair computed on a common quadrature.
    """
    if rho.family == "Zero" or rho.scale == 0:
        return (0.0, 0.0) if form == "both" else 0.0
    lo, hi = rho.support

    def fn(V, V1, V2, xi):
        tau = xi * xi / V + alpha**2 * V
        jet = rho.jet(tau, 4)
        out = []
        if form in ("expanded", "both"):
            r2, r3, r4 = expanded_integrands(V, V1, V2, xi, alpha)
            out.append(r2 * jet[2] + r3 * jet[3] + r4 * jet[4])
        if form in ("third", "both"):
            out.append(third_derivative_kernel(V, V1, V2, xi, alpha) * jet[3])
        return np.stack(out)

    if form not in ("expanded", "third", "both"):
        raise ValueError(f"unknown form {form!r}")
    val = _converged(p, alpha, rho.breakpoints, fn, rtol)
    if val is None:
        val = np.zeros(2 if form == "both" else 1)
    val = 2.0 * np.asarray(val, dtype=float)
    return (float(val[0]), float(val[1])) if form == "both" else float(val[0])


# ---------------------------------------------------------------------------
# λ-resolved forms


def _side_nodes(nodes, endpoint_rule):
    if endpoint_rule == "substitution":
        u, wu = _gl(nodes)
        return "substitution", u, wu
    if endpoint_rule == "gauss_jacobi":
        # weight (1 - t)^(1/2) on [0, 1], t = x / r
        t, w = special.roots_jacobi(nodes, 0.5, 0.0)
        t = 0.5 * (t + 1.0)
        w = w * 0.5**1.5
        return "gauss_jacobi", t, w
    raise ValueError(f"unknown endpoint_rule {endpoint_rule!r}")


def _level_integrals(p, alpha, lam, nodes, endpoint_rule):
    L = lam / alpha**2
    if L <= p.minimum_value:
        return 0.0, 0.0
    rule, t, w = _side_nodes(nodes, endpoint_rule)
    W = Q = 0.0
    for side in (1, -1):
        r = boundary_point(p, L, side)
        if rule == "substitution":
            x = side * r * (1.0 - t * t)
            jac = 2.0 * r * t * w
            extra = 1.0
        else:
            x = side * r * t
            jac = r * w
            # divide out the (1 - t)^(1/2) carried by the weight
            extra = 1.0 / np.sqrt(np.maximum(1.0 - t, 1e-300))
        V, V1, V2 = p.v(x), p.v1(x), p.v2(x)
        xm = np.sqrt(np.maximum(lam * V - alpha**2 * V * V, 0.0)) * extra
        W += float(np.sum(xm * jac))
        Q += float(np.sum(xm * _xi_integrated_bracket(V, V1, V2, lam, alpha) * jac))
    return W, Q


def area(p, alpha, lam, nodes=64, endpoint_rule="substitution"):
    """``W(lam)``: area of ``{tau < lam, xi > 0}``."""
    return _level_integrals(p, alpha, lam, nodes, endpoint_rule)[0]


def second_area(p, alpha, lam, nodes=64, endpoint_rule="substitution"):
    """``Q(lam)`` from the ``xi``-integrated one-dimensional form."""
    return _level_integrals(p, alpha, lam, nodes, endpoint_rule)[1]


def invariant_curves(p, alpha, lambdas, nodes=64, endpoint_rule="substitution"):
    """Both ``W`` and ``Q`` on an ascending grid of levels."""
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or np.any(np.diff(lambdas) <= 0):
        raise ValueError("lambdas must be a strictly increasing 1-d grid")
    vals = np.array([_level_integrals(p, alpha, l, nodes, endpoint_rule) for l in lambdas]).reshape(-1, 2)
    return InvariantCurve(float(alpha), lambdas, vals[:, 0], vals[:, 1])


def area_curve(p, alpha, lambdas, nodes=64, endpoint_rule="substitution"):
    c = invariant_curves(p, alpha, lambdas, nodes, endpoint_rule)
    return replace(c, Q=None)


def q_curve(p, alpha, lambdas, nodes=64, endpoint_rule="substitution"):
    c = invariant_curves(p, alpha, lambdas, nodes, endpoint_rule)
    return replace(c, W=None)


def q_direct_2d(p, alpha, lam, nodes=96):
    """``Q(lam)`` by direct two-dimensional quadrature of the ``rho'''`` kernel."""
    val = _tensor_integral(
        p, alpha, (lam,), lambda V, V1, V2, xi: third_derivative_kernel(V, V1, V2, xi, alpha), nodes
    )
    return 0.0 if val is None else float(val)


def q_branch_s_form(df, d2f, c, alpha, lam, nodes=200):
    """One branch of ``Q`` written in the level variable ``s = v(x)``.

    Parameters
    ----------
    df, d2f : callable
        First and second derivatives of the inverse branch ``x = f(s)``.
    c : float
        Minimum of ``v``.

    Notes
    -----
    ``s = c + (L - c) sin^2(pi u / 2)`` with ``L = lam/alpha^2`` removes the
    square-root behaviour at both ends of ``[c, L]``.
    """
    L = lam / alpha**2
    if L <= c:
        return 0.0
    u, w = _gl(nodes)
    th = 0.5 * np.pi * u
    s = c + (L - c) * np.sin(th) ** 2
    ds = (L - c) * np.pi * np.sin(th) * np.cos(th) * w
    a2 = alpha * alpha
    a4 = a2 * a2
    rs = np.sqrt(s)
    p1 = 1.0 / df(s)
    p2 = d2f(s) / df(s) ** 2
    coef1 = -a4 / 9 / rs + lam * a2 / 9 / (s * rs) - lam**2 / 12 / (s * s * rs)
    coef2 = lam * a2 / 45 / rs - lam**2 / 15 / (s * rs) + 2 * a4 / 45 * rs
    root = np.sqrt(np.maximum(lam - a2 * s, 0.0))
    return float(np.sum(root * (coef1 * p1 + coef2 * p2) * ds))
