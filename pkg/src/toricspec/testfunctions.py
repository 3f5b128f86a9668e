"""Compactly supported test functions with exact derivatives up to order four.

Values and derivatives are carried together as jets ``(f, f', ..., f'''')``
and combined with the Leibniz and chain rules.
"""

from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.polynomial import Polynomial

__all__ = ["TestFunction", "smooth_bump", "mollified_indicator", "exponential", "zero_function"]

ORDER = 4


def _psi_polys(order):
    # d^n/dz^n exp(-1/z) = exp(-1/z) P_n(1/z),  P_{n+1}(w) = w^2 (P_n(w) - P_n'(w))
    w2 = Polynomial([0, 0, 1])
    out = [Polynomial([1])]
    for _ in range(order):
        p = out[-1]
        out.append(w2 * (p - p.deriv()))
    return out


_PSI = _psi_polys(ORDER)


def _psi_jet(z):
    z = np.asarray(z, dtype=float)
    pos = z > 0
    zz = np.where(pos, z, 1.0)
    w = 1.0 / zz
    base = np.where(pos, np.exp(-w), 0.0)
    return np.array([np.where(pos, base * p(w), 0.0) for p in _PSI])


def _jet_mul(a, b):
    out = np.zeros_like(a * b)
    for n in range(out.shape[0]):
        for j in range(n + 1):
            out[n] += comb(n, j) * a[j] * b[n - j]
    return out


def _jet_div(a, b):
    # q b = a  =>  q_n = (a_n - sum_{j<n} C(n,j) q_j b_{n-j}) / b_0
    q = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for n in range(q.shape[0]):
        acc = a[n].copy() if np.ndim(a[n]) else np.full(q.shape[1:], a[n])
        for j in range(n):
            acc = acc - comb(n, j) * q[j] * b[n - j]
        q[n] = acc / b[0]
    return q


def _affine(jet, scale):
    # jet of f(scale * t + shift) given jet of f at the mapped point
    return np.array([jet[n] * scale**n for n in range(jet.shape[0])])


def _step_jet(z):
    """Smooth step: 0 for z <= 0, 1 for z >= 1."""
    a = _psi_jet(z)
    b = _affine(_psi_jet(1.0 - np.asarray(z, dtype=float)), -1.0)
    return _jet_div(a, a + b)


def _bump_jet(z):
    """exp(-1/(1 - z^2)) on (-1, 1), zero outside."""
    z = np.asarray(z, dtype=float)
    inside = np.abs(z) < 1
    zz = np.where(inside, z, 0.0)
    # g = -1/(1-z^2) = -(1/(1-z) + 1/(1+z))/2
    g = []
    fact = 1.0
    for n in range(ORDER + 1):
        if n:
            fact *= n
        g.append(-0.5 * fact * ((1 - zz) ** (-(n + 1)) + (-1) ** n * (1 + zz) ** (-(n + 1))))
    e = np.where(inside, np.exp(g[0]), 0.0)
    g1, g2, g3, g4 = g[1:]
    jet = np.array([
        e,
        e * g1,
        e * (g2 + g1**2),
        e * (g3 + 3 * g1 * g2 + g1**3),
        e * (g4 + 4 * g1 * g3 + 3 * g2**2 + 6 * g1**2 * g2 + g1**4),
    ])
    return np.where(inside, jet, 0.0)


@dataclass(frozen=True)
class TestFunction:
    """A test function ``rho`` on the real line.

    Parameters
    ----------
    family : {"SmoothBump", "MollifiedIndicator", "Exponential", "Zero"}
    params : tuple
        ``(center, width)``, ``(lower, upper, eps)`` or ``(Lambda, radius)``.
    scale : float
        Overall constant factor.
    """

    __test__ = False

    family: str
    params: tuple
    scale: float = 1.0

    @property
    def support(self):
        """Closed interval outside which ``rho`` vanishes identically."""
        f, p = self.family, self.params
        if f == "SmoothBump":
            return (p[0] - p[1], p[0] + p[1])
        if f == "MollifiedIndicator":
            return (p[0] - 0.5 * p[2], p[1] + 0.5 * p[2])
        if f == "Exponential":
            return (-np.inf, p[1] + 1.0)
        return (0.0, 0.0)

    @property
    def breakpoints(self):
        """Levels where ``rho`` changes character, ending with the top of the support."""
        f, p = self.family, self.params
        if f == "SmoothBump":
            return (p[0] - p[1], p[0], p[0] + p[1])
        if f == "MollifiedIndicator":
            lo, hi, eps = p
            return (lo - 0.5 * eps, lo + 0.5 * eps, hi - 0.5 * eps, hi + 0.5 * eps)
        if f == "Exponential":
            return (p[1], p[1] + 1.0)
        return (0.0,)

    def jet(self, tau, order=ORDER):
        """Array of shape ``(order + 1,) + tau.shape`` with ``rho^(n)(tau)``."""
        tau = np.asarray(tau, dtype=float)
        f, p = self.family, self.params
        if f == "SmoothBump":
            c, w = p
            out = _affine(_bump_jet((tau - c) / w), 1.0 / w)
        elif f == "MollifiedIndicator":
            lo, hi, eps = p
            up = _affine(_step_jet((tau - lo) / eps + 0.5), 1.0 / eps)
            down = _affine(_step_jet((hi - tau) / eps + 0.5), -1.0 / eps)
            out = _jet_mul(up, down)
        elif f == "Exponential":
            lam, radius = p
            ex = np.exp(-lam * np.minimum(tau, radius + 1.0))
            ej = np.array([ex * (-lam) ** n for n in range(ORDER + 1)])
            cut = _affine(_step_jet(radius + 1.0 - tau), -1.0)
            out = _jet_mul(ej, cut)
        elif f == "Zero":
            out = np.zeros((ORDER + 1,) + tau.shape)
        else:
            raise ValueError(f"unknown test-function family {f!r}")
        return self.scale * out[: order + 1]

    def __call__(self, tau):
        return self.jet(tau, 0)[0]

    def derivative(self, tau, n):
        return self.jet(tau, n)[n]

    def scaled(self, factor):
        return TestFunction(self.family, self.params, self.scale * factor)


def smooth_bump(center, width):
    if width <= 0:
        raise ValueError("width must be positive")
    return TestFunction("SmoothBump", (float(center), float(width)))


def mollified_indicator(upper, eps, lower=0.0):
    """Smoothed indicator of ``[lower, upper]``; each edge is smoothed over width ``eps``."""
    if eps <= 0 or upper <= lower:
        raise ValueError("need eps > 0 and upper > lower")
    return TestFunction("MollifiedIndicator", (float(lower), float(upper), float(eps)))


def exponential(rate, radius):
    """``exp(-rate * tau)`` smoothly cut off between ``radius`` and ``radius + 1``."""
    return TestFunction("Exponential", (float(rate), float(radius)))


def zero_function():
    return TestFunction("Zero", ())
