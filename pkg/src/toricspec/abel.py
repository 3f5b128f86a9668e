"""Fractional integration, its inversion, and a weakly singular Volterra solver.

``J^a g(s) = (1/Gamma(a)) ∫_0^s (s - nu)^(a-1) g(nu) dnu``.

The Volterra problem is::

    G(beta) = ∫_0^beta sqrt(beta - S) [A(S, beta) F(S) + B(S, beta) F'(S)] dS,   F(0) = 0,

with, writing ``r = S + c`` and ``g = beta + c``::

    A = -(r^2 - r g + 3 g^2 / 4) / (9 r^(5/2)),
    B = (g - r)(2 r + 3 g) / (45 r^(3/2)).
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline, PPoly, make_interp_spline
from scipy.signal import savgol_coeffs, savgol_filter

from .errors import IllConditioned, NoiseDominated

__all__ = [
    "SampledFunction",
    "frac_integrate",
    "half_integral_ppoly",
    "abel_invert_threehalves",
    "kernel_A",
    "kernel_B",
    "kernel_A_terms",
    "kernel_B_terms",
    "parts_kernel",
    "differentiated_kernel",
    "homogeneous_solution",
    "partial_fraction_residues",
    "forward_volterra",
    "volterra_solve",
]


@dataclass(frozen=True)
class SampledFunction:
    """Values on a uniform grid starting at ``grid[0]``.

    Attributes
    ----------
    grid : ndarray
        Uniform, strictly increasing.
    values : ndarray
    derivative : ndarray or None
    """

    grid: np.ndarray
    values: np.ndarray
    derivative: np.ndarray = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("grid and values must be 1-d arrays of equal length >= 2")
        steps = np.diff(grid)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps.mean():
            raise ValueError("grid must be uniform and increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.derivative is not None:
            object.__setattr__(self, "derivative", np.asarray(self.derivative, dtype=float))

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])


# ---------------------------------------------------------------------------
# fractional integration


def _product_weights(grid, i, a):
    """Weights ``w`` with ``∫_{s_0}^{s_i} (s_i - nu)^(a-1) g = sum_j w_j g_j`` for linear ``g``."""
    s = grid[i]
    s0, s1 = grid[:i], grid[1 : i + 1]
    r0, r1 = s - s0, s - s1
    m0 = (r0**a - r1**a) / a
    # ∫ (s - nu)^(a-1) (nu - s0) dnu
    m1 = r0 * m0 - (r0 ** (a + 1) - r1 ** (a + 1)) / (a + 1)
    hh = s1 - s0
    w = np.zeros(i + 1)
    w[:i] += m0 - m1 / hh
    w[1:] += m1 / hh
    return w


def frac_integrate(g, a):
    """``J^a g`` by product integration with piecewise-linear ``g``.

    Parameters
    ----------
    g : SampledFunction
    a : float
        Positive order.

    Returns
    -------
    SampledFunction
        On the same grid; the lower limit is ``g.grid[0]``.
    """
    if a <= 0:
        raise ValueError("order must be positive")
    x, y = g.grid, g.values
    out = np.zeros_like(y)
    for i in range(1, len(x)):
        out[i] = _product_weights(x, i, a) @ y[: i + 1]
    return SampledFunction(x, out / special.gamma(a))


def half_integral_ppoly(pp, points):
    """Exact ``J^{1/2}`` of a piecewise polynomial, lower limit ``pp.x[0]``.

    Parameters
    ----------
    pp : scipy.interpolate.PPoly
    points : ndarray
        Evaluation points ``>= pp.x[0]``.
    """
    b = np.asarray(points, dtype=float)
    out = np.zeros_like(b)
    x, C = pp.x, pp.c
    k = C.shape[0] - 1
    for j in range(len(x) - 1):
        t0, t1 = x[j], x[j + 1]
        sel = b > t0
        if not sel.any():
            continue
        bb = b[sel]
        B = bb - t0
        wl = bb - np.minimum(t1, bb)
        wh = bb - t0
        acc = np.zeros_like(bb)
        # (nu - t0)^p = (B - w)^p with w = bb - nu
        for p in range(k + 1):
            coef = C[k - p, j]
            if coef == 0:
                continue
            s = np.zeros_like(bb)
            for i in range(p + 1):
                e = i + 0.5
                s += comb(p, i) * B ** (p - i) * (-1) ** i * (wh**e - wl**e) / e
            acc += coef * s
        out[sel] += acc
    return out / special.gamma(0.5)


def abel_invert_threehalves(G, method="savgol", window=7, polyorder=2, noise_threshold=0.05):
    """Solve ``G = Gamma(3/2) J^{3/2} h`` for ``h``.

    Parameters
    ----------
    G : SampledFunction
        Grid starting at 0 with ``G(0) = 0``.
    method : {"savgol", "spline"}
        ``"savgol"``: ``h = J^{1/2} G`` differentiated twice with a local
        polynomial (Savitzky-Golay) fit.  ``"spline"``: a quintic spline
        of ``G`` whose second derivative is half-integrated exactly.
    window, polyorder : int
        Savitzky-Golay window length and degree.
    noise_threshold : float
        Largest tolerated ratio of amplified fit residual to signal.

    Raises
    ------
    NoiseDominated
        If the local-fit residuals, amplified by the second difference,
        exceed ``noise_threshold`` times the recovered signal.
    """
    S, y = G.grid, G.values
    if S[0] != 0:
        raise ValueError("grid must start at 0")
    if not np.any(y):
        return SampledFunction(S, np.zeros_like(y))
    gamma32 = special.gamma(1.5)
    if method == "spline":
        sp = make_interp_spline(S, y, k=5)
        pp = PPoly.from_spline(sp.derivative(2))
        d1 = float(sp.derivative(1)(0.0))
        h = np.empty_like(y)
        h[1:] = half_integral_ppoly(pp, S[1:]) + d1 / (special.gamma(0.5) * np.sqrt(S[1:]))
        # J^{1/2} G'' is finite at 0; the G'(0) term is singular and only
        # vanishes for G'(0) = 0
        h[0] = h[1] if d1 != 0 else half_integral_ppoly(pp, S[:1])[0]
        return SampledFunction(S, h / gamma32)
    if method != "savgol":
        raise ValueError(f"unknown method {method!r}")
    half = frac_integrate(G, 0.5).values
    step = G.step
    smooth = savgol_filter(half, window, polyorder, mode="interp")
    resid = half - smooth
    d2 = savgol_filter(half, window, polyorder, deriv=2, delta=step, mode="interp")
    gain = np.linalg.norm(savgol_coeffs(window, polyorder, deriv=2, delta=step))
    noise = np.sqrt(np.mean(resid**2)) * gain
    signal = np.sqrt(np.mean(d2**2))
    if noise > noise_threshold * signal:
        raise NoiseDominated(
            f"amplified local-fit residual {noise:.3g} exceeds {noise_threshold} x signal {signal:.3g}", "abel"
        )
    return SampledFunction(S, d2 / gamma32)


# ---------------------------------------------------------------------------
# Volterra kernel


def kernel_A(S, beta, c):
    """Factored ``A``."""
    r, g = S + c, beta + c
    return -(r * r - r * g + 0.75 * g * g) / (9.0 * r * r * np.sqrt(r))


def kernel_B(S, beta, c):
    """Factored ``B``; vanishes on the diagonal ``S = beta``."""
    r, g = S + c, beta + c
    return (g - r) * (2.0 * r + 3.0 * g) / (45.0 * r * np.sqrt(r))


def kernel_A_terms(S, beta, c):
    """``A`` as the sum of its three monomials in ``s = S + c``."""
    s, g = S + c, beta + c
    return -1.0 / (9.0 * np.sqrt(s)) + g / (9.0 * s**1.5) - g * g / (12.0 * s**2.5)


def kernel_B_terms(S, beta, c):
    """``B`` as the sum of its three monomials in ``s = S + c``."""
    s, g = S + c, beta + c
    return g * g / (15.0 * s**1.5) - g / (45.0 * np.sqrt(s)) - 2.0 * np.sqrt(s) / 45.0


def parts_kernel(S, beta, c):
    """``k`` with ``G(beta) = ∫ sqrt(beta - S) k F dS`` after integrating the F' term by parts."""
    r, g = S + c, beta + c
    return (g * g + 8.0 * g * r - 4.0 * r * r) / (60.0 * r * r * np.sqrt(r))


def differentiated_kernel(S, beta, c):
    """``K`` with ``G'(beta) = ∫ (beta - S)^(-1/2) K F dS``."""
    r, g = S + c, beta + c
    return (g * g + 4.0 * g * r - 4.0 * r * r) / (24.0 * r * r * np.sqrt(r))


def homogeneous_solution(S, beta, c, C=1.0):
    """``C (S+c)^(5/4) (beta-S)^(-3/4) (2S+3beta+5c)^(-3)``, annihilated by ``A + B d/dS``."""
    return C * (S + c) ** 1.25 * (beta - S) ** -0.75 * (2.0 * S + 3.0 * beta + 5.0 * c) ** -3


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_eval(p, x):
    return sum(a * x**i for i, a in enumerate(p))


def _poly_deriv(p):
    return [i * a for i, a in enumerate(p)][1:]


def partial_fraction_residues(beta=Fraction(1, 3), c=Fraction(2, 7)):
    """Exact residues of ``A/B`` in ``r = S + c`` at ``r = 0``, ``r = g``, ``r = -3g/2``.

    Returned in the convention ``A/B = q1/(S+c) + q2/(beta-S) + q3/(2S+3beta+5c)``.

    Returns
    -------
    tuple of Fraction
        ``(q1, q2, q3)``; independent of ``beta`` and ``c``.
    """
    g = Fraction(beta) + Fraction(c)
    # A/B = N(r)/D(r) with the common r^(5/2) removed
    num = [Fraction(-45, 9) * Fraction(3, 4) * g * g, Fraction(45, 9) * g, Fraction(-45, 9)]
    den = _poly_mul(_poly_mul([Fraction(0), Fraction(1)], [g, Fraction(-1)]), [3 * g, Fraction(2)])
    dden = _poly_deriv(den)
    res = [_poly_eval(num, r0) / _poly_eval(dden, r0) for r0 in (Fraction(0), g, Fraction(-3, 2) * g)]
    # 1/(beta - S) = -1/(r - g);  1/(2S+3beta+5c) = (1/2)/(r + 3g/2)
    return res[0], -res[1], 2 * res[2]


# ---------------------------------------------------------------------------
# solver


def forward_volterra(F, dF, beta, c, nodes=48):
    """``∫_0^beta sqrt(beta - S)[A F + B F'] dS`` by Gauss-Jacobi quadrature.

    Parameters
    ----------
    F, dF : callable
        Smooth ``F`` and its derivative.
    beta : array_like
    """
    t, w = special.roots_jacobi(nodes, 0.5, 0.0)
    # weight (1 - t)^(1/2) on [-1, 1]; S = beta (1 + t)/2
    out = []
    for b in np.atleast_1d(np.asarray(beta, dtype=float)):
        if b <= 0:
            out.append(0.0)
            continue
        S = 0.5 * b * (1.0 + t)
        scale = (0.5 * b) ** 1.5
        out.append(scale * np.sum(w * (kernel_A(S, b, c) * F(S) + kernel_B(S, b, c) * dF(S))))
    return np.array(out)


def _sqrt_moments(b, s):
    # ∫_0^s sqrt(nu)/sqrt(b - nu) {1, nu} dnu
    th = np.arcsin(np.sqrt(np.clip(s / b, 0.0, 1.0)))
    m0 = b * (th - np.sin(th) * np.cos(th))
    m1 = 2.0 * b * b * (3.0 * th / 8.0 - np.sin(2.0 * th) / 4.0 + np.sin(4.0 * th) / 32.0)
    return m0, m1


def _volterra_once(S, dG, c, pivot_tol):
    # unknown phi = F / sqrt(S), piecewise linear; weight sqrt(S)/sqrt(beta - S)
    n = len(S)
    phi = np.zeros(n)
    rows = []
    for i in range(1, n):
        b = S[i]
        a0, a1 = _sqrt_moments(b, S[:i])
        b0, b1 = _sqrt_moments(b, S[1 : i + 1])
        m0, m1 = b0 - a0, b1 - a1
        hh = S[1 : i + 1] - S[:i]
        w = np.zeros(i + 1)
        w[:i] += (S[1 : i + 1] * m0 - m1) / hh
        w[1:] += (m1 - S[:i] * m0) / hh
        row = w * differentiated_kernel(S[: i + 1], b, c)
        rows.append(row)
        scale = np.max(np.abs(row))
        if abs(row[i]) < pivot_tol * scale:
            raise IllConditioned(f"pivot {row[i]:.3g} below tolerance at beta={b:.6g}", beta=float(b))
        if i == 2:
            # phi_0 is not determined by the data; extrapolate it linearly
            r1, r2 = rows
            M = np.array([[2 * r1[0] + r1[1], -r1[0]], [2 * r2[0] + r2[1], r2[2] - r2[0]]])
            phi[1], phi[2] = np.linalg.solve(M, [dG[1], dG[2]])
            phi[0] = 2 * phi[1] - phi[2]
        elif i > 2:
            phi[i] = (dG[i] - row[:i] @ phi[:i]) / row[i]
    return phi * np.sqrt(S)


def volterra_solve(G, c, dG=None, extrapolate=True, pivot_tol=1e-12):
    """Recover ``F`` with ``F(0) = 0`` from samples of ``G``.

    The equation is differentiated once in ``beta``; the boundary term
    vanishes and the kernel becomes ``(beta - S)^(-1/2) K(S, beta)`` (see
    :func:`differentiated_kernel`).  Product integration on a piecewise
    linear ``F / sqrt(S)`` gives a lower-triangular system.

    Parameters
    ----------
    G : SampledFunction
        Grid starting at 0.
    c : float
        Positive shift.
    dG : ndarray, optional
        ``G'`` on the grid; if omitted a quintic interpolating spline of
        ``G`` is differentiated.
    extrapolate : bool
        Richardson-correct with the solution on every other grid point.
    pivot_tol : float
        Smallest tolerated ratio of diagonal to largest row weight.

    Raises
    ------
    IllConditioned
        If a diagonal pivot falls below tolerance.
    """
    S = G.grid
    if S[0] != 0:
        raise ValueError("grid must start at 0")
    if c <= 0:
        raise ValueError("c must be positive")
    if dG is None:
        dG = make_interp_spline(S, G.values, k=5).derivative(1)(S)
    dG = np.asarray(dG, dtype=float)
    if not np.any(dG):
        return SampledFunction(S, np.zeros_like(S))
    F = _volterra_once(S, dG, c, pivot_tol)
    if extrapolate and len(S) >= 9:
        coarse = _volterra_once(S[::2], dG[::2], c, pivot_tol)
        # second-order scheme: error on the fine grid is about (F_h - F_2h)/3
        corr = (F[::2] - coarse) / 3.0
        F = F + CubicSpline(S[::2], corr)(S)
    return SampledFunction(S, F)
