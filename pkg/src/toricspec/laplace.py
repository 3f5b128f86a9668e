"""Equivariant spectrum of the Laplacian of ``v dx^2 + dtheta^2 / v``.

The Riemannian density of this metric is identically one, so on functions
``exp(i m theta) f(x)`` the Laplacian acts as::

    L_m f = -(f' / v)' + m^2 v f.

It is discretized by finite volumes on ``N`` uniform cells of ``(-1, 1)``
with zero flux through the poles, where ``1/v`` vanishes.

Near a pole the weight-m eigenfunctions behave like ``(1 - x^2)^(|m|/2)``.
For odd ``m`` this is a half-integer power, which drops the scheme to
first order.  Writing ``f = (1 - x^2)^(1/2) g`` for odd ``m`` gives a
problem for ``g`` with smooth coefficients and the same spectrum; after
symmetric scaling by the diagonal mass matrix it is again tridiagonal.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .profiles import check_pole_regularity

__all__ = [
    "EquivariantSpectrum",
    "laplacian_mode_operator",
    "equivariant_spectrum",
    "resolved_limit",
    "extrapolated_spectrum",
]


@dataclass(frozen=True)
class EquivariantSpectrum:
    """Eigenvalues of ``L_m`` up to a cutoff.

    Attributes
    ----------
    m : int
        Weight of the circle action.
    eigenvalues : ndarray
        Ascending eigenvalues.
    cells : int
        Number of finite-volume cells.
    lambda_max : float
        Cutoff used.
    """

    m: int
    eigenvalues: np.ndarray
    cells: int
    lambda_max: float


def laplacian_mode_operator(p, m, cells):
    """Symmetric tridiagonal matrix of the weight-``m`` mode operator.

    Parameters
    ----------
    p : MetricProfile
    m : int
    cells : int
        Number of cells, at least 16.

    Returns
    -------
    diag, offdiag : ndarray
        Main diagonal (length ``cells``) and off-diagonal (length ``cells - 1``).
    """
    cells = int(cells)
    if cells < 16:
        raise ValueError("need at least 16 cells")
    check_pole_regularity(p)
    m = int(m)
    h = 2.0 / cells
    x = -1.0 + (np.arange(cells) + 0.5) * h
    v = p.v(x)
    u = 1.0 / v
    if m % 2 == 0:
        coef = u
        potential = float(m) ** 2 * v
        mass = None
    else:
        # f = sqrt(1 - x^2) g: stiffness s/v, mass s, and the potential
        # x^2 u/s + u + x u' + m^2 v s with u = 1/v, s = 1 - x^2
        s = 1.0 - x * x
        du = -p.v1(x) * u * u
        coef = s * u
        potential = x * x * u / s + u + x * du + float(m) ** 2 * v * s
        mass = s
    # harmonic mean of the flux coefficient at interior faces
    face = 2.0 * coef[:-1] * coef[1:] / (coef[:-1] + coef[1:])
    k = face / (h * h)
    diag = np.zeros(cells)
    diag[:-1] += k
    diag[1:] += k
    diag += potential
    off = -k
    if mass is not None:
        r = 1.0 / np.sqrt(mass)
        diag = diag * r * r
        off = off * r[:-1] * r[1:]
    return diag, off


def resolved_limit(cells):
    """Eigenvalues above ``(cells/4)^2`` are treated as unresolved."""
    return (cells / 4.0) ** 2


def equivariant_spectrum(p, m, cells, lambda_max):
    """Eigenvalues of ``L_m`` not exceeding ``lambda_max``.

    Eigenvalues beyond :func:`resolved_limit` are discarded as well.
    """
    diag, off = laplacian_mode_operator(p, m, cells)
    top = min(float(lambda_max), resolved_limit(cells))
    lower = float(m) ** 2 * float(np.min(p.v(np.linspace(-0.999, 0.999, 2001))))
    if top < lower * (1 - 1e-12) or top < 0:
        return EquivariantSpectrum(int(m), np.empty(0), int(cells), float(lambda_max))
    # the matrix is positive semidefinite; shift the lower end below zero
    vals = eigh_tridiagonal(diag, off, eigvals_only=True, select="v", select_range=(-1.0, top))
    return EquivariantSpectrum(int(m), np.sort(vals), int(cells), float(lambda_max))


def extrapolated_spectrum(p, m, cells, lambda_max):
    """Richardson-extrapolated eigenvalues from ``cells`` and ``2 * cells``.

    The scheme is second order, so ``(4 lam_2N - lam_N) / 3`` removes the
    leading error.  Eigenvalues are matched by index, which is valid for a
    simple Sturm-Liouville spectrum computed from the same lower end.
    """
    margin = 1.02 * float(lambda_max) + 1.0
    coarse = equivariant_spectrum(p, m, cells, margin).eigenvalues
    fine = equivariant_spectrum(p, m, 2 * int(cells), margin).eigenvalues
    n = min(len(coarse), len(fine))
    vals = (4.0 * fine[:n] - coarse[:n]) / 3.0
    vals = vals[vals <= min(float(lambda_max), resolved_limit(cells))]
    return EquivariantSpectrum(int(m), vals, 2 * int(cells), float(lambda_max))
