"""Equivariant spectral measure and its two-term semiclassical prediction.

For integer weight ``m`` and ``hbar = alpha / m`` the measure of a test
function ``rho`` is ``mu = sum_k rho(hbar^2 lambda_k)`` over the weight-m
eigenvalues.  Its expansion reads::

    mu = (I1 + hbar^2 I2 + O(hbar^3)) / (2 pi hbar),

with ``I1``, ``I2`` the phase-space integrals of :mod:`.invariants`.
:func:`expansion_prediction` returns them already divided by ``2 pi``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import TruncatedSpectrum
from .invariants import first_invariant_smooth, second_invariant_smooth
from .laplace import equivariant_spectrum, extrapolated_spectrum, resolved_limit

__all__ = [
    "MeasureSample",
    "spectral_measure",
    "expansion_prediction",
    "ConvergenceStudy",
    "convergence_study",
    "richardson",
]

DEFAULT_CELLS = 32768


@dataclass(frozen=True)
class MeasureSample:
    """One value of the spectral measure.

    Attributes
    ----------
    alpha : float
    m : int
    hbar : float
        ``alpha / m``.
    value : float
        ``sum_k rho(hbar^2 lambda_k)``.
    cells : int
        Finite-volume cells of the spectrum.
    lambda_max : float
        Eigenvalue cutoff used.
    truncated : bool
        True if the cutoff lies below ``sup supp(rho) / hbar^2``.
    """

    alpha: float
    m: int
    hbar: float
    value: float
    cells: int
    lambda_max: float
    truncated: bool


def spectral_measure(p, rho, alpha, m, cells=DEFAULT_CELLS, allow_truncated=False, extrapolate=True):
    """``mu = sum_k rho(hbar^2 lambda_k)`` over the weight-``m`` spectrum.

    Parameters
    ----------
    p : MetricProfile
    rho : TestFunction
    alpha : float
        Nonzero.
    m : int
        Nonzero weight; ``hbar = alpha / m``.
    cells : int
        Finite-volume cells for the eigenvalue solve.
    allow_truncated : bool
        Return a sample flagged as truncated instead of raising.
    extrapolate : bool
        Richardson-extrapolate eigenvalues from ``cells`` and ``2 * cells``.

    Raises
    ------
    TruncatedSpectrum
        If ``sup supp(rho) / hbar^2`` exceeds the resolved part of the
        discrete spectrum.
    """
    m = int(m)
    if m == 0 or alpha == 0:
        raise ValueError("need nonzero alpha and m")
    hbar = float(alpha) / m
    if rho.family == "Zero" or rho.scale == 0:
        return MeasureSample(float(alpha), m, hbar, 0.0, int(cells), 0.0, False)
    top = rho.support[1]
    needed = top / hbar**2
    limit = resolved_limit(cells)
    truncated = needed > limit
    if truncated and not allow_truncated:
        raise TruncatedSpectrum(
            f"need eigenvalues up to {needed:.6g} but {cells} cells resolve only {limit:.6g}", "measure"
        )
    lam_max = min(needed, limit)
    solve = extrapolated_spectrum if extrapolate else equivariant_spectrum
    spec = solve(p, m, cells, lam_max)
    vals = rho(hbar**2 * spec.eigenvalues)
    # fixed-order summation keeps results bit-reproducible
    value = float(np.sum(np.sort(vals)))
    return MeasureSample(float(alpha), m, hbar, value, int(cells), float(lam_max), bool(truncated))


def expansion_prediction(p, rho, alpha):
    """``(I1, I2) / (2 pi)``: the hbar^0 and hbar^2 coefficients of ``hbar mu``."""
    if rho.family == "Zero" or rho.scale == 0:
        return 0.0, 0.0
    i1 = first_invariant_smooth(p, rho, alpha)
    i2 = second_invariant_smooth(p, rho, alpha)
    return i1 / (2.0 * np.pi), i2 / (2.0 * np.pi)


def richardson(hbars, values, order=1):
    """Extrapolate ``values(hbar) = L + a hbar^order + ...`` to ``hbar = 0``.

    Uses the two smallest ``hbar``.
    """
    h = np.asarray(hbars, dtype=float)
    y = np.asarray(values, dtype=float)
    idx = np.argsort(h)[:2]
    (h1, h2), (y1, y2) = h[idx], y[idx]
    w1, w2 = h1**order, h2**order
    return float((w2 * y1 - w1 * y2) / (w2 - w1))


@dataclass(frozen=True)
class ConvergenceStudy:
    """Residuals of the measure against its two-term expansion.

    Attributes
    ----------
    m, hbar, mu : ndarray
    I1, I2 : float
        Normalized invariants (already divided by ``2 pi``).
    resid1 : ndarray
        ``hbar mu - I1``.
    resid2 : ndarray
        ``(mu - I1/hbar)/hbar - I2``.
    slope : float
        Least-squares slope of ``log|resid1|`` against ``log hbar``.
    extrapolated : float
        Richardson limit of ``(mu - I1/hbar)/hbar``.
    """

    m: np.ndarray
    hbar: np.ndarray
    mu: np.ndarray
    I1: float
    I2: float
    resid1: np.ndarray
    resid2: np.ndarray
    slope: float
    extrapolated: float


def convergence_study(p, rho, alpha, m_list, cells=DEFAULT_CELLS, extrapolate=True):
    """Compare ``mu`` with ``(I1 + hbar^2 I2) / hbar`` over several weights.

    Raises
    ------
    TruncatedSpectrum
        If any sample would be incomplete.
    """
    ms = np.array(sorted(int(m) for m in m_list))
    i1, i2 = expansion_prediction(p, rho, alpha)
    samples = [spectral_measure(p, rho, alpha, m, cells, extrapolate=extrapolate) for m in ms]
    hb = np.array([s.hbar for s in samples])
    mu = np.array([s.value for s in samples])
    r1 = hb * mu - i1
    scaled = (mu - i1 / hb) / hb
    r2 = scaled - i2
    nz = np.abs(r1) > 0
    if np.count_nonzero(nz) >= 2:
        slope = float(np.polyfit(np.log(np.abs(hb[nz])), np.log(np.abs(r1[nz])), 1)[0])
    else:
        slope = float("nan")
    extrap = richardson(np.abs(hb), scaled) if len(ms) >= 2 else float("nan")
    return ConvergenceStudy(ms, hb, mu, float(i1), float(i2), r1, r2, slope, extrap)
