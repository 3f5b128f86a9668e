"""Reconstruction of a single-well profile from its λ-resolved invariants.

Write ``f1``, ``f2`` for the inverses of ``s = v(x)`` on ``x > 0`` and
``x < 0`` (as distances from 0), ``S = s - c`` and ``beta = lam/alpha^2 - c``.
Then::

    W(lam)/|alpha|   = Gamma(3/2) J^{3/2}[sqrt(S + c) D](beta),   D = f1' + f2',
    Q(lam)/|alpha|^5 = ∫_0^beta sqrt(beta - S)[A F + B F'] dS,     F = 1/f1' + 1/f2'.

``D`` and ``F`` give ``f1' f2' = D/F`` and hence the unordered pair
``{f1', f2'}``; integrating and inverting gives ``v`` up to ``x -> -x``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy.interpolate import CubicSpline, PchipInterpolator, PPoly, make_interp_spline

from .abel import SampledFunction, half_integral_ppoly, volterra_solve
from .errors import DegenerateMinimum, MultiWell, NegativeDiscriminant, NonMonotoneBranch, ThresholdNotBracketed
from .invariants import InvariantCurve, default_lambda_grid, invariant_curves
from .profiles import certify_sampled_well, certify_single_well

__all__ = [
    "detect_c",
    "RecoveredSum",
    "recover_sum",
    "recover_recip_sum",
    "BranchPair",
    "split_branches",
    "ReconstructionResult",
    "assemble_profile",
    "roundtrip_grid",
    "reconstruct",
    "RoundtripReport",
    "roundtrip",
]


# ---------------------------------------------------------------------------
# threshold


def _power_onset(x, y, lo, hi):
    # log W = log a + p log(lam - lam*) + log(1 + b (lam - lam*))
    def resid(q):
        ls, p, la, b = q
        d = np.maximum(x - ls, 1e-300)
        return la + p * np.log(d) + np.log1p(b * d) - np.log(y)

    best = None
    mid = 0.5 * (lo + hi)
    for p0 in (0.5, 1.0, 1.5, 2.0):
        q0 = [mid, p0, np.log(y[0]) - p0 * np.log(x[0] - mid), 0.0]
        lower = [lo, 0.25, -np.inf, -1.0 / (x[-1] - lo) + 1e-9]
        upper = [np.nextafter(hi, lo), 4.0, np.inf, np.inf]
        r = optimize.least_squares(resid, q0, bounds=(lower, upper), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or r.cost < best.cost:
            best = r
    ls, p, la, b = best.x
    d = x - ls
    model = np.exp(la) * d**p * (1.0 + b * d)
    return float(ls), model


def detect_c(curve, threshold=1e-8, fit_points=14, fit_degree=8):
    """Minimum ``c`` of ``v`` from where the area ``W`` becomes positive.

    The first level with ``W > threshold * max W`` brackets the onset
    together with its predecessor.  Two models of ``W`` are fitted to the
    first ``fit_points`` positive samples: a polynomial of degree
    ``fit_degree`` (the onset is then found by bisection inside the
    bracket) and a power law ``a (lam - lam*)^p (1 + b (lam - lam*))``.
    The model with the smaller relative residual wins; the polynomial
    suits the linear onset of a nondegenerate well, the power law
    non-analytic onsets.

    Parameters
    ----------
    curve : InvariantCurve
        Must contain at least one level with ``W = 0``.

    Returns
    -------
    float
        ``lam* / alpha^2``.

    Raises
    ------
    ThresholdNotBracketed
        If no level below the onset is present, or ``W`` never rises.
    """
    lam = np.asarray(curve.lambdas, dtype=float)
    W = np.asarray(curve.W, dtype=float)
    if W.size == 0 or not np.any(W > 0):
        raise ThresholdNotBracketed("area curve never becomes positive", "detect_c")
    pos = np.nonzero(W > threshold * W.max())[0]
    i = int(pos[0])
    if i == 0:
        raise ThresholdNotBracketed("first level already lies above the threshold", "detect_c")
    idx = pos[:fit_points]
    x, y = lam[idx], W[idx]
    lo, hi = lam[i - 1], lam[i]
    candidates = []
    deg = min(fit_degree, len(idx) - 1)
    poly = np.polynomial.Polynomial.fit(x, y, deg)
    a, b = lo, hi
    if poly(b) > 0 >= poly(a):
        for _ in range(200):
            mid = 0.5 * (a + b)
            if poly(mid) > 0:
                b = mid
            else:
                a = mid
            if b - a <= 1e-15 * b:
                break
        candidates.append((np.sqrt(np.mean(((poly(x) - y) / y) ** 2)), 0.5 * (a + b)))
    if len(idx) >= 4:
        onset, model = _power_onset(x, y, lo, hi)
        candidates.append((np.sqrt(np.mean(((model - y) / y) ** 2)), onset))
    if not candidates:
        return float(hi) / curve.alpha**2
    return float(min(candidates)[1]) / curve.alpha**2


# ---------------------------------------------------------------------------
# sum of branch derivatives


def _cumint_inv_sqrt(S, y):
    """``∫_0^S y(nu)/sqrt(nu) dnu`` for piecewise-linear ``y``."""
    r0, r1 = np.sqrt(S[:-1]), np.sqrt(S[1:])
    m0 = 2.0 * (r1 - r0)
    m1 = (2.0 / 3.0) * (r1**3 - r0**3)
    hh = S[1:] - S[:-1]
    cell = (y[:-1] * (S[1:] * m0 - m1) + y[1:] * (m1 - S[:-1] * m0)) / hh
    return np.r_[0.0, np.cumsum(cell)]


@dataclass(frozen=True)
class RecoveredSum:
    """``D(s) = f1'(s) + f2'(s)`` on ``s = S + c``.

    ``D`` blows up like ``S^(-1/2)`` at ``S = 0``; the finite quantity
    ``sqrt(S) D`` is stored.

    Attributes
    ----------
    S : ndarray
        Uniform grid from 0.
    c : float
    scaled : ndarray
        ``sqrt(S) D(S + c)``.
    """

    S: np.ndarray
    c: float
    scaled: np.ndarray

    @property
    def s(self):
        return self.S + self.c

    @property
    def D(self):
        with np.errstate(divide="ignore"):
            return np.where(self.S > 0, self.scaled / np.sqrt(self.S), np.inf)

    def integral(self):
        """``f1 + f2`` on the grid, zero at ``S = 0``."""
        return _cumint_inv_sqrt(self.S, self.scaled)


def _beta_data(curve, c, which):
    alpha = curve.alpha
    beta = np.asarray(curve.lambdas, dtype=float) / alpha**2 - c
    vals = np.asarray(getattr(curve, which), dtype=float)
    keep = beta > 1e-6
    power = 1 if which == "W" else 5
    return beta[keep], vals[keep] / abs(alpha) ** power


def recover_sum(curve, c, points=400):
    """Invert ``W/|alpha| = Gamma(3/2) J^{3/2}[sqrt(S+c) D]`` for ``D``.

    ``G = W/|alpha|`` is interpolated in ``beta`` by a quintic spline
    through ``G(0) = 0``; then ``J^{1/2} G'' + G'(0)/sqrt(pi S)`` is exact
    for the spline and equals ``Gamma(3/2) sqrt(S+c) D``.

    Parameters
    ----------
    curve : InvariantCurve
    c : float
    points : int
        Size of the uniform ``S`` grid on ``[0, beta_max]``.
    """
    beta, G = _beta_data(curve, c, "W")
    sp = make_interp_spline(np.r_[0.0, beta], np.r_[0.0, G], k=5)
    S = np.linspace(0.0, beta[-1], int(points))
    pp = PPoly.from_spline(sp.derivative(2))
    d1 = float(sp.derivative(1)(0.0))
    gam = special.gamma(1.5)
    scaled = np.empty_like(S)
    rS = np.sqrt(S[1:])
    h = half_integral_ppoly(pp, S[1:]) + d1 / (special.gamma(0.5) * rS)
    scaled[1:] = h * rS / (gam * np.sqrt(S[1:] + c))
    scaled[0] = d1 / (special.gamma(0.5) * gam * np.sqrt(c))
    return RecoveredSum(S, float(c), scaled)


def recover_recip_sum(curve, c, points=400, refine=4, extrapolate=True):
    """Solve the Volterra equation for ``F = 1/f1' + 1/f2'``.

    Parameters
    ----------
    curve : InvariantCurve
    c : float
    points : int
        Output grid size on ``[0, beta_max]``.
    refine : int
        The solve runs on a grid ``refine`` times finer.

    Returns
    -------
    SampledFunction
        ``F(S)`` on the output grid, ``F(0) = 0``.
    """
    beta, G = _beta_data(curve, c, "Q")
    sp = make_interp_spline(np.r_[0.0, beta], np.r_[0.0, G], k=5)
    S = np.linspace(0.0, beta[-1], int(points))
    fine = np.linspace(0.0, beta[-1], (int(points) - 1) * int(refine) + 1)
    sol = volterra_solve(SampledFunction(fine, sp(fine)), c, dG=sp.derivative(1)(fine), extrapolate=extrapolate)
    return SampledFunction(S, sol.values[:: int(refine)])


# ---------------------------------------------------------------------------
# branches


@dataclass(frozen=True)
class BranchPair:
    """The two branch derivatives ``f1'``, ``f2'``.

    Attributes
    ----------
    S : ndarray
    c : float
    D, F : ndarray
        Sum and reciprocal sum (``D[0]`` is infinite).
    difference : ndarray
        Signed ``f2' - f1'`` after continuity tracking.
    first, second : ndarray
        ``f1' = (D - difference)/2`` and ``f2' = (D + difference)/2``.
    p, q : ndarray
        Pointwise larger and smaller of the pair.
    labels : ndarray
        1 where ``f1'`` is the smaller branch, 2 where it is the larger, 0 where they coincide.
    start : int
        Index below which the difference is extrapolated, not computed.
    """

    S: np.ndarray
    c: float
    D: np.ndarray
    F: np.ndarray
    difference: np.ndarray
    first: np.ndarray
    second: np.ndarray
    p: np.ndarray
    q: np.ndarray
    labels: np.ndarray
    start: int


def _track_sign(S, d, start):
    # a zero gap (branches within tolerance) may hide a crossing; the sign
    # after the gap follows a linear extrapolation of the signed values
    out = np.zeros_like(d)
    sign = 1.0
    history = []
    last = None
    for i in range(start, len(d)):
        if d[i] == 0:
            continue
        if last is not None and last < i - 1 and len(history) >= 2:
            (s1, y1), (s2, y2) = history[-2], history[-1]
            pred = y2 + (y2 - y1) / (s2 - s1) * (S[i] - s2)
            sign = 1.0 if pred > 0 else -1.0
        elif last is not None and last == i - 1:
            sign = np.sign(out[i - 1])
        out[i] = sign * d[i]
        history.append((S[i], out[i]))
        last = i
    return out


def split_branches(D, F, S=None, c=0.0, tol=1e-5, negative_tol=1e-2, start_fraction=0.01):
    """Recover ``{f1', f2'}`` from ``D = f1' + f2'`` and ``F = 1/f1' + 1/f2'``.

    ``f1' f2' = D/F`` and ``(f2' - f1')^2 = D^2 - 4 D/F``.  Where the
    relative discriminant falls below ``tol`` the branches are taken equal.

    Parameters
    ----------
    D, F : array_like
        On a common grid.  Non-finite or non-positive entries (``S = 0``)
        are filled by extrapolation.
    S : array_like, optional
        Grid; defaults to the sample index.
    c : float
    tol : float
        Relative discriminant below which the branches are merged.
    negative_tol : float
        Relative discriminant below ``-negative_tol`` is an inconsistency.
    start_fraction : float
        When the data contain invalid leading entries, this leading
        fraction of the grid (at least 3 points) gets the difference from a
        quadratic fit on the following samples, because ``D`` and ``F`` are
        least accurate next to ``S = 0``.

    Raises
    ------
    NegativeDiscriminant
        If the data are inconsistent with any real pair.
    """
    D = np.asarray(D, dtype=float)
    F = np.asarray(F, dtype=float)
    n = D.size
    S = np.arange(n, dtype=float) if S is None else np.asarray(S, dtype=float)
    ok = np.isfinite(D) & (F > 0) & (D > 0)
    rel = np.zeros(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.where(ok, D * D - 4.0 * D / np.where(ok, F, 1.0), 0.0)
        rel[ok] = disc[ok] / D[ok] ** 2
    # samples next to an invalid entry (S = 0) are replaced by extrapolation
    start = 0 if ok.all() else min(n, max(3, int(np.ceil(start_fraction * n))))
    if not ok[start:].all():
        raise ValueError("D and F must be finite and positive away from the first samples")
    check = ok.copy()
    check[:start] = False
    if np.any(rel[check] < -negative_tol):
        j = int(np.nonzero(check & (rel < -negative_tol))[0][0])
        raise NegativeDiscriminant(f"relative discriminant {rel[j]:.3g} at index {j}", "split_branches")
    mag = np.where(ok & (rel > tol), np.sqrt(np.maximum(disc, 0.0)), 0.0)
    diff = _track_sign(S, mag, start)
    if start > 0:
        win = slice(start, min(n, 4 * start))
        deg = min(2, win.stop - win.start - 1)
        coef = np.polyfit(S[win], diff[win], deg)
        diff[:start] = np.polyval(coef, S[:start])
    first = 0.5 * (D - diff)
    second = 0.5 * (D + diff)
    labels = np.where(diff > 0, 1, np.where(diff < 0, 2, 0))
    return BranchPair(
        S, float(c), D, F, diff, first, second, np.maximum(first, second), np.minimum(first, second), labels, start
    )


# ---------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class ReconstructionResult:
    """Recovered profile, defined up to ``x -> -x``.

    Attributes
    ----------
    c : float
    S : ndarray
    D, F : ndarray
    f1, f2 : ndarray
        Inverse branches on ``s = S + c`` (distances from 0), zero at ``S = 0``.
    x : ndarray
        Evaluation grid on ``[-x_max, x_max]``.
    v : ndarray
        Reconstructed profile on ``x``.
    x_max : float
    reflection_determined : bool
        Always False: the data cannot tell ``v`` from ``v(-x)``.
    """

    c: float
    S: np.ndarray
    D: np.ndarray
    F: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    x: np.ndarray
    v: np.ndarray
    x_max: float
    reflection_determined: bool = False

    def __call__(self, x):
        """Evaluate by monotone inversion of the branches."""
        x = np.asarray(x, dtype=float)
        r = np.sqrt(self.S)
        right = PchipInterpolator(self.f1, r)(np.abs(x)) ** 2 + self.c
        left = PchipInterpolator(self.f2, r)(np.abs(x)) ** 2 + self.c
        return np.where(x >= 0, right, left)


def assemble_profile(bp, summed, x_max=None, points=321):
    """Integrate the branches and invert ``s -> x`` on each side.

    ``f1 + f2`` comes from :meth:`RecoveredSum.integral` (exact for the
    ``S^(-1/2)`` singularity); the difference from a spline antiderivative
    of the signed branch difference.  Each side is inverted with a
    monotone cubic in ``(f, sqrt(S))``, which is smooth at ``S = 0``.

    Parameters
    ----------
    bp : BranchPair
    summed : RecoveredSum
        On the same grid as ``bp``.
    x_max : float, optional
        Defaults to ``min(f1(s_max), f2(s_max))``.
    points : int

    Raises
    ------
    NonMonotoneBranch
        If either integrated branch fails to increase strictly.
    """
    S = bp.S
    total = summed.integral()
    half_diff = CubicSpline(S, bp.difference).antiderivative()(S)
    f1 = 0.5 * (total - half_diff)
    f2 = 0.5 * (total + half_diff)
    for name, f in (("f1", f1), ("f2", f2)):
        if np.any(np.diff(f) <= 0):
            j = int(np.nonzero(np.diff(f) <= 0)[0][0])
            raise NonMonotoneBranch(f"{name} stops increasing at S={S[j]:.6g}", "assemble_profile")
    top = float(min(f1[-1], f2[-1]))
    xm = top if x_max is None else float(x_max)
    if xm > top * (1 + 1e-12):
        raise ValueError(f"x_max={xm} exceeds the reconstructed range {top:.6g}")
    x = np.linspace(-xm, xm, int(points))
    res = ReconstructionResult(bp.c, S, bp.D, bp.F, f1, f2, x, np.empty(0), xm)
    v = res(x)
    return ReconstructionResult(bp.c, S, bp.D, bp.F, f1, f2, x, v, xm)


# ---------------------------------------------------------------------------
# pipeline


def roundtrip_grid(p, alpha, points=200):
    """Default levels plus one level below the onset, so ``c`` is bracketed."""
    grid = default_lambda_grid(p, alpha, points)
    return np.r_[0.5 * alpha**2 * p.minimum_value, grid]


def reconstruct(curve, s_points=400, refine=4, tol=1e-5, x_max=None, c=None):
    """Run every inverse stage on a curve carrying both ``W`` and ``Q``.

    Returns
    -------
    ReconstructionResult, dict
        The result and per-stage diagnostics.
    """
    if curve.W is None or curve.Q is None:
        raise ValueError("curve must carry both W and Q")
    c_est = detect_c(curve) if c is None else float(c)
    summed = recover_sum(curve, c_est, s_points)
    F = recover_recip_sum(curve, c_est, s_points, refine)
    bp = split_branches(summed.D, F.values, summed.S, c_est, tol=tol)
    res = assemble_profile(bp, summed, x_max=x_max)
    try:
        certify_sampled_well(res.x, res.v)
        single = True
    except (MultiWell, DegenerateMinimum):
        single = False
    diag = {
        "c": c_est,
        "beta_max": float(summed.S[-1]),
        "x_max": res.x_max,
        "merged_fraction": float(np.mean(bp.labels[bp.start :] == 0)) if bp.start < len(bp.S) else 0.0,
        "single_well": single,
    }
    return res, diag


@dataclass(frozen=True)
class RoundtripReport:
    """Forward-inverse comparison.

    Attributes
    ----------
    result : ReconstructionResult
    curve : InvariantCurve
    c_true, c_est : float
    x : ndarray
        Comparison grid ``|x| <= x_eval``.
    l_inf_identity, l_inf_reflected : float
        Errors against ``v(x)`` and ``v(-x)``.
    l_inf_error, l2_error : float
        Error of the better orientation.
    reflected : bool
        True if the reflected orientation matches better.
    diagnostics : dict
    """

    result: object
    curve: object
    c_true: float
    c_est: float
    x: np.ndarray
    l_inf_identity: float
    l_inf_reflected: float
    l_inf_error: float
    l2_error: float
    reflected: bool
    diagnostics: dict = field(default_factory=dict)


def roundtrip(p, alpha=1.0, lambda_points=200, s_points=400, x_eval=0.8, nodes=64, refine=4, tol=1e-5):
    """Forward invariants of ``p`` followed by the full reconstruction.

    Parameters
    ----------
    p : MetricProfile
        Single well, pole regular.
    alpha : float
    lambda_points, s_points : int
        Sizes of the level grid and of the ``S`` grid.
    x_eval : float
        Errors are measured on ``|x| <= x_eval``.
    """
    certify_single_well(p)
    lambdas = roundtrip_grid(p, alpha, lambda_points)
    curve = invariant_curves(p, alpha, lambdas, nodes)
    res, diag = reconstruct(curve, s_points, refine, tol)
    xe = min(float(x_eval), res.x_max)
    x = np.linspace(-xe, xe, 321)
    vr = res(x)
    e_id = np.abs(vr - p.v(x))
    e_re = np.abs(vr - p.v(-x))
    reflected = bool(e_re.max() < e_id.max())
    err = e_re if reflected else e_id
    l2 = float(np.sqrt(np.trapezoid(err**2, x) / (2 * xe)))
    return RoundtripReport(
        res,
        curve.with_c(diag["c"]),
        float(p.minimum_value),
        float(diag["c"]),
        x,
        float(e_id.max()),
        float(e_re.max()),
        float(err.max()),
        l2,
        reflected,
        diag,
    )
