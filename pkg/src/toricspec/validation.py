"""Input checks shared by the estimators and the command-line front end."""

import numbers

import numpy as np

from .invariants import InvariantCurve
from .profiles import MetricProfile

__all__ = [
    "check_profile",
    "check_alpha",
    "check_positive_int",
    "check_lambda_grid",
    "check_curve",
    "as_curve_list",
]


def check_profile(p):
    if not isinstance(p, MetricProfile):
        raise TypeError(f"expected a MetricProfile, got {type(p).__name__}")
    return p


def check_alpha(alpha):
    a = float(alpha)
    if not np.isfinite(a) or a == 0.0:
        raise ValueError("alpha must be finite and nonzero")
    return a


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if not (isinstance(value, float) and value.is_integer()):
            raise TypeError(f"{name} must be an integer")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}")
    return value


def check_lambda_grid(lambdas):
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size < 2:
        raise ValueError("lambda grid must be a 1-d array with at least two levels")
    if not np.all(np.isfinite(lam)) or np.any(np.diff(lam) <= 0):
        raise ValueError("lambda grid must be finite and strictly increasing")
    return lam


def check_curve(curve, need=("W", "Q")):
    """Validate an :class:`InvariantCurve` and the fields ``need``."""
    if not isinstance(curve, InvariantCurve):
        raise TypeError(f"expected an InvariantCurve, got {type(curve).__name__}")
    check_alpha(curve.alpha)
    lam = check_lambda_grid(curve.lambdas)
    for name in need:
        vals = getattr(curve, name)
        if vals is None:
            raise ValueError(f"curve has no {name} values")
        vals = np.asarray(vals, dtype=float)
        if vals.shape != lam.shape or not np.all(np.isfinite(vals)):
            raise ValueError(f"{name} must be finite with one value per level")
    return curve


def as_curve_list(X):
    """Accept one curve or a sequence of curves."""
    if isinstance(X, InvariantCurve):
        return [X]
    return list(X)
