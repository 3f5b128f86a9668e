"""scikit-learn style wrappers around the forward and inverse maps.

:class:`InvariantCurveTransformer` maps profiles to their λ-resolved
invariant curves; :class:`ProfileReconstructor` is fitted on such a curve
and predicts the profile at given points.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .invariants import invariant_curves
from .inverse import reconstruct, roundtrip_grid
from .validation import (
    as_curve_list,
    check_alpha,
    check_curve,
    check_positive_int,
    check_profile,
)

__all__ = ["InvariantCurveTransformer", "ProfileReconstructor"]


class InvariantCurveTransformer(TransformerMixin, BaseEstimator):
    """Profiles to ``(W, Q)`` curves.

    Parameters
    ----------
    alpha : float
        Nonzero weight.
    lambda_points : int
        Levels above the onset; one level below it is prepended so that
        the onset stays bracketed.
    nodes : int
        Quadrature nodes per half-interval.
    endpoint_rule : {"substitution", "gauss_jacobi"}
    """

    def __init__(self, alpha=1.0, lambda_points=200, nodes=64, endpoint_rule="substitution"):
        self.alpha = alpha
        self.lambda_points = lambda_points
        self.nodes = nodes
        self.endpoint_rule = endpoint_rule

    def fit(self, X, y=None):
        check_alpha(self.alpha)
        check_positive_int(self.lambda_points, "lambda_points", 2)
        check_positive_int(self.nodes, "nodes", 2)
        return self

    def transform(self, X):
        """Return one :class:`InvariantCurve` per profile in ``X``."""
        alpha = check_alpha(self.alpha)
        out = []
        for p in X:
            check_profile(p)
            lam = roundtrip_grid(p, alpha, self.lambda_points)
            out.append(invariant_curves(p, alpha, lam, self.nodes, self.endpoint_rule))
        return out


class ProfileReconstructor(BaseEstimator):
    """Recover a single-well profile from its invariant curve.

    Parameters
    ----------
    s_points : int
        Size of the uniform ``S = s - c`` grid.
    refine : int
        Refinement of the Volterra grid relative to ``s_points``.
    tol : float
        Relative discriminant below which the two branches are merged.
    x_max : float or None
        Extent of the stored reconstruction; defaults to the largest
        symmetric range the data support.

    Attributes
    ----------
    result_ : ReconstructionResult
    c_ : float
    x_max_ : float
    diagnostics_ : dict
    """

    def __init__(self, s_points=400, refine=4, tol=1e-5, x_max=None):
        self.s_points = s_points
        self.refine = refine
        self.tol = tol
        self.x_max = x_max

    def fit(self, X, y=None):
        """Fit on one curve (or a one-element sequence of curves)."""
        curves = as_curve_list(X)
        if len(curves) != 1:
            raise ValueError("fit expects exactly one invariant curve")
        curve = check_curve(curves[0])
        check_positive_int(self.s_points, "s_points", 16)
        check_positive_int(self.refine, "refine", 1)
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        res, diag = reconstruct(curve, self.s_points, self.refine, self.tol, self.x_max)
        self.result_ = res
        self.c_ = res.c
        self.x_max_ = res.x_max
        self.diagnostics_ = diag
        return self

    def predict(self, X):
        """Reconstructed ``v`` at the points ``X`` (``|x| <= x_max_``)."""
        check_is_fitted(self, "result_")
        x = np.asarray(X, dtype=float).ravel()
        if np.any(np.abs(x) > self.x_max_ * (1 + 1e-12)):
            raise ValueError(f"points must satisfy |x| <= {self.x_max_:.6g}")
        return self.result_(x)

    def score(self, X, y):
        """Negative largest absolute error, the better of the two orientations."""
        x = np.asarray(X, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        pred = self.predict(x)
        mirrored = self.predict(-x)
        return -float(min(np.max(np.abs(pred - y)), np.max(np.abs(mirrored - y))))
