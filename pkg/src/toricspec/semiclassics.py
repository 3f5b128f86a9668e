"""Symbol recursion for the equivariant spectral measure on the sphere.

With ``tau = xi^2/v + alpha^2 v`` and ``W' = v'(alpha^2 - xi^2/v^2)`` the
x-derivative of ``tau``, the coefficients ``b_k(x, xi, t)`` obey::

    b_0 = 1,   b_k(t=0) = 0 for k >= 1,
    (1/i) db_1/dt = 2 t (xi/v) W',
    (1/i) db_k/dt = (2/i)(xi/v) D b_{k-1} - (1/v) D^2 b_{k-2},   k >= 2,

where ``D = d/dx + i t W'``.  The ħ^k term of the expansion of the measure
is ``sum_l  ∫∫ b_{k,l} (1/i)^l rho^(l)(tau) dx dxi``.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .symbolic import (
    ALPHA,
    XI,
    I,
    V,
    TPolynomial,
    _expand,
    _from_poly,
    _padd,
    _pmul,
    _diff_poly,
    _x_rule,
    canon,
    i_powers,
    is_zero,
    xi_parity,
)

__all__ = [
    "symbol_tau",
    "symbol_dtau_dx",
    "b_recursion",
    "b_uniform",
    "ExpansionTerm",
    "assemble_term",
    "reference_b1",
    "reference_b2",
    "reference_second_order_integrands",
    "third_derivative_integrand",
    "MAX_ORDER",
]

MAX_ORDER = 4

v0, v1, v2 = V(0), V(1), V(2)


def symbol_tau():
    """``xi^2/v + alpha^2 v``."""
    return XI**2 * v0**-1 + ALPHA**2 * v0


def symbol_dtau_dx():
    """``v' (alpha^2 - xi^2/v^2)``, the x-derivative of the symbol."""
    return v1 * (ALPHA**2 - XI**2 * v0**-2)


_ONE = {(): (Fraction(1), Fraction(0))}


def _apply_D(b, wprime):
    # (d/dx + i t W') on {l: poly}
    out = {}
    for l, p in b.items():
        out[l] = _padd(out.get(l, {}), _diff_poly(p, _x_rule))
        out[l + 1] = _padd(out.get(l + 1, {}), _pmul(wprime, p), (Fraction(0), Fraction(1)))
    return {l: p for l, p in out.items() if p}


def _scale(b, factor):
    return {l: _pmul(factor, p) for l, p in b.items() if p}


def _add(a, b):
    out = dict(a)
    for l, p in b.items():
        out[l] = _padd(out.get(l, {}), p)
    return {l: p for l, p in out.items() if p}


def _integrate_in_t(rhs):
    # db/dt = i * rhs, b(0) = 0
    out = {}
    for l, p in rhs.items():
        out[l + 1] = _pmul({(): (Fraction(0), Fraction(1, l + 1))}, p)
    return out


@lru_cache(maxsize=None)
def _b_raw(k):
    if k == 0:
        return {0: _ONE}
    wprime = _expand(symbol_dtau_dx())
    xi_over_v = _expand(XI * v0**-1)
    if k == 1:
        # separate k = 1 display: (1/i) db_1/dt = 2 t (xi/v) W'
        rhs = {1: _pmul(_pmul({(): (Fraction(2), Fraction(0))}, xi_over_v), wprime)}
        return _integrate_in_t(rhs)
    two_over_i = {(): (Fraction(0), Fraction(-2))}
    first = _scale(_apply_D(_b_raw(k - 1), wprime), _pmul(two_over_i, xi_over_v))
    second = _apply_D(_apply_D(_b_raw(k - 2), wprime), wprime) if k >= 2 else {}
    second = _scale(second, _expand(-(v0**-1)))
    return _integrate_in_t(_add(first, second))


def b_recursion(k, max_order=MAX_ORDER):
    """Return ``b_k`` as a :class:`TPolynomial` in ``t``.

    Parameters
    ----------
    k : int
        Order, ``0 <= k <= max_order``.
    """
    if int(k) != k or k < 0:
        raise ValueError("k must be a non-negative integer")
    if k > max_order:
        raise ValueError(f"k = {k} exceeds the configured maximum order {max_order}")
    return TPolynomial({l: _from_poly(p) for l, p in _b_raw(int(k)).items()})


def b_uniform(k):
    """``b_k`` from the general recursion applied also at ``k = 1`` (with ``b_{-1} = 0``)."""
    if k < 2:
        wprime = _expand(symbol_dtau_dx())
        if k == 0:
            return b_recursion(0)
        first = _scale(_apply_D({0: _ONE}, wprime), _pmul({(): (Fraction(0), Fraction(-2))}, _expand(XI * v0**-1)))
        return TPolynomial({l: _from_poly(p) for l, p in _integrate_in_t(first).items()})
    return b_recursion(k)


@dataclass(frozen=True)
class ExpansionTerm:
    """The ħ^k term as integrands against ``rho^(l)(tau)``.

    Attributes
    ----------
    order : int
    integrands : tuple of (int, Expr)
        Pairs ``(l, b_{k,l} (1/i)^l)`` in canonical form.
    zero_by_parity : bool
        True when every integrand is odd in ``xi``, so the term integrates
        to zero over the fibre.
    """

    order: int
    integrands: tuple
    zero_by_parity: bool

    def integrand(self, l):
        for ll, e in self.integrands:
            if ll == l:
                return e
        return canon(0)


def assemble_term(k, max_order=MAX_ORDER):
    """Multiply each ``b_{k,l}`` by ``(1/i)^l`` and collect the integrands.

    Terms whose integrands are all odd in ``xi`` integrate to zero over the
    fibre; those may carry a factor ``i`` and are only flagged.  Every other
    term must be real.
    """
    b = b_recursion(k, max_order)
    items = []
    for l, e in b.items():
        integrand = canon(e * _inv_i_power(l))
        if not is_zero(integrand):
            items.append((l, integrand))
    odd = bool(items) and all(xi_parity(e) == 1 for _, e in items)
    if not odd:
        for l, e in items:
            if i_powers(e) != {0}:
                raise ArithmeticError(f"integrand of order {k}, l={l} is not real")
    return ExpansionTerm(int(k), tuple(items), odd)


def _inv_i_power(l):
    # (1/i)^l = i^(-l) = i^(3l)
    from .symbolic import Const

    return Const(1, 1, (-l) % 4)


# ---------------------------------------------------------------------------
# closed forms used as golden references


def reference_b1():
    """``b_1 = -(v' xi / (v i)) (alpha^2 - xi^2/v^2) t^2``."""
    coef = -(v1 * XI * v0**-1) * (-I) * (ALPHA**2 - XI**2 * v0**-2)
    return TPolynomial({2: coef})


def _d(e):
    from .symbolic import d_dx

    return d_dx(e)


def reference_b2():
    """Closed form of ``b_2`` as three t-coefficients."""
    w = ALPHA**2 - XI**2 * v0**-2
    c2 = (v0**-1 / 2) * _d(v1 * w)
    c3 = (I / 3) * (v1**2 * v0**-1 * w**2 + 2 * XI**2 * v0**-1 * _d(v1 * v0**-1 * w))
    c4 = -(v1**2 * XI**2 * v0**-2 / 2) * w**2
    return TPolynomial({2: c2, 3: c3, 4: c4})


def reference_second_order_integrands():
    """The ħ^1 coefficient of the measure as integrands against rho'', rho''', rho''''."""
    r2 = (v0**-1 / 2) * (XI**2 * (v2 * v0**-2 - 2 * v1**2 * v0**-3) - ALPHA**2 * v2)
    r3a = -(2 * XI**2 * v0**-1 / 3) * (
        XI**2 * (3 * v1**2 * v0**-4 - v2 * v0**-3) + ALPHA**2 * (v2 * v0**-1 - v1**2 * v0**-2)
    )
    r3b = -(v1**2 * v0**-1 / 3) * (ALPHA**2 - XI**2 * v0**-2) ** 2
    r4 = -(XI**2 * v1**2 * v0**-2 / 2) * (ALPHA**2 - XI**2 * v0**-2) ** 2
    return {2: canon(r2), 3: canon(r3a + r3b), 4: canon(r4)}


def third_derivative_integrand():
    """Integrand of the second invariant rewritten against ``rho'''`` only."""
    k1 = -(Fraction(1, 2)) * (
        (2 * XI**4 * v0**-2 / 3) * (v2 * v0**-2 - 2 * v1**2 * v0**-3) - 2 * ALPHA**2 * v2 * XI**2 * v0**-2
    )
    k2 = -(2 * XI**2 * v0**-1 / 3) * (
        XI**2 * (3 * v1**2 * v0**-4 - v2 * v0**-3) + ALPHA**2 * (v2 * v0**-1 - v1**2 * v0**-2)
    )
    k3 = -(v1**2 * v0**-1 / 3) * (ALPHA**2 - XI**2 * v0**-2) ** 2
    k4 = (v1**2 * v0**-1 / 2) * (5 * XI**4 * v0**-4 / 2 - 3 * XI**2 * ALPHA**2 * v0**-2 + ALPHA**4 / 2)
    return canon(k1 + k2 + k3 + k4)
