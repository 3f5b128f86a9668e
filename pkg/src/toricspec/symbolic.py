"""A small exact expression engine for the semiclassical symbol calculus.

Expressions are trees over the atoms ``alpha``, ``xi`` and the jet
``v0, v1, v2, ...`` of the profile (``vj`` is the j-th x-derivative of v).
Constants are exact rationals times a power of the imaginary unit.  The
canonical form is a sum of Laurent monomials in the atoms; no rational
function normal form is attempted.

Examples
--------
>>> from toricspec.symbolic import XI, V, canon, d_dx, to_string
>>> to_string(d_dx(XI**2 * V(0)**-2))
'(-2)*i^0*ξ^2*v0^-3*v1^1'
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
import numbers

import numpy as np

__all__ = [
    "Expr",
    "Const",
    "Atom",
    "Sum",
    "Product",
    "Power",
    "ALPHA",
    "XI",
    "I",
    "V",
    "const",
    "canon",
    "d_dx",
    "d_dxi",
    "evaluate",
    "to_string",
    "is_zero",
    "xi_parity",
    "i_powers",
    "TPolynomial",
]


# ---------------------------------------------------------------------------
# tree nodes


class Expr:
    """Base class; supports ``+ - * /`` and integer powers."""

    __slots__ = ()

    def __add__(self, other):
        return Sum((self, _lift(other)))

    def __radd__(self, other):
        return Sum((_lift(other), self))

    def __sub__(self, other):
        return Sum((self, Product((Const(-1), _lift(other)))))

    def __rsub__(self, other):
        return Sum((_lift(other), Product((Const(-1), self))))

    def __neg__(self):
        return Product((Const(-1), self))

    def __mul__(self, other):
        return Product((self, _lift(other)))

    def __rmul__(self, other):
        return Product((_lift(other), self))

    def __truediv__(self, other):
        return Product((self, _inverse(_lift(other))))

    def __rtruediv__(self, other):
        return Product((_lift(other), _inverse(self)))

    def __pow__(self, exponent):
        if not isinstance(exponent, numbers.Integral):
            raise TypeError("only integer powers are supported")
        return Power(self, int(exponent))

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    """Exact constant ``(num/den) * i**ipow``."""

    num: int
    den: int = 1
    ipow: int = 0

    def __post_init__(self):
        if self.den == 0:
            raise ZeroDivisionError("zero denominator")
        fr = Fraction(self.num, self.den)
        object.__setattr__(self, "num", fr.numerator)
        object.__setattr__(self, "den", fr.denominator)
        object.__setattr__(self, "ipow", self.ipow % 4)

    @property
    def value(self):
        return Fraction(self.num, self.den)


@total_ordering
@dataclass(frozen=True, eq=True)
class Atom(Expr):
    """Atom ``alpha``, ``xi`` or ``v`` with derivative order ``order``."""

    name: str
    order: int = 0

    def __post_init__(self):
        if self.name not in ("alpha", "xi", "v"):
            raise ValueError(f"unknown atom {self.name!r}")
        if self.order < 0 or (self.name != "v" and self.order != 0):
            raise ValueError("only v carries a derivative order")

    @property
    def key(self):
        return ({"alpha": 0, "xi": 1, "v": 2}[self.name], self.order)

    def __lt__(self, other):
        return self.key < other.key


@dataclass(frozen=True, eq=True)
class Sum(Expr):
    children: tuple


@dataclass(frozen=True, eq=True)
class Product(Expr):
    children: tuple


@dataclass(frozen=True, eq=True)
class Power(Expr):
    base: Expr
    exponent: int


ALPHA = Atom("alpha")
XI = Atom("xi")
I = Const(1, 1, 1)


def V(order=0):
    """The atom ``v^(order)``."""
    return Atom("v", order)


def const(num, den=1, ipow=0):
    return Const(num, den, ipow)


def _lift(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (numbers.Integral, Fraction)):
        fr = Fraction(x)
        return Const(fr.numerator, fr.denominator)
    raise TypeError(f"cannot build an exact expression from {type(x).__name__}")


def _inverse(e):
    if isinstance(e, Const):
        if e.num == 0:
            raise ZeroDivisionError("division by zero constant")
        return Const(e.den, e.num, -e.ipow)
    return Power(e, -1)


# ---------------------------------------------------------------------------
# exact Laurent-polynomial arithmetic
#
# A polynomial is a dict mapping a monomial key (sorted tuple of
# (atom_key, exponent) pairs) to a Gaussian rational (re, im).

_ZERO = (Fraction(0), Fraction(0))


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _ipow_to_complex(fr, ipow):
    return [(fr, Fraction(0)), (Fraction(0), fr), (-fr, Fraction(0)), (Fraction(0), -fr)][ipow % 4]


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    acc = dict(m1)
    for k, e in m2:
        e2 = acc.get(k, 0) + e
        if e2:
            acc[k] = e2
        else:
            acc.pop(k, None)
    return tuple(sorted(acc.items()))


def _padd(p, q, scale=(Fraction(1), Fraction(0))):
    out = dict(p)
    for m, c in q.items():
        c = _cmul(c, scale)
        old = out.get(m, _ZERO)
        new = (old[0] + c[0], old[1] + c[1])
        if new[0] == 0 and new[1] == 0:
            out.pop(m, None)
        else:
            out[m] = new
    return out


def _pmul(p, q):
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            c = _cmul(c1, c2)
            old = out.get(m, _ZERO)
            new = (old[0] + c[0], old[1] + c[1])
            if new[0] == 0 and new[1] == 0:
                out.pop(m, None)
            else:
                out[m] = new
    return out


def _ppow(p, n):
    if n < 0:
        if len(p) != 1:
            raise ValueError("negative powers are only defined for single monomials")
        (m, c), = p.items()
        den = c[0] * c[0] + c[1] * c[1]
        inv_c = (c[0] / den, -c[1] / den)
        inv_m = tuple((k, -e) for k, e in m)
        return _ppow({inv_m: inv_c}, -n)
    out = {(): (Fraction(1), Fraction(0))}
    for _ in range(n):
        out = _pmul(out, p)
    return out


def _expand(e):
    if isinstance(e, Const):
        if e.num == 0:
            return {}
        return {(): _ipow_to_complex(e.value, e.ipow)}
    if isinstance(e, Atom):
        return {((e.key, 1),): (Fraction(1), Fraction(0))}
    if isinstance(e, Sum):
        out = {}
        for ch in e.children:
            out = _padd(out, _expand(ch))
        return out
    if isinstance(e, Product):
        out = {(): (Fraction(1), Fraction(0))}
        for ch in e.children:
            out = _pmul(out, _expand(ch))
            if not out:
                break
        return out
    if isinstance(e, Power):
        return _ppow(_expand(e.base), e.exponent)
    raise TypeError(f"not an expression: {e!r}")


def _atom_from_key(key):
    kind, order = key
    return (ALPHA, XI, None)[kind] if kind < 2 else V(order)


def _mono_sort_key(m):
    return tuple((k, e) for k, e in m)


def _from_poly(p):
    terms = []
    for m in sorted(p, key=_mono_sort_key):
        re, im = p[m]
        factors = [Power(_atom_from_key(k), e) for k, e in m]
        for val, ipow in ((re, 0), (im, 1)):
            if val != 0:
                terms.append(Product((Const(val.numerator, val.denominator, ipow),) + tuple(factors)))
    return Sum(tuple(terms))


# ---------------------------------------------------------------------------
# public operations


def canon(e):
    """Canonical form: a ``Sum`` of ``Product(Const, Power(atom, exp), ...)``.

    Monomials are sorted by atom order ``alpha < xi < v0 < v1 < ...`` and
    each term carries ``i**0`` or ``i**1``.  ``canon`` is idempotent.
    """
    return _from_poly(_expand(_lift(e)))


def is_zero(e):
    return not _expand(_lift(e))


def _diff_poly(p, rule):
    out = {}
    for m, c in p.items():
        for idx, (k, e) in enumerate(m):
            res = rule(k)
            if res is None:
                continue
            rest = m[:idx] + ((k, e - 1),) + m[idx + 1:]
            rest = tuple((kk, ee) for kk, ee in rest if ee != 0)
            mono = _mono_mul(rest, res)
            term = {mono: (c[0] * e, c[1] * e)}
            out = _padd(out, term)
    return out


def _x_rule(k):
    if k[0] == 2:
        return (((2, k[1] + 1), 1),)
    return None


def _xi_rule(k):
    return () if k == (1, 0) else None


def d_dx(e):
    """Formal x-derivative: ``v^(j) -> v^(j+1)``, ``xi`` and ``alpha`` constant."""
    return _from_poly(_diff_poly(_expand(_lift(e)), _x_rule))


def d_dxi(e):
    """Formal derivative in ``xi``."""
    return _from_poly(_diff_poly(_expand(_lift(e)), _xi_rule))


def evaluate(e, alpha=0.0, xi=0.0, v=(1.0,)):
    """Numeric value of ``e``.

    Parameters
    ----------
    alpha, xi : float or ndarray
    v : sequence
        ``v[j]`` is the value of the j-th derivative of v.

    Returns
    -------
    float, complex or ndarray
        Real when every term has an even power of ``i``.
    """
    p = _expand(_lift(e))
    values = {(0, 0): alpha, (1, 0): xi}
    re_acc = 0.0
    im_acc = 0.0
    for m, (re, im) in p.items():
        term = 1.0
        for (kind, order), ex in m:
            base = values[(kind, order)] if kind < 2 else v[order]
            term = term * np.asarray(base, dtype=float) ** ex
        if re:
            re_acc = re_acc + float(re) * term
        if im:
            im_acc = im_acc + float(im) * term
    if any(c[1] != 0 for c in p.values()):
        return re_acc + 1j * im_acc
    return re_acc


def i_powers(e):
    """Set of i-powers appearing in the canonical form of ``e``."""
    return {t.children[0].ipow for t in canon(e).children}


def xi_parity(e):
    """Parity of the total ``xi`` degree: 0 (even), 1 (odd), or None if mixed/zero."""
    parities = {dict(m).get((1, 0), 0) % 2 for m in _expand(_lift(e))}
    return parities.pop() if len(parities) == 1 else None


_ATOM_TEXT = {0: "α", 1: "ξ"}


def _frac_text(val):
    return f"({val.numerator})" if val.denominator == 1 else f"({val.numerator}/{val.denominator})"


def to_string(e):
    """Deterministic ASCII rendering of the canonical form.

    Each term prints as ``(coef)*i^p*atom^exp*...``; terms are joined by
    `` + ``.  The zero expression prints as ``0``.
    """
    terms = canon(e).children
    if not terms:
        return "0"
    parts = []
    for t in terms:
        c = t.children[0]
        text = [_frac_text(c.value), f"i^{c.ipow}"]
        for f in t.children[1:]:
            a = f.base
            name = _ATOM_TEXT.get(a.key[0], f"v{a.order}")
            text.append(f"{name}^{f.exponent}")
        parts.append("*".join(text))
    return " + ".join(parts)


# ---------------------------------------------------------------------------


class TPolynomial:
    """Polynomial in ``t`` with expression coefficients, ``sum_l b_l t**l``."""

    def __init__(self, coeffs=None):
        self._c = {}
        for l, e in (coeffs or {}).items():
            e = canon(e)
            if e.children:
                self._c[int(l)] = e

    @property
    def degree(self):
        return max(self._c, default=-1)

    def coefficient(self, l):
        return self._c.get(l, Sum(()))

    def items(self):
        return sorted(self._c.items())

    def __eq__(self, other):
        return isinstance(other, TPolynomial) and self._c == other._c

    def __repr__(self):
        body = ", ".join(f"t^{l}: {to_string(e)}" for l, e in self.items())
        return f"TPolynomial({{{body}}})"
