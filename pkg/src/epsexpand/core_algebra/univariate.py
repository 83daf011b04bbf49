"""Univariate helpers on top of :mod:`poly`: roots, shifts, partial fractions."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .backend import B
from .poly import Polynomial, RationalFunction

__all__ = [
    "to_list",
    "from_list",
    "integer_roots",
    "rational_roots",
    "rat_eval",
    "shift_distance",
    "partial_fractions",
    "udivmod",
]


def to_list(p: Polynomial, var: str = "N") -> list:
    """Ascending coefficients of a polynomial in ``var`` alone."""
    out = []
    for c in p.coefficients(var):
        if not c.is_constant():
            raise ValueError(f"{p} is not univariate in {var}")
        out.append(c.constant_value())
    return out


def from_list(coeffs: list, var: str = "N") -> Polynomial:
    return Polynomial.from_coefficients(coeffs, var)


def udivmod(a: Polynomial, b: Polynomial, var: str = "N") -> tuple:
    q, r = B.udivmod(to_list(a, var), to_list(b, var))
    return from_list(q, var), from_list(r, var)


def _only_var(p: Polynomial, var: str | None) -> str:
    vs = p.variables()
    if var is not None:
        if any(v != var for v in vs):
            raise ValueError(f"{p} is not univariate in {var}")
        return var
    if len(vs) > 1:
        raise ValueError(f"{p} is not univariate; specialize the other variables first")
    return vs[0] if vs else "N"


def rational_roots(p: Polynomial, var: str | None = None) -> dict:
    """Rational roots with multiplicities, from the exact factorization over Q."""
    if p.is_zero():
        raise ValueError("the zero polynomial has every number as a root")
    var = _only_var(p, var)
    roots: dict = {}
    if p.is_constant():
        return roots
    _, facs = p.factor()
    for f, e in facs:
        if f.degree(var) == 1:
            c1, c0 = f.coefficient(var, 1).constant_value(), f.coefficient(var, 0).constant_value()
            r = -c0 / c1
            roots[r] = roots.get(r, 0) + e
    return roots


def integer_roots(p: Polynomial, var: str | None = None, specialize: Mapping | None = None) -> dict:
    """Integer roots ``{root: multiplicity}``; other variables may be fixed via ``specialize``."""
    if specialize:
        p = p.subs(specialize)
    return {int(r): m for r, m in rational_roots(p, var).items() if r.denominator == 1}


def rat_eval(f, point: Mapping) -> Fraction:
    """Exact value of a rational function at a point; :class:`PoleError` on a vanishing denominator."""
    if isinstance(f, Polynomial):
        return f.evaluate(point)
    return f.evaluate(point)


def shift_distance(f: Polynomial, g: Polynomial, var: str = "N"):
    """Integer ``h`` with ``f(var+h)`` proportional to ``g``, else ``None``.

    Both inputs must have the same positive degree in ``var``; other
    variables act as parameters.
    """
    d = f.degree(var)
    if d <= 0 or d != g.degree(var):
        return None
    fd, fd1 = f.coefficient(var, d), f.coefficient(var, d - 1)
    gd, gd1 = g.coefficient(var, d), g.coefficient(var, d - 1)
    h = (RationalFunction(gd1, gd) - RationalFunction(fd1, fd)) / d
    if not h.is_constant():
        return None
    hv = h.constant_value()
    if hv.denominator != 1:
        return None
    h = int(hv)
    if f.shift(var, h) * gd == g * fd:
        return h
    return None


def partial_fractions(f: RationalFunction, var: str = "N") -> tuple:
    """Split ``f`` into ``(polynomial part, [(g, j, numerator), ...])``.

    Each ``g`` is a monic irreducible factor of the denominator and
    ``deg numerator < deg g``; ``f = poly + sum numerator / g**j``.
    """
    num, den = f.num, f.den
    q, r = udivmod(num, den, var)
    parts = []
    if r.is_zero():
        return q, parts
    c, facs = den.factor()
    rest_r = r * Fraction(1) / c
    blocks = [(g, e) for g, e in facs]
    remaining_den = den / c
    for g, e in blocks:
        ge = g**e
        other = remaining_den.divexact(ge)
        if other.is_constant():
            u = rest_r / other.constant_value()
            v = Polynomial(0)
        else:
            gl, s, t = B.uxgcd(to_list(ge, var), to_list(other, var))
            s_p, t_p = from_list(s, var), from_list(t, var)
            # rest/(ge*other) = rest*s/other + rest*t/ge
            _, u = udivmod(rest_r * t_p, ge, var)
            _, v = udivmod(rest_r * s_p, other, var)
        # g-adic expansion of u over g^e
        j = e
        while not u.is_zero() and j > 0:
            u, rem = udivmod(u, g, var)
            if not rem.is_zero():
                parts.append((g, j, rem))
            j -= 1
        rest_r = v
        remaining_den = other
    return q, parts
