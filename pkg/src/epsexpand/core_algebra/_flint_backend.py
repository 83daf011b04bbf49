"""FLINT-backed multivariate polynomial kernel (python-flint ``fmpq_mpoly``)."""

from __future__ import annotations

from fractions import Fraction

import flint

NAME = "flint"
NAMES = ("k", "N", "ep", "x")

_ctx = flint.fmpq_mpoly_ctx.get(NAMES, "deglex")
GENS = tuple(_ctx.gens())
ZERO = _ctx.constant(0)
ONE = _ctx.constant(1)


def _fq(q):
    if isinstance(q, int):
        return flint.fmpq(q)
    return flint.fmpq(q.numerator, q.denominator)


def const(q) -> flint.fmpq_mpoly:
    return _ctx.constant(_fq(q))


def from_dict(d: dict) -> flint.fmpq_mpoly:
    return _ctx.from_dict({e: _fq(c) for e, c in d.items()})


def to_dict(p) -> dict:
    return {e: Fraction(int(c.p), int(c.q)) for e, c in p.to_dict().items()}


def scale(p, q):
    return p * _fq(q)


def is_zero(p) -> bool:
    return p.is_zero()


def is_const(p) -> bool:
    return p.is_constant()


def const_value(p) -> Fraction:
    if p.is_zero():
        return Fraction(0)
    c = p.leading_coefficient()
    return Fraction(int(c.p), int(c.q))


def lc(p) -> Fraction:
    c = p.leading_coefficient()
    return Fraction(int(c.p), int(c.q))


def gcd(a, b):
    return a.gcd(b)


def divexact(a, b):
    return a / b


def divides(a, b) -> bool:
    """True when ``b`` divides ``a``."""
    _, r = divmod(a, b)
    return r.is_zero()


def factor(p):
    c, facs = p.factor()
    return Fraction(int(c.p), int(c.q)), [(f, int(e)) for f, e in facs]


def subs(p, point: dict):
    return p.subs({NAMES[i]: _fq(v) for i, v in point.items()})


def compose(p, mapping: dict):
    return p.compose(*[mapping.get(i, GENS[i]) for i in range(len(NAMES))])


def degrees(p) -> tuple:
    if p.is_zero():
        return (-1,) * len(NAMES)
    return tuple(int(d) for d in p.degrees())


def derivative(p, i: int):
    return p.derivative(NAMES[i])


def to_str(p) -> str:
    return str(p)


def key(p) -> tuple:
    return tuple(sorted((e, (int(c.p), int(c.q))) for e, c in p.to_dict().items()))


# -- dense univariate helpers (ascending Fraction lists) ----------------
def _up(c):
    return flint.fmpq_poly([_fq(x) for x in c])


def _un(p) -> list:
    return [Fraction(int(x.p), int(x.q)) for x in p.coeffs()]


def udivmod(a: list, b: list):
    q, r = divmod(_up(a), _up(b))
    return _un(q), _un(r)


def uxgcd(a: list, b: list):
    """Monic ``g`` with ``s*a + t*b = g``."""
    g, s, t = _up(a).xgcd(_up(b))
    return _un(g), _un(s), _un(t)
