"""Pure-Python polynomial kernel on sympy's sparse polynomial rings.

Selected when python-flint is missing or ``EPSEXPAND_BACKEND=pure``.
"""

from __future__ import annotations

from fractions import Fraction

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import ring

NAME = "pure"
NAMES = ("k", "N", "ep", "x")

_R, *_gens = ring(",".join(NAMES), QQ, grlex)
GENS = tuple(_gens)
ZERO = _R.zero
ONE = _R.one


def _to_q(c) -> Fraction:
    return Fraction(int(QQ.numer(c)), int(QQ.denom(c)))


def _fq(q):
    if isinstance(q, int):
        return QQ(q)
    return QQ(q.numerator, q.denominator)


def const(q):
    return _R.ground_new(_fq(q))


def from_dict(d: dict):
    return _R.from_dict({e: _fq(c) for e, c in d.items() if c})


def to_dict(p) -> dict:
    return {e: _to_q(c) for e, c in p.items()}


def scale(p, q):
    return p.mul_ground(_fq(q))


def is_zero(p) -> bool:
    return not p


def is_const(p) -> bool:
    return p.is_ground


def const_value(p) -> Fraction:
    if not p:
        return Fraction(0)
    return _to_q(p.LC)


def lc(p) -> Fraction:
    return _to_q(p.LC)


def gcd(a, b):
    g = a.gcd(b)
    if g:
        g = g.monic()
    return g


def divexact(a, b):
    return a.exquo(b)


def divides(a, b) -> bool:
    return not a.rem(b)


def factor(p):
    c, facs = p.factor_list()
    out = []
    for f, e in facs:
        lcf = f.LC
        out.append((f.quo_ground(lcf), int(e)))
        c = c * lcf**e
    return _to_q(c), out


def subs(p, point: dict):
    for i, v in point.items():
        p = p.subs(GENS[i], _fq(v))
    return p


def compose(p, mapping: dict):
    return p.compose([(GENS[i], q) for i, q in mapping.items()])


def degrees(p) -> tuple:
    if not p:
        return (-1,) * len(NAMES)
    return tuple(int(d) for d in p.degrees())


def derivative(p, i: int):
    return p.diff(GENS[i])


def to_str(p) -> str:
    return str(p).replace("**", "^")


def key(p) -> tuple:
    return tuple(sorted((e, (int(QQ.numer(c)), int(QQ.denom(c)))) for e, c in p.items()))


# -- dense univariate helpers (ascending Fraction lists) ----------------
from sympy.polys.densearith import dup_div  # noqa: E402
from sympy.polys.euclidtools import dup_gcdex  # noqa: E402


def _dup(c) -> list:
    out = [_fq(x) for x in reversed(c)]
    while out and not out[0]:
        out.pop(0)
    return out


def _und(p) -> list:
    return [_to_q(x) for x in reversed(p)]


def udivmod(a: list, b: list):
    q, r = dup_div(_dup(a), _dup(b), QQ)
    return _und(q), _und(r)


def uxgcd(a: list, b: list):
    """Monic ``g`` with ``s*a + t*b = g``."""
    s, t, g = dup_gcdex(_dup(a), _dup(b), QQ)
    return _und(g), _und(s), _und(t)
