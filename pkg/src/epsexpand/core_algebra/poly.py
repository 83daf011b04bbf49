"""Exact multivariate polynomials and rational functions over Q.

All values live in one global ring Q[k, N, ep, x] (graded-lex order, ``k``
most significant among equal degrees), so combining polynomials in different
variable subsets never needs an explicit context change.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd as igcd
from typing import Iterable, Mapping

from .backend import B, VARS

__all__ = [
    "Polynomial",
    "RationalFunction",
    "PoleError",
    "VARS",
    "poly_gcd",
    "as_rational_function",
]

_INDEX = {name: i for i, name in enumerate(VARS)}
_ALIASES = {"eps": "ep", "epsilon": "ep", "ε": "ep"}


class PoleError(ZeroDivisionError):
    """Raised when a denominator vanishes at an evaluation point."""


def _var_index(name: str) -> int:
    name = _ALIASES.get(name, name)
    try:
        return _INDEX[name]
    except KeyError:
        raise ValueError(f"unknown variable {name!r}; expected one of {VARS}") from None


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"expected an exact rational, got {type(c).__name__}")


def _native(value):
    """Coerce int / Fraction / Polynomial into a backend polynomial."""
    if isinstance(value, Polynomial):
        return value._p
    if isinstance(value, (int, Fraction)):
        return B.const(value)
    raise TypeError(f"cannot convert {type(value).__name__} to a polynomial")


def _monomial_str(exps) -> str:
    parts = []
    for name, e in zip(VARS, exps):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _sorted_terms(d: Mapping) -> list:
    return sorted(d.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)


def _int_poly_str(d: Mapping) -> str:
    """Render a polynomial given as an exponent map with integer-valued coefficients."""
    if not d:
        return "0"
    out = []
    for exps, c in _sorted_terms(d):
        mono = _monomial_str(exps)
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{mag}*{mono}"
        else:
            body = str(mag)
        if not out:
            out.append(body if c > 0 else f"-{body}")
        else:
            out.append(f" + {body}" if c > 0 else f" - {body}")
    return "".join(out)


def _content(d: Mapping) -> Fraction:
    """Rational content: the positive rational c with d/c primitive over Z."""
    nums = [c.numerator for c in d.values()]
    dens = [c.denominator for c in d.values()]
    g = reduce(igcd, nums, 0)
    lcm = reduce(lambda a, b: a * b // igcd(a, b), dens, 1)
    return Fraction(abs(g), lcm)


class Polynomial:
    """Immutable polynomial in the global ring Q[k, N, ep, x]."""

    __slots__ = ("_p",)

    def __init__(self, value=0):
        self._p = value if not isinstance(value, (int, Fraction, Polynomial)) else _native(value)

    @classmethod
    def var(cls, name: str) -> "Polynomial":
        return cls(B.GENS[_var_index(name)])

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, Fraction]) -> "Polynomial":
        """Build from ``{exponent tuple over VARS: coefficient}``."""
        return cls(B.from_dict({e: _to_fraction(c) for e, c in terms.items() if c}))

    @classmethod
    def from_coefficients(cls, coeffs: Iterable, var: str = "N") -> "Polynomial":
        """Univariate constructor from ascending coefficients."""
        i = _var_index(var)
        terms = {}
        for e, c in enumerate(coeffs):
            if c:
                exps = [0] * len(VARS)
                exps[i] = e
                terms[tuple(exps)] = _to_fraction(c)
        return cls.from_terms(terms)

    # -- structure -----------------------------------------------------
    def terms(self) -> dict:
        return B.to_dict(self._p)

    def is_zero(self) -> bool:
        return B.is_zero(self._p)

    def is_constant(self) -> bool:
        return B.is_const(self._p)

    def constant_value(self) -> Fraction:
        if not B.is_const(self._p):
            raise ValueError(f"{self} is not constant")
        return B.const_value(self._p)

    def leading_coefficient(self) -> Fraction:
        return B.lc(self._p)

    def degree(self, var: str | None = None) -> int:
        """Degree in ``var`` (total degree when omitted); -1 for zero."""
        if self.is_zero():
            return -1
        if var is None:
            return max(sum(e) for e in self.terms())
        return B.degrees(self._p)[_var_index(var)]

    def variables(self) -> tuple:
        degs = B.degrees(self._p)
        return tuple(v for v, d in zip(VARS, degs) if d > 0)

    def coefficients(self, var: str) -> list:
        """Coefficients of ``var^0 .. var^deg`` as polynomials in the other variables."""
        i = _var_index(var)
        buckets: dict = {}
        for exps, c in self.terms().items():
            e = exps[i]
            rest = exps[:i] + (0,) + exps[i + 1:]
            buckets.setdefault(e, {})[rest] = c
        if not buckets:
            return []
        top = max(buckets)
        return [Polynomial.from_terms(buckets.get(e, {})) for e in range(top + 1)]

    def coefficient(self, var: str, e: int) -> "Polynomial":
        coeffs = self.coefficients(var)
        return coeffs[e] if 0 <= e < len(coeffs) else Polynomial(0)

    def content(self) -> Fraction:
        return _content(self.terms()) if not self.is_zero() else Fraction(0)

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other._p
        if isinstance(other, (int, Fraction)):
            return B.const(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Polynomial(self._p + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Polynomial(self._p - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Polynomial(o - self._p)

    def __mul__(self, other):
        if isinstance(other, Fraction):
            return Polynomial(B.scale(self._p, other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Polynomial(self._p * o)

    __rmul__ = __mul__

    def __neg__(self):
        return Polynomial(-self._p)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers need a nonnegative integer exponent")
        return Polynomial(self._p**n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero")
            return Polynomial(B.scale(self._p, 1 / Fraction(other)))
        return NotImplemented

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._p == o

    def __hash__(self):
        return hash(B.key(self._p))

    def __bool__(self):
        return not self.is_zero()

    def divexact(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(B.divexact(self._p, _native(other)))

    def divides(self, other: "Polynomial") -> bool:
        """True if ``self`` divides ``other``."""
        return B.divides(_native(other), self._p)

    def gcd(self, other: "Polynomial") -> "Polynomial":
        return poly_gcd(self, other)

    def factor(self) -> tuple:
        """``(constant, [(monic irreducible, multiplicity), ...])`` over Q."""
        if self.is_zero():
            raise ValueError("cannot factor the zero polynomial")
        c, facs = B.factor(self._p)
        return c, sorted(((Polynomial(f), e) for f, e in facs), key=lambda fe: (fe[0].degree(), str(fe[0])))

    # -- substitution --------------------------------------------------
    def subs(self, point: Mapping[str, Fraction | int]) -> "Polynomial":
        pt = {_var_index(v): _to_fraction(val) for v, val in point.items()}
        return Polynomial(B.subs(self._p, pt))

    def evaluate(self, point: Mapping[str, Fraction | int]) -> Fraction:
        res = self.subs(point)
        if not res.is_constant():
            raise ValueError(f"evaluation leaves free variables {res.variables()}")
        return res.constant_value()

    def compose(self, mapping: Mapping[str, "Polynomial | int | Fraction"]) -> "Polynomial":
        m = {_var_index(v): _native(p) for v, p in mapping.items()}
        return Polynomial(B.compose(self._p, m))

    def shift(self, var: str = "N", j: int = 1) -> "Polynomial":
        if j == 0:
            return self
        return self.compose({var: Polynomial.var(var) + j})

    def derivative(self, var: str) -> "Polynomial":
        return Polynomial(B.derivative(self._p, _var_index(var)))

    # -- printing ------------------------------------------------------
    def __str__(self):
        d = self.terms()
        if not d:
            return "0"
        c = _content(d)
        if c == 1:
            return _int_poly_str(d)
        prim = {e: v / c for e, v in d.items()}
        if len(d) == 1:
            (exps, v), = d.items()
            mono = _monomial_str(exps)
            num = Fraction(v)
            if not mono:
                return str(num)
            lead = "" if num.numerator == 1 else ("-" if num.numerator == -1 else f"{num.numerator}*")
            s = f"{lead}{mono}"
            return s if num.denominator == 1 else f"{s}/{num.denominator}"
        body = _int_poly_str(prim)
        num, den = c.numerator, c.denominator
        s = body if num == 1 else f"{num}*({body})"
        return s if den == 1 else f"({s})/{den}"

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic greatest common divisor; ``gcd(0, b)`` is ``b`` made monic."""
    if a.is_zero() and b.is_zero():
        return Polynomial(0)
    if a.is_zero():
        return b / b.leading_coefficient()
    if b.is_zero():
        return a / a.leading_coefficient()
    g = Polynomial(B.gcd(a._p, b._p))
    return g / g.leading_coefficient()


class RationalFunction:
    """Canonical quotient ``num/den`` of polynomials.

    The pair is coprime and ``den`` is monic, so equal functions have equal
    representations.
    """

    __slots__ = ("_n", "_d")

    def __init__(self, num=0, den=1):
        if isinstance(num, RationalFunction) and isinstance(den, int) and den == 1:
            self._n, self._d = num._n, num._d
            return
        if isinstance(num, RationalFunction) or isinstance(den, RationalFunction):
            q = as_rational_function(num) / as_rational_function(den)
            self._n, self._d = q._n, q._d
            return
        n = num._p if isinstance(num, Polynomial) else (B.const(num) if isinstance(num, (int, Fraction)) else num)
        d = den._p if isinstance(den, Polynomial) else (B.const(den) if isinstance(den, (int, Fraction)) else den)
        self._n, self._d = _normalize(n, d)

    @classmethod
    def _raw(cls, n, d) -> "RationalFunction":
        obj = cls.__new__(cls)
        obj._n, obj._d = n, d
        return obj

    @classmethod
    def var(cls, name: str) -> "RationalFunction":
        return cls._raw(B.GENS[_var_index(name)], B.ONE)

    @property
    def num(self) -> Polynomial:
        return Polynomial(self._n)

    @property
    def den(self) -> Polynomial:
        return Polynomial(self._d)

    # -- predicates ----------------------------------------------------
    def is_zero(self) -> bool:
        return B.is_zero(self._n)

    def is_polynomial(self) -> bool:
        return B.is_const(self._d)

    def is_constant(self) -> bool:
        return B.is_const(self._n) and B.is_const(self._d)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return B.const_value(self._n) / B.const_value(self._d)

    def variables(self) -> tuple:
        dn, dd = B.degrees(self._n), B.degrees(self._d)
        return tuple(v for v, a, b in zip(VARS, dn, dd) if a > 0 or b > 0)

    def depends_on(self, var: str) -> bool:
        i = _var_index(var)
        return B.degrees(self._n)[i] > 0 or B.degrees(self._d)[i] > 0

    # -- arithmetic ----------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction._raw(other._p, B.ONE)
        if isinstance(other, (int, Fraction)):
            return RationalFunction._raw(B.const(other), B.ONE)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if B.is_zero(o._n):
            return self
        if B.is_zero(self._n):
            return o
        if self._d == o._d:
            if B.is_const(self._d):
                return RationalFunction._raw(self._n + o._n, self._d)
            return RationalFunction(self._n + o._n, self._d)
        return RationalFunction(self._n * o._d + o._n * self._d, self._d * o._d)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._raw(-self._n, self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return RationalFunction._raw(B.ZERO, B.ONE)
            return RationalFunction._raw(B.scale(self._n, Fraction(other)), self._d)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if B.is_zero(self._n) or B.is_zero(o._n):
            return RationalFunction._raw(B.ZERO, B.ONE)
        if B.is_const(self._d) and B.is_const(o._d):
            return RationalFunction._raw(self._n * o._n, B.ONE)
        # cross-cancel before multiplying keeps operands small
        g1 = B.gcd(self._n, o._d)
        g2 = B.gcd(o._n, self._d)
        n1 = B.divexact(self._n, g1) if not B.is_const(g1) else self._n
        d2 = B.divexact(o._d, g1) if not B.is_const(g1) else o._d
        n2 = B.divexact(o._n, g2) if not B.is_const(g2) else o._n
        d1 = B.divexact(self._d, g2) if not B.is_const(g2) else self._d
        d = d1 * d2
        c = B.lc(d)
        if c != 1:
            return RationalFunction._raw(B.scale(n1 * n2, 1 / c), B.scale(d, 1 / c))
        return RationalFunction._raw(n1 * n2, d)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if B.is_zero(self._n):
            raise ZeroDivisionError("inverse of zero rational function")
        c = B.lc(self._n)
        return RationalFunction._raw(B.scale(self._d, 1 / c), B.scale(self._n, 1 / c))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero")
            return RationalFunction._raw(B.scale(self._n, 1 / Fraction(other)), self._d)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("integer exponents only")
        if n >= 0:
            return RationalFunction._raw(self._n**n, self._d**n)
        return self.inverse() ** (-n)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._n == o._n and self._d == o._d

    def __hash__(self):
        return hash((B.key(self._n), B.key(self._d)))

    def __bool__(self):
        return not B.is_zero(self._n)

    # -- substitution --------------------------------------------------
    def subs(self, point: Mapping[str, Fraction | int]) -> "RationalFunction":
        """Partial evaluation; raises :class:`PoleError` if the denominator vanishes."""
        pt = {_var_index(v): _to_fraction(val) for v, val in point.items()}
        d = B.subs(self._d, pt)
        if B.is_zero(d):
            raise PoleError(f"denominator {self.den} vanishes at {dict(point)}")
        return RationalFunction(B.subs(self._n, pt), d)

    def evaluate(self, point: Mapping[str, Fraction | int]) -> Fraction:
        res = self.subs(point)
        if not res.is_constant():
            raise ValueError(f"evaluation leaves free variables {res.variables()}")
        return res.constant_value()

    def compose(self, mapping: Mapping[str, Polynomial | int | Fraction]) -> "RationalFunction":
        m = {_var_index(v): _native(p) for v, p in mapping.items()}
        return RationalFunction(B.compose(self._n, m), B.compose(self._d, m))

    def substitute(self, var: str, value: "RationalFunction") -> "RationalFunction":
        """Substitute a rational function for one variable."""
        value = as_rational_function(value)
        vn, vd = value.num, value.den
        n, d = self.num, self.den
        top = max(n.degree(var), d.degree(var), 0)

        def hom(p: Polynomial) -> Polynomial:
            acc = Polynomial(0)
            for e, c in enumerate(p.coefficients(var)):
                if not c.is_zero():
                    acc = acc + c * vn**e * vd ** (top - e)
            return acc

        return RationalFunction(hom(n), hom(d))

    def shift(self, var: str = "N", j: int = 1) -> "RationalFunction":
        if j == 0:
            return self
        g = Polynomial.var(var) + j
        return self.compose({var: g})

    def derivative(self, var: str) -> "RationalFunction":
        n, d = self.num, self.den
        return RationalFunction(n.derivative(var) * d - n * d.derivative(var), d * d)

    # -- printing ------------------------------------------------------
    def __str__(self):
        if B.is_const(self._d):
            return str(self.num)
        nd, dd = self.num.terms(), self.den.terms()
        cn, cd = _content(nd), _content(dd)
        c = cn / cd
        nstr = _int_poly_str({e: v / cn for e, v in nd.items()})
        dstr = _int_poly_str({e: v / cd for e, v in dd.items()})
        p, q = c.numerator, c.denominator
        nwrap = f"({nstr})" if len(nd) > 1 else nstr
        if nstr == "1":
            ntxt = str(p)
        elif p == 1:
            ntxt = nwrap
        else:
            ntxt = f"{p}*{nwrap}"
        dwrap = f"({dstr})" if (len(dd) > 1 or "*" in dstr) else dstr
        dtxt = dwrap if q == 1 else f"({q}*{dwrap})"
        return f"{ntxt}/{dtxt}"

    def __repr__(self):
        return f"RationalFunction({str(self)!r})"


def _normalize(n, d):
    if B.is_zero(d):
        raise ZeroDivisionError("rational function with zero denominator")
    if B.is_zero(n):
        return B.ZERO, B.ONE
    if B.is_const(d):
        c = B.const_value(d)
        return (B.scale(n, 1 / c) if c != 1 else n), B.ONE
    g = B.gcd(n, d)
    if not B.is_const(g):
        n = B.divexact(n, g)
        d = B.divexact(d, g)
    c = B.lc(d)
    if c != 1:
        n = B.scale(n, 1 / c)
        d = B.scale(d, 1 / c)
    return n, d


def as_rational_function(value) -> RationalFunction:
    if isinstance(value, RationalFunction):
        return value
    if isinstance(value, Polynomial):
        return RationalFunction._raw(value._p, B.ONE)
    if isinstance(value, (int, Fraction)):
        return RationalFunction._raw(B.const(value), B.ONE)
    raise TypeError(f"cannot convert {type(value).__name__} to a rational function")
