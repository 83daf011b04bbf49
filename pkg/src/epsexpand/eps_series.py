"""Truncated Laurent series in ``ep`` with :class:`SumExpression` coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

import mpmath

from .core_algebra import Grammar, Polynomial, RationalFunction, parse
from .core_algebra.poly import as_rational_function
from .sum_expr import SumExpression, SumGrammar, constant_expr_float, shift_synchronize

__all__ = [
    "EpsSeries",
    "InsufficientOrder",
    "series_arith",
    "series_div_eps",
    "rational_series",
    "eps_valuation",
    "scale_series",
    "gamma_expand",
    "log_gamma_ratio",
    "parse_series",
]

EP = "ep"


class InsufficientOrder(ValueError):
    """A requested order lies at or beyond the certified truncation."""


def _min_trunc(*ts):
    vals = [t for t in ts if t is not None]
    return min(vals) if vals else None


def _as_expr(c, var: str) -> SumExpression:
    if isinstance(c, SumExpression):
        return c
    return SumExpression(c, var)


def _num(x):
    """mpmath number for a Fraction, int, float, string or complex value."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpmathify(x)


class EpsSeries:
    """``sum_{i=start}^{trunc-1} coeffs[i-start] * ep**i + O(ep**trunc)``.

    ``trunc`` is ``None`` for an exact finite Laurent polynomial.  A zero
    coefficient at ``start`` is kept when it was recorded explicitly.
    """

    __slots__ = ("start", "coeffs", "trunc", "var")

    def __init__(self, start: int, coeffs, trunc: int | None = None, var: str = "N"):
        coeffs = [_as_expr(c, var) for c in coeffs]
        if trunc is not None:
            if trunc <= start and coeffs:
                raise ValueError("truncation order must exceed the start order")
            coeffs = coeffs[: max(trunc - start, 0)]
            coeffs += [SumExpression.zero(var)] * (trunc - start - len(coeffs))
        self.start = int(start)
        self.coeffs = tuple(coeffs)
        self.trunc = trunc
        self.var = var

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, start: int = 0, trunc: int | None = None, var: str = "N") -> "EpsSeries":
        n = 0 if trunc is None else trunc - start
        return cls(start, [SumExpression.zero(var)] * n, trunc, var)

    @classmethod
    def constant(cls, c, trunc: int | None = None, var: str = "N") -> "EpsSeries":
        return cls(0, [_as_expr(c, var)], trunc, var)

    @classmethod
    def monomial(cls, k: int, c=1, var: str = "N") -> "EpsSeries":
        return cls(k, [_as_expr(c, var)], None, var)

    # -- access ------------------------------------------------------------
    @property
    def end(self) -> int:
        """One past the last stored order."""
        return self.start + len(self.coeffs)

    def coeff(self, order: int) -> SumExpression:
        if self.trunc is not None and order >= self.trunc:
            raise InsufficientOrder(f"order {order} is beyond the truncation O(ep^{self.trunc})")
        if order < self.start or order >= self.end:
            return SumExpression.zero(self.var)
        return self.coeffs[order - self.start]

    def __getitem__(self, order: int) -> SumExpression:
        return self.coeff(order)

    def orders(self) -> range:
        return range(self.start, self.end)

    def valuation(self) -> int | None:
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                return self.start + i
        return None

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def truncate(self, trunc: int) -> "EpsSeries":
        if self.trunc is not None and trunc > self.trunc:
            raise InsufficientOrder(f"cannot extend O(ep^{self.trunc}) to O(ep^{trunc})")
        start = min(self.start, trunc - 1)
        return EpsSeries(start, [self.coeff(i) if i < self.end else SumExpression.zero(self.var) for i in range(start, trunc)], trunc, self.var)

    def with_start(self, start: int) -> "EpsSeries":
        """Re-record the series from ``start`` (dropping only zero coefficients)."""
        if start > self.start:
            for i in range(self.start, min(start, self.end)):
                if not self.coeff(i).is_zero():
                    raise ValueError(f"nonzero coefficient at order {i}")
        stop = self.end if self.trunc is None else self.trunc
        return EpsSeries(start, [self._raw(i) for i in range(start, max(stop, start + 1))], self.trunc, self.var)

    def _raw(self, i: int) -> SumExpression:
        if self.start <= i < self.end:
            return self.coeffs[i - self.start]
        return SumExpression.zero(self.var)

    def normalized(self) -> "EpsSeries":
        """Drop leading zero coefficients."""
        v = self.valuation()
        if v is None or v == self.start:
            return self
        return EpsSeries(v, self.coeffs[v - self.start:], self.trunc, self.var)

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, EpsSeries):
            return other
        if isinstance(other, (int, Fraction, RationalFunction, Polynomial, SumExpression)):
            return EpsSeries.constant(other, None, self.var)
        return None

    def __add__(self, other):
        if isinstance(other, _OTerm):
            return self.truncate(other.order) if self.trunc is None or other.order < self.trunc else self
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        trunc = _min_trunc(self.trunc, o.trunc)
        start = min(self.start, o.start)
        if trunc is not None:
            start = min(start, trunc - 1)
        stop = max(self.end, o.end) if trunc is None else trunc
        coeffs = [self._raw(i) + o._raw(i) for i in range(start, stop)]
        return EpsSeries(start, coeffs, trunc, self._var_with(o))

    __radd__ = __add__

    def _var_with(self, o: "EpsSeries") -> str:
        if self.var == o.var:
            return self.var
        if all(not c._has_sums() for c in o.coeffs):
            return self.var
        return o.var

    def __neg__(self):
        return EpsSeries(self.start, [-c for c in self.coeffs], self.trunc, self.var)

    def __sub__(self, other):
        if isinstance(other, _OTerm):
            return self + other
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
        if isinstance(other, (int, Fraction, RationalFunction, Polynomial)):
            r = as_rational_function(other)
            return EpsSeries(self.start, [c.scale(r) for c in self.coeffs], self.trunc, self.var)
        if isinstance(other, SumExpression):
            return EpsSeries(self.start, [c * other for c in self.coeffs], self.trunc, self._var_with(EpsSeries.constant(other, None, other.var)))
        if not isinstance(other, EpsSeries):
            return NotImplemented
        o = other
        start = self.start + o.start
        cands = []
        if self.trunc is not None:
            cands.append(o.start + self.trunc)
        if o.trunc is not None:
            cands.append(self.start + o.trunc)
        trunc = min(cands) if cands else None
        stop = trunc if trunc is not None else self.end + o.end - 1
        var = self._var_with(o)
        coeffs = []
        for n in range(start, max(stop, start)):
            acc = SumExpression.zero(var)
            for i in range(self.start, self.end):
                j = n - i
                if o.start <= j < o.end:
                    a, b = self.coeffs[i - self.start], o.coeffs[j - o.start]
                    if a and b:
                        acc = acc + a * b
            coeffs.append(acc)
        if not coeffs:
            coeffs = [SumExpression.zero(var)]
            if trunc is not None and trunc <= start:
                start = trunc - 1
        return EpsSeries(start, coeffs, trunc, var)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, RationalFunction, Polynomial)):
            return self * as_rational_function(other).inverse()
        if isinstance(other, SumExpression) and other.is_rational():
            return self * other.as_rational().inverse()
        if isinstance(other, EpsSeries):
            return self * other.inverse()
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("integer exponents only")
        if n < 0:
            return self.inverse() ** (-n)
        out = EpsSeries.constant(1, None, self.var)
        for _ in range(n):
            out = out * self
        return out

    def mul_eps(self, k: int) -> "EpsSeries":
        return EpsSeries(self.start + k, self.coeffs, None if self.trunc is None else self.trunc + k, self.var)

    def div_eps(self, k: int = 1) -> "EpsSeries":
        return self.mul_eps(-k)

    def inverse(self) -> "EpsSeries":
        """Reciprocal; the leading coefficient must be a rational function."""
        s = self.normalized()
        v = s.valuation()
        if v is None:
            raise ZeroDivisionError("inverse of a zero series")
        lead = s.coeffs[0]
        if not lead.is_rational():
            raise ValueError("leading coefficient must be rational to invert a series")
        inv0 = lead.as_rational().inverse()
        if s.trunc is None:
            if len(s.coeffs) == 1:
                return EpsSeries(-v, [SumExpression(inv0, self.var)], None, self.var)
            raise ValueError("inverting a non-monomial exact series needs a truncation")
        n = s.trunc - v
        out = [SumExpression(inv0, self.var)]
        for m in range(1, n):
            acc = SumExpression.zero(self.var)
            for i in range(1, m + 1):
                acc = acc + s._raw(v + i) * out[m - i]
            out.append(-acc.scale(inv0))
        return EpsSeries(-v, out, -v + n, self.var)

    def exp(self) -> "EpsSeries":
        """``exp`` of a series with positive valuation."""
        if any(not self.coeff(i).is_zero() for i in range(self.start, min(1, self.end))):
            raise ValueError("exp needs a series without constant or pole terms")
        if self.trunc is None:
            raise ValueError("exp of an exact series needs a truncation")
        n = self.trunc
        l = [self._raw(i) for i in range(n)]
        e = [SumExpression(1, self.var)]
        for m in range(1, n):
            acc = SumExpression.zero(self.var)
            for k in range(1, m + 1):
                if l[k] and e[m - k]:
                    acc = acc + (l[k] * e[m - k]).scale(Fraction(k))
            e.append(acc.scale(Fraction(1, m)))
        return EpsSeries(0, e, n, self.var)

    def log1p(self) -> "EpsSeries":
        """``log(1 + self)`` for a series with positive valuation."""
        if any(not self.coeff(i).is_zero() for i in range(self.start, min(1, self.end))):
            raise ValueError("log1p needs a series with positive valuation")
        if self.trunc is None:
            raise ValueError("log1p of an exact series needs a truncation")
        n = self.trunc
        s = [self._raw(i) for i in range(n)]
        lg = [SumExpression.zero(self.var)]
        for m in range(1, n):
            acc = SumExpression.zero(self.var)
            for k in range(1, m):
                if lg[k] and s[m - k]:
                    acc = acc + (lg[k] * s[m - k]).scale(Fraction(k))
            lg.append(s[m] - acc.scale(Fraction(1, m)))
        return EpsSeries(0, lg, n, self.var)

    # -- maps -----------------------------------------------------------------
    def map(self, fn) -> "EpsSeries":
        return EpsSeries(self.start, [fn(c) for c in self.coeffs], self.trunc, self.var)

    def shift(self, j: int) -> "EpsSeries":
        return self.map(lambda c: shift_synchronize(c, j))

    def evaluate(self, n: int) -> "EpsSeries":
        return self.map(lambda c: c.evaluate(n))

    def subs(self, point: Mapping) -> "EpsSeries":
        return self.map(lambda c: c.subs(point))

    def with_var(self, var: str) -> "EpsSeries":
        return EpsSeries(self.start, [c.with_var(var) for c in self.coeffs], self.trunc, var)

    def eval_float(self, n: int, eps, dps: int = 40):
        """Truncated sum at ``var = n`` and numeric ``ep``."""
        with mpmath.workdps(dps + 10):
            e = _num(eps)
            total = mpmath.mpf(0)
            for i, c in zip(self.orders(), self.coeffs):
                if c:
                    total += c.eval_float(n, dps) * e**i
            return total

    def constant_float(self, eps, dps: int = 40):
        """Truncated sum for a series whose coefficients are constants."""
        with mpmath.workdps(dps + 10):
            e = _num(eps)
            return sum((constant_expr_float(c, dps) * e**i for i, c in zip(self.orders(), self.coeffs) if c), mpmath.mpf(0))

    # -- comparison and printing ------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, EpsSeries):
            return NotImplemented
        if self.trunc != other.trunc:
            return False
        lo = min(self.start, other.start)
        hi = max(self.end, other.end)
        return all(self._raw(i) == other._raw(i) for i in range(lo, hi))

    def __hash__(self):
        return hash((self.trunc, tuple((i, c) for i, c in zip(self.orders(), self.coeffs) if c)))

    def __str__(self):
        parts = []
        for i, c in zip(self.orders(), self.coeffs):
            parts.append(f"ep^{i}*({c})")
        if self.trunc is not None:
            parts.append(f"O[ep]^{self.trunc}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"EpsSeries({str(self)!r})"


class _OTerm:
    __slots__ = ("order",)

    def __init__(self, order: int):
        self.order = order

    def __radd__(self, other):
        if isinstance(other, EpsSeries):
            return other + self
        return NotImplemented


# -- module-level operations ----------------------------------------------------
def series_arith(a: EpsSeries, b: EpsSeries, op: str) -> EpsSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def series_div_eps(a: EpsSeries, k: int) -> EpsSeries:
    if k <= 0:
        raise ValueError("k must be positive")
    return a.div_eps(k)


def rational_series(f, trunc: int, var: str = "N") -> EpsSeries:
    """Laurent expansion in ``ep`` of a rational function, up to ``O(ep^trunc)``."""
    f = as_rational_function(f)
    if f.is_zero():
        return EpsSeries.zero(min(0, trunc - 1), trunc, var)
    num = f.num.coefficients(EP)
    den = f.den.coefficients(EP)
    u = next(i for i, c in enumerate(num) if not c.is_zero())
    v = next(i for i, c in enumerate(den) if not c.is_zero())
    num, den = num[u:], den[v:]
    start = u - v
    n = trunc - start
    if n <= 0:
        return EpsSeries.zero(trunc - 1, trunc, var)
    d0 = RationalFunction(den[0]).inverse()
    q = []
    for m in range(n):
        acc = RationalFunction(num[m]) if m < len(num) else RationalFunction(0)
        for i in range(1, min(m, len(den) - 1) + 1):
            acc = acc - q[m - i] * den[i]
        q.append(acc * d0)
    return EpsSeries(start, [SumExpression(c, var) for c in q], trunc, var)


def eps_valuation(f) -> int:
    """Order of ``f`` at ``ep = 0``."""
    f = as_rational_function(f)
    if f.is_zero():
        raise ValueError("valuation of zero")
    num = f.num.coefficients(EP)
    den = f.den.coefficients(EP)
    u = next(i for i, c in enumerate(num) if not c.is_zero())
    v = next(i for i, c in enumerate(den) if not c.is_zero())
    return u - v


def scale_series(f, s: EpsSeries) -> EpsSeries:
    """``f * s`` for a rational function ``f`` of ``ep`` (and the series variable)."""
    f = as_rational_function(f)
    if f.is_zero():
        return EpsSeries.zero(s.start, s.trunc, s.var) if s.trunc is not None else EpsSeries.zero(0, None, s.var)
    if not f.depends_on(EP):
        return s.map(lambda c: c * f)
    if f.den.degree(EP) <= 0:
        num = f.num.coefficients(EP)
        d = RationalFunction(1, f.den)
        exact = EpsSeries(0, [SumExpression(RationalFunction(c) * d, s.var) for c in num], None, s.var)
        return exact * s
    if s.trunc is None:
        raise ValueError("multiplying an exact series by a non-polynomial function of ep needs a truncation")
    v = eps_valuation(f)
    return rational_series(f, s.trunc - s.start + v, s.var) * s


def _log_gamma1(r: Fraction, trunc: int, var: str) -> EpsSeries:
    """log Gamma(1 + r*ep) = -eg*r*ep + sum_{j>=2} (-1)^j z_j (r*ep)^j / j."""
    coeffs = [SumExpression.zero(var)]
    for j in range(1, trunc):
        if j == 1:
            c = SumExpression.constant("eg", var).scale(-r)
        else:
            c = SumExpression.constant(f"z{j}", var).scale(Fraction((-1) ** j) * r**j / j)
        coeffs.append(c)
    return EpsSeries(0, coeffs, max(trunc, 1), var)


def log_gamma_ratio(r: Fraction, trunc: int, var: str | None = None, offset: int = 1, sum_var: str = "N") -> EpsSeries:
    """Series of ``log(Gamma(var+offset+r*ep) / Gamma(var+offset))``.

    With ``var=None`` the argument is the integer ``offset`` itself, which
    must be positive.  Valid for ``var + offset >= 1``.
    """
    r = Fraction(r)
    v = var or sum_var
    out = _log_gamma1(r, trunc, v)
    if var is None and offset < 1:
        raise ValueError("log_gamma_ratio needs a positive integer argument")
    coeffs = [SumExpression.zero(v)]
    for j in range(1, trunc):
        fac = Fraction((-1) ** (j - 1)) * r**j / j
        if var is None:
            h = sum((Fraction(1, i**j) for i in range(1, offset)), Fraction(0))
            coeffs.append(SumExpression(h * fac, v))
        else:
            s = shift_synchronize(SumExpression.ssum((j,), v), offset - 1)
            coeffs.append(s.scale(fac))
    return out + EpsSeries(0, coeffs, max(trunc, 1), v)


def gamma_expand(offset: int, shift_var: str | None, r, order: int, var: str = "N"):
    """Expand ``Gamma(shift_var + offset + r*ep)`` up to ``O(ep^order)``.

    Returns ``(series, prefactor)``.  With a variable the series is the
    ratio ``Gamma(var+offset+r*ep)/Gamma(var+offset)`` and ``prefactor`` is
    ``("Gamma", var, offset)``.  Without one the series is the full value and
    the prefactor is ``None``; nonpositive offsets go through the
    functional equation and carry a ``1/ep`` pole.
    """
    r = Fraction(r)
    if shift_var is not None:
        ser = log_gamma_ratio(r, order, shift_var, offset).exp() if order > 0 else EpsSeries.zero(order - 1, order, shift_var)
        return ser, ("Gamma", shift_var, offset)
    if offset >= 1:
        val = Fraction(1)
        for i in range(1, offset):
            val *= i
        ser = log_gamma_ratio(r, order, None, offset, var).exp() if order > 0 else EpsSeries.zero(order - 1, order, var)
        return ser * val, None
    if r == 0:
        raise ZeroDivisionError(f"Gamma has a pole at {offset}")
    # Gamma(p+d) = Gamma(1+d) / (d * prod_{i=p}^{-1} (i+d)),  d = r*ep
    m = -offset
    lg = _log_gamma1(r, order + 1, var)
    coeffs = [SumExpression.zero(var)]
    for j in range(1, order + 1):
        h = sum((Fraction(1, i**j) for i in range(1, m + 1)), Fraction(0))
        coeffs.append(SumExpression(h * r**j / j, var))
    lg = lg + EpsSeries(0, coeffs, order + 1, var)
    fact = Fraction(1)
    for i in range(1, m + 1):
        fact *= i
    lead = Fraction((-1) ** m) / (fact * r)
    ser = (lg.exp() * lead).mul_eps(-1) if order + 1 > 0 else EpsSeries.zero(order - 1, order, var)
    return ser, None


# -- parsing -----------------------------------------------------------------------
class SeriesGrammar(Grammar):
    """``ep^-3*(4*N/(3*(N+1))) + ep^-2*(...) + O[ep]^0``."""

    def __init__(self, var: str = "N"):
        self.inner = SumGrammar(var)
        self.var = var

    def _lift(self, v):
        if isinstance(v, (EpsSeries, _OTerm)):
            return v
        return EpsSeries.constant(v, None, self.var)

    def number(self, value):
        return EpsSeries.constant(value, None, self.var)

    def symbol(self, name):
        if name in ("ep", "eps", "epsilon", "ε"):
            return EpsSeries.monomial(1, 1, self.var)
        return self._lift(self.inner.symbol(name))

    def is_function(self, name):
        return self.inner.is_function(name)

    def call(self, name, bracket, args):
        if name == "O":
            if (bracket or "").strip() not in ("ep", "eps", "epsilon"):
                raise ValueError("O[...] needs ep")
            return _OTerm(1 if args is None else None)
        return self._lift(self.inner.call(name, bracket, args))

    def power(self, base, exponent):
        if isinstance(base, _OTerm):
            if not isinstance(exponent, int):
                raise ValueError("O[ep]^k needs an integer k")
            return _OTerm(exponent)
        if isinstance(exponent, int):
            if exponent < 0:
                if len(base.coeffs) == 1 and base.trunc is None:
                    c = base.coeffs[0]
                    if c.is_rational():
                        return EpsSeries(base.start * exponent, [SumExpression(c.as_rational() ** exponent, self.var)], None, self.var)
                raise ValueError("negative powers only of monomials in ep")
            return base**exponent
        lifted = [c for c in base.coeffs]
        if base.start != 0 or len(lifted) != 1:
            raise ValueError("symbolic exponents need an ep-free base")
        return self._lift(self.inner.power(lifted[0], exponent))


def parse_series(text: str, var: str = "N") -> EpsSeries:
    v = parse(text, SeriesGrammar(var))
    if isinstance(v, _OTerm):
        return EpsSeries.zero(v.order - 1, v.order, var)
    return v
