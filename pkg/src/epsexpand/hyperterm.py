"""Products of Gamma functions with integer-linear arguments, and hypergeometric terms.

A :class:`GammaTerm` is ``R(N,k,ep) * prod c_i^(a_i N + b_i k + d_i) *
prod Gamma(n_j N + k_j k + c_j + r_j ep)^(e_j) * exp(E(ep))``.  This is the
proper hypergeometric class used for summands.  :class:`HyperTerm` keeps the
two shift quotients together with an optional underlying product used for
exact evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import mpmath

from .core_algebra import VARS, Grammar, PoleError, RationalFunction, parse, parse_rational, split_top_level
from .core_algebra.poly import as_rational_function
from .eps_series import EpsSeries, parse_series

__all__ = [
    "UnsupportedArgument",
    "LinearArg",
    "GammaTerm",
    "HyperTerm",
    "parse_term",
    "pochhammer",
    "term_quotient",
]

_SHIFT_VARS = ("N", "k")


class UnsupportedArgument(ValueError):
    """A Gamma argument or exponent outside the integer-linear class."""


@dataclass(frozen=True, order=True)
class LinearArg:
    """``n*N + k*k + c + r*ep`` with integer ``n`` and ``k``."""

    n: int
    k: int
    c: Fraction
    r: Fraction

    @classmethod
    def parse(cls, text: str) -> "LinearArg":
        return cls.from_rational(parse_rational(text), text)

    @classmethod
    def from_rational(cls, f: RationalFunction, text: str = "") -> "LinearArg":
        if not f.is_polynomial():
            raise UnsupportedArgument(f"argument {text or f} is not linear")
        p = f.num
        if p.degree() > 1:
            raise UnsupportedArgument(f"argument {text or p} is not linear")
        coef = {"N": Fraction(0), "k": Fraction(0), "ep": Fraction(0)}
        c = p.terms().get((0,) * len(VARS), Fraction(0))
        for var in coef:
            lin = p.coefficient(var, 1)
            coef[var] = Fraction(lin.constant_value()) if not lin.is_zero() else Fraction(0)
        if p.degree("x") > 0:
            raise UnsupportedArgument(f"argument {text or p} depends on x")
        for var in ("N", "k"):
            if coef[var].denominator != 1:
                raise UnsupportedArgument(f"coefficient of {var} in {text or p} is not an integer")
        return cls(int(coef["N"]), int(coef["k"]), Fraction(c), coef["ep"])

    def plus(self, c) -> "LinearArg":
        return LinearArg(self.n, self.k, self.c + c, self.r)

    def rational(self) -> RationalFunction:
        return RationalFunction.var("N") * self.n + RationalFunction.var("k") * self.k + RationalFunction(self.c) + RationalFunction.var("ep") * self.r

    def coefficient(self, var: str) -> int:
        return {"N": self.n, "k": self.k}[var]

    def shifted(self, var: str, j: int) -> "LinearArg":
        return LinearArg(self.n, self.k, self.c + j * self.coefficient(var), self.r)

    def value(self, point: Mapping) -> Fraction:
        return self.n * Fraction(point.get("N", 0)) + self.k * Fraction(point.get("k", 0)) + self.c + self.r * Fraction(point.get("ep", 0))

    def __str__(self):
        return str(self.rational())


def pochhammer(z: RationalFunction, m: int) -> RationalFunction:
    """``Gamma(z+m)/Gamma(z)`` for any integer ``m``."""
    out = RationalFunction(1)
    if m >= 0:
        for i in range(m):
            out = out * (z + i)
        return out
    for i in range(1, -m + 1):
        out = out * (z - i)
    return out.inverse()


def _poch_value(z: Fraction, m: int) -> Fraction:
    out = Fraction(1)
    if m >= 0:
        for i in range(m):
            out *= z + i
        return out
    for i in range(1, -m + 1):
        out *= z - i
    if out == 0:
        raise PoleError("Gamma evaluated at a pole")
    return 1 / out


def _linear_power(text: str) -> tuple:
    arg = LinearArg.parse(text)
    if arg.r != 0 or arg.c.denominator != 1:
        raise UnsupportedArgument(f"exponent {text!r} must be integer-linear in N and k")
    return (arg.n, arg.k, int(arg.c))


def _add3(a: tuple, b: tuple, s: int = 1) -> tuple:
    return tuple(x + s * y for x, y in zip(a, b))


class GammaTerm:
    """Immutable product of a rational function, geometric powers, Gammas and an ``exp``."""

    __slots__ = ("rational", "powers", "gammas", "exp_arg")

    def __init__(self, rational=1, powers: Mapping | None = None, gammas: Mapping | None = None, exp_arg: EpsSeries | None = None):
        self.rational = as_rational_function(rational)
        self.powers = {Fraction(b): tuple(e) for b, e in (powers or {}).items() if any(e) and b != 1}
        self.gammas = {a: int(e) for a, e in (gammas or {}).items() if e}
        if exp_arg is not None and exp_arg.is_zero():
            exp_arg = None
        self.exp_arg = exp_arg

    # -- construction ---------------------------------------------------------
    @classmethod
    def gamma(cls, arg: LinearArg, e: int = 1) -> "GammaTerm":
        return cls(1, None, {arg: e})

    @classmethod
    def power(cls, base, exponent: tuple) -> "GammaTerm":
        return cls(1, {Fraction(base): exponent})

    def __mul__(self, other):
        if not isinstance(other, GammaTerm):
            other = GammaTerm(other)
        powers = dict(self.powers)
        for b, e in other.powers.items():
            powers[b] = _add3(powers.get(b, (0, 0, 0)), e)
        gammas = dict(self.gammas)
        for a, e in other.gammas.items():
            gammas[a] = gammas.get(a, 0) + e
        if self.exp_arg is None:
            ex = other.exp_arg
        elif other.exp_arg is None:
            ex = self.exp_arg
        else:
            ex = self.exp_arg + other.exp_arg
        return GammaTerm(self.rational * other.rational, powers, gammas, ex)

    __rmul__ = __mul__

    def inverse(self) -> "GammaTerm":
        return GammaTerm(
            self.rational.inverse(),
            {b: tuple(-x for x in e) for b, e in self.powers.items()},
            {a: -e for a, e in self.gammas.items()},
            None if self.exp_arg is None else -self.exp_arg,
        )

    def __truediv__(self, other):
        if not isinstance(other, GammaTerm):
            other = GammaTerm(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return GammaTerm(other) * self.inverse()

    def __neg__(self):
        return GammaTerm(-self.rational, self.powers, self.gammas, self.exp_arg)

    def __add__(self, other):
        # only like terms combine; a sum of distinct hypergeometric terms is not one
        if not isinstance(other, GammaTerm):
            other = GammaTerm(other)
        same_exp = (self.exp_arg is None and other.exp_arg is None) or (
            self.exp_arg is not None and other.exp_arg is not None and (self.exp_arg - other.exp_arg).is_zero()
        )
        if self.powers != other.powers or self.gammas != other.gammas or not same_exp:
            raise UnsupportedArgument("a sum of unlike hypergeometric terms is not hypergeometric")
        return GammaTerm(self.rational + other.rational, self.powers, self.gammas, self.exp_arg)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, GammaTerm) else GammaTerm(-as_rational_function(other)))

    def __rsub__(self, other):
        return GammaTerm(other) + (-self)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = GammaTerm(1)
        for _ in range(n):
            out = out * self
        return out

    # -- inspection -----------------------------------------------------------
    def depends_on_eps(self) -> bool:
        return self.rational.depends_on("ep") or self.exp_arg is not None or any(a.r for a in self.gammas)

    def is_rational(self) -> bool:
        return not self.gammas and self.exp_arg is None and all(e[0] == 0 and e[1] == 0 for e in self.powers.values())

    def as_rational(self) -> RationalFunction:
        if not self.is_rational():
            raise ValueError("term is not rational")
        out = self.rational
        for b, e in self.powers.items():
            out = out * RationalFunction(b) ** e[2]
        return out

    def reduced(self) -> tuple:
        """Return ``(canonical, R)`` with ``self = canonical * R`` and ``R`` rational.

        Gamma factors whose arguments differ by integers are merged into the
        one with the smallest constant; constant geometric exponents move
        into ``R``.
        """
        groups: dict = {}
        for a, e in self.gammas.items():
            key = (a.n, a.k, a.c - math.floor(a.c), a.r)
            groups.setdefault(key, []).append((a, e))
        rem = self.rational
        gammas = {}
        for key, items in groups.items():
            base = min(a for a, _ in items)
            z = base.rational()
            net = 0
            for a, e in items:
                net += e
                d = int(a.c - base.c)
                if d:
                    rem = rem * pochhammer(z, d) ** e
            if not net:
                continue
            if base.n == 0 and base.k == 0 and base.r == 0 and base.c.denominator == 1 and base.c >= 1:
                rem = rem * Fraction(math.factorial(int(base.c) - 1)) ** net
            else:
                gammas[base] = net
        powers = {}
        for b, (en, ek, ec) in self.powers.items():
            if ec:
                rem = rem * RationalFunction(b) ** ec
            if en or ek:
                powers[b] = (en, ek, 0)
        return GammaTerm(1, powers, gammas, self.exp_arg), rem

    def shift_ratio(self, var: str) -> RationalFunction:
        """``t(var+1)/t(var)`` as a rational function."""
        if var not in _SHIFT_VARS:
            raise ValueError(f"shift variable must be N or k, got {var!r}")
        r = self.rational.shift(var, 1) / self.rational if not self.rational.is_zero() else RationalFunction(1)
        for b, e in self.powers.items():
            c = e[0] if var == "N" else e[1]
            if c:
                r = r * RationalFunction(b) ** c
        for a, e in self.gammas.items():
            c = a.coefficient(var)
            if c:
                r = r * pochhammer(a.rational(), c) ** e
        return r

    # -- evaluation -----------------------------------------------------------
    def unit(self) -> tuple:
        """Gamma arguments (with exponents) of the ``ep``-dependent unit used by :meth:`exact_value`."""
        out: dict = {}
        for a, e in self.gammas.items():
            if a.r == 0 and a.c.denominator == 1:
                continue
            z0 = (a.c - math.floor(a.c), a.r)
            out[z0] = out.get(z0, 0) + e
        return tuple(sorted((z, e) for z, e in out.items() if e))

    def exact_value(self, point: Mapping) -> Fraction:
        """Value divided by ``unit`` and by ``exp(exp_arg)``; exact at rational ``ep``.

        ``unit`` is a product of ``Gamma(c0 + r*ep)`` that does not depend on
        ``N`` or ``k``, so ratios of exact values at different points are the
        true ratios.
        """
        val = self.rational.evaluate(point)
        if val == 0:
            return Fraction(0)
        eps = Fraction(point.get("ep", 0))
        for a, e in self.gammas.items():
            z = a.value(point)
            if a.r == 0 and a.c.denominator == 1:
                zi = int(z)
                if zi <= 0:
                    if e < 0:
                        return Fraction(0)
                    raise PoleError(f"Gamma pole at {zi}")
                val *= Fraction(math.factorial(zi - 1)) ** e
                continue
            shift = int(a.value(point) - (a.c - math.floor(a.c)) - a.r * eps)
            z0 = z - shift
            if a.r != 0 and (z0 <= 0 and z0.denominator == 1):
                raise PoleError("Gamma unit at a pole; choose another ep")
            val *= _poch_value(z0, shift) ** e
        for b, (en, ek, ec) in self.powers.items():
            ex = en * int(point.get("N", 0)) + ek * int(point.get("k", 0)) + ec
            val *= b**ex
        return val

    def float_value(self, point: Mapping, dps: int = 40):
        """High-precision numeric value; ``point`` values may be floats."""
        with mpmath.workdps(dps + 10):
            p = {v: (mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpmathify(x)) for v, x in point.items()}
            num = self.rational.num
            den = self.rational.den
            val = _poly_float(num, p) / _poly_float(den, p)
            for a, e in self.gammas.items():
                z = a.n * p.get("N", 0) + a.k * p.get("k", 0) + mpmath.mpf(a.c.numerator) / a.c.denominator + mpmath.mpf(a.r.numerator) / a.r.denominator * p.get("ep", 0)
                val *= mpmath.gamma(z) ** e if e > 0 else mpmath.rgamma(z) ** (-e)
            for b, (en, ek, ec) in self.powers.items():
                ex = en * int(point.get("N", 0)) + ek * int(point.get("k", 0)) + ec
                val *= mpmath.mpf(b.numerator) ** ex / mpmath.mpf(b.denominator) ** ex
            if self.exp_arg is not None:
                val *= mpmath.exp(self.exp_arg.constant_float(point.get("ep", 0), dps))
            return val

    def __eq__(self, other):
        if not isinstance(other, GammaTerm):
            return NotImplemented
        return (self.rational, self.powers, self.gammas, self.exp_arg) == (other.rational, other.powers, other.gammas, other.exp_arg)

    def __hash__(self):
        return hash((self.rational, tuple(sorted(self.gammas.items()))))

    def __str__(self):
        parts = []
        if self.rational != 1 or not (self.powers or self.gammas or self.exp_arg):
            parts.append(f"({self.rational})")
        for b, (en, ek, ec) in sorted(self.powers.items()):
            ex = RationalFunction.var("N") * en + RationalFunction.var("k") * ek + ec
            parts.append(f"({b})^({ex})")
        for a, e in sorted(self.gammas.items()):
            parts.append(f"Gamma[{a}]" + (f"^{e}" if e != 1 else "") if e > 0 else f"Gamma[{a}]^({e})")
        if self.exp_arg is not None:
            parts.append(f"Exp[{_exact_series_str(self.exp_arg)}]")
        return "*".join(parts)

    def __repr__(self):
        return f"GammaTerm({str(self)!r})"


def _exact_series_str(s: EpsSeries) -> str:
    parts = []
    for i, c in zip(s.orders(), s.coeffs):
        if c:
            parts.append(f"({c})*ep^{i}")
    return " + ".join(parts) if parts else "0"


def _poly_float(p, point):
    total = mpmath.mpf(0)
    for exps, c in p.terms().items():
        t = mpmath.mpf(c.numerator) / c.denominator
        for name, e in zip(VARS, exps):
            if e:
                t *= point.get(name, 0) ** int(e)
        total += t
    return total


class _TermGrammar(Grammar):
    _FUNCS = {"Gamma", "Beta", "Binomial", "Exp", "exp", "Pochhammer", "Factorial"}

    def number(self, value):
        return GammaTerm(value)

    def symbol(self, name):
        if name in ("N", "k", "ep", "eps", "epsilon", "ε"):
            return GammaTerm(RationalFunction.var(name))
        raise ValueError(f"unknown symbol {name!r}")

    def is_function(self, name):
        return name in self._FUNCS

    def call(self, name, bracket, args):
        if bracket is not None and args is not None:
            raise ValueError(f"{name} takes one argument list")
        text = bracket if bracket is not None else args
        parts = split_top_level(text)
        if name == "Gamma" and len(parts) == 1:
            return GammaTerm.gamma(LinearArg.parse(parts[0]))
        if name == "Factorial" and len(parts) == 1:
            return GammaTerm.gamma(LinearArg.parse(parts[0]).plus(1))
        if name == "Beta" and len(parts) == 2:
            a, b = (LinearArg.parse(p) for p in parts)
            return GammaTerm(1, None, _gsum({a: 1, b: 1}, {_ladd(a, b): -1}))
        if name == "Binomial" and len(parts) == 2:
            n, k = (LinearArg.parse(p) for p in parts)
            return GammaTerm(1, None, _gsum({n.plus(1): 1}, {k.plus(1): -1}, {_ladd(n, k, -1).plus(1): -1}))
        if name == "Pochhammer" and len(parts) == 2:
            a, m = (LinearArg.parse(p) for p in parts)
            return GammaTerm(1, None, _gsum({_ladd(a, m): 1}, {a: -1}))
        if name in ("Exp", "exp") and len(parts) == 1:
            s = parse_series(parts[0].replace("EulerGamma", "eg"), "k")
            if s.trunc is not None or any(c for i, c in zip(s.orders(), s.coeffs) if i <= 0):
                raise UnsupportedArgument("Exp needs a polynomial in ep without constant term")
            if any(c.depends_on("N") or c.depends_on("k") or not c.is_constant() for c in s.coeffs):
                raise UnsupportedArgument("Exp argument may depend on ep and constants only")
            return GammaTerm(1, None, None, s)
        raise ValueError(f"unknown function {name!r} with {len(parts)} arguments")

    def power(self, base, exponent):
        if isinstance(exponent, int):
            return base**exponent
        if not base.is_rational():
            raise UnsupportedArgument("symbolic exponents need a constant base")
        r = base.as_rational()
        if not r.is_constant():
            raise UnsupportedArgument("symbolic exponents need a constant base")
        return GammaTerm.power(r.constant_value(), _linear_power(exponent))


def _ladd(a: LinearArg, b: LinearArg, s: int = 1) -> LinearArg:
    return LinearArg(a.n + s * b.n, a.k + s * b.k, a.c + s * b.c, a.r + s * b.r)


def _gsum(*maps) -> dict:
    out: dict = {}
    for m in maps:
        for a, e in m.items():
            out[a] = out.get(a, 0) + e
    return out


def parse_term(text: str) -> GammaTerm:
    """Parse e.g. ``(-1)^k*Binomial[N,k]*Beta[2+k, ep/2]*Exp[-3*ep*eg/2]``."""
    return parse(text, _TermGrammar())


def term_quotient(a: GammaTerm, b: GammaTerm):
    """``a/b`` as a rational function, or ``None`` when it is not rational."""
    q, rem = (a / b).reduced()
    if q.gammas or q.powers or q.exp_arg is not None:
        return None
    return rem


class HyperTerm:
    """Hypergeometric term in ``N`` and ``k`` given by its shift quotients.

    ``term`` (optional) is an underlying :class:`GammaTerm` used for exact
    values; without it values follow from ``ratio_k``/``ratio_N`` and the
    anchor ``(N0, k0, value)``.
    """

    __slots__ = ("ratio_k", "ratio_N", "term", "anchor")

    def __init__(self, ratio_k, ratio_N=1, term: GammaTerm | None = None, anchor: tuple | None = None):
        self.ratio_k = as_rational_function(ratio_k)
        self.ratio_N = as_rational_function(ratio_N)
        self.term = term
        self.anchor = anchor

    @classmethod
    def from_term(cls, term: GammaTerm) -> "HyperTerm":
        return cls(term.shift_ratio("k"), term.shift_ratio("N"), term)

    @classmethod
    def parse(cls, text: str) -> "HyperTerm":
        return cls.from_term(parse_term(text))

    @property
    def value_anchor(self):
        return self.anchor

    def is_compatible(self) -> bool:
        """``ratio_k(N+1,k) * ratio_N(N,k) == ratio_N(N,k+1) * ratio_k(N,k)``."""
        return self.ratio_k.shift("N", 1) * self.ratio_N == self.ratio_N.shift("k", 1) * self.ratio_k

    def value(self, N: int, k: int, eps: Fraction = Fraction(0)) -> Fraction:
        """Exact value (up to an ``ep``-only unit when built from a term)."""
        if self.term is not None:
            return self.term.exact_value({"N": N, "k": k, "ep": eps})
        if self.anchor is None:
            raise ValueError("hypergeometric term has neither a product form nor an anchor")
        n0, k0, v = self.anchor
        v = Fraction(v)
        pt = {"ep": eps}
        n, kk = n0, k0
        while n != N:
            step = 1 if N > n else -1
            if step == 1:
                v *= self.ratio_N.evaluate({**pt, "N": n, "k": kk})
            else:
                v /= self.ratio_N.evaluate({**pt, "N": n - 1, "k": kk})
            n += step
        while kk != k:
            step = 1 if k > kk else -1
            if step == 1:
                v *= self.ratio_k.evaluate({**pt, "N": n, "k": kk})
            else:
                v /= self.ratio_k.evaluate({**pt, "N": n, "k": kk - 1})
            kk += step
        return v

    def __mul__(self, other):
        if isinstance(other, HyperTerm):
            term = self.term * other.term if self.term is not None and other.term is not None else None
            return HyperTerm(self.ratio_k * other.ratio_k, self.ratio_N * other.ratio_N, term)
        r = as_rational_function(other)
        term = None if self.term is None else self.term * r
        return HyperTerm(self.ratio_k * r.shift("k", 1) / r, self.ratio_N * r.shift("N", 1) / r, term)

    def __str__(self):
        if self.term is not None:
            return str(self.term)
        return f"HyperTerm(ratio_k={self.ratio_k}, ratio_N={self.ratio_N})"

    def __repr__(self):
        return str(self)
