"""Closed forms built from rational functions, geometric factors, formal
constants and (generalized) S-sums.

A term is ``coeff(N) * c**N * const_1 * ... * S_w(N)`` where ``w`` is a word
of letters ``(a, x)`` standing for the nested sum

    S_{(a1,x1),...,(ak,xk)}(N) = sum_{N>=i1>=...>=ik>=1} x1^i1/i1^a1 ... xk^ik/ik^ak.

Products of S-sums are always expanded with the quasi-shuffle product, so
each term carries at most one S-sum and the representation is canonical
with respect to the word basis.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import mpmath

from .core_algebra import Grammar, RationalFunction, parse, split_top_level
from .core_algebra.poly import as_rational_function

__all__ = [
    "SSum",
    "SumExpression",
    "Word",
    "ssum_eval_exact",
    "expr_eval_float",
    "stuffle_product",
    "shift_synchronize",
    "expr_normalize",
    "stuffle_words",
    "constant_value",
    "parse_sum_expr",
    "word_from_indices",
]

Word = tuple  # tuple of (a: int, x: Fraction) letters

_ONE_RF = RationalFunction(1)


# -- words ---------------------------------------------------------------
def word_from_indices(indices: Iterable) -> Word:
    """Harmonic-sum indices (negative = alternating) or explicit ``(a, x)`` pairs."""
    out = []
    for item in indices:
        if isinstance(item, tuple):
            a, x = item
            a, x = int(a), Fraction(x)
        else:
            a, x = abs(int(item)), Fraction(1 if int(item) > 0 else -1)
        if a <= 0:
            raise ValueError("S-sum weights must be positive integers")
        if x == 0:
            raise ValueError("S-sum arguments must be nonzero")
        out.append((a, x))
    if not out:
        raise ValueError("S-sum needs at least one index")
    return tuple(out)


@lru_cache(maxsize=None)
def stuffle_words(u: Word, v: Word) -> tuple:
    """Quasi-shuffle ``S_u * S_v`` as a tuple of ``(word, integer multiplicity)``."""
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    (a, x), ur = u[0], u[1:]
    (b, y), vr = v[0], v[1:]
    acc: dict = {}
    for w, m in stuffle_words(ur, v):
        key = ((a, x),) + w
        acc[key] = acc.get(key, 0) + m
    for w, m in stuffle_words(u, vr):
        key = ((b, y),) + w
        acc[key] = acc.get(key, 0) + m
    for w, m in stuffle_words(ur, vr):
        key = ((a + b, x * y),) + w
        acc[key] = acc.get(key, 0) - m
    return tuple(sorted(((w, m) for w, m in acc.items() if m), key=lambda t: t[0]))


@lru_cache(maxsize=None)
def _word_values(word: Word, n: int) -> tuple:
    """``(S_w(0), ..., S_w(n))`` exactly."""
    if not word:
        return (Fraction(1),) * (n + 1)
    (a, x), rest = word[0], word[1:]
    inner = _word_values(rest, n)
    out = [Fraction(0)]
    acc = Fraction(0)
    xp = Fraction(1)
    for i in range(1, n + 1):
        xp *= x
        acc += xp / Fraction(i) ** a * inner[i]
        out.append(acc)
    return tuple(out)


def _word_value(word: Word, n: int) -> Fraction:
    if n < 0:
        raise ValueError("S-sums are only defined for nonnegative arguments")
    return _word_values(word, n)[n]


def _letter_str(a: int, x: Fraction) -> str:
    return str(a) if x == 1 else (str(-a) if x == -1 else None)


def _word_str(word: Word, var: str) -> str:
    letters = [_letter_str(a, x) for a, x in word]
    if all(s is not None for s in letters):
        return f"S[{','.join(letters)}]({var})"
    return "S[" + ",".join(f"{{{a},{x}}}" for a, x in word) + f"]({var})"


class SSum:
    """A single nested sum ``S_w(var + offset)``."""

    __slots__ = ("word", "var", "offset")

    def __init__(self, indices, var: str = "N", offset: int = 0):
        self.word = indices if _is_word(indices) else word_from_indices(indices)
        self.var = var
        self.offset = int(offset)

    def depth(self) -> int:
        return len(self.word)

    def weight(self) -> int:
        return sum(a for a, _ in self.word)

    def evaluate(self, n: int) -> Fraction:
        return _word_value(self.word, n + self.offset)

    def as_expression(self) -> "SumExpression":
        e = SumExpression._from_items({(Fraction(1), (), self.word): _ONE_RF}, self.var)
        return shift_synchronize(e, self.offset) if self.offset else e

    def __eq__(self, other):
        return isinstance(other, SSum) and (self.word, self.var, self.offset) == (other.word, other.var, other.offset)

    def __hash__(self):
        return hash((self.word, self.var, self.offset))

    def __str__(self):
        arg = self.var if not self.offset else f"{self.var}{self.offset:+d}"
        return _word_str(self.word, arg)

    __repr__ = __str__


def _is_word(obj) -> bool:
    return isinstance(obj, tuple) and all(isinstance(t, tuple) and len(t) == 2 for t in obj)


# -- constants ----------------------------------------------------------
def constant_value(name: str, dps: int = 40):
    """Numeric value of a formal constant token (``z2``, ``eg``, ``log(3/2)``)."""
    with mpmath.workdps(dps + 10):
        if name == "eg":
            return +mpmath.euler
        if name.startswith("z") and name[1:].isdigit():
            return mpmath.zeta(int(name[1:]))
        if name.startswith("log(") and name.endswith(")"):
            q = Fraction(name[4:-1])
            return mpmath.log(mpmath.mpf(q.numerator) / q.denominator)
    raise ValueError(f"unknown constant {name!r}")


def _check_constant(name: str) -> str:
    if name == "eg":
        return name
    if name.startswith("z") and name[1:].isdigit() and int(name[1:]) >= 2:
        return name
    if name.startswith("log(") and name.endswith(")"):
        q = Fraction(name[4:-1])
        if q <= 0:
            raise ValueError("log constants need a positive rational argument")
        return f"log({q})"
    raise ValueError(f"unknown constant {name!r}")


def _merge_consts(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


# -- expressions ----------------------------------------------------------
class SumExpression:
    """Immutable Q(vars)-linear combination of ``c**var * constants * S_w(var)``.

    Keys are ``(c, constants, word)``; ``var`` names the S-sum argument.
    """

    __slots__ = ("_t", "var")

    def __init__(self, value=0, var: str = "N"):
        self.var = var
        if isinstance(value, SumExpression):
            self._t, self.var = value._t, value.var
            return
        rf = as_rational_function(value)
        self._t = {} if rf.is_zero() else {(Fraction(1), (), ()): rf}

    @classmethod
    def _from_items(cls, items: Mapping, var: str) -> "SumExpression":
        obj = cls.__new__(cls)
        obj._t = {k: v for k, v in items.items() if not v.is_zero()}
        obj.var = var
        return obj

    @classmethod
    def zero(cls, var: str = "N") -> "SumExpression":
        return cls._from_items({}, var)

    @classmethod
    def constant(cls, name: str, var: str = "N") -> "SumExpression":
        return cls._from_items({(Fraction(1), (_check_constant(name),), ()): _ONE_RF}, var)

    @classmethod
    def ssum(cls, indices, var: str = "N") -> "SumExpression":
        w = indices if _is_word(indices) else word_from_indices(indices)
        return cls._from_items({(Fraction(1), (), w): _ONE_RF}, var)

    @classmethod
    def geometric(cls, c, var: str = "N") -> "SumExpression":
        c = Fraction(c)
        if c == 0:
            raise ValueError("geometric base must be nonzero")
        return cls._from_items({(c, (), ()): _ONE_RF}, var)

    # -- inspection ------------------------------------------------------
    def items(self) -> list:
        """Canonically ordered ``[((c, constants, word), coefficient), ...]``."""
        return sorted(self._t.items(), key=lambda kv: kv[0])

    def keys(self) -> list:
        return sorted(self._t)

    def coefficient(self, key: tuple) -> RationalFunction:
        return self._t.get(key, RationalFunction(0))

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def is_rational(self) -> bool:
        """No geometric factors, constants or S-sums."""
        return all(k == (Fraction(1), (), ()) for k in self._t)

    def as_rational(self) -> RationalFunction:
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational function")
        return self._t.get((Fraction(1), (), ()), RationalFunction(0))

    def is_constant(self) -> bool:
        """Free of the argument variable: only constants times rational numbers."""
        return all(k[0] == 1 and not k[2] and v.is_constant() for k, v in self._t.items())

    def constant_parts(self) -> dict:
        """For constant expressions: ``{constants tuple: Fraction}``."""
        if not self.is_constant():
            raise ValueError(f"{self} depends on {self.var}")
        return {k[1]: v.constant_value() for k, v in self._t.items()}

    def depends_on(self, var: str) -> bool:
        if var == self.var and any(k[0] != 1 or k[2] for k in self._t):
            return True
        return any(v.depends_on(var) for v in self._t.values())

    def max_depth(self) -> int:
        return max((len(k[2]) for k in self._t), default=0)

    def words(self) -> set:
        return {k[2] for k in self._t if k[2]}

    def constants(self) -> set:
        return {c for k in self._t for c in k[1]}

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, SumExpression):
            return other
        if isinstance(other, (int, Fraction, RationalFunction)) or hasattr(other, "_p"):
            return SumExpression(other, self.var)
        return None

    def _var_with(self, other: "SumExpression") -> str:
        if self.var == other.var:
            return self.var
        if not other._has_sums():
            return self.var
        if not self._has_sums():
            return other.var
        raise ValueError(f"cannot combine expressions in {self.var} and {other.var}")

    def _has_sums(self) -> bool:
        return any(k[0] != 1 or k[2] for k in self._t)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not o._t:
            return self
        var = self._var_with(o)
        t = dict(self._t)
        for k, v in o._t.items():
            if k in t:
                s = t[k] + v
                if s.is_zero():
                    del t[k]
                else:
                    t[k] = s
            else:
                t[k] = v
        return SumExpression._from_items(t, var)

    __radd__ = __add__

    def __neg__(self):
        return SumExpression._from_items({k: -v for k, v in self._t.items()}, self.var)

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

    def scale(self, r) -> "SumExpression":
        r = as_rational_function(r)
        if r.is_zero():
            return SumExpression.zero(self.var)
        return SumExpression._from_items({k: v * r for k, v in self._t.items()}, self.var)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RationalFunction)):
            return self.scale(other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self._t or not o._t:
            return SumExpression.zero(self.var)
        var = self._var_with(o)
        if len(o._t) == 1 and next(iter(o._t)) == (Fraction(1), (), ()):
            return self.scale(o._t[(Fraction(1), (), ())]).with_var(var)
        if len(self._t) == 1 and next(iter(self._t)) == (Fraction(1), (), ()):
            return o.scale(self._t[(Fraction(1), (), ())]).with_var(var)
        acc: dict = {}
        for (c1, k1, w1), v1 in self._t.items():
            for (c2, k2, w2), v2 in o._t.items():
                v = v1 * v2
                c = c1 * c2
                ks = _merge_consts(k1, k2)
                for w, m in stuffle_words(w1, w2):
                    key = (c, ks, w)
                    term = v * m if m != 1 else v
                    if key in acc:
                        acc[key] = acc[key] + term
                    else:
                        acc[key] = term
        return SumExpression._from_items(acc, var)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, SumExpression):
            if not other.is_rational():
                raise ValueError("can only divide by a rational function")
            other = other.as_rational()
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return self.scale(as_rational_function(other).inverse())

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers of expressions are supported")
        out = SumExpression(1, self.var)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._t == o._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def with_var(self, var: str) -> "SumExpression":
        if var == self.var:
            return self
        return SumExpression._from_items(self._t, var)

    def map_coefficients(self, fn) -> "SumExpression":
        return SumExpression._from_items({k: fn(v) for k, v in self._t.items()}, self.var)

    def subs(self, point: Mapping) -> "SumExpression":
        """Substitute values for variables other than the S-sum argument."""
        if self.var in point:
            raise ValueError("use evaluate() to specialize the summation argument")
        return self.map_coefficients(lambda v: v.subs(point))

    # -- shifting and evaluation ------------------------------------------------
    def shift(self, j: int) -> "SumExpression":
        return shift_synchronize(self, j)

    def evaluate(self, n: int) -> "SumExpression":
        """Exact value at ``var = n``: rational coefficients times constants (other variables stay symbolic)."""
        if n < 0:
            raise ValueError("S-sums are only evaluated at nonnegative arguments")
        acc: dict = {}
        for (c, ks, w), v in self._t.items():
            val = v.subs({self.var: n})
            f = Fraction(c) ** n
            if w:
                f *= _word_value(w, n)
            if not f:
                continue
            key = (Fraction(1), ks, ())
            term = val * f
            acc[key] = acc[key] + term if key in acc else term
        return SumExpression._from_items(acc, self.var)

    def value(self, n: int) -> Fraction:
        """Exact rational value at ``var = n``; fails when constants remain."""
        ev = self.evaluate(n)
        parts = ev.constant_parts()
        if any(k for k in parts):
            raise ValueError(f"value at {n} involves formal constants: {ev}")
        return parts.get((), Fraction(0))

    def eval_float(self, n: int, dps: int = 40, point: Mapping | None = None):
        ev = self.evaluate(n)
        if point:
            ev = ev.subs(point)
        return constant_expr_float(ev, dps)

    # -- printing ----------------------------------------------------------------
    def __str__(self):
        if not self._t:
            return "0"
        out = []
        for (c, ks, w), v in self.items():
            factors = []
            if c != 1:
                base = str(c) if (c.denominator == 1 and c > 0) else f"({c})"
                factors.append(f"{base}^{self.var}")
            factors.extend(ks)
            if w:
                factors.append(_word_str(w, self.var))
            neg = v.num.leading_coefficient() < 0
            if neg:
                v = -v
            coef = _coef_str(v)
            if coef == "1":
                body = "*".join(factors) if factors else "1"
            elif factors:
                body = f"{coef}*{'*'.join(factors)}"
            else:
                body = coef
            if not out:
                out.append(f"-{body}" if neg else body)
            else:
                out.append(f" - {body}" if neg else f" + {body}")
        return "".join(out)

    def __repr__(self):
        return f"SumExpression({str(self)!r})"


def _coef_str(v: RationalFunction) -> str:
    s = str(v)
    if v.is_polynomial() and (" + " in s or " - " in s or s.startswith("-")):
        return f"({s})"
    if not v.is_polynomial() and "/" in s and s.split("/")[0].startswith("-"):
        return f"({s})"
    return s


def constant_expr_float(e: SumExpression, dps: int = 40):
    with mpmath.workdps(dps + 10):
        total = mpmath.mpf(0)
        for ks, q in e.constant_parts().items():
            term = mpmath.mpf(q.numerator) / q.denominator
            for k in ks:
                term *= constant_value(k, dps)
            total += term
        return total


# -- shift synchronization --------------------------------------------------------
@lru_cache(maxsize=None)
def _shift_word(word: Word, j: int, var: str) -> tuple:
    """``S_w(var + j)`` as a tuple of ``(c, word, coefficient)`` with sums at ``var``."""
    if j == 0 or not word:
        return ((Fraction(1), word, _ONE_RF),)
    if j > 0:
        prev = _shift_word(word, j - 1, var)
        acc: dict = {}
        for c, w, coef in prev:
            cs = coef.shift(var, 1) * c
            for c2, w2, coef2 in _shift_one(w, var):
                key = (c * c2, w2)
                t = cs * coef2
                acc[key] = acc[key] + t if key in acc else t
        return tuple((c, w, v) for (c, w), v in sorted(acc.items(), key=lambda kv: kv[0]) if not v.is_zero())
    prev = _shift_word(word, j + 1, var)
    acc = {}
    for c, w, coef in prev:
        cs = coef.shift(var, -1) / c
        for c2, w2, coef2 in _shift_minus_one(w, var):
            key = (c * c2, w2)
            t = cs * coef2
            acc[key] = acc[key] + t if key in acc else t
    return tuple((c, w, v) for (c, w), v in sorted(acc.items(), key=lambda kv: kv[0]) if not v.is_zero())


@lru_cache(maxsize=None)
def _shift_one(word: Word, var: str) -> tuple:
    """S_w(N+1) = S_w(N) + x^(N+1)/(N+1)^a S_w'(N+1)."""
    if not word:
        return ((Fraction(1), (), _ONE_RF),)
    (a, x), rest = word[0], word[1:]
    n1 = RationalFunction.var(var) + 1
    out = [(Fraction(1), word, _ONE_RF)]
    lead = n1 ** (-a) * x
    for c, w, coef in _shift_one(rest, var):
        out.append((x * c, w, lead * coef))
    return tuple(out)


@lru_cache(maxsize=None)
def _shift_minus_one(word: Word, var: str) -> tuple:
    """S_w(N-1) = S_w(N) - x^N/N^a S_w'(N)."""
    if not word:
        return ((Fraction(1), (), _ONE_RF),)
    (a, x), rest = word[0], word[1:]
    n = RationalFunction.var(var)
    return ((Fraction(1), word, _ONE_RF), (x, rest, -(n ** (-a))))


def shift_synchronize(e: SumExpression, j: int) -> SumExpression:
    """Rewrite ``e(var + j)`` with every S-sum at ``var``."""
    if j == 0 or not e._t:
        return e
    var = e.var
    acc: dict = {}
    for (c, ks, w), v in e._t.items():
        vs = v.shift(var, j) * (Fraction(c) ** j)
        for c2, w2, coef in _shift_word(w, j, var):
            key = (c * c2, ks, w2)
            t = vs * coef
            acc[key] = acc[key] + t if key in acc else t
    return SumExpression._from_items(acc, var)


# -- module-level operations ---------------------------------------------------------
def ssum_eval_exact(s: SSum, n: int) -> SumExpression:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return SumExpression(s.evaluate(n), s.var)


def expr_eval_float(e: SumExpression, n: int, precision: int = 40):
    return e.eval_float(n, precision)


def stuffle_product(a: SumExpression, b: SumExpression) -> SumExpression:
    return a * b


def expr_normalize(e: SumExpression) -> SumExpression:
    """Canonical rebuild: merges keys, drops zero terms (idempotent)."""
    acc: dict = {}
    for k, v in e._t.items():
        acc[k] = acc[k] + v if k in acc else v
    return SumExpression._from_items(acc, e.var)


# -- parsing --------------------------------------------------------------------------
class SumGrammar(Grammar):
    """Syntax: ``S[1,-2](N)``, ``S[{1,1/2},{1,1}](N)``, ``z2``, ``eg``, ``(-1)^N``, ``2^N``."""

    def __init__(self, var: str = "N"):
        self.var = var

    def number(self, value):
        return SumExpression(value, self.var)

    def symbol(self, name):
        if name in ("N", "k", "x", "ep", "eps", "epsilon", "ε"):
            return SumExpression(RationalFunction.var(name), self.var)
        return SumExpression.constant(name, self.var)

    def is_function(self, name):
        return name == "log"

    def call(self, name, bracket, args):
        if name == "log" and bracket is None:
            return SumExpression.constant(f"log({Fraction(args.strip())})", self.var)
        if name != "S" or bracket is None or args is None:
            raise ValueError(f"unknown function {name!r}")
        items = split_top_level(bracket)
        letters = []
        for it in items:
            if it.startswith("{"):
                a, x = split_top_level(it.strip("{}"))
                letters.append((int(a), Fraction(x)))
            else:
                letters.append(int(it))
        arg = parse(args, _ArgGrammar())
        var, off = arg.var, arg.off
        if var != self.var:
            raise ValueError(f"S-sum argument {var!r} does not match expression variable {self.var!r}")
        return SSum(letters, var, off).as_expression()

    def power(self, base, exponent):
        if isinstance(exponent, int):
            if exponent < 0:
                if not base.is_rational():
                    raise ValueError("negative powers only of rational functions")
                return SumExpression(base.as_rational() ** exponent, self.var)
            return base**exponent
        if exponent != self.var:
            raise ValueError(f"symbolic exponent must be {self.var}")
        if not base.is_rational() or not base.as_rational().is_constant():
            raise ValueError("geometric base must be a rational number")
        return SumExpression.geometric(base.as_rational().constant_value(), self.var)


class _Arg:
    __slots__ = ("var", "off")

    def __init__(self, var, off):
        self.var, self.off = var, off

    def __add__(self, o):
        if self.var and o.var:
            raise ValueError("bad S-sum argument")
        return _Arg(self.var or o.var, self.off + o.off)

    def __neg__(self):
        if self.var:
            raise ValueError("bad S-sum argument")
        return _Arg(None, -self.off)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        raise ValueError("bad S-sum argument")

    __truediv__ = __mul__


class _ArgGrammar(Grammar):
    """``N``, ``N+2``, ``N-1``."""

    def number(self, value):
        return _Arg(None, int(value))

    def symbol(self, name):
        return _Arg(name, 0)

    def power(self, base, exponent):
        raise ValueError("bad S-sum argument")


def parse_sum_expr(text: str, var: str = "N") -> SumExpression:
    return parse(text, SumGrammar(var))
