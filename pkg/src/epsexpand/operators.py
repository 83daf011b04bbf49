"""Linear difference operators and first-order coupled systems.

A :class:`RecOperator` ``a_0 + a_1 E + ... + a_d E^d`` has polynomial
coefficients in ``N`` and ``ep`` and acts by ``(E f)(N) = f(N+1)``.
A :class:`CoupledSystem` is either a differential system in ``x`` or a
difference system in ``N``; :func:`ode_to_rec` maps the first to the second
through coefficient comparison of generating functions.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Mapping

from .core_algebra import Grammar, PoleError, Polynomial, RationalFunction, parse, poly_gcd, solve
from .core_algebra.linalg import SingularSystem
from .core_algebra.poly import as_rational_function
from .eps_series import EP, EpsSeries, parse_series, scale_series
from .sum_expr import SumExpression, _Arg, _ArgGrammar, shift_synchronize

__all__ = [
    "RecOperator",
    "ScalarRecurrence",
    "CoupledSystem",
    "SequenceOracle",
    "op_apply",
    "op_specialize_eps",
    "ode_to_rec",
    "system_oracle",
    "companionize",
    "parse_recurrence",
    "parse_operator",
]

_N = RationalFunction.var("N")


def _lcm(a: Polynomial, b: Polynomial) -> Polynomial:
    return (a * b).divexact(poly_gcd(a, b))


def _common_denominator(values) -> Polynomial:
    d = Polynomial(1)
    for v in values:
        d = _lcm(d, as_rational_function(v).den)
    return d


def _shift_label(fname: str, s: int, var: str = "N") -> str:
    if s == 0:
        return f"{fname}({var})"
    return f"{fname}({var}{'+' if s > 0 else '-'}{abs(s)})"


def _coef_text(c: RationalFunction) -> str:
    s = str(c)
    if c.is_constant() or (c.den.is_constant() and len(c.num.terms()) == 1 and not s.startswith("-")):
        return s
    return f"({s})"


def _lincomb_str(items, label) -> str:
    parts = []
    for key, c in items:
        if c.is_zero():
            continue
        lab = label(key)
        if c == 1:
            parts.append(f"+ {lab}")
        elif c == -1:
            parts.append(f"- {lab}")
        elif c.is_constant() and c.constant_value() < 0:
            parts.append(f"- {-c.constant_value()}*{lab}")
        else:
            parts.append(f"+ {_coef_text(c)}*{lab}")
    if not parts:
        return "0"
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[1:]


def _rational_gcd(values) -> Fraction:
    num = 0
    den = 1
    for v in values:
        num = math.gcd(num, v.numerator)
        den = den * v.denominator // math.gcd(den, v.denominator)
    return Fraction(num, den)


class RecOperator:
    """``sum_i coeffs[i] * E^i`` with polynomial coefficients in ``N`` and ``ep``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = []
        for c in coeffs:
            r = as_rational_function(c)
            if not r.is_polynomial():
                raise ValueError(f"operator coefficient {r} is not a polynomial; use RecOperator.from_rational")
            cs.append(r.num)
        if not cs:
            raise ValueError("an operator needs at least one coefficient")
        self.coeffs = tuple(cs)

    @classmethod
    def from_rational(cls, coeffs) -> tuple:
        """Clear denominators; returns ``(op, D)`` with ``op = D * given``."""
        rs = [as_rational_function(c) for c in coeffs]
        d = _common_denominator(rs)
        return cls([(r * d).num for r in rs]), d

    # -- structure ------------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> Polynomial:
        return self.coeffs[i]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def depends_on_eps(self) -> bool:
        return any(c.degree(EP) > 0 for c in self.coeffs)

    def content(self) -> Polynomial:
        g = Polynomial(0)
        for c in self.coeffs:
            g = poly_gcd(g, c)
        return g

    def primitive(self) -> tuple:
        """``(op / g, g)`` with ``g`` the gcd of all coefficients; ``op`` has integer content 1."""
        g = self.content()
        if g.is_zero():
            return self, Polynomial(1)
        cs = [c.divexact(g) for c in self.coeffs]
        q = _rational_gcd([c.content() for c in cs if not c.is_zero()])
        return RecOperator([c * (1 / q) for c in cs]), g * q

    def trimmed(self) -> tuple:
        """Drop zero coefficients at both ends; returns ``(op, offset)``."""
        nz = [i for i, c in enumerate(self.coeffs) if not c.is_zero()]
        if not nz:
            raise ValueError("zero operator")
        return RecOperator(self.coeffs[nz[0]: nz[-1] + 1]), nz[0]

    def specialize_eps(self, k: int) -> "RecOperator":
        """Coefficient of ``ep^k`` in every ``a_i``."""
        return RecOperator([c.coefficient(EP, k) for c in self.coeffs])

    def eps_degree(self) -> int:
        return max(c.degree(EP) for c in self.coeffs)

    def subs_eps(self, value) -> "RecOperator":
        return RecOperator([c.subs({EP: Fraction(value)}) for c in self.coeffs])

    def shift_index(self, j: int) -> "RecOperator":
        """Substitute ``N -> N + j`` in every coefficient."""
        return RecOperator([c.shift("N", j) for c in self.coeffs])

    def scaled(self, f) -> "RecOperator":
        return RecOperator([as_rational_function(c) * f for c in self.coeffs])

    # -- application -----------------------------------------------------------
    def apply(self, e: SumExpression, eps_val=None) -> SumExpression:
        op = self if eps_val is None else self.subs_eps(eps_val)
        acc = SumExpression.zero(e.var)
        for i, c in enumerate(op.coeffs):
            if not c.is_zero():
                acc = acc + shift_synchronize(e, i) * RationalFunction(c)
        return acc

    def apply_series(self, s: EpsSeries) -> EpsSeries:
        """Apply the ``ep``-dependent operator to a series of closed forms."""
        total = None
        for j in range(self.eps_degree() + 1):
            part = self.specialize_eps(j)
            if part.is_zero():
                continue
            term = s.map(part.apply).mul_eps(j)
            total = term if total is None else total + term
        if total is None:
            return EpsSeries.zero(s.start, s.trunc, s.var)
        return total

    def apply_values(self, f: Callable, n: int, eps=None) -> Fraction:
        """``sum_i a_i(n) f(n+i)`` for a numeric sequence ``f``."""
        pt = {"N": n}
        if eps is not None:
            pt[EP] = Fraction(eps)
        total = 0
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                total += c.evaluate(pt) * f(n + i)
        return total

    def equivalent(self, other: "RecOperator") -> bool:
        """Equal up to a nonzero factor in ``Q(ep, N)``."""
        if self.order != other.order:
            return False
        ratio = None
        for a, b in zip(self.coeffs, other.coeffs):
            if a.is_zero() != b.is_zero():
                return False
            if a.is_zero():
                continue
            r = RationalFunction(a, b)
            if ratio is None:
                ratio = r
            elif r != ratio:
                return False
        return True

    def __eq__(self, other):
        return isinstance(other, RecOperator) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def to_string(self, fname: str = "F", offset: int = 0) -> str:
        return _lincomb_str(
            [(i + offset, RationalFunction(c)) for i, c in enumerate(self.coeffs)],
            lambda s: _shift_label(fname, s),
        )

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"RecOperator({str(self)!r})"


def op_apply(op: RecOperator, e: SumExpression, eps_val=None) -> SumExpression:
    return op.apply(e, eps_val)


def op_specialize_eps(op: RecOperator, k: int) -> RecOperator:
    return op.specialize_eps(k)


class ScalarRecurrence:
    """``op F = rhs`` with the right-hand side expanded in ``ep``."""

    __slots__ = ("op", "rhs")

    def __init__(self, op: RecOperator, rhs: EpsSeries):
        if not isinstance(rhs, EpsSeries):
            raise TypeError("the right-hand side must be an EpsSeries")
        self.op = op
        self.rhs = rhs

    def residual(self, sol: EpsSeries) -> EpsSeries:
        return self.op.apply_series(sol) - self.rhs

    def __str__(self):
        return f"{self.op} = {self.rhs}"


# -- parsing linear combinations ------------------------------------------------------
class _Lin:
    """Linear combination of ``name(N+s)`` with rational-function coefficients."""

    __slots__ = ("terms", "scalar")

    def __init__(self, terms=None, scalar=None):
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}
        self.scalar = scalar

    @staticmethod
    def lift(v):
        return v if isinstance(v, _Lin) else _Lin(None, as_rational_function(v))

    def _add(self, o, sign):
        o = _Lin.lift(o)
        if self.scalar is not None and o.scalar is not None and not self.terms and not o.terms:
            return _Lin(None, self.scalar + o.scalar * sign)
        if (self.scalar is not None and not self.scalar.is_zero() and not self.terms) or (
            o.scalar is not None and not o.scalar.is_zero() and not o.terms
        ):
            raise ValueError("a linear equation cannot contain a free-standing term; put it on the right-hand side as an input")
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t.get(k, RationalFunction(0)) + v * sign
        return _Lin(t)

    def __add__(self, o):
        return self._add(o, 1)

    def __sub__(self, o):
        return self._add(o, -1)

    def __neg__(self):
        if self.scalar is not None:
            return _Lin(None, -self.scalar)
        return _Lin({k: -v for k, v in self.terms.items()})

    def __mul__(self, o):
        o = _Lin.lift(o)
        if self.scalar is not None and o.scalar is not None:
            return _Lin(None, self.scalar * o.scalar)
        if self.scalar is not None:
            return _Lin({k: v * self.scalar for k, v in o.terms.items()})
        if o.scalar is not None:
            return _Lin({k: v * o.scalar for k, v in self.terms.items()})
        raise ValueError("products of unknowns are not linear")

    def __truediv__(self, o):
        o = _Lin.lift(o)
        if o.scalar is None:
            raise ValueError("division by an unknown")
        if self.scalar is not None:
            return _Lin(None, self.scalar / o.scalar)
        return _Lin({k: v / o.scalar for k, v in self.terms.items()})

    def __pow__(self, n):
        if self.scalar is None:
            raise ValueError("powers of unknowns are not linear")
        return _Lin(None, self.scalar**n)


class _LinGrammar(Grammar):
    def __init__(self, names, var: str = "N"):
        self.names = set(names)
        self.var = var

    def number(self, value):
        return _Lin(None, RationalFunction(value))

    def symbol(self, name):
        if name in self.names:
            return _Lin({(name, 0): RationalFunction(1)})
        return _Lin(None, RationalFunction.var(name))

    def is_function(self, name):
        return name in self.names

    def call(self, name, bracket, args):
        if name not in self.names or bracket is not None:
            raise ValueError(f"unknown function {name!r}")
        arg = parse(args, _ArgGrammar())
        if not isinstance(arg, _Arg) or arg.var != self.var:
            raise ValueError(f"argument of {name} must be {self.var}+j")
        return _Lin({(name, int(arg.off)): RationalFunction(1)})

    def power(self, base, exponent):
        if not isinstance(exponent, int):
            raise ValueError("symbolic exponent")
        return base**exponent


def parse_lincomb(text: str, names) -> dict:
    """``{(name, shift): coefficient}`` for text such as ``N*I1(N-1) + 2*I2(N)``."""
    v = parse(text, _LinGrammar(names))
    if v.scalar is not None:
        if v.scalar.is_zero():
            return {}
        raise ValueError(f"{text!r} contains no unknowns")
    return v.terms


def _split_equation(text: str) -> tuple:
    depth = 0
    for i, ch in enumerate(text):
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch == "=" and depth == 0:
            return text[:i], text[i + 1:]
    return text, None


def parse_operator(text: str, fname: str = "F") -> RecOperator:
    """Parse ``2*(N+1)^2*F(N) + (...)*F(N+1) + ...``; negative shifts are re-indexed."""
    terms = parse_lincomb(text, [fname])
    shifts = [s for (_, s) in terms]
    lo = min(shifts)
    coeffs = [RationalFunction(0)] * (max(shifts) - lo + 1)
    for (_, s), c in terms.items():
        coeffs[s - lo] = c.shift("N", -lo)
    op, d = RecOperator.from_rational(coeffs)
    if not d.is_constant():
        raise ValueError("operator coefficients must be polynomial")
    return op


def parse_recurrence(text: str, fname: str = "F", rhs: str | None = None) -> ScalarRecurrence:
    """Parse ``op = series``; the right side may also be passed separately."""
    lhs, r = _split_equation(text)
    terms = parse_lincomb(lhs, [fname])
    lo = min(s for (_, s) in terms)
    coeffs = [RationalFunction(0)] * (max(s for (_, s) in terms) - lo + 1)
    for (_, s), c in terms.items():
        coeffs[s - lo] = c.shift("N", -lo)
    op, d = RecOperator.from_rational(coeffs)
    rtext = rhs if rhs is not None else r
    series = parse_series(rtext) if rtext is not None and rtext.strip() else EpsSeries.zero(0, None)
    series = series.shift(-lo) if lo else series
    if d != 1:
        series = scale_series(RationalFunction(d), series)
    return ScalarRecurrence(op, series)


# -- coupled systems -----------------------------------------------------------------------
class CoupledSystem:
    """First-order system in ``unknowns``.

    ``kind == "ode"``: ``D_x Y = matrix * Y + sum_b forcing[i][b] * B_b``
    with entries rational in ``x`` and ``ep``.

    ``kind == "rec"``: equation ``i`` is
    ``sum equations[i][(name, s)] * name(N+s) = sum forcing[i][(b, s)] * b(N+s) + rhs[i]``.

    ``inputs`` maps known function names to their expansions (EpsSeries in
    ``N``).  ``valid_from[i]`` is the smallest ``N`` at which equation ``i``
    only refers to nonnegative indices.
    """

    def __init__(self, kind: str, unknowns, *, matrix=None, equations=None, forcing=None, rhs=None, inputs=None, valid_from=None):
        if kind not in ("ode", "rec"):
            raise ValueError("kind must be 'ode' or 'rec'")
        self.kind = kind
        self.unknowns = tuple(unknowns)
        m = len(self.unknowns)
        self.inputs = dict(inputs or {})
        if kind == "ode":
            if matrix is None or len(matrix) != m or any(len(r) != m for r in matrix):
                raise ValueError(f"an ode system needs an {m}x{m} matrix")
            self.matrix = tuple(tuple(as_rational_function(v) for v in row) for row in matrix)
            self.forcing = tuple({b: as_rational_function(c) for b, c in (forcing[i] if forcing else {}).items()} for i in range(m))
            self.equations = None
            self.rhs = None
            self.valid_from = None
        else:
            if equations is None or len(equations) != m:
                raise ValueError(f"a rec system needs {m} equations")
            self.matrix = None
            self.equations = tuple({k: as_rational_function(v) for k, v in eq.items() if not as_rational_function(v).is_zero()} for eq in equations)
            for eq in self.equations:
                for name, _ in eq:
                    if name not in self.unknowns:
                        raise ValueError(f"unknown {name!r} is not declared")
            self.forcing = tuple({k: as_rational_function(v) for k, v in (forcing[i] if forcing else {}).items()} for i in range(m))
            self.rhs = tuple(rhs[i] if rhs and rhs[i] is not None else None for i in range(m))
            self.valid_from = tuple(valid_from) if valid_from else (0,) * m

    @property
    def size(self) -> int:
        return len(self.unknowns)

    # -- difference systems ------------------------------------------------------
    def shifts(self) -> tuple:
        s = [sh for eq in self.equations for (_, sh) in eq]
        return min(s), max(s)

    def reindexed(self) -> "CoupledSystem":
        """Substitute ``N -> N - min shift`` so all unknown shifts are nonnegative."""
        lo, _ = self.shifts()
        if lo == 0:
            return self
        j = -lo
        eqs = [{(n, s + j): c.shift("N", j) for (n, s), c in eq.items()} for eq in self.equations]
        forcing = [{(b, s + j): c.shift("N", j) for (b, s), c in f.items()} for f in self.forcing]
        rhs = [None if r is None else r.shift(j) for r in self.rhs]
        vf = [v - j for v in self.valid_from]
        return CoupledSystem("rec", self.unknowns, equations=eqs, forcing=forcing, rhs=rhs, inputs=self.inputs, valid_from=vf)

    def first_order_matrices(self) -> tuple:
        """``(M1, M0)`` with ``M1 Y(N+1) + M0 Y(N) = b(N)``; the system must be re-indexed."""
        lo, hi = self.shifts()
        if lo != 0 or hi > 1:
            raise ValueError("system is not first order in shifts 0 and 1; re-index or companionize first")
        idx = {n: i for i, n in enumerate(self.unknowns)}
        m = self.size
        z = RationalFunction(0)
        m1 = [[z] * m for _ in range(m)]
        m0 = [[z] * m for _ in range(m)]
        for i, eq in enumerate(self.equations):
            for (n, s), c in eq.items():
                (m1 if s == 1 else m0)[i][idx[n]] = c
        return m1, m0

    def rhs_series(self, i: int) -> EpsSeries:
        """Expanded right-hand side of equation ``i``."""
        total = self.rhs[i]
        for (b, s), c in sorted(self.forcing[i].items()):
            if b not in self.inputs:
                raise ValueError(f"no expansion supplied for input {b!r}")
            term = scale_series(c, self.inputs[b].shift(s))
            total = term if total is None else total + term
        return total if total is not None else EpsSeries.zero(0, None)

    def rhs_terms(self, i: int) -> dict:
        """Right-hand side of equation ``i`` as ``{(source, shift): coefficient}``.

        The source ``("rhs", i)`` stands for the explicit series of equation ``i``.
        """
        out = {(("input", b), s): c for (b, s), c in self.forcing[i].items()}
        if self.rhs[i] is not None:
            out[(("rhs", i), 0)] = RationalFunction(1)
        return out

    def source_series(self, src) -> EpsSeries:
        kind, key = src
        if kind == "rhs":
            return self.rhs[key] if self.rhs[key] is not None else EpsSeries.zero(0, None)
        if key not in self.inputs:
            raise ValueError(f"no expansion supplied for input {key!r}")
        return self.inputs[key]

    def residual(self, sols: Mapping, i: int) -> EpsSeries:
        """``lhs - rhs`` of equation ``i`` for series solutions."""
        total = None
        for (n, s), c in self.equations[i].items():
            term = scale_series(c, sols[n].shift(s))
            total = term if total is None else total + term
        return total - self.rhs_series(i)

    # -- printing -------------------------------------------------------------------
    def equation_strings(self) -> list:
        out = []
        if self.kind == "ode":
            for i, name in enumerate(self.unknowns):
                parts = [(n, self.matrix[i][j]) for j, n in enumerate(self.unknowns)]
                parts += list(self.forcing[i].items())
                out.append(f"D[{name}](x) = " + _lincomb_str(parts, lambda n: f"{n}(x)"))
            return out
        order = {n: i for i, n in enumerate(self.unknowns)}
        for i, eq in enumerate(self.equations):
            lhs = _lincomb_str(sorted(eq.items(), key=lambda kv: (order[kv[0][0]], kv[0][1])), lambda k: _shift_label(*k))
            rparts = []
            if self.forcing[i]:
                rparts.append(_lincomb_str(sorted(self.forcing[i].items()), lambda k: _shift_label(*k)))
            if self.rhs[i] is not None:
                rparts.append(str(self.rhs[i]))
            out.append(f"{lhs} = {' + '.join(rparts) if rparts else '0'}")
        return out

    def __str__(self):
        return "\n".join(self.equation_strings())


def _x_poly_coeffs(p: Polynomial) -> list:
    return p.coefficients("x")


def ode_to_rec(sys: CoupledSystem) -> CoupledSystem:
    """Coefficient comparison of ``Y(x) = sum_N Y(N) x^N`` in each equation.

    Each equation is multiplied by the monic lcm (in ``x``) of its
    ``x``-denominators; then ``x^p D f`` gives ``(N-p+1) f(N-p+1)`` and
    ``x^p f`` gives ``f(N-p)``.
    """
    if sys.kind != "ode":
        raise ValueError("ode_to_rec expects a differential system")
    eqs, forcing, vf = [], [], []
    for i, name in enumerate(sys.unknowns):
        entries = list(sys.matrix[i]) + list(sys.forcing[i].values())
        den = Polynomial(1)
        for e in entries:
            d = e.den
            xpart = Polynomial(1)
            for fac, mult in d.factor()[1]:
                if fac.degree("x") > 0:
                    xpart = xpart * fac**mult
            den = _lcm(den, xpart)
        lc = den.coefficients("x")[-1]
        lden = RationalFunction(den) / RationalFunction(lc)
        eq: dict = {}
        # L * D_x Y_i
        for p, c in enumerate(_x_poly_coeffs(lden.num)):
            if c.is_zero():
                continue
            cc = RationalFunction(c) / lden.den
            key = (name, 1 - p)
            eq[key] = eq.get(key, RationalFunction(0)) + cc * (_N - p + 1)
        # - L * A_ij Y_j
        for j, other in enumerate(sys.unknowns):
            prod = sys.matrix[i][j] * lden
            if prod.is_zero():
                continue
            if prod.den.degree("x") > 0:
                raise ValueError(f"entry ({i},{j}) is not rational in x")
            for p, c in enumerate(_x_poly_coeffs(prod.num)):
                if c.is_zero():
                    continue
                key = (other, -p)
                eq[key] = eq.get(key, RationalFunction(0)) - RationalFunction(c) / prod.den
        frc: dict = {}
        for b, coef in sys.forcing[i].items():
            prod = coef * lden
            if prod.den.degree("x") > 0:
                raise ValueError(f"forcing coefficient of {b} is not rational in x")
            for p, c in enumerate(_x_poly_coeffs(prod.num)):
                if c.is_zero():
                    continue
                key = (b, -p)
                frc[key] = frc.get(key, RationalFunction(0)) + RationalFunction(c) / prod.den
        eqs.append({k: v for k, v in eq.items() if not v.is_zero()})
        forcing.append({k: v for k, v in frc.items() if not v.is_zero()})
        lo = min([s for (_, s) in eqs[-1]] + [s for (_, s) in forcing[-1]] + [0])
        vf.append(-lo)
    return CoupledSystem("rec", sys.unknowns, equations=eqs, forcing=forcing, inputs=sys.inputs, valid_from=vf)


# -- numeric fibers ------------------------------------------------------------------------------
class SequenceOracle:
    """Memoizing exact sequence ``n -> value``; results never depend on call order."""

    def __init__(self, fn: Callable, base: int):
        self._fn = fn
        self.base = base

    def __call__(self, n: int):
        if n < self.base:
            raise ValueError(f"sequence defined for n >= {self.base}")
        return self._fn(n)


def _numeric_source(sys: CoupledSystem, src, eps, inputs: Mapping | None):
    kind, key = src
    name = key if kind == "input" else ("rhs", key)
    if inputs is not None and name in inputs:
        return inputs[name]
    if inputs is not None and kind == "rhs" and key in inputs:
        return inputs[key]
    return lambda n: Fraction(0)


def system_oracle(sys: CoupledSystem, init: Mapping, eps_val, inputs: Mapping | None = None, start: int = 0) -> dict:
    """Forward iteration of a first-order difference system at a rational ``ep``.

    ``init`` gives ``Y(start)`` per unknown.  ``inputs`` maps input names (or
    ``("rhs", i)``) to exact numeric sequences; missing ones are zero.
    """
    sysr = sys.reindexed()
    m1, m0 = sysr.first_order_matrices()
    eps = Fraction(eps_val)
    names = sysr.unknowns
    cache = {start: [Fraction(init[n]) for n in names]}
    terms = [sysr.rhs_terms(i) for i in range(sysr.size)]
    srcs = {src: _numeric_source(sysr, src, eps, inputs) for t in terms for (src, _) in t}

    def step(n: int) -> list:
        if n in cache:
            return cache[n]
        if n < start:
            raise ValueError(f"values before {start} are not defined")
        prev = step(n - 1)
        k = n - 1
        pt = {"N": k, EP: eps}
        try:
            a = [[c.evaluate(pt) for c in row] for row in m1]
            b = []
            for i in range(sysr.size):
                acc = Fraction(0)
                for (src, s), c in terms[i].items():
                    acc += c.evaluate(pt) * Fraction(srcs[src](k + s))
                acc -= sum(m0[i][j].evaluate(pt) * prev[j] for j in range(sysr.size))
                b.append(acc)
            val = solve(a, b)
        except (SingularSystem, PoleError) as exc:
            raise SingularSystem(f"cannot advance the system from n = {k}: {exc}") from exc
        cache[n] = val
        return val

    def iterate_to(n: int):
        top = max(cache)
        for j in range(top + 1, n + 1):
            step(j)
        return step(n)

    return {name: SequenceOracle((lambda n, i=i: iterate_to(n)[i]), start) for i, name in enumerate(names)}


def companionize(op: RecOperator, rhs: EpsSeries | None = None, names=None) -> CoupledSystem:
    """First-order system for ``op F = rhs`` with ``Y_i(N) = F(N+i)``."""
    d = op.order
    if d < 1:
        raise ValueError("companionizing needs order >= 1")
    names = tuple(names or [f"Y{i}" for i in range(d)])
    if len(names) != d:
        raise ValueError(f"need {d} names")
    eqs = []
    for i in range(d - 1):
        eqs.append({(names[i], 1): RationalFunction(1), (names[i + 1], 0): RationalFunction(-1)})
    last = {(names[d - 1], 1): RationalFunction(op[d])}
    for i in range(d):
        if not op[i].is_zero():
            key = (names[i], 0)
            last[key] = last.get(key, RationalFunction(0)) + RationalFunction(op[i])
    eqs.append(last)
    rhs_list = [None] * (d - 1) + [rhs]
    return CoupledSystem("rec", names, equations=eqs, rhs=rhs_list)


# -- system parsing (JSON-compatible dicts) -----------------------------------------------------------
def system_from_dict(data: Mapping) -> CoupledSystem:
    """Build a system from the JSON file format described in the README."""
    kind = data.get("kind", "ode")
    names = list(data["vars"])
    inputs = {k: parse_series(v) for k, v in (data.get("inputs") or {}).items()}
    if kind == "ode":
        from .core_algebra import parse_rational

        matrix = [[parse_rational(str(v)) for v in row] for row in data["matrix"]]
        forcing = [{b: parse_rational(str(c)) for b, c in (r or {}).items()} for r in (data.get("rhs") or [{}] * len(names))]
        return CoupledSystem("ode", names, matrix=matrix, forcing=forcing, inputs=inputs)
    if kind != "rec":
        raise ValueError(f"unknown system kind {kind!r}")
    known = list(inputs) + list(data.get("known", []))
    eqs, forcing = [], []
    for text in data["equations"]:
        lhs, rhs = _split_equation(text)
        eqs.append(parse_lincomb(lhs, names))
        forcing.append(parse_lincomb(rhs, known) if rhs and rhs.strip() and known else {})
    series = data.get("rhs")
    rhs_list = [parse_series(s) if s else None for s in series] if series else None
    return CoupledSystem("rec", names, equations=eqs, forcing=forcing, rhs=rhs_list, inputs=inputs)

