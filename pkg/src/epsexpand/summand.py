"""Expansion of Gamma-product summands in ``ep`` (expand under the summation sign)."""

from __future__ import annotations

import math
from fractions import Fraction

from .eps_series import EpsSeries, _log_gamma1, eps_valuation, log_gamma_ratio, rational_series
from .hyperterm import GammaTerm, HyperTerm, LinearArg, UnsupportedArgument, parse_term
from .sum_expr import SumExpression

__all__ = ["summand_expand", "SummandExpansion"]


class SummandExpansion:
    """``term = hyper * series`` where ``hyper`` is free of ``ep``.

    ``series`` has coefficients that are SumExpressions in ``var`` (rational
    in the other variable) and is valid for ``var >= valid_from``.
    """

    __slots__ = ("hyper", "series", "var", "valid_from")

    def __init__(self, hyper: GammaTerm, series: EpsSeries, var: str, valid_from: int):
        self.hyper = hyper
        self.series = series
        self.var = var
        self.valid_from = valid_from

    @property
    def hyper_term(self) -> HyperTerm:
        return HyperTerm.from_term(self.hyper)

    def __iter__(self):
        yield self.hyper_term
        yield self.series

    def relative_to(self, base) -> EpsSeries:
        """Series of ``term / base`` for an ``ep``-free ``base`` proportional to ``hyper``."""
        from .hyperterm import term_quotient

        if isinstance(base, str):
            base = parse_term(base)
        q = term_quotient(self.hyper, base)
        if q is None:
            raise ValueError(f"{base} is not a rational multiple of {self.hyper}")
        return self.series.map(lambda c: c * q)

    def value_series(self, point: dict) -> EpsSeries:
        """Constant series of the summand at an integer point."""
        n = point[self.var]
        if n < self.valid_from:
            raise ValueError(f"expansion valid for {self.var} >= {self.valid_from}")
        h = self.hyper.exact_value(point)
        other = {v: x for v, x in point.items() if v != self.var}
        return self.series.map(lambda c: c.subs(other).evaluate(n) * h)


def _constant_gamma_log(c: int, r: Fraction, trunc: int, var: str) -> tuple:
    """``Gamma(c + r*ep) = lead * ep^pole * exp(log series)``."""
    if c >= 1:
        return Fraction(math.factorial(c - 1)), 0, log_gamma_ratio(r, trunc, None, c, var)
    m = -c
    lg = _log_gamma1(r, trunc, var)
    coeffs = [SumExpression.zero(var)]
    for j in range(1, max(trunc, 1)):
        h = sum((Fraction(1, i**j) for i in range(1, m + 1)), Fraction(0))
        coeffs.append(SumExpression(h * r**j / j, var))
    lead = Fraction((-1) ** m) / (math.factorial(m) * r)
    return lead, -1, lg + EpsSeries(0, coeffs, max(trunc, 1), var)


def summand_expand(term, order: int, var: str = "k") -> SummandExpansion:
    """Expand ``term`` up to ``O(ep^order)``.

    Gamma factors with ``ep`` in the argument must be ``Gamma(c + r*ep)`` or
    ``Gamma(var + c + r*ep)`` with integer ``c``.  Gamma factors free of
    ``ep`` stay in the hypergeometric part.
    """
    if isinstance(term, str):
        term = parse_term(term)
    hyper = GammaTerm(1, term.powers)
    plan = []
    lead = Fraction(1)
    pole = 0
    valid_from = None
    for a, e in term.gammas.items():
        if a.r == 0:
            hyper = hyper * GammaTerm.gamma(a, e)
            continue
        if a.c.denominator != 1:
            raise UnsupportedArgument(f"Gamma[{a}]: constant part must be an integer")
        c = int(a.c)
        if a.n == 0 and a.k == 0:
            ld, pl, _ = _constant_gamma_log(c, a.r, 1, var)
            lead *= ld**e
            pole += pl * e
            plan.append(("const", c, a.r, e))
            continue
        coef = {"N": a.n, "k": a.k}
        other = "N" if var == "k" else "k"
        if coef[var] != 1 or coef[other] != 0:
            raise UnsupportedArgument(f"Gamma[{a}]: ep-dependent arguments must be {var} + c + r*ep")
        hyper = hyper * GammaTerm.gamma(LinearArg(a.n, a.k, a.c, Fraction(0)), e)
        plan.append(("var", c, a.r, e))
        valid_from = max(valid_from if valid_from is not None else 1 - c, 1 - c)
    hyper, rem = hyper.reduced()
    rational = term.rational * rem
    if rational.is_zero():
        return SummandExpansion(hyper, EpsSeries.zero(order - 1, order, var), var, valid_from or 0)
    v_r = eps_valuation(rational)
    start = pole + v_r
    t_log = order - start
    if t_log <= 0:
        return SummandExpansion(hyper, EpsSeries.zero(order - 1, order, var), var, valid_from or 0)
    log = EpsSeries.zero(0, t_log, var)
    for kind, c, r, e in plan:
        if kind == "const":
            piece = _constant_gamma_log(c, r, t_log, var)[2]
        else:
            piece = log_gamma_ratio(r, t_log, var, c, var)
        log = log + piece * e
    if term.exp_arg is not None:
        log = log + term.exp_arg.with_var(var)
    series = rational_series(rational, order - pole, var) * log.exp()
    series = (series * lead).mul_eps(pole)
    return SummandExpansion(hyper, series, var, valid_from if valid_from is not None else 0)
