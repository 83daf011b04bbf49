"""Indefinite summation inside the SumExpression class.

Every S-sum ``S_{(a,x),w}(N)`` is by definition the running sum of
``x^N/N^a * S_w(N)``, so a summand ``R(N) c^N S_w(N)`` is summed by
splitting ``R`` into partial fractions: a pole at ``N = -s`` is moved to
the origin by a shift, polynomial parts go through summation by parts,
and each step lowers the depth of the remaining words.
"""

from __future__ import annotations

from fractions import Fraction

from .core_algebra import Polynomial, RationalFunction, partial_fractions, solve
from .sum_expr import SumExpression, shift_synchronize

__all__ = ["NotInClass", "antidifference", "backward_sum"]


class NotInClass(ValueError):
    """The requested object is not expressible with S-sums over rational kernels."""


def _check_univariate(r: RationalFunction, var: str) -> None:
    if any(v != var for v in r.variables()):
        raise NotInClass(f"summand coefficient {r} depends on variables other than {var}")


def _poly_geometric_sum(q: Polynomial, c: Fraction, var: str) -> Polynomial:
    """Polynomial ``Q`` with ``Q(n) c^n - Q(n-1) c^(n-1) = q(n) c^n``."""
    d = q.degree(var)
    if d < 0:
        return Polynomial(0)
    n = Polynomial.var(var)
    if c == 1:
        exps = list(range(1, d + 2))
    else:
        exps = list(range(0, d + 1))
    cols = [n**e - (n - 1) ** e * (1 / c) for e in exps]
    size = d + 1
    rows = [[col.coefficient(var, m).constant_value() for col in cols] for m in range(size)]
    rhs = [q.coefficient(var, m).constant_value() for m in range(size)]
    sol = solve(rows, rhs)
    out = Polynomial(0)
    for e, v in zip(exps, sol):
        out = out + n**e * v
    return out


def _gosper_sum(r: RationalFunction, c: Fraction, var: str):
    """Rational ``g`` with ``g(N) c^N - g(N-1) c^(N-1) = r(N) c^N``, or None."""
    from .hyperterm import HyperTerm
    from .telescoping import gosper

    k = RationalFunction.var("k")
    rk = r.substitute(var, k)
    ratio = rk.shift("k", 1) / rk * c
    cert = gosper(HyperTerm(ratio, RationalFunction(1)))
    if cert is None:
        return None
    nv = RationalFunction.var(var)
    return cert.substitute("k", nv + 1) * r.shift(var, 1) * c


def _split_kernel(coef: RationalFunction, var: str) -> tuple:
    """``(good, bad)``: poles at integers versus everything else."""
    poly, parts = partial_fractions(coef, var)
    good = RationalFunction(poly)
    bad = RationalFunction(0)
    for g, j, num in parts:
        piece = RationalFunction(num, g**j)
        if g.degree(var) == 1 and num.is_constant():
            root = -g.coefficient(var, 0).constant_value() / g.coefficient(var, 1).constant_value()
            if root.denominator == 1:
                good = good + piece
                continue
        bad = bad + piece
    return good, bad


def _term(coef: RationalFunction, c: Fraction, word: tuple, var: str) -> SumExpression:
    e = SumExpression.ssum(word, var) if word else SumExpression(1, var)
    if c != 1:
        e = e * SumExpression.geometric(c, var)
    return e * coef


def _sigma_term(coef: RationalFunction, c: Fraction, word: tuple, var: str) -> SumExpression:
    """``G`` with ``G(N) - G(N-1) = coef(N) c^N S_word(N)`` for poles at integers only."""
    if coef.is_zero():
        return SumExpression.zero(var)
    poly, parts = partial_fractions(coef, var)
    out = SumExpression.zero(var)
    if not poly.is_zero():
        q = _poly_geometric_sum(poly, c, var)
        out = out + _term(RationalFunction(q), c, word, var)
        if word:
            (a, x), rest = word[0], word[1:]
            n = RationalFunction.var(var)
            inner = RationalFunction(q.shift(var, -1)) / (n**a * c)
            out = out - _sigma_term(inner, c * x, rest, var)
    for g, j, num in parts:
        if g.degree(var) == 1 and num.is_constant():
            lc = g.coefficient(var, 1).constant_value()
            root = -g.coefficient(var, 0).constant_value() / lc
            if root.denominator == 1:
                out = out + _sigma_pole(num.constant_value() / lc**j, -int(root), j, c, word, var)
                continue
        raise NotInClass(f"kernel {RationalFunction(num, g**j)} has a pole off the integers")
    return out


def _sigma_pole(alpha: Fraction, s: int, j: int, c: Fraction, word: tuple, var: str) -> SumExpression:
    """Running sum of ``alpha c^N / (N+s)^j S_word(N)``."""
    if s == 0:
        return SumExpression.ssum(((j, c),) + word, var) * alpha
    # with M = N + s the summand is c^(-s) c^M / M^j S_word(M - s)
    m = RationalFunction.var(var)
    inner = SumExpression.ssum(word, var) if word else SumExpression(1, var)
    inner = shift_synchronize(inner, -s)
    inner = inner * _term(m ** (-j) * (Fraction(1) / c) ** s, c, (), var)
    g = backward_sum(inner, check=False)
    return shift_synchronize(g, s) * alpha


def backward_sum(v: SumExpression, check: bool = True) -> SumExpression:
    """``G`` with ``G(N) - G(N-1) = v(N)`` identically.

    Kernel parts with poles off the integers are removed by summation by
    parts, deepest words first, so that they may cancel across depths.
    """
    var = v.var
    work = {k: c for k, c in v.items()}
    out = SumExpression.zero(var)
    while work:
        key = max(work, key=lambda kk: (len(kk[2]), kk))
        coef = work.pop(key)
        c, ks, w = key
        if coef.is_zero():
            continue
        _check_univariate(coef, var)
        good, bad = _split_kernel(coef, var)
        g = _sigma_term(good, c, w, var)
        if not bad.is_zero():
            gb = _gosper_sum(bad, c, var)
            if gb is None:
                raise NotInClass(f"no closed form for the sum over {bad} * ({c})^{var}" + (" times an S-sum" if w else ""))
            g = g + _term(gb, c, w, var)
            if w:
                # nabla(g c^N S_w) = bad c^N S_w + g(N-1) c^(N-1) x^N / N^a S_w'(N)
                (a, x), rest = w[0], w[1:]
                n = RationalFunction.var(var)
                nk = (c * x, ks, rest)
                extra = -gb.shift(var, -1) / (n**a * c)
                work[nk] = work[nk] + extra if nk in work else extra
        for name in ks:
            g = g * SumExpression.constant(name, var)
        out = out + g
    if check and out - shift_synchronize(out, -1) != v:
        raise ArithmeticError("indefinite sum failed its telescoping check")
    return out


def antidifference(v: SumExpression) -> SumExpression:
    """``F`` with ``F(N+1) - F(N) = v(N)`` identically."""
    if not isinstance(v, SumExpression):
        v = SumExpression(v)
    f = backward_sum(v) - v
    if shift_synchronize(f, 1) - f != v:
        raise ArithmeticError("antidifference failed its telescoping check")
    return f
