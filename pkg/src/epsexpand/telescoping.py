"""Gosper's algorithm and Zeilberger's creative telescoping over ``Q(N, ep)``.

Conventions follow the usual Gosper form ``r(k) = a(k)/b(k) * c(k+1)/c(k)``
with ``gcd(a(k), b(k+h)) = 1`` for all ``h >= 0`` and the polynomial
equation ``a(k) x(k+1) - b(k-1) x(k) = c(k)``.
"""

from __future__ import annotations

from fractions import Fraction

from .core_algebra import Polynomial, RationalFunction, nullspace, particular_solution, poly_gcd, shift_distance
from .core_algebra.poly import as_rational_function
from .eps_series import scale_series
from .hyperterm import GammaTerm, HyperTerm, LinearArg, parse_term
from .operators import RecOperator, ScalarRecurrence
from .summand import summand_expand

__all__ = [
    "Certificate",
    "NotFound",
    "gosper",
    "gosper_form",
    "zeilberger",
    "certificate_verify",
    "sum_recurrence",
    "HyperTerm",
]

_K = "k"


class NotFound(ValueError):
    """No telescoping relation up to the requested order."""


class Certificate:
    """Rational function ``rat`` with ``G(N,k) = rat(N,k) * t(N,k)``."""

    __slots__ = ("rat",)

    def __init__(self, rat):
        self.rat = as_rational_function(rat)

    def __eq__(self, other):
        return isinstance(other, Certificate) and self.rat == other.rat

    def __hash__(self):
        return hash(self.rat)

    def __str__(self):
        return str(self.rat)

    def __repr__(self):
        return f"Certificate({self.rat})"


def _as_hyper(t) -> HyperTerm:
    if isinstance(t, HyperTerm):
        return t
    if isinstance(t, GammaTerm):
        return HyperTerm.from_term(t)
    if isinstance(t, str):
        return HyperTerm.parse(t)
    raise TypeError(f"cannot interpret {t!r} as a hypergeometric term")


def _factors(p: Polynomial, var: str = _K) -> list:
    if p.degree(var) <= 0:
        return []
    return [f for f, _ in p.factor()[1] if f.degree(var) > 0]


def gosper_form(ratio: RationalFunction, var: str = _K) -> tuple:
    """Polynomials ``(a, b, c)`` in ``var`` with ``ratio = a/b * c(var+1)/c(var)``."""
    a, b = ratio.num, ratio.den
    c = Polynomial(1)
    while True:
        hs = set()
        for f in _factors(a, var):
            for g in _factors(b, var):
                h = shift_distance(g, f, var)
                if h is not None and h >= 0:
                    hs.add(h)
        if not hs:
            return a, b, c
        h = min(hs)
        s = poly_gcd(a, b.shift(var, h))
        if s.degree(var) <= 0:
            raise ArithmeticError("dispersion computation is inconsistent")
        a = a.divexact(s)
        b = b.divexact(s.shift(var, -h))
        for i in range(1, h + 1):
            c = c * s.shift(var, -i)


def _lead(p: Polynomial, var: str = _K) -> tuple:
    d = p.degree(var)
    return d, p.coefficient(var, d) if d >= 0 else Polynomial(0)


def _degree_bound(a: Polynomial, b1: Polynomial, degc: int) -> int:
    da, la = _lead(a)
    db, lb = _lead(b1)
    if da != db or la != lb:
        return degc - max(da, db)
    bound = degc - da + 1
    if da >= 1:
        ca = a.coefficient(_K, da - 1)
        cb = b1.coefficient(_K, da - 1)
        q = RationalFunction(cb - ca, la)
        if q.is_constant():
            v = q.constant_value()
            if v.denominator == 1 and v >= 0:
                bound = max(bound, int(v))
    return bound


def _k_pow(i: int, shift: int = 0) -> Polynomial:
    return (Polynomial.var(_K) + shift) ** i


def _coeff_rows(columns: list, target: Polynomial | None) -> tuple:
    """Equate ``k``-coefficients of ``sum_j u_j columns[j]`` with ``target``."""
    top = max([p.degree(_K) for p in columns] + [target.degree(_K) if target is not None else -1])
    lists = [p.coefficients(_K) for p in columns]
    tl = target.coefficients(_K) if target is not None else []
    rows, rhs = [], []
    zero = RationalFunction(0)
    for m in range(top + 1):
        row = [RationalFunction(l[m]) if m < len(l) else zero for l in lists]
        if any(not v.is_zero() for v in row) or (m < len(tl) and not tl[m].is_zero()):
            rows.append(row)
            rhs.append(RationalFunction(tl[m]) if m < len(tl) else zero)
    return rows, rhs


def _poly_from_rf_coeffs(cs: list) -> tuple:
    """``sum cs[i] k^i`` with rational-function coefficients as ``(poly, denominator)``."""
    den = Polynomial(1)
    for c in cs:
        den = (den * c.den).divexact(poly_gcd(den, c.den))
    p = Polynomial(0)
    for i, c in enumerate(cs):
        if not c.is_zero():
            p = p + (c * den).num * _k_pow(i)
    return p, den


def gosper(t) -> RationalFunction | None:
    """Rational ``r`` with ``r(k+1) t(k+1) - r(k) t(k) = t(k)``, or ``None``."""
    h = _as_hyper(t)
    ratio = h.ratio_k
    a, b, c = gosper_form(ratio)
    b1 = b.shift(_K, -1)
    d = _degree_bound(a, b1, c.degree(_K))
    if d < 0:
        return None
    cols = [a * _k_pow(i, 1) - b1 * _k_pow(i) for i in range(d + 1)]
    rows, rhs = _coeff_rows(cols, c)
    sol = particular_solution(rows, rhs, RationalFunction(0))
    if sol is None:
        return None
    x, den = _poly_from_rf_coeffs(sol)
    r = RationalFunction(b1 * x, c * den)
    if r.shift(_K, 1) * ratio - r != 1:
        raise ArithmeticError("Gosper certificate failed its own check")
    return r


def _rho(ratio_N: RationalFunction, j: int) -> RationalFunction:
    """``t(N+j,k)/t(N,k)``."""
    out = RationalFunction(1)
    for i in range(j):
        out = out * ratio_N.shift("N", i)
    return out


def _zeilberger_order(h: HyperTerm, d: int):
    rhos = [_rho(h.ratio_N, j) for j in range(d + 1)]
    q = Polynomial(1)
    for r in rhos:
        q = (q * r.den).divexact(poly_gcd(q, r.den))
    ps = [(r * q).num for r in rhos]
    r0 = h.ratio_k * RationalFunction(q, q.shift(_K, 1))
    a, b, c = gosper_form(r0)
    b1 = b.shift(_K, -1)
    degp = max(p.degree(_K) for p in ps)
    bound = _degree_bound(a, b1, c.degree(_K) + degp)
    if bound < 0:
        return None
    cols = [a * _k_pow(i, 1) - b1 * _k_pow(i) for i in range(bound + 1)]
    cols += [-(c * p) for p in ps]
    rows, _ = _coeff_rows(cols, None)
    basis = nullspace(rows, len(cols), RationalFunction(0), RationalFunction(1))
    nx = bound + 1
    for v in basis:
        coeffs = v[nx:]
        if any(not x.is_zero() for x in coeffs):
            xpoly, xden = _poly_from_rf_coeffs(v[:nx])
            return coeffs, RationalFunction(b1 * xpoly, c * q * xden)
    return None


def zeilberger(t, dmax: int = 3) -> tuple:
    """Minimal-order creative telescoping: ``(RecOperator, Certificate)``.

    ``sum_j a_j(N) t(N+j,k) = G(N,k+1) - G(N,k)`` with ``G = rat * t``.
    """
    h = _as_hyper(t)
    for d in range(dmax + 1):
        found = _zeilberger_order(h, d)
        if found is None:
            continue
        coeffs, rat = found
        op, den = RecOperator.from_rational(coeffs)
        op, g = op.primitive()
        scale = RationalFunction(den, g)
        lc = op[op.order].leading_coefficient()
        if lc < 0:
            op = op.scaled(-1)
            scale = -scale
        cert = Certificate(rat * scale)
        if not certificate_verify(op, h, cert):
            raise ArithmeticError("creative telescoping certificate failed verification")
        return op, cert
    raise NotFound(f"no telescoping recurrence of order <= {dmax}")


def certificate_verify(op: RecOperator, t, c: Certificate) -> bool:
    """Check ``sum_j a_j t(N+j,k)/t(N,k) = R(k+1) ratio_k - R(k)`` identically."""
    h = _as_hyper(t)
    lhs = RationalFunction(0)
    for j, a in enumerate(op.coeffs):
        if not a.is_zero():
            lhs = lhs + _rho(h.ratio_N, j) * RationalFunction(a)
    rhs = c.rat.shift(_K, 1) * h.ratio_k - c.rat
    return lhs == rhs


# -- definite sums ---------------------------------------------------------------------
def _substitute_k(term: GammaTerm, n_coef: int, c) -> GammaTerm:
    """Replace ``k`` by ``n_coef*N + c`` in a Gamma product."""
    gammas = {}
    for a, e in term.gammas.items():
        na = LinearArg(a.n + a.k * n_coef, 0, a.c + a.k * Fraction(c), a.r)
        gammas[na] = gammas.get(na, 0) + e
    powers = {}
    for base, (en, ek, ec) in term.powers.items():
        powers[base] = (en + ek * n_coef, 0, ec + ek * int(c))
    k_value = RationalFunction.var("N") * n_coef + Fraction(c)
    rat = term.rational.substitute("k", k_value)
    return GammaTerm(rat, powers, gammas, term.exp_arg)


def _vanishes(term: GammaTerm) -> bool:
    """True when a reciprocal Gamma factor sits at a nonpositive integer."""
    if term.rational.is_zero():
        return True
    for a, e in term.gammas.items():
        if e < 0 and a.n == 0 and a.k == 0 and a.r == 0 and a.c.denominator == 1 and a.c <= 0:
            return True
    return False


def sum_recurrence(term, order: int, lo: int = 1, dmax: int = 3) -> tuple:
    """Recurrence for ``F(N) = sum_{k=lo}^{N} term(N,k)`` with expanded right-hand side.

    Returns ``(ScalarRecurrence, Certificate)``.  Upper boundary terms must
    vanish through a reciprocal Gamma factor (as for ``Binomial[N,k]``).
    """
    if isinstance(term, str):
        term = parse_term(term)
    h = HyperTerm.from_term(term)
    op, cert = zeilberger(h, dmax)
    d = op.order
    for m in range(1, d + 2):
        if not _vanishes(_substitute_k(term, 1, m)):
            raise NotFound(f"boundary term t(N, N+{m}) does not vanish identically")
    try:
        cert.rat.substitute("k", RationalFunction.var("N") + d + 1)
    except ZeroDivisionError as exc:
        raise NotFound("certificate has a pole at the upper boundary") from exc
    low = _substitute_k(term, 0, lo)
    ex = summand_expand(low, order, var="N")
    hyper_low, rem = ex.hyper.reduced()
    if not hyper_low.is_rational():
        raise NotFound(f"boundary term at k={lo} is not rational in N after expansion: {hyper_low}")
    factor = -cert.rat.substitute("k", RationalFunction(lo)) * rem * hyper_low.as_rational()
    rhs = scale_series(factor, ex.series)
    return ScalarRecurrence(op, rhs), cert


def boundary_value(term: GammaTerm, cert: Certificate, N: int, eps, lo: int = 1) -> Fraction:
    """Exact ``-G(N, lo)`` in the unit of :meth:`GammaTerm.exact_value`."""
    pt = {"N": N, "k": lo, "ep": Fraction(eps)}
    return -cert.rat.evaluate(pt) * term.exact_value(pt)
