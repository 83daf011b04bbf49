"""Randomized property checks shared by the module tests and the acceptance suite.

Each ``check_*`` runs ``n`` seeded cases, asserts on the first violation and
returns the number of cases it actually checked.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

import mpmath

from epsexpand.core_algebra import VARS, PoleError, Polynomial, RationalFunction, rat_eval
from epsexpand.hyperterm import parse_term
from epsexpand.operators import CoupledSystem
from epsexpand.sum_expr import SumExpression, stuffle_product
from epsexpand.telescoping import gosper
from epsexpand.verify import definite_sum_laurent


# -- polynomials -------------------------------------------------------------------------------
def random_fraction(rng: random.Random, size: int = 9) -> Fraction:
    return Fraction(rng.randint(-size, size), rng.randint(1, size))


def random_polynomial(rng: random.Random, nterms: int = 4, maxdeg: int = 2) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(0, nterms)):
        exps = tuple(rng.randint(0, maxdeg) if rng.random() < 0.6 else 0 for _ in VARS)
        terms[exps] = terms.get(exps, Fraction(0)) + random_fraction(rng)
    return Polynomial.from_terms({e: c for e, c in terms.items() if c})


def random_point(rng: random.Random) -> dict:
    return {v: random_fraction(rng, 7) for v in VARS}


def poly_value(p: Polynomial, point: dict) -> Fraction:
    """Evaluation straight from the term map, independent of the kernel."""
    total = Fraction(0)
    for exps, c in p.terms().items():
        t = Fraction(c)
        for v, e in zip(VARS, exps):
            t *= Fraction(point[v]) ** int(e)
        total += t
    return total


def check_ring_axioms(n: int, seed: int = 0) -> int:
    rng = random.Random(seed)
    for _ in range(n):
        a, b, c = (random_polynomial(rng) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a and a + b == b + a
        assert a - a == Polynomial(0) and (a + Polynomial(0)) == a and a * Polynomial(1) == a
        pt = random_point(rng)
        assert poly_value(a * b + c, pt) == poly_value(a, pt) * poly_value(b, pt) + poly_value(c, pt)
    return n


def check_gcd_divides(n: int, seed: int = 1) -> int:
    rng = random.Random(seed)
    checked = 0
    while checked < n:
        a, b, c = (random_polynomial(rng, 3) for _ in range(3))
        if c.is_zero() or (a.is_zero() and b.is_zero()):
            continue
        x, y = a * c, b * c
        g = x.gcd(y)
        if not x.is_zero():
            assert g.divides(x), (x, y, g)
        if not y.is_zero():
            assert g.divides(y), (x, y, g)
        assert c.divides(g), (c, g)
        checked += 1
    return checked


def random_rational_function(rng: random.Random) -> RationalFunction:
    den = random_polynomial(rng, 3)
    while den.is_zero():
        den = random_polynomial(rng, 3)
    return RationalFunction(random_polynomial(rng, 3), den)


def check_rat_eval_homomorphism(n: int, seed: int = 2) -> int:
    rng = random.Random(seed)
    checked = 0
    while checked < n:
        f, g = random_rational_function(rng), random_rational_function(rng)
        pt = random_point(rng)
        try:
            fv, gv = rat_eval(f, pt), rat_eval(g, pt)
        except PoleError:
            continue
        assert rat_eval(f * g, pt) == fv * gv
        assert rat_eval(f + g, pt) == fv + gv
        checked += 1
    return checked


def check_canonical_form(n: int, seed: int = 3) -> int:
    rng = random.Random(seed)
    for _ in range(n):
        parts = [random_polynomial(rng, 2) for _ in range(4)]
        forward = Polynomial(0)
        for p in parts:
            forward = forward + p
        order = parts[:]
        rng.shuffle(order)
        backward = Polynomial(0)
        for p in order:
            backward = p + backward
        assert forward == backward and hash(forward) == hash(backward)
        assert str(forward) == str(backward)
        f = random_rational_function(rng)
        h = random_polynomial(rng, 2)
        if not h.is_zero():
            assert RationalFunction(f.num * h, f.den * h) == f
    return n


# -- nested sums ---------------------------------------------------------------------------------------
def random_indices(rng: random.Random, max_depth: int = 3, max_weight: int = 5) -> list:
    while True:
        depth = rng.randint(1, max_depth)
        idx = [rng.randint(1, 3) * rng.choice((1, -1)) for _ in range(depth)]
        if sum(abs(i) for i in idx) <= max_weight:
            return idx


def nested_sum_table(indices, nmax: int) -> list:
    """``[S_{a1,...}(n) for n = 0..nmax]`` in mpmath, innermost sum first."""
    vals = [mpmath.mpf(1)] * (nmax + 1)
    for a in reversed(indices):
        sign = -1 if a < 0 else 1
        acc, out = mpmath.mpf(0), [mpmath.mpf(0)]
        for i in range(1, nmax + 1):
            acc += mpmath.mpf(sign) ** i / mpmath.mpf(i) ** abs(a) * vals[i]
            out.append(acc)
        vals = out
    return vals


def check_stuffle(n: int, seed: int = 4, nmax: int = 50, dps: int = 30) -> int:
    rng = random.Random(seed)
    for _ in range(n):
        u, v = random_indices(rng), random_indices(rng)
        prod = stuffle_product(SumExpression.ssum(u), SumExpression.ssum(v))
        with mpmath.workdps(dps + 10):
            tol = mpmath.mpf(10) ** (-dps + 5)
            tu, tv = nested_sum_table(u, nmax), nested_sum_table(v, nmax)
            for m in range(nmax + 1):
                want = tu[m] * tv[m]
                got = prod.eval_float(m, dps)
                assert abs(got - want) <= tol * max(1, abs(want)), (u, v, m, got, want)
    return n


# -- Gosper -------------------------------------------------------------------------------------------
_GEOM = ["1", "2", "-1", "1/2", "3", "-2/3"]
_LOWER = ["1/2", "1", "2", "1/3", "3/2"]
_UPPER = ["1", "2", "3", "5/2", "1/4"]


def _poly_text(rng: random.Random, var: str = "k", with_n: bool = True) -> str:
    deg = rng.randint(0, 2)
    parts = []
    for e in range(deg + 1):
        c = random_fraction(rng, 5)
        if with_n and rng.random() < 0.3:
            c_text = f"({c}+N)"
        else:
            c_text = f"({c})"
        parts.append(f"{c_text}*{var}^{e}")
    return "+".join(parts)


def summable_term(rng: random.Random) -> str:
    """``T(k+1) - T(k)`` for ``T = p(k) c^k Gamma[k+a]/Gamma[k+b]``, written as one term."""
    c, a, b = rng.choice(_GEOM), rng.choice(_LOWER), rng.choice(_UPPER)
    p = _poly_text(rng)
    p1 = p.replace("k", "(k+1)")
    return f"(({p1})*({c})*(k+{a})/(k+{b})-({p}))*({c})^k*Gamma[k+{a}]/Gamma[k+{b}]"


def generic_term(rng: random.Random) -> str:
    shapes = [
        lambda: f"({_poly_text(rng)})*Binomial[N,k]",
        lambda: f"({rng.choice(_GEOM)})^k/(k+{rng.choice(_UPPER)})",
        lambda: f"Gamma[k+{rng.choice(_LOWER)}]/Gamma[k+{rng.choice(_UPPER)}]*({_poly_text(rng, with_n=False)})",
        lambda: f"(-1)^k*Binomial[N,k]*({_poly_text(rng)})/(k+{rng.choice(_UPPER)})",
        lambda: f"({rng.choice(_GEOM)})^k*Gamma[k+ep+{rng.choice(_LOWER)}]/Gamma[k+{rng.choice(_UPPER)}]",
    ]
    return rng.choice(shapes)()


def _value(term, k: int, point: dict):
    return term.float_value({**point, "k": k}, 40)


def check_gosper(n: int, seed: int = 5) -> dict:
    """Half summable constructions (a certificate must exist), half generic terms."""
    rng = random.Random(seed)
    point = {"N": 7, "ep": Fraction(1, 7)}
    stats = {"cases": 0, "certificates": 0, "summable": 0}
    while stats["cases"] < n:
        summable = stats["cases"] % 2 == 0
        text = summable_term(rng) if summable else generic_term(rng)
        term = parse_term(text)
        if term.rational.is_zero():
            continue
        r = gosper(text)
        stats["cases"] += 1
        if summable:
            stats["summable"] += 1
            assert r is not None, f"no certificate for the telescoping term {text}"
        if r is None:
            continue
        stats["certificates"] += 1
        used = 0
        with mpmath.workdps(50):
            for k in range(1, 9):
                try:
                    rk = rat_eval(r, {**point, "k": k})
                    rk1 = rat_eval(r, {**point, "k": k + 1})
                    tk, tk1 = _value(term, k, point), _value(term, k + 1, point)
                except (PoleError, ZeroDivisionError):
                    continue
                lhs = mpmath.mpf(rk1.numerator) / rk1.denominator * tk1 - mpmath.mpf(rk.numerator) / rk.denominator * tk
                assert abs(lhs - tk) <= mpmath.mpf(10) ** -30 * max(1, abs(tk)), (text, r, k)
                used += 1
        assert used >= 3, f"too few evaluation points for {text}"
    return stats


# -- coupled systems ---------------------------------------------------------------------------------
def random_coefficient(rng: random.Random) -> Polynomial:
    """Degree <= 2 in ``N`` and ``ep`` jointly, small integer coefficients."""
    n, e = Polynomial.var("N"), Polynomial.var("ep")
    p = Polynomial(0)
    for m in (Polynomial(1), n, e, n * n, n * e, e * e):
        if rng.random() < 0.5:
            p = p + m * rng.randint(-3, 3)
    return p


def random_first_order_system(rng: random.Random, m: int) -> CoupledSystem:
    names = [f"Y{i}" for i in range(m)]
    eqs = []
    for i in range(m):
        eq = {}
        for j in range(m):
            a, b = random_coefficient(rng), random_coefficient(rng)
            if i == j and a.is_zero():
                a = Polynomial.var("N") + 1
            if not a.is_zero():
                eq[(names[j], 1)] = a
            if not b.is_zero():
                eq[(names[j], 0)] = b
        eqs.append(eq)
    forcing = []
    for _ in range(m):
        f = random_coefficient(rng) if rng.random() < 0.7 else Polynomial(0)
        forcing.append({("B", 0): f} if not f.is_zero() else {})
    return CoupledSystem("rec", names, equations=eqs, forcing=forcing)


def forcing_input(n: int) -> Fraction:
    return Fraction(n * n + 3, n + 2)


@lru_cache(maxsize=None)
def summed_laurent(term: str, n: int, orders: tuple = (-3, -2, -1), dps: int = 40) -> dict:
    """Laurent coefficients of ``sum_{k=1}^{n} term`` from the contour integral, cached per session."""
    return definite_sum_laurent(term, n, orders, dps=dps)
