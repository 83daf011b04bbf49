from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest

from epsexpand.eps_series import EpsSeries, InsufficientOrder, gamma_expand, parse_series, series_arith
from epsexpand.fixtures import BRACKET, SUMMAND, SUMMAND_BASE
from epsexpand.hyperterm import parse_term
from epsexpand.sum_expr import SumExpression, parse_sum_expr
from epsexpand.summand import summand_expand
from epsexpand.verify import definite_sum_value

PIECES = ["1", "N", "1/(N+1)", "S[1](N)", "S[2](N)", "z2", "(-1)^N", "S[1,1](N)"]


def random_series(rng, start=None, length=None) -> EpsSeries:
    start = rng.randint(-2, 1) if start is None else start
    length = rng.randint(1, 4) if length is None else length
    coeffs = []
    for _ in range(length):
        e = SumExpression.zero()
        for _ in range(rng.randint(0, 2)):
            e = e + parse_sum_expr(rng.choice(PIECES)) * Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        coeffs.append(e)
    return EpsSeries(start, coeffs, start + length)


def mp(x):
    return mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x)


@pytest.mark.invariant
def test_product_agrees_with_pointwise_values():
    rng = random.Random(30)
    for _ in range(20):
        a, b = random_series(rng), random_series(rng)
        prod = series_arith(a, b, "mul")
        assert prod.trunc == min(a.trunc + b.start, b.trunc + a.start)
        for eps in (Fraction(1, 100), Fraction(1, 1000)):
            for n in (1, 7, 20):
                with mpmath.workdps(40):
                    want = a.eval_float(n, eps) * b.eval_float(n, eps)
                    got = prod.eval_float(n, eps)
                    scale = max(abs(a.eval_float(n, eps)), 1) * max(abs(b.eval_float(n, eps)), 1)
                    # the product is certified up to O(ep^trunc)
                    assert abs(got - want) <= 50 * scale * mp(eps) ** (prod.trunc), (str(a), str(b), n, eps)


@pytest.mark.invariant
def test_gamma_expansion_against_numeric_gamma():
    eps = Fraction(1, 10**4)
    for offset, r in [(1, Fraction(-3, 2)), (2, Fraction(1, 2)), (0, Fraction(1)), (3, Fraction(-1))]:
        ser, prefactor = gamma_expand(offset, "N", r, 4)
        assert prefactor == ("Gamma", "N", offset)
        for n in range(1, 16):
            with mpmath.workdps(50):
                exact = mpmath.gamma(n + offset + r * mp(eps)) / mpmath.gamma(n + offset)
                assert abs(ser.eval_float(n, eps, 50) - exact) / abs(exact) < 1e-8


@pytest.mark.invariant
def test_exp_inverts_log1p():
    rng = random.Random(31)
    for _ in range(20):
        coeffs = [parse_sum_expr(f"{rng.randint(-3, 3)}/(N+{rng.randint(1, 3)})+{rng.randint(-2, 2)}*S[1](N)") for _ in range(4)]
        s = EpsSeries(1, coeffs, 5)
        one = EpsSeries.constant(1, 5)
        assert (s.log1p().exp() - one - s).is_zero()


@pytest.mark.invariant
def test_summand_expansion_summed_matches_direct_sum():
    ex = summand_expand(SUMMAND, 1)
    for n in range(1, 9):
        total = None
        for k in range(1, n + 1):
            v = ex.value_series({"k": k, "N": n})
            total = v if total is None else total + v
        assert total.trunc == 1
        errors = []
        with mpmath.workdps(40):
            for eps in (Fraction(1, 1000), Fraction(1, 10000)):
                approx = total.constant_float(eps, 40)
                direct = definite_sum_value(SUMMAND, n, eps, dps=40)
                assert abs(approx - direct) / abs(direct) < 1e-9, (n, eps)
                errors.append(abs(approx - direct))
        # the defect is the first omitted order, ep^1
        assert 5 < errors[0] / errors[1] < 20, (n, errors)


def test_bracket_of_the_pole_term():
    ex = summand_expand(SUMMAND, 0)
    s = ex.relative_to(SUMMAND_BASE)
    assert s.start == -3
    assert s.coeff(-1) == parse_sum_expr(BRACKET, "k")


def test_parse_and_print_roundtrip():
    s = parse_series("ep^-3*(4*N/(3*(N+1))) + ep^-2*(S[1](N)) + O[ep]^0")
    assert s.start == -3 and s.trunc == 0
    assert parse_series(str(s)) == s
    assert s.coeff(-1).is_zero()
    with pytest.raises(InsufficientOrder):
        s.coeff(0)


def test_truncation_is_never_fabricated():
    a = parse_series("1 + ep + O[ep]^2")
    b = parse_series("ep^-1 + O[ep]^1")
    c = a * b
    assert c.trunc == 1
    assert (a + b).trunc == 1
    with pytest.raises(InsufficientOrder):
        c.coeff(1)


def test_explicit_zero_leading_order_is_kept():
    s = parse_series("0*ep^-3-16/3*ep^-2+O[ep]^0")
    assert s.start == -3 and s.coeff(-3).is_zero()


def test_constant_gamma_pole():
    ser, pref = gamma_expand(-1, None, Fraction(-3, 2), 3)
    assert pref is None and ser.start == -1
    with mpmath.workdps(40):
        e = Fraction(1, 10**4)
        assert abs(ser.constant_float(e) - mpmath.gamma(-1 - 1.5 * mp(e))) / abs(mpmath.gamma(-1 - 1.5 * mp(e))) < 1e-9


def test_term_parser_rejects_unlike_sums():
    with pytest.raises(ValueError):
        parse_term("Gamma[k]+2^k")
    t = parse_term("(k+N)*2^k")
    assert t.float_value({"k": 2, "N": 1, "ep": 0}, 20) == 12
