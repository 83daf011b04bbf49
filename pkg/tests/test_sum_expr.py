from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest

import props
from epsexpand.sum_expr import (
    SSum,
    SumExpression,
    expr_eval_float,
    expr_normalize,
    parse_sum_expr,
    shift_synchronize,
    ssum_eval_exact,
    stuffle_product,
)


def exact_nested(word, n: int) -> Fraction:
    """``S_w(n)`` for a word of ``(a, x)`` letters by plain recursion."""
    if not word:
        return Fraction(1)
    (a, x), rest = word[0], word[1:]
    return sum((Fraction(x) ** i / Fraction(i) ** a * exact_nested(rest, i) for i in range(1, n + 1)), Fraction(0))


def random_word(rng):
    depth = rng.randint(1, 3)
    return tuple((rng.randint(1, 3), rng.choice([Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(2)])) for _ in range(depth))


@pytest.mark.invariant
def test_outer_summand_telescopes():
    rng = random.Random(20)
    for _ in range(15):
        w = random_word(rng)
        s = SSum(w)
        (a, x), rest = w[0], w[1:]
        prev = ssum_eval_exact(s, 0)
        for n in range(1, 41):
            cur = ssum_eval_exact(s, n)
            step = Fraction(x) ** n / Fraction(n) ** a * exact_nested(rest, n)
            assert cur - prev == SumExpression(step), (w, n)
            prev = cur


@pytest.mark.invariant
def test_stuffle_matches_numeric_products():
    assert props.check_stuffle(15, seed=21) == 15


def random_expression(rng) -> SumExpression:
    pieces = ["S[1](N)", "S[2](N)", "S[1,1](N)", "S[-1](N)", "S[2,-1](N)", "S[{1,1/2}](N)", "(-1)^N", "2^N", "z2", "z3", "1"]
    e = SumExpression.zero()
    for _ in range(rng.randint(1, 4)):
        coef = parse_sum_expr(f"({rng.randint(-5, 5)}*N+{rng.randint(1, 5)})/(N+{rng.randint(1, 4)})")
        term = parse_sum_expr(rng.choice(pieces))
        if rng.random() < 0.4:
            term = term * parse_sum_expr(rng.choice(pieces))
        e = e + coef * term
    return e


@pytest.mark.invariant
def test_shift_synchronize_roundtrip_and_values():
    rng = random.Random(22)
    for _ in range(25):
        e = random_expression(rng)
        assert expr_normalize(shift_synchronize(shift_synchronize(e, 1), -1)) == expr_normalize(e)
        up = shift_synchronize(e, 1)
        with mpmath.workdps(40):
            for n in range(0, 31):
                a, b = expr_eval_float(up, n, 40), expr_eval_float(e, n + 1, 40)
                assert abs(a - b) <= mpmath.mpf(10) ** -30 * max(1, abs(b)), (str(e), n)


@pytest.mark.invariant
def test_normalize_is_idempotent_and_equality_canonical():
    rng = random.Random(23)
    for _ in range(40):
        e = random_expression(rng)
        once = expr_normalize(e)
        assert expr_normalize(once) == once
        assert parse_sum_expr(str(once)) == once
        f = random_expression(rng)
        assert (e + f) - f == e


def test_quasi_shuffle_example():
    lhs = parse_sum_expr("S[1](N)^2")
    assert lhs == parse_sum_expr("2*S[1,1](N)-S[2](N)")
    assert stuffle_product(parse_sum_expr("S[1](N)"), parse_sum_expr("S[1](N)")) == lhs


def test_signed_indices_and_generalized_arguments():
    e = parse_sum_expr("S[1,-2](N)")
    assert e.value(3) == exact_nested(((1, Fraction(1)), (2, Fraction(-1))), 3)
    g = parse_sum_expr("S[{1,1/2},{1,1}](N)")
    assert g.value(4) == exact_nested(((1, Fraction(1, 2)), (1, Fraction(1))), 4)


def test_geometric_terms_and_constants_are_formal():
    e = parse_sum_expr("(-1)^N*S[1](N) + 2^N + z2")
    assert e.evaluate(3) == parse_sum_expr("37/6 + z2")
    with pytest.raises(ValueError):
        e.value(3)
    assert not e.is_rational()
    with mpmath.workdps(30):
        v = e.eval_float(2, 30)
        assert abs(v - (mpmath.mpf(3) / 2 + 4 + mpmath.zeta(2))) < mpmath.mpf(10) ** -25


def test_exact_values_of_harmonic_numbers():
    assert parse_sum_expr("S[1](N)").value(4) == Fraction(25, 12)
    assert parse_sum_expr("S[2](N)").value(3) == Fraction(49, 36)
    assert parse_sum_expr("S[1](N)").value(0) == 0


def test_negative_arguments_are_rejected():
    with pytest.raises(ValueError):
        parse_sum_expr("S[1](N)").value(-1)


def test_shift_absorbs_into_sum():
    e = parse_sum_expr("S[1](N+1)")
    assert e == parse_sum_expr("S[1](N) + 1/(N+1)")


def test_zero_expression_is_empty():
    z = parse_sum_expr("S[1](N) - S[1](N)")
    assert z.is_zero() and z.items() == []
