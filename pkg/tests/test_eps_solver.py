from __future__ import annotations

import random
from fractions import Fraction

import pytest

from epsexpand.eps_series import EpsSeries, InsufficientOrder, parse_series
from epsexpand.eps_solver import BootstrapStopped, bootstrap_expansion, normalize_leading
from epsexpand.fixtures import EPS_EXPANSION, EPS_IVS, EPS_OP, EPS_RHS, SUMMAND
from epsexpand.operators import parse_operator
from epsexpand.sum_expr import parse_sum_expr
from epsexpand.verify import definite_sum_value

PIECES = ["1", "1/(N+1)", "S[1](N)", "S[2](N)", "z2", "(-1)^N", "S[1](N)/(N+2)", "S[1,1](N)", "N"]


def random_solution(rng) -> EpsSeries:
    start = rng.randint(-3, 0)
    coeffs = []
    for _ in range(3):
        e = parse_sum_expr("0")
        while e.is_zero():
            for _ in range(rng.randint(1, 2)):
                e = e + parse_sum_expr(rng.choice(PIECES)) * rng.choice([-3, -2, -1, 1, 2, 3])
        coeffs.append(e)
    return EpsSeries(start, coeffs, start + 3)


@pytest.fixture(scope="module")
def pole_expansion():
    op = parse_operator(EPS_OP)
    return bootstrap_expansion(op, parse_series(EPS_RHS), [parse_series(s) for s in EPS_IVS], 3)


def test_reproduces_the_published_coefficients(pole_expansion):
    assert pole_expansion.start == -3
    for i, text in enumerate(EPS_EXPANSION):
        assert pole_expansion.coeff(-3 + i) == parse_sum_expr(text)


@pytest.mark.invariant
def test_residual_vanishes_order_by_order(pole_expansion):
    op = parse_operator(EPS_OP)
    res = op.apply_series(pole_expansion) - parse_series(EPS_RHS)
    for m in range(-3, 0):
        assert res.coeff(m).is_zero(), m


@pytest.mark.invariant
def test_expansion_reproduces_initial_values(pole_expansion):
    for n, text in ((1, EPS_IVS[0]), (2, EPS_IVS[1])):
        iv = parse_series(text)
        for m in range(-3, 0):
            assert pole_expansion.coeff(m).evaluate(n) == iv.coeff(m), (n, m)


@pytest.mark.invariant
def test_truncated_expansion_tracks_the_sum(pole_expansion):
    # the defect is the missing ep^0 coefficient, so it stays put as ep shrinks
    for n in range(1, 13):
        errs = []
        for eps in (Fraction(1, 1000), Fraction(1, 10000)):
            approx = pole_expansion.eval_float(n, eps, 40)
            direct = definite_sum_value(SUMMAND, n, eps, dps=40)
            assert abs(approx - direct) < 1e-6 * abs(direct), (n, eps)
            errs.append(abs(approx - direct))
        assert 0.9 < errs[0] / errs[1] < 1.1, (n, errs)


@pytest.mark.invariant
def test_random_round_trips():
    rng = random.Random(70)
    op = parse_operator(EPS_OP)
    for _ in range(6):
        f = random_solution(rng)
        rhs = op.apply_series(f)
        ivs = [(n, f.evaluate(n)) for n in (1, 2)]
        got = bootstrap_expansion(op, rhs, ivs, 3)
        assert got == f, str(f)


def test_normalize_leading_divides_common_eps_power():
    op = parse_operator("ep^2*(N+2)*F(N+1) - ep^2*(N+1)*F(N) + ep^3*F(N)")
    rhs = parse_series("ep^-1 + O[ep]^2")
    nop, nrhs, lam = normalize_leading(op, rhs)
    assert not nop.specialize_eps(0).is_zero()
    assert nrhs.start == -3 and nrhs.trunc == 0
    assert lam == -3
    again = normalize_leading(nop, nrhs)
    assert again[0] == nop and again[2] == lam


def test_insufficient_order_is_reported():
    op = parse_operator(EPS_OP)
    with pytest.raises(InsufficientOrder):
        bootstrap_expansion(op, parse_series(EPS_RHS), [parse_series(s) for s in EPS_IVS], 4)


def test_bootstrap_stops_outside_the_class():
    op = parse_operator("F(N+1) - (N+1)*F(N)")
    rhs = parse_series("1 + O[ep]^1")
    with pytest.raises(BootstrapStopped) as info:
        bootstrap_expansion(op, rhs, [(1, parse_series("1 + O[ep]^1"))], 1)
    assert info.value.partial is None
    assert "F(1)" in info.value.constraint

