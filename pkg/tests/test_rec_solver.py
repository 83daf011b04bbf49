from __future__ import annotations

import random
from fractions import Fraction

import pytest

from epsexpand.core_algebra import Polynomial, RationalFunction
from epsexpand.fixtures import POLE_BASIS, POLE_CONSTANTS, POLE_OP, POLE_PARTICULAR, POLE_RHS, _pole_ivs
from epsexpand.operators import RecOperator, parse_operator
from epsexpand.rec_solver import (
    NotInClass,
    SolutionSet,
    Underdetermined,
    dalembertian_solve,
    hypergeometric_solutions,
    match_initial_values,
    polynomial_solutions,
    solve_rec,
)
from epsexpand.sum_expr import parse_sum_expr

N = Polynomial.var("N")


def first_order_product(a: RationalFunction, b: RationalFunction) -> RecOperator:
    """``(S - a)(S - b)`` with denominators cleared."""
    c2 = RationalFunction(1)
    c1 = -(b.shift("N", 1) + a)
    c0 = a * b
    op, _ = RecOperator.from_rational([c0, c1, c2])
    return op


PRODUCTS = [
    (RationalFunction(2), RationalFunction(N + 1, N + 2)),
    (RationalFunction(1), RationalFunction(1)),
    (RationalFunction(-1), RationalFunction(N + 2, N + 1)),
    (RationalFunction(N + 2, N + 1), RationalFunction(3)),
    (RationalFunction(1), RationalFunction(N, N + 1)),
]


@pytest.mark.invariant
@pytest.mark.parametrize("a, b", PRODUCTS)
def test_product_of_first_order_factors_has_full_basis(a, b):
    op = first_order_product(a, b)
    sol = dalembertian_solve(op)
    assert sol.complete and len(sol.homogeneous_basis) == op.order
    for h in sol.homogeneous_basis:
        assert op.apply(h).is_zero()
    # Casoratian at N = 5..5+d-1, exact
    assert abs(sol.casoratian(5)) > Fraction(1, 10**20)


@pytest.mark.invariant
def test_solutions_satisfy_their_recurrences():
    rng = random.Random(60)
    rhs_pool = ["1", "1/(N+1)", "S[1](N)", "(-1)^N", "S[2](N)/(N+1)", "2^N", "z2"]
    checked = 0
    for a, b in PRODUCTS:
        op = first_order_product(a, b)
        for _ in range(3):
            rhs = parse_sum_expr(rng.choice(rhs_pool)) * rng.randint(1, 3)
            sol = dalembertian_solve(op, rhs)
            if sol.particular is None:
                continue
            assert (op.apply(sol.particular) - rhs).is_zero()
            checked += 1
    assert checked >= 10


@pytest.mark.invariant
def test_matched_solution_predicts_forward_iteration():
    rng = random.Random(61)
    for a, b in PRODUCTS:
        op = first_order_product(a, b)
        rhs = parse_sum_expr("S[1](N) + 1/(N+1)")
        start = 3
        ivs = [(start, Fraction(rng.randint(-5, 5))), (start + 1, Fraction(rng.randint(-5, 5), 2))]
        sol = solve_rec(op, rhs, ivs)
        for n, v in ivs:
            assert sol.value(n) == v
        seq = {n: v for n, v in ivs}
        for n in range(start, start + 10):
            # op[2](n) F(n+2) = rhs(n) - op[1](n) F(n+1) - op[0](n) F(n)
            c = [x.evaluate({"N": n}) for x in op.coeffs]
            seq[n + 2] = (rhs.value(n) - c[1] * seq[n + 1] - c[0] * seq[n]) / c[2]
            assert sol.value(n + 2) == seq[n + 2]


def test_pole_term_recurrence_closed_form():
    op = parse_operator(POLE_OP)
    rhs = parse_sum_expr(POLE_RHS)
    sol = solve_rec(op, rhs, _pole_ivs())
    basis = [parse_sum_expr(b) for b in POLE_BASIS]
    consts = [parse_sum_expr(c) for c in POLE_CONSTANTS]
    printed = basis[0] * consts[0] + basis[1] * consts[1] + parse_sum_expr(POLE_PARTICULAR)
    assert sol == printed
    assert (op.apply(sol) - rhs).is_zero()


def test_pole_term_basis_is_independent():
    sol = dalembertian_solve(parse_operator(POLE_OP), parse_sum_expr(POLE_RHS))
    assert sol.complete
    assert sol.casoratian(5) != 0


def test_underdetermined_keeps_partial_information():
    op = first_order_product(RationalFunction(2), RationalFunction(1))
    with pytest.raises(Underdetermined) as info:
        solve_rec(op, parse_sum_expr("1"), [(1, Fraction(1))])
    assert len(info.value.free) == 1
    assert op.apply(info.value.particular) == parse_sum_expr("1")


def test_inconsistent_initial_values():
    op = parse_operator("F(N+1) - F(N)")
    sol = dalembertian_solve(op, parse_sum_expr("0"))
    with pytest.raises((NotInClass, ArithmeticError)):
        match_initial_values(sol, [(1, 1), (2, 2)])


def test_factorial_factor_is_outside_the_class():
    op = first_order_product(RationalFunction(-1), RationalFunction(N + 1))
    assert not dalembertian_solve(op).complete


def test_outside_the_class_is_reported():
    with pytest.raises(NotInClass):
        solve_rec(parse_operator("F(N+1) - (N+1)*F(N)"), "1", [(1, 1)])


def test_polynomial_and_hypergeometric_solutions():
    sols, _ = polynomial_solutions(parse_operator("F(N+1) - F(N)"))
    assert sols == [Polynomial(1)]
    hyps = hypergeometric_solutions(parse_operator("F(N+1) - (N+1)*F(N)"))
    assert any(h.ratio_N == RationalFunction(N + 1) for h in hyps)


def test_singular_initial_point_is_explained():
    op = parse_operator("(N+1)*F(N+1) - N*F(N)")
    with pytest.raises(ValueError, match="singular"):
        solve_rec(op, parse_sum_expr("1"), [(0, 1)])


def test_solution_set_rendering():
    s = SolutionSet([parse_sum_expr("1")], parse_sum_expr("S[1](N)"))
    assert str(s) == "c1*(1) + (S[1](N))"
    assert s.free_constants == ["c1"]
