from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest
import sympy

from epsexpand.core_algebra import Polynomial, RationalFunction, parse_rational
from epsexpand.fixtures import DE_LINE1, DE_SYSTEM, EPS_OP
from epsexpand.operators import (
    CoupledSystem,
    RecOperator,
    companionize,
    ode_to_rec,
    op_apply,
    op_specialize_eps,
    parse_lincomb,
    parse_operator,
    parse_recurrence,
    system_from_dict,
)
from epsexpand.sum_expr import parse_sum_expr

N, EP = Polynomial.var("N"), Polynomial.var("ep")

ODE = {
    "kind": "ode",
    "vars": ["y1", "y2"],
    "matrix": [["ep/(1-x)", "1/(1+x)"], ["x/(1-2*x)", "(1+ep)/(1-x)"]],
    "rhs": [{"B": "1/(1-x)"}, {"B": "x"}],
}


def ode_series_solution(system: dict, eps: Fraction, y0: list, b_coeffs: list, order: int) -> list:
    """Taylor coefficients of the ODE solution from sympy series of the matrix entries."""
    x, ep = sympy.symbols("x ep")

    def taylor(text):
        expr = sympy.sympify(text.replace("^", "**"), locals={"x": x, "ep": ep}).subs(ep, sympy.Rational(eps.numerator, eps.denominator))
        poly = sympy.series(expr, x, 0, order + 1).removeO()
        return [Fraction(str(poly.coeff(x, p))) for p in range(order + 1)]

    m = len(system["vars"])
    a = [[taylor(system["matrix"][i][j]) for j in range(m)] for i in range(m)]
    c = [{b: taylor(t) for b, t in system["rhs"][i].items()} for i in range(m)]
    ys = [[Fraction(v)] for v in y0]
    for n in range(order):
        for i in range(m):
            acc = Fraction(0)
            for j in range(m):
                acc += sum(a[i][j][p] * ys[j][n - p] for p in range(n + 1))
            for b, cc in c[i].items():
                acc += sum(cc[p] * b_coeffs[n - p] for p in range(n + 1))
            ys[i].append(acc / (n + 1))
    return ys


@pytest.mark.invariant
def test_ode_to_rec_roundtrip_through_generating_functions():
    eps = Fraction(1, 5)
    order = 30
    b = [Fraction(1, n + 1) for n in range(order + 1)]
    ys = ode_series_solution(ODE, eps, [1, 2], b, order)
    rec = ode_to_rec(system_from_dict(ODE))
    values = {"y1": ys[0], "y2": ys[1], "B": b}
    for i, eq in enumerate(rec.equations):
        maxshift = max(s for (_, s) in list(eq) + list(rec.forcing[i]))
        for n in range(rec.valid_from[i], order - maxshift + 1):
            pt = {"N": n, "ep": eps}
            lhs = sum(c.evaluate(pt) * values[name][n + s] for (name, s), c in eq.items())
            rhs = sum(c.evaluate(pt) * values[name][n + s] for (name, s), c in rec.forcing[i].items())
            assert lhs == rhs, (i, n)


@pytest.mark.invariant
def test_op_apply_agrees_with_numeric_application():
    rng = random.Random(40)
    pieces = ["S[1](N)", "S[2](N)", "S[1,1](N)", "(-1)^N*S[-1](N)", "z2", "2^N/(N+1)"]
    for _ in range(15):
        coeffs = [sum((N**p * rng.randint(-4, 4) for p in range(3)), Polynomial(rng.randint(1, 3))) for _ in range(rng.randint(2, 4))]
        op = RecOperator(coeffs)
        e = sum((parse_sum_expr(rng.choice(pieces)) * rng.randint(-3, 3) for _ in range(3)), parse_sum_expr("1/(N+2)"))
        applied = op_apply(op, e)
        with mpmath.workdps(40):
            for n in range(1, 31):
                direct = sum(mpmath.mpf(c.evaluate({"N": n}).numerator) / c.evaluate({"N": n}).denominator * e.eval_float(n + j, 40) for j, c in enumerate(op.coeffs))
                got = applied.eval_float(n, 40)
                assert abs(got - direct) <= mpmath.mpf(10) ** -20 * max(1, abs(direct)), n


@pytest.mark.invariant
def test_eps_specializations_reassemble():
    ops = [parse_operator(EPS_OP)]
    rng = random.Random(41)
    for _ in range(20):
        ops.append(RecOperator([sum((N**i * EP**j * rng.randint(-3, 3) for i in range(3) for j in range(3)), Polynomial(1)) for _ in range(3)]))
    for op in ops:
        total = [Polynomial(0)] * (op.order + 1)
        for k in range(op.eps_degree() + 1):
            part = op_specialize_eps(op, k)
            assert not part.depends_on_eps()
            total = [t + EP**k * c for t, c in zip(total, list(part.coeffs) + [Polynomial(0)] * (op.order + 1 - len(part.coeffs)))]
        assert total == list(op.coeffs)


def test_translation_of_the_first_equation():
    rec = ode_to_rec(system_from_dict(DE_SYSTEM))
    assert rec.equations[0] == parse_lincomb(DE_LINE1, ["I1", "I2", "I3"])
    assert rec.equation_strings()[0] == "N*I1(N-1) + (-N - ep - 1)*I1(N) + 2*I2(N) = B1(N)"
    assert rec.valid_from[0] == 1


def test_reindexing_moves_shifts_to_nonnegative():
    rec = ode_to_rec(system_from_dict(DE_SYSTEM))
    r = rec.reindexed()
    lo, _ = r.shifts()
    assert lo == 0
    assert r.equations[0][("I1", 0)] == RationalFunction(N + 1)


def test_operator_parsing_normalizes_negative_shifts():
    a = parse_operator("N*F(N-1) - (N+1)*F(N)")
    b = parse_operator("(N+1)*F(N) - (N+2)*F(N+1)")
    assert a.equivalent(b)


def test_parse_recurrence_with_rational_coefficients():
    rec = parse_recurrence("F(N+1) - F(N)/(N+1) = 1/(N+1) + O[ep]^1")
    assert rec.op.coeffs == (Polynomial(-1), N + 1)
    assert rec.rhs.coeff(0) == parse_sum_expr("1")


def test_companion_system_shape():
    op = parse_operator(EPS_OP)
    sys_ = companionize(op, None, ["Y0", "Y1"])
    assert sys_.size == 2
    assert sys_.equations[0] == {("Y0", 1): RationalFunction(1), ("Y1", 0): RationalFunction(-1)}


def test_system_json_validation():
    with pytest.raises(ValueError):
        CoupledSystem("pde", ["a"])
    with pytest.raises(ValueError):
        system_from_dict({"kind": "ode", "vars": ["a", "b"], "matrix": [["1"]]})
    rec = system_from_dict({"kind": "rec", "vars": ["a"], "equations": ["a(N+1) - a(N) = B(N)"], "known": ["B"]})
    assert rec.forcing[0] == {("B", 0): RationalFunction(1)}
    assert parse_rational("1/(1-x)").den.degree("x") == 1
