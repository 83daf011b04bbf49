from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest

import props
from epsexpand.core_algebra import Polynomial
from epsexpand.fixtures import EPS_OP, SUMMAND
from epsexpand.hyperterm import HyperTerm, parse_term
from epsexpand.operators import RecOperator, parse_operator
from epsexpand.telescoping import Certificate, NotFound, boundary_value, certificate_verify, gosper, sum_recurrence, zeilberger

N = Polynomial.var("N")

ZEILBERGER_TERMS = [
    SUMMAND,
    "Binomial[N,k]",
    "Binomial[N,k]^2",
    "(-1)^k*Binomial[N,k]/(k+1)",
    "Binomial[N,k]*Gamma[k+ep]/Gamma[k+1]",
    "(-1)^k*Binomial[N,k]*Gamma[k+1+ep]/Gamma[k+2]",
]


@pytest.mark.invariant
def test_gosper_certificates_hold():
    stats = props.check_gosper(60, seed=50)
    assert stats["cases"] == 60 and stats["certificates"] >= stats["summable"]


@pytest.mark.invariant
@pytest.mark.parametrize("text", ZEILBERGER_TERMS)
def test_zeilberger_numeric_fiber_is_exact(text):
    term = parse_term(text)
    op, cert = zeilberger(text)
    eps = Fraction(1, 7)

    def total(n):
        return sum((term.exact_value({"N": n, "k": k, "ep": eps}) for k in range(1, n + 1)), Fraction(0))

    for n in range(1, 13):
        lhs = sum((c.evaluate({"N": n, "ep": eps}) * total(n + j) for j, c in enumerate(op.coeffs)), Fraction(0))
        assert lhs == boundary_value(term, cert, n, eps), (text, n)


@pytest.mark.invariant
@pytest.mark.parametrize("text", ZEILBERGER_TERMS)
def test_zeilberger_order_is_minimal(text):
    op, _ = zeilberger(text)
    if op.order > 0:
        with pytest.raises(NotFound):
            zeilberger(text, dmax=op.order - 1)


def test_sum_of_binomials():
    op, cert = zeilberger("Binomial[N,k]")
    assert op.equivalent(RecOperator([Polynomial(-2), Polynomial(1)]))
    assert certificate_verify(op, "Binomial[N,k]", cert)


def test_summand_operator_matches_the_printed_one():
    op, cert = zeilberger(SUMMAND)
    assert op.order == 2
    assert op.equivalent(parse_operator(EPS_OP))
    assert certificate_verify(op, SUMMAND, cert)


def test_tampered_certificate_is_rejected():
    op, cert = zeilberger(SUMMAND)
    assert not certificate_verify(op, SUMMAND, Certificate(cert.rat * 2))
    assert not certificate_verify(op.scaled(N), SUMMAND, cert)


def test_gosper_on_classic_examples():
    # sum_k k*k! = (n+1)! - 1
    r = gosper("k*Factorial[k]")
    assert r is not None
    t = parse_term("k*Factorial[k]")
    for k in range(1, 6):
        lhs = r.evaluate({"k": k + 1}) * t.exact_value({"k": k + 1}) - r.evaluate({"k": k}) * t.exact_value({"k": k})
        assert lhs == t.exact_value({"k": k})
    assert gosper("1/k") is None
    assert gosper("Factorial[k]") is None


def test_mixed_shift_compatibility():
    for text in ZEILBERGER_TERMS:
        h = HyperTerm.parse(text)
        assert h.is_compatible()
        lhs = h.ratio_k.shift("N", 1) * h.ratio_N
        rhs = h.ratio_N.shift("k", 1) * h.ratio_k
        assert lhs == rhs


def test_expanded_inhomogeneous_part():
    rec, cert = sum_recurrence(SUMMAND, 1)
    assert rec.rhs.start == -3 and rec.rhs.trunc == 1
    assert str(rec.rhs.coeff(-2)) == "-16/3"


def test_nonvanishing_upper_boundary_is_refused():
    with pytest.raises(NotFound):
        sum_recurrence("1/(k+N)", 0)


def test_constructed_telescoping_term_has_certificate():
    rng = random.Random(51)
    text = props.summable_term(rng)
    r = gosper(text)
    t = parse_term(text)
    with mpmath.workdps(40):
        vals = [t.float_value({"k": k, "N": 3, "ep": Fraction(1, 9)}, 40) for k in (2, 3)]
        rv = [mpmath.mpf(r.evaluate({"k": k, "N": 3, "ep": Fraction(1, 9)}).numerator) / r.evaluate({"k": k, "N": 3, "ep": Fraction(1, 9)}).denominator for k in (2, 3)]
        assert abs(rv[1] * vals[1] - rv[0] * vals[0] - vals[0]) < mpmath.mpf(10) ** -30 * max(1, abs(vals[0]))
