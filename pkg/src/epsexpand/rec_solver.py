"""Solutions of linear recurrences in the class of nested sums and products.

The solver covers the d'Alembertian class: the operator is split into
first-order right factors from hypergeometric solutions whose closed form
is ``z^N * rational``, and every factor is inverted by an indefinite sum.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable

from .core_algebra import PoleError, Polynomial, RationalFunction, integer_roots, nullspace, particular_solution, rref, shift_distance
from .core_algebra.poly import as_rational_function
from .hyperterm import HyperTerm
from .operators import RecOperator
from .sum_expr import SumExpression, parse_sum_expr, shift_synchronize
from .summation import NotInClass, antidifference
from .telescoping import gosper_form

__all__ = [
    "SolutionSet",
    "NotInClass",
    "Underdetermined",
    "polynomial_solutions",
    "hypergeometric_solutions",
    "hyper_closed_form",
    "dalembertian_solve",
    "match_constants",
    "match_initial_values",
    "solve_rec",
]

_N = "N"


class Underdetermined(ValueError):
    """Initial values fix only an affine family of solutions."""

    def __init__(self, message: str, particular: SumExpression, free: list):
        super().__init__(message)
        self.particular = particular
        self.free = free


class SolutionSet:
    """``particular + sum c_i * homogeneous_basis[i]``.

    ``hyper_tokens`` holds hypergeometric solutions found but not written as
    closed forms; ``complete`` is False when fewer than ``order`` basis
    elements were found.
    """

    def __init__(self, homogeneous_basis, particular=None, order=None, hyper_tokens=(), notes=()):
        self.homogeneous_basis = list(homogeneous_basis)
        self.particular = particular
        self.order = order if order is not None else len(self.homogeneous_basis)
        self.hyper_tokens = list(hyper_tokens)
        self.notes = list(notes)

    @property
    def free_constants(self) -> list:
        return [f"c{i + 1}" for i in range(len(self.homogeneous_basis))]

    @property
    def complete(self) -> bool:
        return len(self.homogeneous_basis) == self.order and self.particular is not None

    def general(self, constants: Iterable) -> SumExpression:
        out = self.particular if self.particular is not None else SumExpression.zero()
        for c, b in zip(constants, self.homogeneous_basis):
            out = out + b * c
        return out

    def casoratian(self, start: int = 5) -> Fraction:
        """Determinant of ``[b_j(start + i)]``."""
        from .core_algebra import det

        m = len(self.homogeneous_basis)
        rows = [[b.value(start + i) for b in self.homogeneous_basis] for i in range(m)]
        return det(rows) if m else Fraction(1)

    def __str__(self):
        parts = [f"c{i + 1}*({b})" for i, b in enumerate(self.homogeneous_basis)]
        if self.particular is not None:
            parts.append(f"({self.particular})")
        return " + ".join(parts) if parts else "0"


def _require_eps_free(op: RecOperator) -> None:
    if op.depends_on_eps():
        raise ValueError("the operator must be free of ep; specialize it first")
    for c in op.coeffs:
        if any(v != _N for v in c.variables()):
            raise ValueError(f"operator coefficient {c} depends on variables other than N")


# -- polynomial solutions -----------------------------------------------------------------
def _delta_form(op: RecOperator) -> list:
    """Coefficients ``q_j`` with ``op = sum_j q_j Delta^j``."""
    from math import comb

    d = op.order
    return [sum((op[i] * comb(i, j) for i in range(j, d + 1)), Polynomial(0)) for j in range(d + 1)]


def _degree_bound(op: RecOperator, rhs_degree: int) -> int:
    qs = _delta_form(op)
    b = max(q.degree(_N) - j for j, q in enumerate(qs) if not q.is_zero())
    n = Polynomial.var("k")
    ind = Polynomial(0)
    for j, q in enumerate(qs):
        if not q.is_zero() and q.degree(_N) - j == b:
            ff = Polynomial(1)
            for i in range(j):
                ff = ff * (n - i)
            ind = ind + ff * q.leading_coefficient()
    roots = [r for r in integer_roots(ind, "k") if r >= 0]
    bound = max(roots, default=-1)
    if rhs_degree >= 0:
        bound = max(bound, rhs_degree - b)
    return bound


def polynomial_solutions(op: RecOperator, rhs=None) -> tuple:
    """``(basis, particular)``: polynomial solutions of ``op F = 0`` and of ``op F = rhs``.

    ``particular`` is None when ``rhs`` is not given or has no polynomial solution.
    """
    _require_eps_free(op)
    rhs_p = None
    if rhs is not None:
        r = as_rational_function(rhs.as_rational() if isinstance(rhs, SumExpression) else rhs)
        if not r.is_polynomial():
            raise ValueError("polynomial_solutions needs a polynomial right-hand side")
        rhs_p = r.num
    deg_rhs = rhs_p.degree(_N) if rhs_p is not None else -1
    bound = _degree_bound(op, deg_rhs)
    if bound < 0:
        return [], (Polynomial(0) if rhs_p is not None and rhs_p.is_zero() else None)
    n = Polynomial.var(_N)
    cols = []
    for m in range(bound + 1):
        col = Polynomial(0)
        for i, a in enumerate(op.coeffs):
            if not a.is_zero():
                col = col + a * (n + i) ** m
        cols.append(col)
    top = max([c.degree(_N) for c in cols] + [deg_rhs, 0])
    rows = [[c.coefficient(_N, e).constant_value() for c in cols] for e in range(top + 1)]
    basis = []
    for v in nullspace(rows, len(cols)):
        basis.append(sum((n**m * x for m, x in enumerate(v) if x), Polynomial(0)))
    particular = None
    if rhs_p is not None:
        target = [rhs_p.coefficient(_N, e).constant_value() for e in range(top + 1)]
        sol = particular_solution(rows, target)
        if sol is not None:
            particular = sum((n**m * x for m, x in enumerate(sol) if x), Polynomial(0))
    return basis, particular


# -- hypergeometric solutions ------------------------------------------------------------
def _monic_factors(p: Polynomial) -> list:
    _, facs = p.factor()
    out = []
    for f, e in facs:
        if f.degree(_N) > 0:
            out.append((f * (1 / f.leading_coefficient()), e))
    return out


def _divisors(p: Polynomial) -> list:
    facs = _monic_factors(p)
    out = []
    for exps in itertools.product(*[range(e + 1) for _, e in facs]):
        d = Polynomial(1)
        for (f, _), k in zip(facs, exps):
            d = d * f**k
        out.append(d)
    out.sort(key=lambda q: (q.degree(_N), str(q)))
    return out


def hyper_closed_form(ratio: RationalFunction):
    """``z^N * C(N)`` (``C`` rational) with the given shift quotient, or None."""
    ratio = as_rational_function(ratio)
    if ratio.is_zero():
        return None
    z = ratio.num.leading_coefficient() / ratio.den.leading_coefficient()
    nums = [f for f, e in _monic_factors(ratio.num) for _ in range(e)]
    dens = [g for g, e in _monic_factors(ratio.den) for _ in range(e)]
    c = RationalFunction(1)
    for f in nums:
        for idx, g in enumerate(dens):
            s = shift_distance(g, f, _N)
            if s is None:
                continue
            # f(N)/g(N) = g(N+s)/g(N)
            if s > 0:
                for i in range(s):
                    c = c * RationalFunction(g.shift(_N, i))
            else:
                for i in range(1, -s + 1):
                    c = c / RationalFunction(g.shift(_N, -i))
            del dens[idx]
            break
        else:
            return None
    if dens:
        return None
    e = SumExpression(c, _N)
    return e * SumExpression.geometric(z, _N) if z != 1 else e


def _applies_to_zero(op: RecOperator, ratio: RationalFunction) -> bool:
    total = RationalFunction(0)
    prod = RationalFunction(1)
    for i, a in enumerate(op.coeffs):
        if i:
            prod = prod * ratio.shift(_N, i - 1)
        if not a.is_zero():
            total = total + prod * a
    return total.is_zero()


def _same_class(r1: RationalFunction, r0: RationalFunction):
    """Rational ``rho`` with ``h1 = rho * h0``, or None."""
    a, b, c = gosper_form(r1 / r0, _N)
    if a.degree(_N) > 0 or b.degree(_N) > 0 or a.constant_value() != b.constant_value():
        return None
    return RationalFunction(c)


def _independent(funcs: list) -> bool:
    pts = []
    n = 30
    while len(pts) < len(funcs):
        if all(not f.den.evaluate({_N: n}) == 0 for f in funcs):
            pts.append(n)
        n += 1
    rows = [[f.evaluate({_N: p}) for f in funcs] for p in pts]
    _, piv = rref(rows)
    return len(piv) == len(funcs)


def hypergeometric_solutions(op: RecOperator) -> list:
    """All hypergeometric solutions (up to constant multiples) as :class:`HyperTerm` objects.

    Only ``ratio_N`` is meaningful on the returned terms.
    """
    _require_eps_free(op)
    op, _ = op.trimmed()
    d = op.order
    if d == 0:
        return []
    if d == 1:
        return [HyperTerm(1, -RationalFunction(op[0], op[1]))]
    n = Polynomial.var(_N)
    a_cands = _divisors(op[0])
    b_cands = _divisors(op[d].shift(_N, 1 - d))
    found: list = []
    classes: list = []
    for A, B in sorted(itertools.product(a_cands, b_cands), key=lambda ab: (ab[0].degree(_N) + ab[1].degree(_N), str(ab[0]), str(ab[1]))):
        ps = []
        for i in range(d + 1):
            p = op[i]
            for j in range(i):
                p = p * A.shift(_N, j)
            for j in range(i, d):
                p = p * B.shift(_N, j)
            ps.append(p)
        m = max(p.degree(_N) for p in ps)
        char = sum((n**i * p.coefficient(_N, m).constant_value() for i, p in enumerate(ps) if p.degree(_N) == m), Polynomial(0))
        for z in sorted(r for r in _rational_roots(char) if r != 0):
            zop = RecOperator([p * z**i for i, p in enumerate(ps)])
            basis, _ = polynomial_solutions(zop)
            for C in basis:
                ratio = RationalFunction(A, B) * RationalFunction(C.shift(_N, 1), C) * z
                if not _applies_to_zero(op, ratio):
                    raise ArithmeticError("hypergeometric candidate failed verification")
                _add_solution(ratio, found, classes)
    return found


def _rational_roots(p: Polynomial) -> list:
    from .core_algebra import rational_roots

    if p.degree(_N) <= 0:
        return []
    return list(rational_roots(p, _N))


def _add_solution(ratio, found, classes) -> None:
    for rep, rhos in classes:
        rho = _same_class(ratio, rep)
        if rho is not None:
            if _independent(rhos + [rho]):
                rhos.append(rho)
                found.append(HyperTerm(1, ratio))
            return
    classes.append((ratio, [RationalFunction(1)]))
    found.append(HyperTerm(1, ratio))


# -- d'Alembertian solutions --------------------------------------------------------------
def _right_divide(coeffs: list, r: RationalFunction) -> list:
    """``L'`` with ``L = L' (E - r)``."""
    d = len(coeffs) - 1
    b = [RationalFunction(0)] * d
    b[d - 1] = coeffs[d]
    for i in range(d - 1, 0, -1):
        b[i - 1] = coeffs[i] + b[i] * r.shift(_N, i)
    if not (coeffs[0] + b[0] * r).is_zero():
        raise ArithmeticError("right division by a first-order factor left a remainder")
    return b


def _first_order_step(y: SumExpression, h: SumExpression) -> SumExpression:
    """A solution of ``F(N+1) - r F(N) = y`` with ``h`` a solution of the homogeneous part."""
    if y.is_zero():
        return SumExpression.zero(_N)
    (z, _, _), c = h.items()[0]
    if len(h.items()) != 1:
        raise ValueError("hypergeometric factor must be a single z^N * C(N) term")
    h1 = c.shift(_N, 1) * z
    kernel = y * SumExpression.geometric(1 / z, _N) if z != 1 else y
    return antidifference(kernel / h1) * h


def _polish(coeffs: list) -> RecOperator:
    op, _ = RecOperator.from_rational(coeffs)
    return op.primitive()[0]


def dalembertian_solve(op: RecOperator, rhs=0) -> SolutionSet:
    """Homogeneous d'Alembertian basis plus a particular solution of ``op F = rhs``."""
    _require_eps_free(op)
    rhs = rhs if isinstance(rhs, SumExpression) else (parse_sum_expr(rhs) if isinstance(rhs, str) else SumExpression(rhs))
    op, off = op.trimmed()
    if off:
        rhs = shift_synchronize(rhs, -off)
    order = op.order
    cur = [RationalFunction(c) for c in op.coeffs]
    chain = []
    tokens = []
    notes = []
    while len(cur) > 1:
        hs = hypergeometric_solutions(_polish(cur))
        pick = None
        for h in hs:
            cf = hyper_closed_form(h.ratio_N)
            if cf is not None:
                pick = (h.ratio_N, cf)
                break
        if pick is None:
            tokens.extend(hs)
            notes.append(f"no closed-form hypergeometric right factor for order-{len(cur) - 1} operator {_polish(cur)}")
            break
        chain.append(pick)
        cur = _right_divide(cur, pick[0])
    particular = None
    if len(cur) == 1:
        try:
            particular = rhs / cur[0]
            for _, h in reversed(chain):
                particular = _first_order_step(particular, h)
        except NotInClass as exc:
            particular = None
            notes.append(f"particular solution: {exc}")
    elif rhs.is_zero():
        particular = SumExpression.zero(_N)
    basis = []
    for j in range(len(chain)):
        y = chain[j][1]
        try:
            for i in range(j - 1, -1, -1):
                y = _first_order_step(y, chain[i][1])
        except NotInClass as exc:
            notes.append(f"homogeneous solution {j + 1}: {exc}")
            continue
        basis.append(y)
    for b in basis:
        if not op.apply(b).is_zero():
            raise ArithmeticError(f"homogeneous solution {b} does not satisfy the recurrence")
    if particular is not None and op.apply(particular) != rhs:
        raise ArithmeticError("particular solution does not satisfy the recurrence")
    return SolutionSet(basis, particular, order, tokens, notes)


# -- initial values ---------------------------------------------------------------------
def _const_expr(v) -> SumExpression:
    if isinstance(v, SumExpression):
        if not v.is_constant():
            raise ValueError(f"initial value {v} is not a constant")
        return v
    if isinstance(v, str):
        return parse_sum_expr(v)
    return SumExpression(Fraction(v))


def match_constants(sol: SolutionSet, ivs) -> list:
    """Constants ``c_i`` (constant expressions) fitting ``ivs = [(n, value), ...]``."""
    ivs = [(int(n), _const_expr(v)) for n, v in ivs]
    m = len(sol.homogeneous_basis)
    part = sol.particular if sol.particular is not None else SumExpression.zero()
    try:
        rows = [[b.evaluate(n) for b in sol.homogeneous_basis] for n, _ in ivs]
        part_values = [part.evaluate(n) for n, _ in ivs]
    except PoleError as exc:
        raise ValueError(f"an initial value sits at a singular point of the solutions ({exc}); give values past the last integer singularity") from exc
    for row in rows:
        for e in row:
            if not e.is_constant() or any(k for k in e.constant_parts()):
                raise ValueError("homogeneous basis elements must be free of formal constants")
    mat = [[e.constant_parts().get((), Fraction(0)) for e in row] for row in rows]
    targets = [v - p for (_, v), p in zip(ivs, part_values)]
    keys = sorted({k for t in targets for k in t.constant_parts()})
    consts = [SumExpression.zero() for _ in range(m)]
    free = None
    for key in keys:
        b = [t.constant_parts().get(key, Fraction(0)) for t in targets]
        x = particular_solution(mat, b)
        if x is None:
            raise NotInClass("initial values are inconsistent with the solution set")
        unit = SumExpression(1)
        for name in key:
            unit = unit * SumExpression.constant(name)
        for i in range(m):
            consts[i] = consts[i] + unit * x[i]
    if m:
        ker = nullspace(mat, m)
        if ker:
            free = ker
    if free:
        raise Underdetermined(
            f"{len(free)} constant(s) remain free after matching {len(ivs)} initial values",
            sol.general(consts),
            [sum((b * x for b, x in zip(sol.homogeneous_basis, v)), SumExpression.zero()) for v in free],
        )
    return consts


def match_initial_values(sol: SolutionSet, ivs) -> SumExpression:
    """The unique element of ``sol`` with the given initial values."""
    consts = match_constants(sol, ivs)
    out = sol.general(consts)
    for n, v in ivs:
        if out.evaluate(int(n)) != _const_expr(v):
            raise ArithmeticError(f"matched solution misses the initial value at N={n}")
    return out


def solve_rec(op: RecOperator, rhs, ivs) -> SumExpression:
    """Closed form of the solution of ``op F = rhs`` with ``ivs = [(n, value), ...]``."""
    sol = dalembertian_solve(op, rhs)
    if sol.particular is None:
        raise NotInClass("; ".join(sol.notes) or "no particular solution in the class")
    out = match_initial_values(sol, ivs)
    r = rhs if isinstance(rhs, SumExpression) else (parse_sum_expr(rhs) if isinstance(rhs, str) else SumExpression(rhs))
    if op.apply(out) != r:
        raise ArithmeticError("solution fails the recurrence")
    return out
