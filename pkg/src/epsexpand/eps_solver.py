"""ep-expansion coefficients of a sequence from an ep-dependent recurrence.

With ``op = sum_j ep^j op_j`` and ``F = sum_l ep^l F_l`` the lowest order
of ``op F = rhs`` gives ``op_0 F_lam = h_lam``; once ``F_lam`` is known its
contribution is removed from the right-hand side and the next order is a
recurrence of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core_algebra import Polynomial
from .eps_series import EP, EpsSeries, InsufficientOrder
from .operators import RecOperator
from .rec_solver import solve_rec
from .sum_expr import SumExpression

__all__ = ["EpsBootstrapState", "BootstrapStopped", "normalize_leading", "bootstrap_expansion"]


class BootstrapStopped(ValueError):
    """Some order has no solution in the class; earlier orders are kept in ``partial``."""

    def __init__(self, message: str, partial: EpsSeries | None, constraint: str):
        super().__init__(message)
        self.partial = partial
        self.constraint = constraint


@dataclass
class EpsBootstrapState:
    op: RecOperator
    rhs: EpsSeries
    remaining_rhs: EpsSeries
    iv_series: list
    found: list = field(default_factory=list)

    def result(self, trunc: int | None = None) -> EpsSeries | None:
        if not self.found:
            return None
        start = self.found[0][0]
        return EpsSeries(start, [c for _, c in self.found], trunc if trunc is not None else start + len(self.found))


def _eps_valuation(p: Polynomial) -> int:
    d = p.degree(EP)
    for k in range(d + 1):
        if not p.coefficient(EP, k).is_zero():
            return k
    return d


def _iv_list(ivs) -> list:
    if isinstance(ivs, dict):
        return sorted((int(n), s) for n, s in ivs.items())
    out = []
    for i, item in enumerate(ivs):
        if isinstance(item, tuple):
            out.append((int(item[0]), item[1]))
        else:
            out.append((i + 1, item))
    return out


def normalize_leading(op: RecOperator, rhs: EpsSeries, ivs=()) -> tuple:
    """``(op / ep^s, rhs / ep^s, lam)`` with ``op`` not vanishing at ``ep = 0``."""
    if op.is_zero():
        raise ValueError("zero operator")
    s = min(_eps_valuation(c) for c in op.coeffs if not c.is_zero())
    if s:
        ep = Polynomial.var(EP)
        coeffs = []
        for c in op.coeffs:
            acc = Polynomial(0)
            for k in range(s, c.degree(EP) + 1):
                acc = acc + c.coefficient(EP, k) * ep ** (k - s)
            coeffs.append(acc)
        op = RecOperator(coeffs)
        rhs = rhs.mul_eps(-s)
    starts = [rhs.normalized().start if not rhs.is_zero() else None]
    starts += [s_.normalized().start for _, s_ in _iv_list(ivs) if not s_.is_zero()]
    starts = [x for x in starts if x is not None]
    lam = min(starts) if starts else 0
    return op, rhs, lam


def _contribution(op: RecOperator, f: SumExpression, order: int) -> EpsSeries:
    """``op(ep^order f)`` as an exact series."""
    terms = []
    for j in range(op.eps_degree() + 1):
        part = op.specialize_eps(j)
        terms.append(part.apply(f) if not part.is_zero() else SumExpression.zero())
    return EpsSeries(order, terms, None)


def bootstrap_expansion(op: RecOperator, rhs: EpsSeries, ivs, orders: int) -> EpsSeries:
    """The first ``orders`` coefficients of the solution starting at the lowest order ``lam``."""
    op, rhs, lam = normalize_leading(op, rhs, ivs)
    ivl = _iv_list(ivs)
    top = lam + orders
    if rhs.trunc is not None and rhs.trunc < top:
        raise InsufficientOrder(f"right-hand side known to O(ep^{rhs.trunc}); {orders} orders from ep^{lam} need O(ep^{top})")
    for n, s in ivl:
        if s.trunc is not None and s.trunc < top:
            raise InsufficientOrder(f"initial value F({n}) known to O(ep^{s.trunc}); need O(ep^{top})")
    op0 = op.specialize_eps(0)
    state = EpsBootstrapState(op, rhs, rhs.with_start(min(lam, rhs.start)) if rhs.start > lam else rhs, ivl)
    for m in range(lam, top):
        h = state.remaining_rhs.coeff(m)
        values = [(n, s.coeff(m)) for n, s in ivl]
        try:
            fm = solve_rec(op0, h, values)
        except ValueError as exc:
            constraint = f"{op0} = {h}; initial values {', '.join(f'F({n}) = {v}' for n, v in values)}"
            raise BootstrapStopped(f"order ep^{m}: {exc}", state.result(), constraint) from exc
        state.found.append((m, fm))
        rem = state.remaining_rhs - _contribution(op, fm, m)
        if not rem.coeff(m).is_zero():
            raise ArithmeticError(f"order ep^{m} was not eliminated")
        state.remaining_rhs = rem.with_start(m + 1) if m + 1 < (rem.trunc if rem.trunc is not None else rem.end + 1) else rem
    out = state.result(top)
    residual = op.apply_series(out) - rhs
    if any(not residual.coeff(i).is_zero() for i in range(lam, top)):
        raise ArithmeticError("assembled expansion fails the recurrence")
    return out
