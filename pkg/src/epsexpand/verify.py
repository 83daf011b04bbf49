"""High-precision numeric cross-checks.

Everything here evaluates independently of the symbolic pipeline: S-sums
are summed term by term, Gamma products go through mpmath, and Laurent
coefficients in ``ep`` are read off a discretized Cauchy integral.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import mpmath

from .core_algebra import PoleError
from .eps_series import EpsSeries
from .hyperterm import GammaTerm, parse_term
from .sum_expr import SumExpression, constant_value

__all__ = [
    "DEFAULT_DPS",
    "VerifyReport",
    "PoleOnGrid",
    "default_dps",
    "numeric_verify",
    "laurent_coefficients",
    "definite_sum_value",
    "definite_sum_laurent",
]

DEFAULT_DPS = 40


def default_dps() -> int:
    """Working precision in decimal digits (``EPSEXPAND_DPS`` overrides the default 40)."""
    raw = os.environ.get("EPSEXPAND_DPS")
    if not raw:
        return DEFAULT_DPS
    try:
        v = int(raw)
    except ValueError as exc:
        raise ValueError(f"EPSEXPAND_DPS must be an integer, got {raw!r}") from exc
    if v < 10:
        raise ValueError("EPSEXPAND_DPS must be at least 10")
    return v


class PoleOnGrid(ValueError):
    """No grid point could be evaluated."""

    def __init__(self, message: str, skipped: list):
        super().__init__(message)
        self.skipped = skipped


@dataclass
class VerifyReport:
    passed: bool
    max_deviation: object
    worst_point: tuple | None
    digits: int
    checked: int
    skipped: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def summary(self) -> str:
        dev = mpmath.nstr(self.max_deviation, 5) if self.max_deviation is not None else "n/a"
        status = "PASS" if self.passed else "FAIL"
        line = f"{status}: max relative deviation {dev} over {self.checked} points (threshold 1e-{self.digits // 2})"
        if self.worst_point is not None and not self.passed:
            line += f"; worst at {self.worst_point}"
        if self.skipped:
            line += f"; skipped {self.skipped}"
        return line

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_deviation": mpmath.nstr(self.max_deviation, 10) if self.max_deviation is not None else None,
            "worst_point": list(self.worst_point) if self.worst_point else None,
            "digits": self.digits,
            "checked": self.checked,
            "skipped": [list(p) if isinstance(p, tuple) else p for p in self.skipped],
        }


def _evaluator(obj, dps: int) -> Callable:
    """``(n, eps) -> mpmath value`` for the supported operand kinds."""
    if isinstance(obj, SumExpression):
        return lambda n, eps: obj.eval_float(n, dps)
    if isinstance(obj, EpsSeries):
        return lambda n, eps: obj.eval_float(n, eps, dps)
    if isinstance(obj, GammaTerm):
        return lambda n, eps: obj.float_value({"N": n, "ep": eps}, dps)
    if isinstance(obj, str):
        from .sum_expr import parse_sum_expr

        return _evaluator(parse_sum_expr(obj), dps)
    if callable(obj):
        try:
            import inspect

            nargs = len(inspect.signature(obj).parameters)
        except (TypeError, ValueError):
            nargs = 2
        if nargs == 1:
            return lambda n, eps: obj(n)
        return obj
    raise TypeError(f"cannot evaluate {obj!r} numerically")


def _to_mp(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpmathify(v)


def numeric_verify(lhs, rhs, grid: Iterable[int], eps_vals: Iterable | None = None, digits: int | None = None) -> VerifyReport:
    """Compare two sides at every ``(n, eps)`` of the grid with ``digits`` working digits.

    Passes iff the largest relative deviation is below ``10^(-digits/2)``;
    points where either side has a pole are skipped and listed.
    """
    digits = digits or default_dps()
    eps_list = list(eps_vals) if eps_vals is not None else [Fraction(0)]
    with mpmath.workdps(digits + 10):
        fl = _evaluator(lhs, digits)
        fr = _evaluator(rhs, digits)
        tol = mpmath.mpf(10) ** (-(digits // 2))
        worst, where = mpmath.mpf(0), None
        skipped, rows = [], []
        checked = 0
        for n in grid:
            for e in eps_list:
                try:
                    a = _to_mp(fl(n, e))
                    b = _to_mp(fr(n, e))
                except (PoleError, ZeroDivisionError) as exc:
                    skipped.append((n, str(e)) if len(eps_list) > 1 else n)
                    rows.append((n, str(e), None, None, f"pole: {exc}"))
                    continue
                scale = max(abs(a), abs(b))
                dev = abs(a - b) / scale if scale else mpmath.mpf(0)
                rows.append((n, str(e), a, b, dev))
                checked += 1
                if dev > worst or where is None:
                    worst, where = dev, (n, str(e))
        if not checked:
            raise PoleOnGrid(f"every grid point hit a pole: {skipped}", skipped)
        return VerifyReport(bool(worst < tol), worst, where, digits, checked, skipped, rows)


def laurent_coefficients(fn: Callable, orders: Iterable[int], radius=Fraction(1, 10), points: int = 96, dps: int | None = None) -> dict:
    """Laurent coefficients of ``fn(ep)`` at ``ep = 0`` by the trapezoidal Cauchy integral.

    ``fn`` must be analytic on ``0 < |ep| <= radius`` apart from the pole at
    zero; the error decays like ``(radius / R)^points`` with ``R`` the
    distance to the next singularity.
    """
    dps = dps or default_dps()
    orders = list(orders)
    with mpmath.workdps(dps + 20):
        r = _to_mp(radius)
        vals = []
        for j in range(points):
            z = r * mpmath.expjpi(mpmath.mpf(2 * j) / points)
            vals.append((z, fn(z)))
        out = {}
        for m in orders:
            acc = mpmath.mpc(0)
            for z, v in vals:
                acc += v / z**m
            c = acc / points
            out[m] = c.real if abs(c.imag) <= abs(c) * mpmath.mpf(10) ** (-dps) or c.imag == 0 else c
        return out


def definite_sum_value(term, n: int, eps, lo: int = 1, dps: int | None = None):
    """``sum_{k=lo}^{n} term(N=n, k, ep=eps)`` in floating point."""
    dps = dps or default_dps()
    t = parse_term(term) if isinstance(term, str) else term
    with mpmath.workdps(dps + 20):
        total = mpmath.mpf(0)
        for k in range(lo, n + 1):
            total += t.float_value({"N": n, "k": k, "ep": eps}, dps + 10)
        return total


def definite_sum_laurent(term, n: int, orders: Iterable[int], lo: int = 1, radius=Fraction(1, 10), points: int = 96, dps: int | None = None) -> dict:
    """Laurent coefficients of ``sum_{k=lo}^{n} term`` obtained without any symbolic expansion."""
    dps = dps or default_dps()
    t = parse_term(term) if isinstance(term, str) else term
    return laurent_coefficients(lambda e: definite_sum_value(t, n, e, lo, dps), orders, radius, points, dps)


def constant_float(name: str, dps: int | None = None):
    return constant_value(name, dps or default_dps())
