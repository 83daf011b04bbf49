"""Exact Gaussian elimination over any field whose elements support ``+ - * /``.

Used with :class:`fractions.Fraction` and with
:class:`~epsexpand.core_algebra.poly.RationalFunction` entries.
"""

from __future__ import annotations

from fractions import Fraction

from .poly import RationalFunction

__all__ = ["rref", "nullspace", "solve", "particular_solution", "SingularSystem", "det"]


class SingularSystem(ValueError):
    """A linear system has no solution or no unique solution."""


def _weight(x) -> int:
    if isinstance(x, RationalFunction):
        return x.num.degree() + x.den.degree() + (0 if x.is_constant() else 1)
    return 0


def rref(rows: list) -> tuple:
    """Reduced row echelon form; returns ``(matrix, pivot columns)``."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for col in range(ncols):
        if r == len(m):
            break
        cands = [i for i in range(r, len(m)) if m[i][col]]
        if not cands:
            continue
        best = min(cands, key=lambda i: _weight(m[i][col]))
        m[r], m[best] = m[best], m[r]
        inv = 1 / m[r][col] if isinstance(m[r][col], (int, Fraction)) else m[r][col].inverse()
        m[r] = [x * inv if x else x for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b if b else a for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    return m, pivots


def nullspace(rows: list, ncols: int, zero=Fraction(0), one=Fraction(1)) -> list:
    """Basis of ``{v : rows * v = 0}``."""
    if not rows:
        return [[one if i == j else zero for i in range(ncols)] for j in range(ncols)]
    m, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [zero] * ncols
        v[fcol] = one
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][fcol]
        basis.append(v)
    return basis


def solve(a: list, b: list, zero=Fraction(0)) -> list:
    """Unique solution of ``a x = b``; raises :class:`SingularSystem` otherwise."""
    n = len(a[0]) if a else 0
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    m, pivots = rref(aug)
    if n in pivots:
        raise SingularSystem("inconsistent linear system")
    if len(pivots) < n:
        raise SingularSystem("linear system is underdetermined")
    x = [zero] * n
    for r, pc in enumerate(pivots):
        x[pc] = m[r][n]
    return x


def det(rows: list, one=Fraction(1)):
    """Determinant by fraction-tracking elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    d = one
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col]), None)
        if piv is None:
            return one - one
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            d = -d
        p = m[col][col]
        d = d * p
        for i in range(col + 1, n):
            if m[i][col]:
                f = m[i][col] / p
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return d


def particular_solution(a: list, b: list, zero=Fraction(0)):
    """Some solution of ``a x = b`` (free variables set to zero), or ``None``."""
    n = len(a[0]) if a else 0
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    m, pivots = rref(aug)
    if n in pivots:
        return None
    x = [zero] * n
    for r, pc in enumerate(pivots):
        x[pc] = m[r][n]
    return x
