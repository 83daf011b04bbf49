"""Exact arithmetic kernel: rationals, polynomials and rational functions over Q."""

from __future__ import annotations

from fractions import Fraction as Rational

from .backend import NAME as BACKEND
from .linalg import SingularSystem, det, nullspace, particular_solution, rref, solve
from .parser import Grammar, ParseError, parse, parse_polynomial, parse_rational, split_top_level
from .poly import PoleError, Polynomial, RationalFunction, VARS, as_rational_function, poly_gcd
from .univariate import integer_roots, partial_fractions, rat_eval, rational_roots, shift_distance

__all__ = [
    "BACKEND",
    "Rational",
    "Polynomial",
    "RationalFunction",
    "PoleError",
    "ParseError",
    "SingularSystem",
    "VARS",
    "Grammar",
    "as_rational_function",
    "det",
    "integer_roots",
    "nullspace",
    "parse",
    "parse_polynomial",
    "parse_rational",
    "particular_solution",
    "partial_fractions",
    "poly_arith",
    "poly_gcd",
    "rat_eval",
    "rational_roots",
    "rref",
    "shift_distance",
    "solve",
    "split_top_level",
]


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    """``op`` is one of ``add``, ``sub``, ``mul``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")
