"""Epsilon expansions of hypergeometric sums and coupled systems in nested sums."""

from __future__ import annotations

from .core_algebra import BACKEND, ParseError, PoleError, Polynomial, RationalFunction
from .coupled import cluster_order, solve_coupled_system, uncouple
from .eps_series import EpsSeries, gamma_expand, parse_series
from .eps_solver import BootstrapStopped, bootstrap_expansion
from .hyperterm import GammaTerm, parse_term
from .operators import CoupledSystem, RecOperator, ScalarRecurrence, ode_to_rec, parse_operator, parse_recurrence
from .rec_solver import NotInClass, Underdetermined, dalembertian_solve, solve_rec
from .sum_expr import SumExpression, parse_sum_expr, stuffle_product
from .summand import summand_expand
from .telescoping import certificate_verify, gosper, sum_recurrence, zeilberger
from .verify import numeric_verify

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BootstrapStopped",
    "CoupledSystem",
    "EpsSeries",
    "GammaTerm",
    "NotInClass",
    "ParseError",
    "PoleError",
    "Polynomial",
    "RationalFunction",
    "RecOperator",
    "ScalarRecurrence",
    "SumExpression",
    "Underdetermined",
    "bootstrap_expansion",
    "certificate_verify",
    "cluster_order",
    "dalembertian_solve",
    "gamma_expand",
    "gosper",
    "numeric_verify",
    "ode_to_rec",
    "parse_operator",
    "parse_recurrence",
    "parse_series",
    "parse_sum_expr",
    "parse_term",
    "solve_coupled_system",
    "solve_rec",
    "stuffle_product",
    "sum_recurrence",
    "summand_expand",
    "uncouple",
    "zeilberger",
]
