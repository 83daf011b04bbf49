"""Acceptance criteria, one test per criterion.

Each criterion is a function returning ``(passed, detail)``; the tests record
the outcome for the terminal summary and the file also runs as a script::

    python tests/test_acceptance.py
"""

from __future__ import annotations

import random
import subprocess
import sys
import time
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import mpmath
import pytest

HERE = Path(__file__).resolve().parent
if str(HERE) not in sys.path:
    sys.path.insert(0, str(HERE))

import conftest  # noqa: E402
import props  # noqa: E402
from epsexpand.core_algebra.linalg import SingularSystem  # noqa: E402
from epsexpand.coupled import fiber_check, solve_coupled_system, uncouple  # noqa: E402
from epsexpand.eps_series import gamma_expand, parse_series  # noqa: E402
from epsexpand.eps_solver import bootstrap_expansion  # noqa: E402
from epsexpand.fixtures import (  # noqa: E402
    BRACKET,
    DE_SYSTEM,
    EPS_EXPANSION,
    EPS_IVS,
    EPS_OP,
    EPS_RHS,
    POLE_BASIS,
    POLE_CONSTANTS,
    POLE_OP,
    POLE_PARTICULAR,
    POLE_RHS,
    SUMMAND,
    SUMMAND_BASE,
    _pole_ivs,
)
from epsexpand.hyperterm import parse_term  # noqa: E402
from epsexpand.operators import companionize, ode_to_rec, parse_operator, system_from_dict  # noqa: E402
from epsexpand.rec_solver import SolutionSet, match_constants, solve_rec  # noqa: E402
from epsexpand.sum_expr import parse_sum_expr  # noqa: E402
from epsexpand.summand import summand_expand  # noqa: E402
from epsexpand.telescoping import certificate_verify, zeilberger  # noqa: E402
from epsexpand.verify import laurent_coefficients  # noqa: E402

TRANSLATION_LINE = "N*I1(N-1) + (-N - ep - 1)*I1(N) + 2*I2(N) = B1(N)"
INVARIANT_MODULES = [
    "test_core_algebra.py",
    "test_sum_expr.py",
    "test_eps_series.py",
    "test_operators.py",
    "test_telescoping.py",
    "test_rec_solver.py",
    "test_eps_solver.py",
    "test_coupled.py",
    "test_verify.py",
    "test_cli.py",
]


def _timed(limit: float, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if dt >= limit:
        return False, f"{detail}; took {dt:.1f}s, limit {limit:g}s"
    return ok, f"{detail} ({dt:.2f}s)"


def _mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


# -- the closed forms of criteria 1-3, computed once ---------------------------------------------
@lru_cache(maxsize=None)
def bracket():
    return summand_expand(SUMMAND, 0).relative_to(SUMMAND_BASE)


@lru_cache(maxsize=None)
def pole_solution():
    return solve_rec(parse_operator(POLE_OP), parse_sum_expr(POLE_RHS), _pole_ivs())


@lru_cache(maxsize=None)
def expansion():
    op = parse_operator(EPS_OP)
    return bootstrap_expansion(op, parse_series(EPS_RHS), [parse_series(s) for s in EPS_IVS], 3)


# -- criteria -----------------------------------------------------------------------------------------
def criterion_1():
    def run():
        s = bracket()
        diff = s.coeff(-1) - parse_sum_expr(BRACKET, "k")
        return s.start == -3 and diff.is_zero(), f"ep^-1 bracket difference: {diff}"

    return _timed(10, run)


def criterion_2():
    def run():
        op, rhs = parse_operator(POLE_OP), parse_sum_expr(POLE_RHS)
        sol = pole_solution()
        basis = [parse_sum_expr(b) for b in POLE_BASIS]
        part = parse_sum_expr(POLE_PARTICULAR)
        consts = match_constants(SolutionSet(basis, part), _pole_ivs())
        want = [parse_sum_expr(c) for c in POLE_CONSTANTS]
        printed = basis[0] * want[0] + basis[1] * want[1] + part
        residual = op.apply(sol) - rhs
        ok = consts == want and sol == printed and residual.is_zero()
        return ok, f"c1 = {consts[0]}, c2 = {consts[1]}; residual {'zero' if residual.is_zero() else residual}"

    return _timed(30, run)


def criterion_3():
    def run():
        res = expansion()
        bad = [i for i, text in enumerate(EPS_EXPANSION) if res.coeff(-3 + i) != parse_sum_expr(text)]
        return res.start == -3 and not bad, "orders ep^-3, ep^-2, ep^-1 match" if not bad else f"mismatch at {[i - 3 for i in bad]}"

    return _timed(60, run)


def criterion_4():
    def run():
        op, cert = zeilberger(SUMMAND)
        ok = op.order == 2 and op.equivalent(parse_operator(EPS_OP)) and certificate_verify(op, SUMMAND, cert)
        return ok, f"order {op.order}, equivalent and certified" if ok else f"got {op}"

    return _timed(120, run)


def criterion_5():
    def run():
        line = ode_to_rec(system_from_dict(DE_SYSTEM)).equation_strings()[0]
        return line == TRANSLATION_LINE, line

    return _timed(1, run)


def criterion_6(count: int = 100, nmax: int = 40):
    def run():
        rng = random.Random(6)
        done, redrawn, skipped, checked = 0, 0, 0, 0
        failures = []
        while done < count:
            s = props.random_first_order_system(rng, 2 if done % 2 == 0 else 3)
            form = uncouple(s)
            reports = []
            try:
                for eps in (Fraction(1, 3), Fraction(1, 7)):
                    init = {n: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for n in s.unknowns}
                    reports.append(fiber_check(s, form, eps, init, {"B": props.forcing_input}, start=1, nmax=nmax))
            except SingularSystem:
                # the forward iteration itself is undefined; draw another system
                redrawn += 1
                continue
            for rep in reports:
                failures += rep["failures"]
                skipped += len(rep["skipped"])
                checked += rep["checked"]
            done += 1
        detail = f"{done} systems, {checked} fiber points exact, {skipped} pole points skipped, {redrawn} singular systems redrawn"
        return not failures, detail if not failures else f"{detail}; first failure {failures[0]}"

    return _timed(600, run)


def criterion_7():
    def run():
        op = parse_operator(EPS_OP)
        rhs = parse_series(EPS_RHS)
        ivs = [parse_series(s) for s in EPS_IVS]
        sol = solve_coupled_system(companionize(op, rhs, ["Y0", "Y1"]), {"Y0": ivs}, 3, pivot="Y0")
        same = str(sol["Y0"]) == str(expansion())
        return same, "companion output identical to the scalar expansion" if same else str(sol["Y0"])

    return _timed(120, run)


def criterion_8():
    def run():
        tol = mpmath.mpf(10) ** -20
        worst = mpmath.mpf(0)
        with mpmath.workdps(40):
            # bracket: Laurent coefficient of summand / hypergeometric part, term by term in k
            term, base = parse_term(SUMMAND), parse_term(SUMMAND_BASE)
            br = bracket().coeff(-1)
            for k in range(1, 21):
                point = {"N": 25, "k": k}

                def ratio(e, point=point):
                    p = dict(point, ep=e)
                    return term.float_value(p, 50) / base.float_value(p, 50)

                direct = laurent_coefficients(ratio, [-1], dps=40)[-1]
                worst = max(worst, abs(br.eval_float(k, 40) - direct) / abs(direct))
            # sums: pole solution and the three expansion coefficients against the summed Laurent data
            closed = [(-3, expansion().coeff(-3)), (-2, expansion().coeff(-2)), (-1, expansion().coeff(-1)), (-1, pole_solution())]
            for n in range(1, 21):
                data = props.summed_laurent(SUMMAND, n)
                for order, expr in closed:
                    direct = data[order]
                    worst = max(worst, abs(expr.eval_float(n, 40) - direct) / abs(direct))
        return worst < tol, f"max relative deviation {mpmath.nstr(worst, 3)} over 20 bracket and 80 sum values"

    return _timed(300, run)


def criterion_9():
    def run():
        worst_err, worst_ratio = mpmath.mpf(0), None
        bad = []
        with mpmath.workdps(50):
            for offset, var, r, ns in [(1, "N", Fraction(-3, 2), range(1, 16)), (2, "N", Fraction(1, 2), range(1, 16)), (0, "N", Fraction(1), range(1, 16)), (-1, None, Fraction(-3, 2), [None])]:
                ser, _ = gamma_expand(offset, var, r, 4)
                for n in ns:
                    errs = []
                    for e in (Fraction(1, 1000), Fraction(1, 10000)):
                        x = (n or 0) + offset + r * _mp(e)
                        exact = mpmath.gamma(x) / (mpmath.gamma(n + offset) if var else 1)
                        approx = ser.eval_float(n, e, 50) if var else ser.constant_float(e, 50)
                        rel = abs(approx - exact) / abs(exact)
                        worst_err = max(worst_err, rel)
                        # compare absolute defects; near the pole the relative error carries an extra factor ep
                        errs.append(abs(approx - exact))
                    ratio = errs[0] / errs[1]
                    if not (rel < 1e-8 and 1e4 / 4 <= ratio <= 1e4 * 4):
                        bad.append((offset, str(r), n, mpmath.nstr(rel, 3), mpmath.nstr(ratio, 5)))
                    if worst_ratio is None or abs(mpmath.log10(ratio) - 4) > abs(mpmath.log10(worst_ratio) - 4):
                        worst_ratio = ratio
        detail = f"max relative error {mpmath.nstr(worst_err, 3)}, Richardson ratio furthest from 1e4: {mpmath.nstr(worst_ratio, 5)}"
        return not bad, detail if not bad else f"{detail}; failing {bad[:3]}"

    return _timed(300, run)


def _invariant_outcomes() -> dict:
    outcomes = {m: list(v) for m, v in conftest.INVARIANT_OUTCOMES.items()}
    missing = [m for m in INVARIANT_MODULES if m not in outcomes]
    if missing:
        # not collected in this session: run those suites in a child process
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", "-m", "invariant", "-p", "no:cacheprovider"] + [str(HERE / m) for m in missing],
            capture_output=True,
            text=True,
            cwd=HERE.parent,
        )
        for m in missing:
            outcomes[m] = ["passed" if proc.returncode == 0 else "failed"]
    return outcomes


def criterion_10():
    def run():
        counts = {
            "ring axioms": props.check_ring_axioms(1000),
            "gcd divides": props.check_gcd_divides(200),
            "rational evaluation": props.check_rat_eval_homomorphism(300),
            "canonical form": props.check_canonical_form(300),
        }
        algebra = sum(counts.values())
        gos = props.check_gosper(200)
        stuffle = props.check_stuffle(50)
        outcomes = _invariant_outcomes()
        failing = sorted(m for m in INVARIANT_MODULES if any(o != "passed" for o in outcomes.get(m, ["missing"])))
        ok = algebra >= 1000 and gos["cases"] == 200 and gos["certificates"] >= gos["summable"] and stuffle == 50 and not failing
        detail = (
            f"{algebra} algebra cases, {gos['cases']} Gosper cases ({gos['certificates']} certificates), "
            f"{stuffle} stuffle cases, invariant suites green in {len(INVARIANT_MODULES) - len(failing)}/{len(INVARIANT_MODULES)} modules"
        )
        return ok, detail if not failing else f"{detail}; failing {failing}"

    return _timed(900, run)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_acceptance_criterion(num):
    ok, detail = CRITERIA[num]()
    conftest.ACCEPTANCE[num] = (ok, detail)
    print(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def main(argv=None) -> int:
    nums = [int(a) for a in (argv if argv is not None else sys.argv[1:])] or sorted(CRITERIA)
    failed = 0
    for num in nums:
        ok, detail = CRITERIA[num]()
        failed += not ok
        print(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
