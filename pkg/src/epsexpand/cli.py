"""Command-line interface: ``epsexpand <command> ...``.

Every command prints a deterministic text report; ``--json`` switches to a
machine-readable one and ``-o`` writes it to a file as well.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .core_algebra import ParseError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _read(path: str) -> str:
    if path == "-":
        text = sys.stdin.read()
    else:
        p = Path(path)
        if not p.exists():
            raise UsageError(f"no such file: {path}")
        text = p.read_text(encoding="utf-8")
    lines = [ln.split("#", 1)[0].rstrip() for ln in text.splitlines()]
    body = "\n".join(ln for ln in lines if ln.strip())
    if not body.strip():
        raise UsageError(f"{path}: empty input")
    return body


def _text_or_file(value: str) -> str:
    """A literal expression, or the contents of ``@path``."""
    return _read(value[1:]) if value.startswith("@") else value


def _load_json(path: str) -> dict:
    try:
        data = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.doc, exc.pos) from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a JSON object")
    return data


def _parse_ivs(text: str, fname: str = "F") -> list:
    """Lines ``F(1) = <value>`` or ``1 = <value>``, separated by newlines or ``;``."""
    from .eps_series import parse_series
    from .operators import _split_equation

    out = []
    for line in text.replace(";", "\n").splitlines():
        if not line.strip():
            continue
        lhs, rhs = _split_equation(line)
        lhs = lhs.strip()
        if lhs.startswith(f"{fname}(") and lhs.endswith(")"):
            lhs = lhs[len(fname) + 1:-1]
        if rhs is None or not lhs.lstrip("-").isdigit():
            raise UsageError(f"initial value must look like {fname}(1) = ... or 1 = ...: {line.strip()!r}")
        out.append((int(lhs), parse_series(rhs)))
    return out


def _grid(text: str) -> list:
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def _emit(args, report: dict, text: str) -> None:
    out = json.dumps(report, indent=2, sort_keys=True) if args.json else text
    print(out)
    if getattr(args, "output", None):
        Path(args.output).write_text(out + "\n", encoding="utf-8")


# -- commands ------------------------------------------------------------------------------------
def cmd_expand_sum(args) -> int:
    from .summand import summand_expand

    term = _text_or_file(args.term)
    probe = summand_expand(term, 1, var=args.var).series.normalized()
    lam = probe.start if not probe.is_zero() else 0
    ex = summand_expand(term, lam + args.orders, var=args.var)
    series = ex.relative_to(args.relative_to) if args.relative_to else ex.series
    lines = [f"hypergeometric part: {args.relative_to or ex.hyper}", f"valid for {args.var} >= {ex.valid_from}"]
    lines += [f"ep^{j}: {series.coeff(j)}" for j in range(lam, lam + args.orders)]
    report = {"hyper": str(args.relative_to or ex.hyper), "valid_from": ex.valid_from, "series": str(series), "coefficients": {str(j): str(series.coeff(j)) for j in range(lam, lam + args.orders)}}
    _emit(args, report, "\n".join(lines))
    return EXIT_OK


def cmd_zeilberger(args) -> int:
    from .telescoping import sum_recurrence, zeilberger

    term = _text_or_file(args.term)
    if args.rhs_orders is not None:
        rec, cert = sum_recurrence(term, args.rhs_orders, lo=args.lower, dmax=args.dmax)
        report = {"operator": rec.op.to_string("F"), "certificate": str(cert), "rhs": str(rec.rhs)}
        text = f"{rec.op.to_string('F')} = {rec.rhs}\ncertificate: {cert}"
    else:
        op, cert = zeilberger(term, args.dmax)
        report = {"operator": op.to_string("F"), "certificate": str(cert)}
        text = f"{op.to_string('F')}\ncertificate: {cert}"
    _emit(args, report, text)
    return EXIT_OK


def _scalar_inputs(args):
    from .operators import _split_equation, parse_operator

    if bool(args.rec) == bool(args.op):
        raise UsageError("give the recurrence either positionally or with --op")
    lhs, rhs = _split_equation(_text_or_file(args.rec or args.op))
    if args.rhs is not None:
        rhs = _text_or_file(args.rhs)
    op = parse_operator(lhs, args.fname)
    return op, lhs, rhs


def cmd_solve_rec(args) -> int:
    from .operators import parse_lincomb
    from .rec_solver import Underdetermined, solve_rec, dalembertian_solve
    from .sum_expr import parse_sum_expr

    op, lhs, rhs_text = _scalar_inputs(args)
    lo = min(s for (_, s) in parse_lincomb(lhs, [args.fname]))
    rhs = parse_sum_expr(rhs_text) if rhs_text and rhs_text.strip() else parse_sum_expr("0")
    if lo:
        from .sum_expr import shift_synchronize

        rhs = shift_synchronize(rhs, -lo)
    if args.iv:
        ivs = [(n, s.coeff(0)) for n, s in _parse_ivs(_text_or_file(args.iv), args.fname)]
        try:
            sol = solve_rec(op, rhs, ivs)
        except Underdetermined as exc:
            report = {"status": "underdetermined", "particular": str(exc.particular), "free": [str(f) for f in exc.free]}
            _emit(args, report, f"underdetermined: {exc}")
            return EXIT_FAIL
        _emit(args, {"solution": str(sol)}, f"{args.fname}(N) = {sol}")
        return EXIT_OK
    sset = dalembertian_solve(op, rhs)
    report = {"homogeneous_basis": [str(b) for b in sset.homogeneous_basis], "particular": str(sset.particular), "complete": sset.complete, "notes": list(sset.notes)}
    _emit(args, report, str(sset))
    return EXIT_OK


def cmd_eps_expand(args) -> int:
    from .eps_solver import BootstrapStopped, bootstrap_expansion

    if args.sum:
        from .telescoping import sum_recurrence

        term = _text_or_file(args.sum)
        probe_rec, _ = sum_recurrence(term, 0, lo=args.lower, dmax=args.dmax)
        ivs = _sum_ivs(term, probe_rec.op.order, args.orders, args.lower)
        lam = min(s.normalized().start for _, s in ivs if not s.is_zero())
        rec, _ = sum_recurrence(term, lam + args.orders, lo=args.lower, dmax=args.dmax)
        op, rhs = rec.op, rec.rhs
    else:
        from .operators import parse_recurrence

        rhs_text = _text_or_file(args.rhs) if args.rhs else None
        rec = parse_recurrence(_text_or_file(args.rec), args.fname, rhs_text)
        op, rhs = rec.op, rec.rhs
        if not args.iv:
            raise UsageError("--iv is required with --rec")
        ivs = _parse_ivs(_text_or_file(args.iv), args.fname)
    try:
        res = bootstrap_expansion(op, rhs, ivs, args.orders)
    except BootstrapStopped as exc:
        report = {"status": "stopped", "reason": str(exc), "partial": str(exc.partial), "constraint": exc.constraint}
        _emit(args, report, f"stopped: {exc}\npartial: {exc.partial}\nconstraint: {exc.constraint}")
        return EXIT_FAIL
    lines = [f"ep^{j}: {res.coeff(j)}" for j in res.orders()]
    _emit(args, {"series": str(res), "coefficients": {str(j): str(res.coeff(j)) for j in res.orders()}}, "\n".join(lines))
    return EXIT_OK


def _sum_ivs(term: str, d: int, orders: int, lo: int) -> list:
    """Exact expansions of ``sum_{k=lo}^{n} term`` for ``n = 1..d`` from the summand expansion."""
    from .summand import summand_expand

    probe = summand_expand(term, 1).series.normalized()
    lam = probe.start if not probe.is_zero() else 0
    ex = summand_expand(term, lam + orders)
    out = []
    for n in range(1, d + 1):
        total = None
        for k in range(lo, n + 1):
            v = ex.value_series({"k": k, "N": n})
            total = v if total is None else total + v
        from .eps_series import EpsSeries

        total = total if total is not None else EpsSeries.zero(lam, lam + orders)
        out.append((n, total.map(lambda c: c.with_var("N"))))
    return out


def _load_system(path: str):
    from .operators import system_from_dict

    return system_from_dict(_load_json(path))


def cmd_ode_to_rec(args) -> int:
    from .operators import ode_to_rec

    rec = ode_to_rec(_load_system(args.sys))
    lines = rec.equation_strings()
    _emit(args, {"equations": lines, "valid_from": list(rec.valid_from)}, "\n".join(lines))
    return EXIT_OK


def cmd_uncouple(args) -> int:
    from .coupled import uncouple

    form = uncouple(_load_system(args.sys), args.pivot)
    report = {
        "pivot": form.pivot,
        "scalar_operator": form.scalar_op.to_string(form.pivot),
        "description": form.describe().splitlines(),
    }
    _emit(args, report, form.describe())
    return EXIT_OK


def _system_ivs(path: str) -> dict:
    from .eps_series import parse_series

    data = _load_json(path)
    out = {}
    for name, vals in data.items():
        if isinstance(vals, dict):
            out[name] = {int(n): parse_series(s) for n, s in vals.items()}
        else:
            out[name] = [parse_series(s) for s in vals]
    return out


def cmd_solve_system(args) -> int:
    from .coupled import solve_coupled_system

    sol = solve_coupled_system(_load_system(args.sys), _system_ivs(args.iv), args.orders, args.pivot)
    residuals = {str(i): (None if r is None else {"zero": r.is_zero(), "series": str(r)}) for i, r in sol.residuals.items()}
    certified = all(r is not None and r["zero"] for r in residuals.values())
    report = {
        "series": {k: str(v) for k, v in sol.items()},
        "clusters": [list(c) for c in sol.plan.clusters],
        "residuals": residuals,
        "certified": certified,
        "interpretation": list(sol.interpretation),
    }
    if args.outdir:
        out = Path(args.outdir)
        out.mkdir(parents=True, exist_ok=True)
        for k, v in sol.items():
            (out / f"{k}.series").write_text(str(v) + "\n", encoding="utf-8")
        (out / "residuals.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    lines = [f"{k}(N) = {v}" for k, v in sol.items()]
    lines.append("residual certificate: " + ("all equations vanish" if certified else "FAILED"))
    _emit(args, report, "\n".join(lines))
    return EXIT_OK if certified else EXIT_FAIL


def cmd_verify(args) -> int:
    from .verify import numeric_verify

    grid = _grid(args.grid)
    eps_vals = [Fraction(e) for e in args.eps.split(",")] if args.eps else None
    symbolic = None
    if args.op:
        from .operators import _split_equation, parse_operator
        from .sum_expr import parse_sum_expr

        op_text, eq_rhs = _split_equation(_text_or_file(args.op))
        rhs_text = _text_or_file(args.rhs) if args.rhs else eq_rhs
        if rhs_text is None:
            raise UsageError("--rhs is required unless --op is an equation")
        op = parse_operator(op_text, args.fname)
        sol = parse_sum_expr(_text_or_file(args.lhs))
        rhs = parse_sum_expr(rhs_text)
        applied = op.apply(sol)
        symbolic = applied == rhs
        rep = numeric_verify(applied, rhs, grid, eps_vals, args.digits)
    else:
        if not args.rhs:
            raise UsageError("--rhs is required")
        lhs = _operand(_text_or_file(args.lhs))
        rhs = _operand(_text_or_file(args.rhs))
        rep = numeric_verify(lhs, rhs, grid, eps_vals, args.digits)
    passed = rep.passed and symbolic is not False
    report = rep.as_dict()
    report["symbolic"] = symbolic
    report["passed"] = passed
    text = rep.summary()
    if symbolic is not None:
        text = ("symbolic residual: zero\n" if symbolic else "symbolic residual: NONZERO\n") + text
    if not passed and not rep.passed:
        text += "\n" + "\n".join(f"  N={n} ep={e}: {a} vs {b}" for n, e, a, b, _ in rep.rows[:10] if a is not None)
    _emit(args, report, text)
    return EXIT_OK if passed else EXIT_FAIL


def _operand(text: str):
    from .eps_series import parse_series
    from .sum_expr import parse_sum_expr

    if "O[ep]" in text or "ep" in text.replace("eps", ""):
        return parse_series(text)
    return parse_sum_expr(text)


def cmd_reproduce(args) -> int:
    from .fixtures import FAIL, run_fixtures

    try:
        rows = run_fixtures(args.only)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    width = max(len(r[0]) for r in rows) if rows else 0
    lines = [f"{status:<12} {name:<{width}}  {check}" + (f"  [{detail}]" if detail and status != "PASS" else "") for name, status, check, detail, _ in rows]
    failed = sum(1 for r in rows if r[1] == FAIL)
    lines.append(f"{len(rows)} checks, {failed} failed")
    report = {"rows": [{"fixture": n, "status": s, "check": c, "detail": d} for n, s, c, d, _ in rows], "failed": failed}
    _emit(args, report, "\n".join(lines))
    return EXIT_OK if not failed else EXIT_FAIL


_JOB_COMMANDS = ("expand-sum", "zeilberger", "solve-rec", "eps-expand", "ode-to-rec", "uncouple", "solve-system", "verify", "reproduce")
_PATH_OPTIONS = {"sys", "outdir", "output"}


def job_argv(job: dict, base: Path) -> list:
    """Translate ``{"command", "args", "options"}`` into an argument vector.

    File references (``@file`` values and path options) are resolved
    relative to the directory of the job file.
    """
    cmd = job.get("command")
    if cmd not in _JOB_COMMANDS:
        raise UsageError(f"job command must be one of {', '.join(_JOB_COMMANDS)}; got {cmd!r}")
    unknown = set(job) - {"command", "args", "options"}
    if unknown:
        raise UsageError(f"unknown job fields: {', '.join(sorted(unknown))}")

    def resolve(key, value):
        text = str(value)
        if text.startswith("@") and text != "@-":
            return "@" + str(base / text[1:])
        if key in _PATH_OPTIONS or (key == "iv" and cmd == "solve-system"):
            return str(base / text)
        return text

    argv = [cmd] + [resolve(None, a) for a in job.get("args", [])]
    for key, value in sorted(job.get("options", {}).items()):
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif value is False or value is None:
            continue
        elif isinstance(value, list):
            argv += [flag] + [resolve(key, v) for v in value]
        else:
            argv += [flag, resolve(key, value)]
    return argv


def cmd_run(args) -> int:
    job = _load_json(args.job)
    return main(job_argv(job, Path(args.job).resolve().parent))


# -- argument parsing ---------------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    from .verify import default_dps

    p = argparse.ArgumentParser(prog="epsexpand", description="Epsilon expansions in terms of nested sums.")
    sub = p.add_subparsers(dest="command", metavar="command")

    def common(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        sp.add_argument("-o", "--output", help="also write the report to this file")

    sp = sub.add_parser("expand-sum", help="expand a Gamma-product summand in ep")
    sp.add_argument("term", help="term text or @file")
    sp.add_argument("--orders", type=int, default=3)
    sp.add_argument("--var", default="k")
    sp.add_argument("--relative-to", help="ep-free term to divide out, e.g. (-1)^(k+1)*Binomial[N,k]")
    common(sp)
    sp.set_defaults(func=cmd_expand_sum)

    sp = sub.add_parser("zeilberger", help="creative telescoping recurrence for sum_k term")
    sp.add_argument("term", help="term text or @file")
    sp.add_argument("--dmax", type=int, default=3)
    sp.add_argument("--rhs-orders", type=int, help="also expand the inhomogeneous part up to O(ep^n)")
    sp.add_argument("--lower", type=int, default=1, help="lower summation bound")
    common(sp)
    sp.set_defaults(func=cmd_zeilberger)

    sp = sub.add_parser("solve-rec", help="solve an ep-free recurrence in nested sums")
    sp.add_argument("rec", nargs="?", help="'op = rhs' text or @file")
    sp.add_argument("--op", help="operator (or 'op = rhs') text or @file, instead of the positional form")
    sp.add_argument("--rhs", help="right-hand side text or @file; overrides one given in the equation")
    sp.add_argument("--iv", help="initial values '1=...;2=...' (or 'F(1) = ...') or @file")
    sp.add_argument("--fname", default="F")
    common(sp)
    sp.set_defaults(func=cmd_solve_rec)

    sp = sub.add_parser("eps-expand", help="ep-expansion from a recurrence (or a definite sum)")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--rec", help="'op = series' (or just the operator) text or @file")
    src.add_argument("--sum", help="summand of sum_{k=lower}^{N}; recurrence and initial values are derived")
    sp.add_argument("--rhs", help="right-hand side series text or @file (with --rec)")
    sp.add_argument("--iv", help="initial values 'F(1) = ...' or @file")
    sp.add_argument("--orders", type=int, default=3)
    sp.add_argument("--fname", default="F")
    sp.add_argument("--lower", type=int, default=1)
    sp.add_argument("--dmax", type=int, default=3)
    common(sp)
    sp.set_defaults(func=cmd_eps_expand)

    sp = sub.add_parser("ode-to-rec", help="coefficient comparison for a differential system")
    sp.add_argument("--sys", required=True, help="system JSON file")
    common(sp)
    sp.set_defaults(func=cmd_ode_to_rec)

    sp = sub.add_parser("uncouple", help="scalar recurrence and back-substitution rules")
    sp.add_argument("--sys", required=True)
    sp.add_argument("--pivot", default="auto")
    common(sp)
    sp.set_defaults(func=cmd_uncouple)

    sp = sub.add_parser("solve-system", help="ep-expansions of all unknowns of a coupled system")
    sp.add_argument("--sys", required=True)
    sp.add_argument("--iv", required=True, help="JSON: {unknown: {n: series}}")
    sp.add_argument("--orders", type=int, default=2)
    sp.add_argument("--pivot", default="auto")
    sp.add_argument("--outdir", help="directory for per-unknown series files and residuals.json")
    common(sp)
    sp.set_defaults(func=cmd_solve_system)

    sp = sub.add_parser("verify", help="high-precision comparison of two sides")
    sp.add_argument("--lhs", required=True, help="expression/series or @file (the solution when --op is given)")
    sp.add_argument("--rhs", help="expression/series or @file; optional when --op is an equation")
    sp.add_argument("--op", help="operator or 'op = rhs' text or @file; checks op(lhs) = rhs")
    sp.add_argument("--grid", default="1..20")
    sp.add_argument("--eps", help="comma-separated rational ep values for series")
    sp.add_argument("--digits", type=int, default=default_dps())
    sp.add_argument("--fname", default="F")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("reproduce", help="run the worked-example regression fixtures")
    sp.add_argument("--only", nargs="+", help="fixture groups or names")
    common(sp)
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("run", help="execute a JSON job file {command, args, options}")
    sp.add_argument("job")
    sp.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"epsexpand {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"epsexpand {args.command}: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        mod = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"epsexpand {args.command}: {mod}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
