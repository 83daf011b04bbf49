from __future__ import annotations

import os
import subprocess
import sys

import pytest

SCRIPT = """
from epsexpand import BACKEND
from epsexpand.core_algebra import parse_polynomial, parse_rational, poly_gcd
from epsexpand.fixtures import EPS_IVS, EPS_OP, EPS_RHS
from epsexpand.eps_series import parse_series
from epsexpand.eps_solver import bootstrap_expansion
from epsexpand.operators import parse_operator
print(BACKEND)
print(parse_rational("(N^2-1)/(N^2+2*N+1) + ep/(N-1)"))
print(poly_gcd(parse_polynomial("(N+1)*(N-ep)^2"), parse_polynomial("(N-ep)*(N+3)")))
print(bootstrap_expansion(parse_operator(EPS_OP), parse_series(EPS_RHS), [parse_series(s) for s in EPS_IVS], 3))
"""


def run_with(backend: str) -> subprocess.CompletedProcess:
    env = dict(os.environ, EPSEXPAND_BACKEND=backend)
    return subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True, env=env)


def test_backends_give_identical_output():
    flint, pure = run_with("flint"), run_with("pure")
    if flint.returncode and "flint" in flint.stderr and "No module" in flint.stderr:
        pytest.skip("python-flint not installed")
    assert flint.returncode == 0, flint.stderr
    assert pure.returncode == 0, pure.stderr
    fl, pl = flint.stdout.splitlines(), pure.stdout.splitlines()
    assert (fl[0], pl[0]) == ("flint", "pure")
    assert fl[1:] == pl[1:]


def test_unknown_backend_is_an_import_error():
    proc = run_with("fortran")
    assert proc.returncode != 0
    assert "ImportError" in proc.stderr and "EPSEXPAND_BACKEND" in proc.stderr
