"""Import-time selection of the polynomial kernel.

``EPSEXPAND_BACKEND`` may be ``flint`` (compiled FLINT core) or ``pure``
(sympy sparse polynomials).  Without the variable the compiled core is used
whenever python-flint imports.
"""

from __future__ import annotations

import os

_choice = os.environ.get("EPSEXPAND_BACKEND", "").strip().lower()

if _choice == "pure":
    from . import _pure_backend as B
elif _choice == "flint":
    from . import _flint_backend as B
elif _choice:
    raise ImportError(f"unknown EPSEXPAND_BACKEND {_choice!r} (expected 'flint' or 'pure')")
else:
    try:
        from . import _flint_backend as B
    except ImportError:  # pragma: no cover - depends on the environment
        from . import _pure_backend as B

NAME = B.NAME
VARS = B.NAMES
