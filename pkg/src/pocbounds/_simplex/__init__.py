"""Simplex kernel selection.

Prefers the compiled Cython kernel, falling back to the numpy implementation
with identical semantics when the extension is unavailable.  Set
``POCBOUNDS_PURE=1`` before import to force the fallback (used by the
benchmark and the kernel-equivalence tests).
"""

import os

from ._exact import solve_standard_form_exact

if os.environ.get("POCBOUNDS_PURE"):
    from ._pure import solve_standard_form

    BACKEND = "pure-python"
else:
    try:
        from ._core import solve_standard_form  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from ._pure import solve_standard_form  # type: ignore[no-redef]

        BACKEND = "pure-python"

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2

__all__ = [
    "solve_standard_form",
    "solve_standard_form_exact",
    "BACKEND",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
]
