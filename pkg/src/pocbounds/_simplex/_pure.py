"""Pure-Python (numpy) dense two-phase simplex.

Reference implementation of the kernel contract; the Cython module
``_core`` implements the identical algorithm in C loops and is preferred at
import time when compiled.  Equality-form problems only::

    min / max  c . x   subject to  A x = b,  x >= 0

with b >= 0 (rows are flipped internally otherwise).  Pivot selection is
Bland's rule throughout -- entering column is the lowest-index structural
column with negative reduced cost, leaving row breaks ratio ties on the
lowest basic-variable index -- which rules out cycling.  Artificial columns
are never materialized: once an artificial leaves the basis it never
re-enters, so only structural columns are tableau-resident.

Returns ``(status, value)`` with status 0 = optimal, 1 = infeasible,
2 = unbounded (impossible for the probability polytopes built here; reported
rather than asserted).
"""

from __future__ import annotations

import numpy as np

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2

_PIVOT_EPS = 1e-9
_FEAS_TOL = 1e-7


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    # kill residual round-off in the pivot column
    T[:, j] = 0.0
    T[r, j] = 1.0


def _bland_iterate(T: np.ndarray, basis: np.ndarray, nvars: int) -> int:
    """Run Bland-rule pivots until optimal (0) or unbounded (2)."""
    m = len(basis)
    while True:
        obj = T[m, :nvars]
        candidates = np.nonzero(obj < -_PIVOT_EPS)[0]
        if candidates.size == 0:
            return OPTIMAL
        j = int(candidates[0])
        col = T[:m, j]
        rhs = T[:m, nvars]
        rows = np.nonzero(col > _PIVOT_EPS)[0]
        if rows.size == 0:
            return UNBOUNDED
        ratios = rhs[rows] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12]
        r = int(tied[np.argmin(basis[tied])])
        _pivot(T, r, j)
        basis[r] = j


def solve_standard_form(A, b, c, maximize: bool = False) -> tuple[int, float]:
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).copy()
    c = np.asarray(c, dtype=np.float64)
    m, nvars = A.shape

    neg = b < 0
    if neg.any():
        A = A.copy()
        A[neg] *= -1.0
        b[neg] *= -1.0

    # tableau: m constraint rows + 1 objective row; structural columns + rhs
    T = np.zeros((m + 1, nvars + 1))
    T[:m, :nvars] = A
    T[:m, nvars] = b
    # artificials are basic: encode as nvars + row index (highest Bland order)
    basis = np.arange(nvars, nvars + m, dtype=np.int64)

    # phase 1: minimize sum of artificials, i.e. reduce their unit costs
    T[m, :] = -T[:m, :].sum(axis=0)
    status = _bland_iterate(T, basis, nvars)
    if status != OPTIMAL:
        return status, 0.0
    if -T[m, nvars] > _FEAS_TOL:
        return INFEASIBLE, 0.0

    # drive leftover artificials out; rows with no structural pivot are redundant
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] < nvars:
            continue
        row = T[r, :nvars]
        pivots = np.nonzero(np.abs(row) > _PIVOT_EPS)[0]
        if pivots.size:
            j = int(pivots[0])
            _pivot(T, r, j)
            basis[r] = j
        else:
            keep[r] = False
    if not keep.all():
        T = np.vstack([T[:m][keep], T[m]])
        basis = basis[keep]
        m = len(basis)

    # phase 2
    T[m, :] = 0.0
    T[m, :nvars] = -c if maximize else c
    for r in range(m):
        coef = T[m, basis[r]]
        if coef != 0.0:
            T[m] -= coef * T[r]
    status = _bland_iterate(T, basis, nvars)
    if status != OPTIMAL:
        return status, 0.0
    value = -T[m, nvars]
    return OPTIMAL, (-value if maximize else value)
