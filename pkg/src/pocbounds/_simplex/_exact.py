"""Exact-rational two-phase simplex over ``fractions.Fraction``.

Same algorithm as the float kernels but with exact arithmetic and exact
comparisons (no tolerances), so the returned optimum is the true rational
optimum whenever A, b, c are rational.  Used to certify that verification
results are not artifacts of solver tolerance; orders of magnitude slower
than the float kernels, so keep it to small problems and count-form data.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _pivot(T: list[list[Fraction]], r: int, j: int) -> None:
    piv = T[r][j]
    T[r] = [v / piv for v in T[r]]
    row_r = T[r]
    for i, row in enumerate(T):
        if i == r:
            continue
        factor = row[j]
        if factor:
            T[i] = [v - factor * w for v, w in zip(row, row_r)]


def _bland_iterate(T: list[list[Fraction]], basis: list[int], nvars: int) -> int:
    m = len(basis)
    while True:
        obj = T[m]
        j = next((idx for idx in range(nvars) if obj[idx] < _ZERO), -1)
        if j < 0:
            return OPTIMAL
        r = -1
        best = None
        for i in range(m):
            colv = T[i][j]
            if colv > _ZERO:
                ratio = T[i][nvars] / colv
                if best is None or ratio < best or (ratio == best and basis[i] < basis[r]):
                    r, best = i, ratio
        if r < 0:
            return UNBOUNDED
        _pivot(T, r, j)
        basis[r] = j


def solve_standard_form_exact(
    A: Sequence[Sequence[Fraction]],
    b: Sequence[Fraction],
    c: Sequence[Fraction],
    maximize: bool = False,
) -> tuple[int, Fraction]:
    rows = [[Fraction(v) for v in row] for row in A]
    rhs = [Fraction(v) for v in b]
    cost = [Fraction(v) for v in c]
    m, nvars = len(rows), len(cost)

    for i in range(m):
        if rhs[i] < _ZERO:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]

    T = [rows[i] + [rhs[i]] for i in range(m)]
    T.append([-sum(T[i][j] for i in range(m)) for j in range(nvars + 1)])
    basis = list(range(nvars, nvars + m))

    status = _bland_iterate(T, basis, nvars)
    if status != OPTIMAL:
        return status, _ZERO
    if -T[m][nvars] != _ZERO:
        return INFEASIBLE, _ZERO

    # purge artificial basics, drop redundant rows
    drop = []
    for r in range(m):
        if basis[r] < nvars:
            continue
        j = next((idx for idx in range(nvars) if T[r][idx] != _ZERO), -1)
        if j >= 0:
            _pivot(T, r, j)
            basis[r] = j
        else:
            drop.append(r)
    for r in reversed(drop):
        del T[r]
        del basis[r]
    m = len(basis)

    sign = -_ONE if maximize else _ONE
    T[m] = [sign * v for v in cost] + [_ZERO]
    for r in range(m):
        coef = T[m][basis[r]]
        if coef:
            T[m] = [v - coef * w for v, w in zip(T[m], T[r])]

    status = _bland_iterate(T, basis, nvars)
    if status != OPTIMAL:
        return status, _ZERO
    value = -T[m][nvars]
    return OPTIMAL, (-value if maximize else value)
