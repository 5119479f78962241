# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled dense two-phase simplex (hot kernel).

Same contract and pivot rules as the pure fallback in ``_pure.py``: equality
form, b >= 0 after row flips, Bland's rule, artificial columns kept implicit.
The per-pivot row operations dominate oracle verification runs, hence the C
loops.
"""

import numpy as np

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2

cdef int _OPT = 0
cdef int _INF = 1
cdef int _UNB = 2

cdef double PIVOT_EPS = 1e-9
cdef double FEAS_TOL = 1e-7


cdef void _pivot(double[:, ::1] T, Py_ssize_t nrows, Py_ssize_t ncols,
                 Py_ssize_t r, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t i, col
    cdef double piv = T[r, j]
    cdef double factor
    for col in range(ncols):
        T[r, col] /= piv
    for i in range(nrows):
        if i == r:
            continue
        factor = T[i, j]
        if factor != 0.0:
            for col in range(ncols):
                T[i, col] -= factor * T[r, col]
    for i in range(nrows):
        T[i, j] = 0.0
    T[r, j] = 1.0


cdef int _bland_iterate(double[:, ::1] T, long long[::1] basis,
                        Py_ssize_t m, Py_ssize_t nvars) noexcept nogil:
    cdef Py_ssize_t i, j, r
    cdef double ratio, best, colv
    cdef long long best_basis
    while True:
        j = -1
        for i in range(nvars):
            if T[m, i] < -PIVOT_EPS:
                j = i
                break
        if j < 0:
            return _OPT
        r = -1
        best = 0.0
        best_basis = 0
        for i in range(m):
            colv = T[i, j]
            if colv > PIVOT_EPS:
                ratio = T[i, nvars] / colv
                if r < 0 or ratio < best - 1e-12 or (
                    ratio <= best + 1e-12 and basis[i] < best_basis
                ):
                    r = i
                    best = ratio
                    best_basis = basis[i]
        if r < 0:
            return _UNB
        _pivot(T, m + 1, nvars + 1, r, j)
        basis[r] = j


def solve_standard_form(A_in, b_in, c_in, bint maximize=False):
    """min/max c.x s.t. Ax = b, x >= 0 -> (status, optimal value)."""
    A = np.ascontiguousarray(A_in, dtype=np.float64)
    b = np.asarray(b_in, dtype=np.float64).copy()
    c = np.ascontiguousarray(c_in, dtype=np.float64)
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t nvars = A.shape[1]

    neg = b < 0
    if neg.any():
        A = A.copy()
        A[neg] *= -1.0
        b[neg] *= -1.0

    T_np = np.zeros((m + 1, nvars + 1))
    T_np[:m, :nvars] = A
    T_np[:m, nvars] = b
    T_np[m, :] = -T_np[:m, :].sum(axis=0)
    basis_np = np.arange(nvars, nvars + m, dtype=np.int64)

    cdef double[:, ::1] T = T_np
    cdef long long[::1] basis = basis_np

    cdef int status = _bland_iterate(T, basis, m, nvars)
    if status != OPTIMAL:
        return status, 0.0
    if -T[m, nvars] > FEAS_TOL:
        return INFEASIBLE, 0.0

    # purge artificial basics; structural-free rows are redundant
    cdef Py_ssize_t r, col
    cdef Py_ssize_t jpick
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] < nvars:
            continue
        jpick = -1
        for col in range(nvars):
            if T[r, col] > PIVOT_EPS or T[r, col] < -PIVOT_EPS:
                jpick = col
                break
        if jpick >= 0:
            _pivot(T, m + 1, nvars + 1, r, jpick)
            basis[r] = jpick
        else:
            keep[r] = False
    if not keep.all():
        T_np = np.vstack([T_np[:m][keep], T_np[m]])
        basis_np = basis_np[keep]
        m = basis_np.shape[0]
        T = T_np
        basis = basis_np

    T_np[m, :] = 0.0
    T_np[m, :nvars] = -c if maximize else c
    cdef double coef
    for r in range(m):
        coef = T[m, basis[r]]
        if coef != 0.0:
            for col in range(nvars + 1):
                T[m, col] -= coef * T[r, col]

    status = _bland_iterate(T, basis, m, nvars)
    if status != OPTIMAL:
        return status, 0.0
    cdef double value = -T[m, nvars]
    return OPTIMAL, (-value if maximize else value)
