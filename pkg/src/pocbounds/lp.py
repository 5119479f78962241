"""Exact verification oracle: response-type linear programs.

The latent variable behind an (experimental, observational) pair is the
unit's response type r -- the map assigning each treatment the outcome the
unit would exhibit under it.  Over cells (r, t) with t the realized
treatment, any query probability is a 0/1-weighted sum of cell masses, and
the data pin the masses through linear equalities:

    sum of all cells                              = 1
    sum over {r : r[t'] = s}, all t               = exp[t'][s]   (all t', s)
    sum over {r : r[t] = s} at realized t         = obs[t][s]    (all t,  s)

Minimizing/maximizing the query indicator over this polytope yields provably
tight bounds, which is what the closed forms are verified against.  Problem
size is O^T * T variables (n^(n+1) when square), hence the dimension cap.

Response types are enumerated lexicographically with the treatment-1 outcome
varying slowest; cell (r, t) maps to variable r_index * T + (t - 1).
Constraint rows are ordered: normalization, experimental rows in (t, s)
row-major order, observational rows likewise.

Solvers: a dense two-phase simplex with Bland's rule, compiled when the
extension is available (see ``pocbounds._simplex``), and an exact
Fraction-arithmetic variant so that tightness checks cannot be confounded by
solver tolerance.  Zero right-hand sides force their variables to zero and
are eliminated before solving, which collapses padded (squarified) problems
back to their rectangular size.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from . import _simplex
from .bounds import Interval
from .dist import Dataset, squarify
from .errors import (
    DimensionCapExceeded,
    IndexOutOfRange,
    Infeasible,
    Unbounded,
    ZeroDenominator,
)
from .query import Query

DEFAULT_CAP = 4
_ZERO_RHS_TOL = 1e-13

MIN = "min"
MAX = "max"


def response_types(n_treatments: int, n_outcomes: int) -> np.ndarray:
    """All outcome assignments, one row per type (0-based outcomes)."""
    idx = np.arange(n_outcomes**n_treatments)
    cols = [
        (idx // n_outcomes ** (n_treatments - 1 - t)) % n_outcomes
        for t in range(n_treatments)
    ]
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class LpProblem:
    """One sense of the oracle LP; all constraint coefficients are 0/1."""

    n_treatments: int
    n_outcomes: int
    A: np.ndarray          # uint8, (rows, num_vars)
    b: np.ndarray          # float64, (rows,)
    objective: np.ndarray  # uint8, (num_vars,)
    sense: str
    exact_b: Optional[tuple[Fraction, ...]] = None

    @property
    def num_vars(self) -> int:
        return self.A.shape[1]

    @property
    def num_constraints(self) -> int:
        return self.A.shape[0]


def _check_query_indices(ds: Dataset, q: Query) -> None:
    T, O = ds.dims.n_treatments, ds.dims.n_outcomes
    for a in q.atoms:
        if a.treatment > T:
            raise IndexOutOfRange("treatment", a.treatment, T)
        if a.outcome > O:
            raise IndexOutOfRange("outcome", a.outcome, O)
    if q.x_evidence is not None and q.x_evidence > T:
        raise IndexOutOfRange("treatment", q.x_evidence, T)
    if q.y_evidence is not None and q.y_evidence > O:
        raise IndexOutOfRange("outcome", q.y_evidence, O)


def _constraint_system(ds: Dataset) -> tuple[np.ndarray, np.ndarray, Optional[tuple]]:
    T, O = ds.dims.n_treatments, ds.dims.n_outcomes
    R = response_types(T, O)
    ntypes = len(R)
    nvars = ntypes * T
    rows = 1 + 2 * T * O
    A = np.zeros((rows, nvars), dtype=np.uint8)
    b = np.zeros(rows)
    A[0, :] = 1
    b[0] = 1.0

    exact: Optional[list] = [Fraction(1)] if ds.is_exact else None
    row = 1
    for t in range(T):
        for s in range(O):
            mask = R[:, t] == s
            block = A[row].reshape(ntypes, T)
            block[mask, :] = 1
            b[row] = ds.exp[t, s]
            if exact is not None:
                exact.append(ds.exact_exp[t][s])
            row += 1
    for t in range(T):
        for s in range(O):
            mask = R[:, t] == s
            block = A[row].reshape(ntypes, T)
            block[mask, t] = 1
            b[row] = ds.obs[t, s]
            if exact is not None:
                exact.append(ds.exact_obs[t][s])
            row += 1
    return A, b, tuple(exact) if exact is not None else None


def _objective_vector(ds: Dataset, q: Query) -> np.ndarray:
    T, O = ds.dims.n_treatments, ds.dims.n_outcomes
    R = response_types(T, O)
    conj = np.ones(len(R), dtype=bool)
    for a in q.atoms:
        conj &= R[:, a.treatment - 1] == a.outcome - 1
    cells = np.repeat(conj[:, None], T, axis=1)
    if q.x_evidence is not None:
        keep = np.zeros(T, dtype=bool)
        keep[q.x_evidence - 1] = True
        cells &= keep[None, :]
    if q.y_evidence is not None:
        cells &= R == q.y_evidence - 1  # realized outcome under realized treatment
    return cells.reshape(-1).astype(np.uint8)


def build_lp(ds: Dataset, q: Query, sense: str, cap: int = DEFAULT_CAP) -> LpProblem:
    """Assemble one sense of the oracle LP for a (possibly rectangular) dataset."""
    if sense not in (MIN, MAX):
        raise ValueError(f"sense must be {MIN!r} or {MAX!r}")
    side = ds.dims.side
    if side > cap:
        raise DimensionCapExceeded(side, cap)
    _check_query_indices(ds, q)
    A, b, exact_b = _constraint_system(ds)
    return LpProblem(
        n_treatments=ds.dims.n_treatments,
        n_outcomes=ds.dims.n_outcomes,
        A=A,
        b=b,
        objective=_objective_vector(ds, q),
        sense=sense,
        exact_b=exact_b,
    )


def _reduce(A: np.ndarray, obj: np.ndarray, zero_rows: np.ndarray):
    """Kill variables forced to zero by zero-rhs rows, then emptied rows.

    Returns the reduced coefficient matrix, the reduced objective, the mask of
    surviving non-zero-rhs rows, and the row-support mask within them (rows
    losing all variables are dropped; a dropped row with positive mass is the
    caller's infeasibility signal).
    """
    dead_vars = A[zero_rows].any(axis=0)
    keep_vars = ~dead_vars
    rows_kept = ~zero_rows
    A_mid = A[rows_kept][:, keep_vars]
    support = A_mid.any(axis=1)
    return A_mid[support], obj[keep_vars], rows_kept, support


def solve(lp: LpProblem, exact: bool = False) -> Union[float, Fraction]:
    """Optimal objective value, exact Fraction when ``exact`` is set.

    Exact mode is meaningful when the problem carries exact rational data
    (count-form datasets populate ``exact_b``).  Float right-hand sides are
    otherwise converted verbatim, and independently rounded floats are
    typically inconsistent as exact equalities -- expect ``Infeasible`` for
    such inputs rather than a silently perturbed answer.
    """
    if exact:
        return _solve_exact(lp)
    zero_rows = lp.b <= _ZERO_RHS_TOL
    A, obj, rows_kept, support = _reduce(lp.A, lp.objective, zero_rows)
    b_mid = lp.b[rows_kept]
    if (b_mid[~support] > _ZERO_RHS_TOL).any():
        raise Infeasible("a constraint lost all variables but has positive mass")
    status, value = _simplex.solve_standard_form(
        A.astype(np.float64), b_mid[support], obj.astype(np.float64),
        maximize=(lp.sense == MAX),
    )
    if status == _simplex.INFEASIBLE:
        raise Infeasible("LP infeasible: data admit no structural causal model")
    if status == _simplex.UNBOUNDED:
        raise Unbounded("bounded polytope reported unbounded (numerical failure)")
    return float(value)


def _solve_exact(lp: LpProblem) -> Fraction:
    b = lp.exact_b
    if b is None:
        b = tuple(Fraction(v) for v in lp.b.tolist())
    zero_rows = np.array([v == 0 for v in b], dtype=bool)
    A, obj, rows_kept, support = _reduce(lp.A, lp.objective, zero_rows)
    b_mid = [v for v, kept in zip(b, rows_kept) if kept]
    if any(v != 0 for v, s in zip(b_mid, support) if not s):
        raise Infeasible("a constraint lost all variables but has positive mass")
    b_final = [v for v, s in zip(b_mid, support) if s]
    rows = [[Fraction(int(v)) for v in row] for row in A]
    cost = [Fraction(int(v)) for v in obj]
    status, value = _simplex.solve_standard_form_exact(
        rows, b_final, cost, maximize=(lp.sense == MAX)
    )
    if status == _simplex.INFEASIBLE:
        raise Infeasible("LP infeasible: data admit no structural causal model")
    if status == _simplex.UNBOUNDED:
        raise Unbounded("bounded polytope reported unbounded")
    return value


def _evidence_probability(ds: Dataset, q: Query) -> float:
    if q.x_evidence is not None and q.y_evidence is not None:
        return float(ds.obs[q.x_evidence - 1, q.y_evidence - 1])
    if q.x_evidence is not None:
        return float(ds.obs[q.x_evidence - 1].sum())
    return float(ds.obs[:, q.y_evidence - 1].sum())


def oracle_bounds(
    ds: Dataset,
    q: Query,
    cap: int = DEFAULT_CAP,
    exact: bool = False,
    squarify_first: bool = True,
) -> Interval:
    """Tight [min, max] for the query by solving both LP senses.

    ``squarify_first=False`` runs the LP on the raw rectangular formulation,
    used to check that the square embedding leaves the optima unchanged.
    Conditional queries divide by the evidence probability.
    """
    target = squarify(ds) if squarify_first else ds
    base = build_lp(target, q, MIN, cap)
    lo = solve(base, exact)
    hi = solve(replace(base, sense=MAX), exact)
    if q.conditional:
        denom = _evidence_probability(target, q)
        if denom <= 0.0:
            raise ZeroDenominator("conditional query with zero evidence probability")
        lo, hi = float(lo) / denom, float(hi) / denom
    lo = min(max(float(lo), 0.0), 1.0)
    hi = min(max(float(hi), 0.0), 1.0)
    return Interval(lo, hi)


def format_lp_text(lp: LpProblem) -> str:
    """Plain-text dump (one constraint per line) for external cross-checks."""
    def rhs_str(i: int) -> str:
        if lp.exact_b is not None:
            return str(lp.exact_b[i])
        return repr(float(lp.b[i]))

    lines = [
        f"# response-type LP: {lp.n_treatments} treatments x {lp.n_outcomes} outcomes, "
        f"{lp.num_vars} vars, {lp.num_constraints} equality rows",
        f"{lp.sense}: " + " + ".join(f"q{j}" for j in np.nonzero(lp.objective)[0]),
    ]
    for i in range(lp.num_constraints):
        terms = " + ".join(f"q{j}" for j in np.nonzero(lp.A[i])[0])
        lines.append(f"{terms} = {rhs_str(i)}")
    lines.append("q_j >= 0 for all j")
    return "\n".join(lines) + "\n"
