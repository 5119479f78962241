"""Experimental/observational input distributions.

A :class:`Dataset` pairs the two inputs every bound in this package consumes:

* ``exp[t][o]`` -- the causal effect P(Y = y_o | do(X = x_t)); each row is a
  distribution over outcomes.
* ``obs[t][o]`` -- the observational joint P(X = x_t, Y = y_o); the whole
  matrix sums to 1.

Validation enforces, cell by cell, the feasibility constraint the two data
sources must satisfy to be generated by one structural causal model:

    obs[t][o] <= exp[t][o] <= 1 - P(x_t) + obs[t][o]

``squarify`` embeds a rectangular dataset into a square one of side
max(n_treatments, n_outcomes) by zero/unit padding; the embedding leaves every
bound and every LP optimum unchanged, which is what lets the rest of the
package assume equal treatment and outcome cardinalities.

Indices are 1-based everywhere in the public API and 0-based in the stored
matrices.  All values are immutable after construction.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CompatibilityViolation,
    EntryRangeViolation,
    IndexOutOfRange,
    JointSumViolation,
    RowSumViolation,
    ShapeMismatch,
)

DEFAULT_TOL = 1e-9

ExactMatrix = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class Dims:
    n_treatments: int
    n_outcomes: int

    def __post_init__(self):
        if self.n_treatments < 2 or self.n_outcomes < 2:
            raise ShapeMismatch(
                f"need at least 2 treatments and 2 outcomes, got "
                f"{self.n_treatments}x{self.n_outcomes}"
            )

    @property
    def side(self) -> int:
        """Side length of the square embedding."""
        return max(self.n_treatments, self.n_outcomes)

    @property
    def is_square(self) -> bool:
        return self.n_treatments == self.n_outcomes


@dataclass(frozen=True)
class Dataset:
    """Validated experimental + observational distributions.

    ``exact_exp``/``exact_obs`` carry the same matrices as Fractions when the
    dataset was built from integer counts (or explicit rationals); they feed
    the exact-arithmetic LP solver and are preserved by ``squarify``.
    """

    dims: Dims
    exp: np.ndarray
    obs: np.ndarray
    exact_exp: Optional[ExactMatrix] = None
    exact_obs: Optional[ExactMatrix] = None

    def __post_init__(self):
        self.exp.setflags(write=False)
        self.obs.setflags(write=False)

    @property
    def is_exact(self) -> bool:
        return self.exact_exp is not None

    def to_json_dict(self) -> dict:
        return {
            "n_treatments": self.dims.n_treatments,
            "n_outcomes": self.dims.n_outcomes,
            "experimental": self.exp.tolist(),
            "observational": self.obs.tolist(),
            "counts": False,
        }


def _as_matrix(raw, name: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name} must be a 2-d matrix, got shape {arr.shape}")
    return arr


def _clamp_unit(arr: np.ndarray, name: str, tol: float) -> np.ndarray:
    """Clamp entries within tol of [0,1] onto the boundary; reject worse."""
    out = arr.copy()
    bad = (out < -tol) | (out > 1.0 + tol)
    if bad.any():
        t, o = map(int, np.argwhere(bad)[0])
        raise EntryRangeViolation(name, (t + 1, o + 1), float(out[t, o]))
    np.clip(out, 0.0, 1.0, out=out)
    return out


def validate_dataset(
    exp,
    obs,
    tol: float = DEFAULT_TOL,
    exact: Optional[tuple[ExactMatrix, ExactMatrix]] = None,
) -> Dataset:
    """Validate raw matrices and return an immutable :class:`Dataset`.

    Checks, in order: rectangular shape agreement, entry ranges (entries
    within ``tol`` of [0,1] are clamped), experimental row sums, the
    observational grand total, and per-cell compatibility.  The first failing
    invariant raises, naming the offending row/cell and residual.
    """
    exp_m = _as_matrix(exp, "experimental")
    obs_m = _as_matrix(obs, "observational")
    if exp_m.shape != obs_m.shape:
        raise ShapeMismatch(
            f"experimental shape {exp_m.shape} != observational shape {obs_m.shape}"
        )
    dims = Dims(*exp_m.shape)

    exp_m = _clamp_unit(exp_m, "experimental", tol)
    obs_m = _clamp_unit(obs_m, "observational", tol)

    row_sums = exp_m.sum(axis=1)
    for t, s in enumerate(row_sums):
        if abs(s - 1.0) > tol:
            raise RowSumViolation(t + 1, float(s - 1.0))
    total = float(obs_m.sum())
    if abs(total - 1.0) > tol:
        raise JointSumViolation(total - 1.0)

    marginals = obs_m.sum(axis=1)
    for t in range(dims.n_treatments):
        for o in range(dims.n_outcomes):
            lo_resid = obs_m[t, o] - exp_m[t, o]
            if lo_resid > tol:
                raise CompatibilityViolation((t + 1, o + 1), float(lo_resid), "lower")
            hi_resid = exp_m[t, o] - (1.0 - marginals[t] + obs_m[t, o])
            if hi_resid > tol:
                raise CompatibilityViolation((t + 1, o + 1), float(hi_resid), "upper")

    exact_exp = exact_obs = None
    if exact is not None:
        exact_exp, exact_obs = exact
    return Dataset(dims, exp_m, obs_m, exact_exp, exact_obs)


def dataset_from_counts(exp_counts, obs_counts, tol: float = DEFAULT_TOL) -> Dataset:
    """Build a Dataset from integer tables.

    Experimental rows are normalized by their row totals (each row is one arm
    of the trial), observational cells by the grand total.  Exact rational
    matrices are retained alongside the float ones.
    """
    exp_c = np.asarray(exp_counts)
    obs_c = np.asarray(obs_counts)
    if exp_c.ndim != 2 or obs_c.ndim != 2:
        raise ShapeMismatch("count tables must be 2-d")
    if (exp_c < 0).any() or (obs_c < 0).any():
        raise ShapeMismatch("count tables must be nonnegative")

    row_tot = exp_c.sum(axis=1)
    if (row_tot == 0).any():
        raise RowSumViolation(int(np.argmin(row_tot)) + 1, -1.0)
    grand = obs_c.sum()
    if grand == 0:
        raise JointSumViolation(-1.0)

    exact_exp = tuple(
        tuple(Fraction(int(v), int(rt)) for v in row) for row, rt in zip(exp_c, row_tot)
    )
    exact_obs = tuple(tuple(Fraction(int(v), int(grand)) for v in row) for row in obs_c)
    exp_f = [[float(v) for v in row] for row in exact_exp]
    obs_f = [[float(v) for v in row] for row in exact_obs]
    return validate_dataset(exp_f, obs_f, tol, exact=(exact_exp, exact_obs))


def dataset_from_json(doc: dict, tol: float = DEFAULT_TOL) -> Dataset:
    """Decode the JSON dataset format (see README for the schema)."""
    try:
        exp = doc["experimental"]
        obs = doc["observational"]
    except KeyError as e:
        raise ShapeMismatch(f"dataset JSON missing key {e}") from None
    counts = bool(doc.get("counts", False))
    ds = dataset_from_counts(exp, obs, tol) if counts else validate_dataset(exp, obs, tol)
    for key, attr in (("n_treatments", "n_treatments"), ("n_outcomes", "n_outcomes")):
        if key in doc and int(doc[key]) != getattr(ds.dims, attr):
            raise ShapeMismatch(
                f"declared {key}={doc[key]} does not match matrix shape "
                f"{ds.dims.n_treatments}x{ds.dims.n_outcomes}"
            )
    return ds


def load_dataset(path: str | os.PathLike, tol: float = DEFAULT_TOL) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return dataset_from_json(json.load(fh), tol)


def save_dataset(ds: Dataset, path: str | os.PathLike, metadata: Optional[dict] = None) -> None:
    doc = ds.to_json_dict()
    if metadata:
        doc.update(metadata)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def treatment_marginal(ds: Dataset, t: int) -> float:
    """P(x_t), the observational probability of treatment t (1-based)."""
    if not 1 <= t <= ds.dims.n_treatments:
        raise IndexOutOfRange("treatment", t, ds.dims.n_treatments)
    return float(ds.obs[t - 1].sum())


def _pad_exact(mat: ExactMatrix, rows: int, cols: int, unit_col: int = -1) -> ExactMatrix:
    zero, one = Fraction(0), Fraction(1)
    out = [list(r) + [zero] * (cols - len(r)) for r in mat]
    for _ in range(rows - len(mat)):
        row = [zero] * cols
        if unit_col >= 0:
            row[unit_col] = one
        out.append(row)
    return tuple(tuple(r) for r in out)


def squarify(ds: Dataset) -> Dataset:
    """Embed a rectangular dataset into the square equivalence-class form.

    Fewer outcomes than treatments: append all-zero outcome columns (the
    padded outcomes never occur, experimentally or observationally).  Fewer
    treatments than outcomes: append never-taken treatments with P(x_l) = 0
    whose experimental row is a point mass on outcome index m, m being the
    original treatment count.  Square input is returned unchanged; original
    entries are preserved verbatim.
    """
    T, O = ds.dims.n_treatments, ds.dims.n_outcomes
    if T == O:
        return ds
    side = ds.dims.side
    exp = np.zeros((side, side))
    obs = np.zeros((side, side))
    exp[:T, :O] = ds.exp
    obs[:T, :O] = ds.obs
    exact = None
    if O < T:  # pad outcome columns
        if ds.is_exact:
            exact = (_pad_exact(ds.exact_exp, side, side), _pad_exact(ds.exact_obs, side, side))
    else:  # pad treatment rows; unit experimental mass on outcome index T
        exp[T:, T - 1] = 1.0
        if ds.is_exact:
            exact = (
                _pad_exact(ds.exact_exp, side, side, unit_col=T - 1),
                _pad_exact(ds.exact_obs, side, side),
            )
    out = Dataset(Dims(side, side), exp, obs, *(exact or (None, None)))
    return out
