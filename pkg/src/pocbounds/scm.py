"""Ground-truth instance generation and brute-force query evaluation.

An :class:`ScmJoint` is a full joint distribution over cells (response type,
realized treatment) -- everything there is to know about a discrete
treatment/outcome model.  From it one can derive the exact experimental and
observational distributions (which then satisfy the compatibility constraint
by construction) and evaluate any query probability by summing cell masses,
giving the independent oracle every soundness test compares against.

Randomness: ``random_joint`` draws a uniformly random point on the
(n^(n+1) - 1)-simplex by normalizing gamma(alpha) variates (alpha = 1, the
default, means unit-rate exponentials) from ``numpy.random.default_rng``
(PCG64) seeded with the given 64-bit seed.  All outputs are pure functions of
their arguments; batch runs derive per-instance seeds with :func:`mix_seed`,
a documented splitmix64 chain, so any instance is reproducible in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import Dataset, Dims, validate_dataset
from .errors import RejectionBudgetExceeded, ShapeMismatch, ZeroDenominator
from .lp import response_types
from .query import Query

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed via a splitmix64 chain.

    mix_seed(base, n, k, i) is the documented per-instance seed rule used by
    every batch runner in this package.
    """
    acc = 0
    for p in parts:
        acc = _splitmix64((acc ^ (int(p) & _MASK64)) & _MASK64)
    return acc


@dataclass(frozen=True)
class ScmJoint:
    """Joint distribution over (response type, realized treatment) cells.

    ``weights[r, t]`` is the probability of a unit having response type r
    (row r of ``response_types(n_treatments, n_outcomes)``) and self-selecting
    treatment t.  Square for generated instances, rectangular allowed.
    """

    n_treatments: int
    n_outcomes: int
    weights: np.ndarray

    def __post_init__(self):
        expected = (self.n_outcomes**self.n_treatments, self.n_treatments)
        if self.weights.shape != expected:
            raise ShapeMismatch(
                f"weights shape {self.weights.shape} != {expected} for "
                f"{self.n_treatments}x{self.n_outcomes}"
            )
        total = float(self.weights.sum())
        if abs(total - 1.0) > 1e-12 or (self.weights < 0).any():
            raise ShapeMismatch(f"weights must be a distribution (sum {total})")
        self.weights.setflags(write=False)

    @property
    def n(self) -> int:
        return self.n_treatments


def random_joint(n: int, seed: int, alpha: float = 1.0) -> ScmJoint:
    """Uniform (flat Dirichlet) random joint on the n^(n+1) cells."""
    return random_joint_rect(n, n, seed, alpha)


def random_joint_rect(
    n_treatments: int, n_outcomes: int, seed: int, alpha: float = 1.0
) -> ScmJoint:
    if n_treatments < 2 or n_outcomes < 2:
        raise ShapeMismatch("need at least 2 treatments and 2 outcomes")
    rng = np.random.default_rng(seed)
    shape = (n_outcomes**n_treatments, n_treatments)
    w = rng.gamma(alpha, 1.0, size=shape)
    w /= w.sum()
    return ScmJoint(n_treatments, n_outcomes, w)


def derive_dataset(g) -> Dataset:
    """Exact experimental and observational distributions of a model."""
    if isinstance(g, LatentScm):
        return g.derive_dataset()
    T, O = g.n_treatments, g.n_outcomes
    R = response_types(T, O)
    type_mass = g.weights.sum(axis=1)
    exp = np.zeros((T, O))
    obs = np.zeros((T, O))
    for t in range(T):
        exp[t] = np.bincount(R[:, t], weights=type_mass, minlength=O)
        obs[t] = np.bincount(R[:, t], weights=g.weights[:, t], minlength=O)
    return validate_dataset(exp, obs, tol=1e-9)


def _query_cells(g: ScmJoint, q: Query) -> np.ndarray:
    R = response_types(g.n_treatments, g.n_outcomes)
    conj = np.ones(len(R), dtype=bool)
    for a in q.atoms:
        if a.treatment > g.n_treatments or a.outcome > g.n_outcomes:
            raise ShapeMismatch(f"atom {a} outside {g.n_treatments}x{g.n_outcomes}")
        conj &= R[:, a.treatment - 1] == a.outcome - 1
    cells = np.repeat(conj[:, None], g.n_treatments, axis=1)
    if q.x_evidence is not None:
        keep = np.zeros(g.n_treatments, dtype=bool)
        keep[q.x_evidence - 1] = True
        cells &= keep[None, :]
    if q.y_evidence is not None:
        cells &= R == q.y_evidence - 1
    return cells


def true_probability(g, q: Query) -> float:
    """Exact query probability under the model (the oracle value)."""
    if isinstance(g, LatentScm):
        return g.true_probability(q)
    value = float(g.weights[_query_cells(g, q)].sum())
    if not q.conditional:
        return value
    denom = float(g.weights[_evidence_only_cells(g, q)].sum())
    if denom <= 0.0:
        raise ZeroDenominator("conditional query with zero evidence mass")
    return value / denom


def _evidence_only_cells(g: ScmJoint, q: Query) -> np.ndarray:
    R = response_types(g.n_treatments, g.n_outcomes)
    cells = np.ones((len(R), g.n_treatments), dtype=bool)
    if q.x_evidence is not None:
        keep = np.zeros(g.n_treatments, dtype=bool)
        keep[q.x_evidence - 1] = True
        cells &= keep[None, :]
    if q.y_evidence is not None:
        cells &= R == q.y_evidence - 1
    return cells


def random_dataset_rejection(
    n: int, seed: int, max_tries: int = 100_000
) -> Dataset:
    """Sample a compatible dataset directly, without an underlying joint.

    Experimental rows and the observational matrix are drawn from uniform
    simplex distributions and the draw is accepted when every cell satisfies
    the compatibility constraint.  Unlike joint-derived datasets (whose cells
    are sums over n^n weights and concentrate accordingly), accepted draws
    spread over the whole compatible region; the price is an acceptance rate
    around (1 - 1/(n+2))^(n^2), which makes the sampler impractical much
    beyond side 10.  Carries no ground truth.
    """
    return random_dataset_rejection_rect(n, n, seed, max_tries)


def random_dataset_rejection_rect(
    n_treatments: int, n_outcomes: int, seed: int, max_tries: int = 100_000
) -> Dataset:
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        exp = rng.gamma(1.0, 1.0, size=(n_treatments, n_outcomes))
        exp /= exp.sum(axis=1, keepdims=True)
        obs = rng.gamma(1.0, 1.0, size=(n_treatments, n_outcomes))
        obs /= obs.sum()
        marg = obs.sum(axis=1, keepdims=True)
        if (obs <= exp).all() and (exp <= 1.0 - marg + obs).all():
            return validate_dataset(exp, obs, tol=1e-9)
    raise RejectionBudgetExceeded(max_tries)


@dataclass(frozen=True)
class LatentScm:
    """Mixture-of-classes model: a compact SCM for large side lengths.

    A unit belongs to latent class c with probability ``pi[c]``; given the
    class, its potential outcomes are independent across treatments with
    ``rows[c, t, o] = P(Y would be o under treatment t)`` and it self-selects
    treatment t with probability ``treat[c, t]``.  This is a genuine (if
    restricted) structural model, so derived data satisfy compatibility by
    construction and exact query probabilities cost O(classes * n) -- no
    n^(n+1) joint is ever materialized, which is what makes side-20 sweeps
    cheap.
    """

    n_treatments: int
    n_outcomes: int
    pi: np.ndarray      # (C,)
    treat: np.ndarray   # (C, T) rows sum to 1
    rows: np.ndarray    # (C, T, O) rows sum to 1

    def __post_init__(self):
        for arr in (self.pi, self.treat, self.rows):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.n_treatments

    def _atom_factor(self, q: Query) -> np.ndarray:
        f = self.pi.copy()
        for a in q.atoms:
            f = f * self.rows[:, a.treatment - 1, a.outcome - 1]
        return f

    def _joint_value(self, q: Query) -> float:
        f = self._atom_factor(q)
        queried = {a.treatment: a.outcome for a in q.atoms}
        p, yq = q.x_evidence, q.y_evidence
        if p is None and yq is None:
            return float(f.sum())
        if yq is None:
            return float((f * self.treat[:, p - 1]).sum())
        if p is not None:
            return float((f * self.treat[:, p - 1] * self.rows[:, p - 1, yq - 1]).sum())
        total = 0.0
        for t in range(1, self.n_treatments + 1):
            if t in queried:
                if queried[t] == yq:
                    total += float((f * self.treat[:, t - 1]).sum())
            else:
                total += float(
                    (f * self.treat[:, t - 1] * self.rows[:, t - 1, yq - 1]).sum()
                )
        return total

    def true_probability(self, q: Query) -> float:
        value = self._joint_value(q)
        if not q.conditional:
            return value
        p, yq = q.x_evidence, q.y_evidence
        if p is not None and yq is not None:
            denom = float((self.pi * self.treat[:, p - 1] * self.rows[:, p - 1, yq - 1]).sum())
        elif p is not None:
            denom = float((self.pi * self.treat[:, p - 1]).sum())
        else:
            denom = float(
                (self.pi[:, None] * self.treat * self.rows[:, :, yq - 1]).sum()
            )
        if denom <= 0.0:
            raise ZeroDenominator("conditional query with zero evidence mass")
        return value / denom

    def derive_dataset(self) -> Dataset:
        exp = np.einsum("c,cto->to", self.pi, self.rows)
        obs = np.einsum("c,ct,cto->to", self.pi, self.treat, self.rows)
        return validate_dataset(exp, obs, tol=1e-9)


def random_latent(
    n: int, seed: int, classes: int | None = None, alpha: float = 1.0
) -> LatentScm:
    """Random latent-class model with ``classes`` (default 2n) classes."""
    if n < 2:
        raise ShapeMismatch("need at least 2 treatments and 2 outcomes")
    C = classes if classes is not None else 2 * n
    rng = np.random.default_rng(seed)
    pi = rng.gamma(alpha, 1.0, size=C)
    pi /= pi.sum()
    treat = rng.gamma(alpha, 1.0, size=(C, n))
    treat /= treat.sum(axis=1, keepdims=True)
    rows = rng.gamma(alpha, 1.0, size=(C, n, n))
    rows /= rows.sum(axis=2, keepdims=True)
    return LatentScm(n, n, pi, treat, rows)
