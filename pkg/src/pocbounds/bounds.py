"""Closed-form bound evaluation for the four query families.

Notation, for a canonical query over a square dataset of side n: slot j
(1 <= j <= k) queries outcome o_j under treatment t_j, and

    E_j = exp[t_j][o_j]      (causal effect of the queried event)
    O_j = obs[t_j][o_j]      (its observational joint)
    X_j = P(x_{t_j})         (treatment marginal)
    d_j = E_j - O_j          (effect mass not explained by observation)

Per-cell compatibility gives 0 <= O_j <= E_j and E_j + X_j - O_j <= 1, which
is what keeps every candidate below meaningful.

Candidate sets per family (max of lowers, min of uppers, clamped to [0, 1]):

* bare conjunction (PNS):
    lowers  0;  sum(E) - k + 1;  for each i: sum_{j!=i}[E+X-O] + O_i - k + 1
    uppers  sum(O) + sum of non-queried treatment marginals;  each E_j;
            for m in 1..k-1: (1/m) * (sum of the m+1 smallest d_j)
* + observed treatment x_p (PSub):
    lowers  0;  sum[E+X-O] + P(x_p) - k
    uppers  P(x_p);  each d_j
* + observed outcome y_q (PRep): with H = {j <= k : o_j = q} (the slots whose
  queried outcome coincides with the evidence outcome) and N the non-queried
  treatments:
    lowers  0;  sum[E+X-O] + sum_{j in H} O_j + sum_{t in N} obs[t][q] - k;
            for each s in H: sum_{j != s}[E+X-O] + O_s - (k-1)
    uppers  for each s in H: E_s;  sum_{j in H} O_j + sum_{t in N} obs[t][q];
            for each j not in H: d_j
  On an unsubstituted query H is exactly the slot whose index equals q (when
  q <= k), recovering the published candidate set; defining the set through
  the outcome coincidence is what keeps every candidate sound after outcome
  substitution (the merge of evidence with an atom is only licensed by
  consistency when the atom actually queries outcome q).
* + both (PN):
    lowers  0;  sum[E+X-O] + P(x_p, y_q) - k
    uppers  P(x_p, y_q);  each d_j

For conditional queries the assembled interval is divided by the evidence
probability -- P(x_p), P(y_q), or P(x_p, y_q) -- and clamped at 1.

Candidate labels are stable strings ("L2_i=3", "U2_m=2", ...) so tests and
the CLI can assert which candidate binds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dist import Dataset, squarify
from .errors import DimensionTooSmall, FamilyMismatch, ZeroDenominator
from .query import CanonicalQuery, Family, Query, canonicalize

INFEASIBILITY_SLACK = 1e-7

Candidates = list[tuple[str, float]]


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 1e-9) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def contains_interval(self, other: "Interval", slack: float = 1e-9) -> bool:
        return self.lower - slack <= other.lower and other.upper <= self.upper + slack


@dataclass(frozen=True)
class BoundReport:
    """Interval plus the full candidate sets and which candidate binds.

    Candidate values are reported on the joint scale and unclamped; the
    interval is clamped to [0, 1] and, for conditional queries, divided by
    ``denominator``.  ``infeasible`` flags max-lower exceeding min-upper by
    more than the infeasibility slack, which certifies the inputs are not
    realizable by any single model; the crossed endpoints are reported as-is
    rather than silently repaired.
    """

    family: Family
    interval: Interval
    lower_candidates: Candidates
    upper_candidates: Candidates
    active_lower: str
    active_upper: str
    denominator: Optional[float] = None
    infeasible: bool = False

    def to_json_dict(self) -> dict:
        return {
            "family": str(self.family),
            "lower": self.interval.lower,
            "upper": self.interval.upper,
            "active_lower": self.active_lower,
            "active_upper": self.active_upper,
            "candidates": {
                "lower": {label: value for label, value in self.lower_candidates},
                "upper": {label: value for label, value in self.upper_candidates},
            },
            "denominator": self.denominator,
            "infeasible": self.infeasible,
        }


class _Terms:
    """Slot-indexed values shared by every family evaluator."""

    def __init__(self, ds: Dataset, cq: CanonicalQuery):
        n = ds.dims.side
        if not ds.dims.is_square:
            raise FamilyMismatch("square dataset", f"{ds.dims.n_treatments}x{ds.dims.n_outcomes}")
        if cq.n != n:
            raise DimensionTooSmall(cq.n, n)
        if cq.k > n:
            raise DimensionTooSmall(cq.k, n)
        self.n = n
        self.k = cq.k
        t = np.asarray(cq.treatment_perm, dtype=int) - 1
        o = np.asarray(cq.outcome_map, dtype=int) - 1
        self.marginals = ds.obs.sum(axis=1)
        self.E = ds.exp[t[: cq.k], o]
        self.O = ds.obs[t[: cq.k], o]
        self.X = self.marginals[t[: cq.k]]
        self.d = self.E - self.O
        self.tail_marginal = float(self.marginals[t[cq.k :]].sum())
        self.slack = self.E + self.X - self.O  # each <= 1 under compatibility
        self.t0 = t  # 0-based slot -> treatment


def _assemble(
    family: Family,
    lowers: Candidates,
    uppers: Candidates,
    denominator: Optional[float],
    conditional: bool,
) -> BoundReport:
    active_lower, lo = max(lowers, key=lambda c: c[1])
    active_upper, hi = min(uppers, key=lambda c: c[1])
    infeasible = lo > hi + INFEASIBILITY_SLACK
    lo = min(max(lo, 0.0), 1.0)
    hi = min(max(hi, 0.0), 1.0)
    if conditional:
        if denominator is None or denominator <= 0.0:
            raise ZeroDenominator("conditional query with zero evidence probability")
        lo = min(lo / denominator, 1.0)
        hi = min(hi / denominator, 1.0)
    return BoundReport(
        family=family,
        interval=Interval(lo, hi),
        lower_candidates=lowers,
        upper_candidates=uppers,
        active_lower=active_lower,
        active_upper=active_upper,
        denominator=denominator,
        infeasible=infeasible,
    )


def _require(cq: CanonicalQuery, family: Family) -> None:
    if cq.family is not family:
        raise FamilyMismatch(str(family), str(cq.family))


def pns_k_bounds(ds: Dataset, cq: CanonicalQuery) -> BoundReport:
    """Bounds for a bare counterfactual conjunction."""
    _require(cq, Family.PNS)
    tm = _Terms(ds, cq)
    k = tm.k
    total_slack = float(tm.slack.sum())

    lowers: Candidates = [("L0", 0.0), ("L1", float(tm.E.sum()) - k + 1.0)]
    for i in range(k):
        val = total_slack - float(tm.slack[i]) + float(tm.O[i]) - k + 1.0
        lowers.append((f"L2_i={i + 1}", val))

    uppers: Candidates = [("U0", float(tm.O.sum()) + tm.tail_marginal)]
    for j in range(k):
        uppers.append((f"U1_j={j + 1}", float(tm.E[j])))
    d_sorted = np.sort(tm.d)
    prefix = np.cumsum(d_sorted)
    for m in range(1, k):
        uppers.append((f"U2_m={m}", float(prefix[m]) / m))

    return _assemble(cq.family, lowers, uppers, None, False)


def psub_bounds(ds: Dataset, cq: CanonicalQuery) -> BoundReport:
    """Bounds for a conjunction joined with an observed treatment."""
    _require(cq, Family.PSUB)
    tm = _Terms(ds, cq)
    xp = float(tm.marginals[cq.p_treatment - 1])

    lowers: Candidates = [
        ("L0", 0.0),
        ("L1", float(tm.slack.sum()) + xp - tm.k),
    ]
    uppers: Candidates = [("U0", xp)]
    for j in range(tm.k):
        uppers.append((f"U1_j={j + 1}", float(tm.d[j])))
    return _assemble(cq.family, lowers, uppers, xp, cq.conditional)


def prep_bounds(ds: Dataset, cq: CanonicalQuery) -> BoundReport:
    """Bounds for a conjunction joined with an observed outcome."""
    _require(cq, Family.PREP)
    tm = _Terms(ds, cq)
    k, q = tm.k, cq.q_outcome
    col_q = ds.obs[:, q - 1]
    nonqueried_mass = float(col_q[tm.t0[k:]].sum())
    hits = [j for j in range(k) if cq.outcome_map[j] == q]
    hit_mass = float(sum(tm.O[j] for j in hits))

    lowers: Candidates = [
        ("L0", 0.0),
        ("L1", float(tm.slack.sum()) + hit_mass + nonqueried_mass - k),
    ]
    for s in hits:
        val = float(tm.slack.sum()) - float(tm.slack[s]) + float(tm.O[s]) - (k - 1.0)
        lowers.append((f"L2_s={s + 1}", val))

    uppers: Candidates = []
    for s in hits:
        uppers.append((f"U1_s={s + 1}", float(tm.E[s])))
    uppers.append(("U2", hit_mass + nonqueried_mass))
    for j in range(k):
        if j not in hits:
            uppers.append((f"U3_j={j + 1}", float(tm.d[j])))

    return _assemble(cq.family, lowers, uppers, float(col_q.sum()), cq.conditional)


def pn_bounds(ds: Dataset, cq: CanonicalQuery) -> BoundReport:
    """Bounds for a conjunction joined with both evidence terms."""
    _require(cq, Family.PN)
    tm = _Terms(ds, cq)
    opq = float(ds.obs[cq.p_treatment - 1, cq.q_outcome - 1])

    lowers: Candidates = [
        ("L0", 0.0),
        ("L1", float(tm.slack.sum()) + opq - tm.k),
    ]
    uppers: Candidates = [("U0", opq)]
    for j in range(tm.k):
        uppers.append((f"U1_j={j + 1}", float(tm.d[j])))
    return _assemble(cq.family, lowers, uppers, opq, cq.conditional)


_DISPATCH = {
    Family.PNS: pns_k_bounds,
    Family.PSUB: psub_bounds,
    Family.PREP: prep_bounds,
    Family.PN: pn_bounds,
}


def bounds_for_canonical(ds: Dataset, cq: CanonicalQuery) -> BoundReport:
    return _DISPATCH[cq.family](ds, cq)


def bound_query(ds: Dataset, q: Query) -> BoundReport:
    """Full pipeline: squarify, canonicalize, evaluate, divide if conditional."""
    sq = squarify(ds)
    cq = canonicalize(q, sq.dims)
    return bounds_for_canonical(sq, cq)


def frechet_baseline(ds: Dataset, cq: CanonicalQuery) -> Interval:
    """Fréchet-only interval used as the comparison baseline.

    The conjunction is treated as k opaque events (plus the evidence event:
    the treatment marginal, the outcome marginal, or their joint), so the
    lower bound is max{0, sum of event probabilities - count + 1} and the
    upper bound the smallest single-event probability, with the evidence
    marginals as additional upper candidates.  Always contains the matching
    closed-form interval.
    """
    tm = _Terms(ds, cq)
    events = [float(v) for v in tm.E]
    uppers = list(events)
    denominator = None
    if cq.family is Family.PSUB:
        denominator = float(tm.marginals[cq.p_treatment - 1])
        events.append(denominator)
        uppers.append(denominator)
    elif cq.family is Family.PREP:
        denominator = float(ds.obs[:, cq.q_outcome - 1].sum())
        events.append(denominator)
        uppers.append(denominator)
    elif cq.family is Family.PN:
        denominator = float(ds.obs[cq.p_treatment - 1, cq.q_outcome - 1])
        events.append(denominator)
        uppers.append(float(tm.marginals[cq.p_treatment - 1]))
        uppers.append(float(ds.obs[:, cq.q_outcome - 1].sum()))

    lo = max(0.0, sum(events) - len(events) + 1.0)
    hi = min(min(uppers), 1.0)
    if cq.conditional:
        if denominator is None or denominator <= 0.0:
            raise ZeroDenominator("conditional query with zero evidence probability")
        lo = min(lo / denominator, 1.0)
        hi = min(hi / denominator, 1.0)
    return Interval(lo, hi)


def baseline_for_query(ds: Dataset, q: Query) -> Interval:
    sq = squarify(ds)
    return frechet_baseline(sq, canonicalize(q, sq.dims))
