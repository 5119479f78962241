"""Batch experiments: dimension sweeps, soundness suites, tightness checks.

Every batch derives per-instance seeds as ``mix_seed(base_seed, n, k, i)``,
so runs are reproducible instance by instance and outputs are byte-identical
across repeats.  Two instance generators are used and labeled in the outputs:
``joint`` draws a full ground-truth response-type joint (exact query
probabilities; the auto default up to side 6, past which the n^(n+1) cell
count is impractical), ``latent`` draws a compact latent-class model (exact
ground truth at any side; the auto default past 6), and ``rejection``
samples compatible datasets directly -- no ground truth, but the draws
spread over the whole compatible region instead of concentrating the way
joint-derived cells do, which matters when comparing against the baseline.

CSV conventions: 12 significant digits, fixed column order, header row,
empty fields for absent values, "\\n" line endings, written via a temp file
and rename so failures leave no partial output.  Summary statistics are
computed from the values as printed, so recomputing them from the instance
CSV reproduces the summary file exactly.

The comparison baseline throughout is the Fréchet-only interval (labeled
``base_*`` in the CSVs); containment of the closed-form interval in it, and
of the LP interval in the closed form, is enforced on every record -- the
first violation aborts the run with a diagnostic.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bounds import Interval, baseline_for_query, bound_query
from .dist import Dataset
from .errors import SoundnessViolation
from .lp import DEFAULT_CAP, oracle_bounds
from .query import Atom, Family, Query, render_query
from .scm import (
    derive_dataset,
    mix_seed,
    random_dataset_rejection,
    random_joint,
    random_latent,
    true_probability,
)

JOINT_SIDE_CAP = 6  # joint generator above this side is impractical
CONTAINMENT_SLACK = 1e-9
STRICT_EPS = 1e-12

INSTANCE_COLUMNS = [
    "n", "k", "index", "seed", "family", "query",
    "cf_lb", "cf_ub", "base_lb", "base_ub",
    "lp_lb", "lp_ub", "true_value", "active_lb", "active_ub",
]
SUMMARY_COLUMNS = [
    "n", "k", "family", "instances", "generator",
    "mean_cf_gap", "mean_base_gap", "mean_lb_gain", "mean_ub_gain",
    "narrower_count", "soundness_violations",
]


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.12g}"


@dataclass(frozen=True)
class InstanceRecord:
    n: int
    k: int
    index: int
    seed: int
    family: Family
    query: str
    cf: Interval
    base: Interval
    lp: Optional[Interval]
    true_value: Optional[float]
    active_lb: str
    active_ub: str
    generator: str

    def check(self) -> None:
        """Enforce the interval-containment contract; raise on violation."""
        where = f"n={self.n} k={self.k} index={self.index} family={self.family} {self.query}"
        if not self.base.contains_interval(self.cf, CONTAINMENT_SLACK):
            raise SoundnessViolation(
                f"closed-form {self.cf} not inside baseline {self.base} [{where}]"
            )
        if self.lp is not None and not self.cf.contains_interval(self.lp, CONTAINMENT_SLACK):
            raise SoundnessViolation(
                f"LP {self.lp} not inside closed-form {self.cf} [{where}]"
            )
        if self.true_value is not None:
            if not self.cf.contains(self.true_value, CONTAINMENT_SLACK):
                raise SoundnessViolation(
                    f"true value {self.true_value} outside closed-form {self.cf} [{where}]"
                )
            if self.lp is not None and not self.lp.contains(self.true_value, CONTAINMENT_SLACK):
                raise SoundnessViolation(
                    f"true value {self.true_value} outside LP {self.lp} [{where}]"
                )

    def row(self) -> list[str]:
        return [
            str(self.n), str(self.k), str(self.index), str(self.seed),
            str(self.family), self.query,
            _fmt(self.cf.lower), _fmt(self.cf.upper),
            _fmt(self.base.lower), _fmt(self.base.upper),
            _fmt(self.lp.lower if self.lp else None),
            _fmt(self.lp.upper if self.lp else None),
            _fmt(self.true_value),
            self.active_lb, self.active_ub,
        ]


# --- query construction -------------------------------------------------------


def diagonal_query(family: Family, n: int, k: int) -> Query:
    """The canonical representative query of a family at side n.

    Atoms are the diagonal y_j under x_j for j = 1..k; x-evidence (when the
    family carries it) is the first non-queried treatment, y-evidence the
    first outcome.
    """
    if k > n or k < 1:
        raise ValueError(f"k={k} invalid for side n={n}")
    atoms = tuple(Atom(j, j) for j in range(1, k + 1))
    x_ev = y_ev = None
    if family in (Family.PSUB, Family.PN):
        if k >= n:
            raise ValueError(f"{family} needs a non-queried treatment (k < n)")
        x_ev = k + 1
    if family in (Family.PREP, Family.PN):
        y_ev = 1
    return Query(atoms, x_ev, y_ev, False)


def random_substituted_query(
    family: Family, n: int, rng: np.random.Generator, k: Optional[int] = None
) -> Query:
    """Random treatments/outcomes/evidence exercising relabeling + substitution."""
    if k is None:
        hi = n - 1 if family in (Family.PSUB, Family.PN) else n
        k = int(rng.integers(1, hi + 1))
    treatments = [int(t) + 1 for t in rng.permutation(n)[:k]]
    atoms = tuple(Atom(t, int(rng.integers(1, n + 1))) for t in treatments)
    x_ev = y_ev = None
    if family in (Family.PSUB, Family.PN):
        free = [t for t in range(1, n + 1) if t not in treatments]
        x_ev = int(free[rng.integers(len(free))])
    if family in (Family.PREP, Family.PN):
        y_ev = int(rng.integers(1, n + 1))
    return Query(atoms, x_ev, y_ev, False)


def make_instance(n: int, seed: int, generator: str = "auto"):
    """Build one instance; returns (dataset, model or None, generator label).

    ``auto`` draws a full response-type joint up to side 6 and a latent-class
    model past that (both carry exact ground truth); ``rejection`` samples
    compatible datasets directly and carries none.
    """
    if generator == "auto":
        generator = "joint" if n <= JOINT_SIDE_CAP else "latent"
    if generator == "joint":
        g = random_joint(n, seed)
        return derive_dataset(g), g, "joint"
    if generator == "latent":
        g = random_latent(n, seed)
        return derive_dataset(g), g, "latent"
    if generator == "rejection":
        return random_dataset_rejection(n, seed), None, "rejection"
    raise ValueError(f"unknown generator {generator!r}")


# --- sweep --------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    n_min: int
    n_max: int
    k: int
    instances: int
    base_seed: int
    families: tuple[Family, ...] = (Family.PNS,)
    oracle: bool = False
    output_path: str = "sweep.csv"
    generator: str = "auto"
    cap: int = DEFAULT_CAP
    plot_top: Optional[int] = None

    def validate(self) -> None:
        if not (2 <= self.k <= self.n_min <= self.n_max):
            raise ValueError(
                f"need 2 <= k <= n_min <= n_max, got k={self.k}, "
                f"n_min={self.n_min}, n_max={self.n_max}"
            )
        if self.instances < 1:
            raise ValueError("instances must be positive")
        evidence_fams = {Family.PSUB, Family.PN} & set(self.families)
        if evidence_fams and self.k >= self.n_min:
            raise ValueError(
                f"{sorted(str(f) for f in evidence_fams)} need k < n_min "
                f"(a non-queried treatment must exist)"
            )


def summary_path_for(path: str) -> str:
    return (path[:-4] if path.endswith(".csv") else path) + ".summary.csv"


@dataclass
class SweepResult:
    records: list[InstanceRecord]
    instances_csv: str
    summary_csv: str
    output_path: Optional[str] = None


def evaluate_instance(
    n: int,
    k: int,
    index: int,
    seed: int,
    family: Family,
    ds: Dataset,
    joint,
    generator: str,
    query: Optional[Query] = None,
    with_lp: bool = False,
    cap: int = DEFAULT_CAP,
) -> InstanceRecord:
    q = query if query is not None else diagonal_query(family, n, k)
    rep = bound_query(ds, q)
    base = baseline_for_query(ds, q)
    lp = oracle_bounds(ds, q, cap=cap) if with_lp else None
    tv = true_probability(joint, q) if joint is not None else None
    rec = InstanceRecord(
        n=n, k=k, index=index, seed=seed, family=family, query=render_query(q),
        cf=rep.interval, base=base, lp=lp, true_value=tv,
        active_lb=rep.active_lower, active_ub=rep.active_upper,
        generator=generator,
    )
    rec.check()
    return rec


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Generate instances over the side range and write instance + summary CSVs."""
    cfg.validate()
    records: list[InstanceRecord] = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        for i in range(cfg.instances):
            seed = mix_seed(cfg.base_seed, n, cfg.k, i)
            ds, joint, gen = make_instance(n, seed, cfg.generator)
            use_lp = cfg.oracle and n <= cfg.cap
            for family in cfg.families:
                records.append(
                    evaluate_instance(
                        n, cfg.k, i, seed, family, ds, joint, gen,
                        with_lp=use_lp, cap=cfg.cap,
                    )
                )
    instances_csv = render_instances_csv(records)
    summary_csv = render_summary_csv(parse_instances_csv(instances_csv), records)
    _atomic_write(cfg.output_path, instances_csv)
    _atomic_write(summary_path_for(cfg.output_path), summary_csv)
    if cfg.plot_top is not None:
        plot_csv = emit_plot_data(records, cfg.plot_top)
        _atomic_write(plot_path_for(cfg.output_path), plot_csv)
    return SweepResult(records, instances_csv, summary_csv, cfg.output_path)


def plot_path_for(path: str) -> str:
    return (path[:-4] if path.endswith(".csv") else path) + ".plot.csv"


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def render_instances_csv(records: Sequence[InstanceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(INSTANCE_COLUMNS)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


def parse_instances_csv(text: str) -> list[dict]:
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        rows.append(
            {
                "n": int(raw["n"]),
                "k": int(raw["k"]),
                "index": int(raw["index"]),
                "family": raw["family"],
                "cf_lb": float(raw["cf_lb"]),
                "cf_ub": float(raw["cf_ub"]),
                "base_lb": float(raw["base_lb"]),
                "base_ub": float(raw["base_ub"]),
            }
        )
    return rows


def render_summary_csv(
    parsed: Sequence[dict], records: Sequence[InstanceRecord]
) -> str:
    """Per-(n, family) aggregate rows, computed from values as printed."""
    generator_of = {(r.n, str(r.family)): r.generator for r in records}
    groups: dict[tuple[int, int, str], list[dict]] = {}
    for row in parsed:
        groups.setdefault((row["n"], row["k"], row["family"]), []).append(row)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for (n, k, family) in sorted(groups):
        rows = groups[(n, k, family)]
        m = len(rows)
        cf_gap = sum(r["cf_ub"] - r["cf_lb"] for r in rows) / m
        base_gap = sum(r["base_ub"] - r["base_lb"] for r in rows) / m
        lb_gain = sum(r["cf_lb"] - r["base_lb"] for r in rows) / m
        ub_gain = sum(r["base_ub"] - r["cf_ub"] for r in rows) / m
        narrower = sum(
            1
            for r in rows
            if r["cf_lb"] > r["base_lb"] + STRICT_EPS
            or r["cf_ub"] < r["base_ub"] - STRICT_EPS
        )
        w.writerow(
            [
                str(n), str(k), family, str(m),
                generator_of.get((n, family), ""),
                _fmt(cf_gap), _fmt(base_gap), _fmt(lb_gain), _fmt(ub_gain),
                str(narrower), "0",
            ]
        )
    return buf.getvalue()


def emit_plot_data(
    records: Sequence[InstanceRecord], top_n: int, fmt: str = "csv"
) -> str:
    """Select the top-N records by baseline-vs-closed-form gap reduction.

    Selection is by largest (baseline gap - closed-form gap), ties broken on
    (n, k, family, index) so the choice is stable; the selected records are
    then ordered by their closed-form bounds for plotting.
    """
    if not records:
        raise ValueError("no records to select from")

    def reduction(r: InstanceRecord) -> float:
        return (r.base.upper - r.base.lower) - (r.cf.upper - r.cf.lower)

    ranked = sorted(
        records, key=lambda r: (-reduction(r), r.n, r.k, str(r.family), r.index)
    )
    chosen = sorted(
        ranked[:top_n], key=lambda r: (r.cf.lower, r.cf.upper, r.index)
    )
    if fmt == "json":
        import json

        return json.dumps(
            [
                {
                    "n": r.n, "k": r.k, "family": str(r.family), "index": r.index,
                    "cf_lb": r.cf.lower, "cf_ub": r.cf.upper,
                    "base_lb": r.base.lower, "base_ub": r.base.upper,
                }
                for r in chosen
            ],
            indent=1,
        ) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "k", "family", "index", "cf_lb", "cf_ub", "base_lb", "base_ub"])
    for r in chosen:
        w.writerow(
            [
                str(r.n), str(r.k), str(r.family), str(r.index),
                _fmt(r.cf.lower), _fmt(r.cf.upper),
                _fmt(r.base.lower), _fmt(r.base.upper),
            ]
        )
    return buf.getvalue()


# --- verification -------------------------------------------------------------


@dataclass
class FamilyStats:
    queries: int = 0
    soundness_violations: int = 0
    mismatches: int = 0
    max_lower_diff: float = 0.0
    max_upper_diff: float = 0.0
    diagonal_mismatches: int = 0
    diagonal_max_lower_diff: float = 0.0
    diagonal_max_upper_diff: float = 0.0

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class TightnessReport:
    """Outcome of the LP-vs-closed-form verification run."""

    n: int
    instances: int
    tol: float
    base_seed: int
    families: dict[str, FamilyStats]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def soundness_violations(self) -> int:
        return sum(f.soundness_violations for f in self.families.values())

    @property
    def ok(self) -> bool:
        return self.soundness_violations == 0

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "instances": self.instances,
            "tol": self.tol,
            "base_seed": self.base_seed,
            "soundness_violations": self.soundness_violations,
            "families": {k: v.to_json_dict() for k, v in self.families.items()},
            "diagnostics": self.diagnostics,
        }


def verify_tightness(
    n: int,
    instances: int,
    tol: float,
    base_seed: int,
    cap: int = DEFAULT_CAP,
    queries_per_family: int = 3,
) -> TightnessReport:
    """Compare closed-form and LP intervals on random instances.

    Runs the per-family diagonal query plus ``queries_per_family`` seeded
    random substituted queries on each instance.  Soundness (LP interval
    inside the closed form, true value inside both) is mandatory; tightness
    mismatches beyond ``tol`` are counted and reported per family, split out
    for the diagonal representative.
    """
    from .errors import DimensionCapExceeded

    if n > cap:
        raise DimensionCapExceeded(n, cap)
    stats = {str(f): FamilyStats() for f in Family}
    report = TightnessReport(n, instances, tol, base_seed, stats)
    k_of = {
        Family.PNS: n,
        Family.PREP: n,
        Family.PSUB: n - 1,
        Family.PN: n - 1,
    }
    for i in range(instances):
        seed = mix_seed(base_seed, n, 0, i)
        g = random_joint(n, seed)
        ds = derive_dataset(g)
        for fi, family in enumerate(Family):
            fs = stats[str(family)]
            rng = np.random.default_rng(mix_seed(seed, fi))
            queries = [(diagonal_query(family, n, k_of[family]), True)]
            queries += [
                (random_substituted_query(family, n, rng), False)
                for _ in range(queries_per_family)
            ]
            for q, is_diag in queries:
                rep = bound_query(ds, q)
                lp = oracle_bounds(ds, q, cap=cap)
                tv = true_probability(g, q)
                fs.queries += 1
                sound = (
                    rep.interval.contains_interval(lp, CONTAINMENT_SLACK)
                    and rep.interval.contains(tv, CONTAINMENT_SLACK)
                    and lp.contains(tv, CONTAINMENT_SLACK)
                )
                if not sound:
                    fs.soundness_violations += 1
                    report.diagnostics.append(
                        f"soundness: n={n} i={i} {family} {render_query(q)} "
                        f"cf={rep.interval} lp={lp} true={tv}"
                    )
                dl = abs(rep.interval.lower - lp.lower)
                du = abs(rep.interval.upper - lp.upper)
                fs.max_lower_diff = max(fs.max_lower_diff, dl)
                fs.max_upper_diff = max(fs.max_upper_diff, du)
                mismatch = dl > tol or du > tol
                if mismatch:
                    fs.mismatches += 1
                if is_diag:
                    fs.diagonal_max_lower_diff = max(fs.diagonal_max_lower_diff, dl)
                    fs.diagonal_max_upper_diff = max(fs.diagonal_max_upper_diff, du)
                    if mismatch:
                        fs.diagonal_mismatches += 1
    return report


@dataclass
class SoundnessReport:
    n: int
    instances: int
    queries: int
    violations: int
    min_lower_margin: float  # most negative = worst; >= 0 means sound
    min_upper_margin: float
    diagnostics: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json_dict(self) -> dict:
        return dict(
            n=self.n, instances=self.instances, queries=self.queries,
            violations=self.violations,
            min_lower_margin=self.min_lower_margin,
            min_upper_margin=self.min_upper_margin,
            diagnostics=self.diagnostics,
        )


def verify_soundness(
    n: int,
    instances: int,
    base_seed: int,
    queries_per_family: int = 2,
    tol: float = CONTAINMENT_SLACK,
) -> SoundnessReport:
    """LP-free soundness sweep: true value inside the closed-form interval.

    Exercises all four families with the diagonal query plus seeded random
    substituted queries on every instance; scales to any n the joint
    generator can hold since no LP is solved.
    """
    stats = SoundnessReport(n, instances, 0, 0, np.inf, np.inf)
    k_of = {
        Family.PNS: n,
        Family.PREP: n,
        Family.PSUB: n - 1,
        Family.PN: n - 1,
    }
    for i in range(instances):
        seed = mix_seed(base_seed, n, 0, i)
        g = random_joint(n, seed)
        ds = derive_dataset(g)
        for fi, family in enumerate(Family):
            rng = np.random.default_rng(mix_seed(seed, fi))
            queries = [diagonal_query(family, n, k_of[family])]
            queries += [
                random_substituted_query(family, n, rng)
                for _ in range(queries_per_family)
            ]
            for q in queries:
                rep = bound_query(ds, q)
                tv = true_probability(g, q)
                stats.queries += 1
                lo_margin = tv - rep.interval.lower
                hi_margin = rep.interval.upper - tv
                stats.min_lower_margin = min(stats.min_lower_margin, lo_margin)
                stats.min_upper_margin = min(stats.min_upper_margin, hi_margin)
                if lo_margin < -tol or hi_margin < -tol:
                    stats.violations += 1
                    stats.diagnostics.append(
                        f"n={n} i={i} {family} {render_query(q)} "
                        f"cf={rep.interval} true={tv}"
                    )
    return stats
