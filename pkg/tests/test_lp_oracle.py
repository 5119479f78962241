from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from pocbounds import (
    bound_query,
    build_lp,
    format_lp_text,
    oracle_bounds,
    parse_query,
    solve,
    squarify,
)
from pocbounds.errors import DimensionCapExceeded, Infeasible, ZeroDenominator
from pocbounds.lp import MAX, MIN, LpProblem, response_types
from pocbounds.scm import derive_dataset, mix_seed, random_joint, random_joint_rect

from conftest import uniform_dataset


class TestProblemShape:
    def test_response_type_enumeration_order(self):
        R = response_types(2, 3)
        # treatment-1 outcome varies slowest
        assert R.tolist() == [
            [0, 0], [0, 1], [0, 2],
            [1, 0], [1, 1], [1, 2],
            [2, 0], [2, 1], [2, 2],
        ]

    def test_n3_dimensions(self, uniform3):
        lp = build_lp(uniform3, parse_query("P(y1_x1,y2_x2)"), MIN)
        assert lp.num_vars == 81
        assert lp.num_constraints == 1 + 9 + 9

    def test_objective_counts_cells(self, uniform3):
        lp = build_lp(uniform3, parse_query("P(y1_x1,y2_x2)"), MIN)
        # 3 free response coordinates... one: r3 free (3 values), times 3 treatments
        assert int(lp.objective.sum()) == 3 * 3

    def test_dimension_cap(self):
        ds = uniform_dataset(5)
        with pytest.raises(DimensionCapExceeded):
            build_lp(ds, parse_query("P(y1_x1)"), MIN)
        lp = build_lp(ds, parse_query("P(y1_x1)"), MIN, cap=5)
        assert lp.num_vars == 5**6


class TestSolve:
    def test_normalization_objective_is_one(self, uniform3):
        lp = build_lp(uniform3, parse_query("P(y1_x1)"), MIN)
        all_ones = replace(lp, objective=np.ones(lp.num_vars, dtype=np.uint8))
        assert solve(all_ones) == pytest.approx(1.0, abs=1e-9)
        assert solve(replace(all_ones, sense=MAX)) == pytest.approx(1.0, abs=1e-9)

    def test_min_le_max(self):
        for i in range(10):
            ds = derive_dataset(random_joint(3, mix_seed(11, 3, 0, i)))
            lp = build_lp(ds, parse_query("P(y2_x1,y1_x3)"), MIN)
            lo = solve(lp)
            hi = solve(replace(lp, sense=MAX))
            assert lo <= hi + 1e-9

    def test_infeasible_detected(self):
        base = build_lp(uniform_dataset(2), parse_query("P(y1_x1)"), MIN)
        # contradictory: first experimental row demands 0.5, forge it to 1.5
        b = base.b.copy()
        b[1] = 1.5
        with pytest.raises(Infeasible):
            solve(replace(base, b=b, exact_b=None))

    def test_medical_lp_matches_closed_form(self, medical):
        q = parse_query("P(y3_x1,y1_x2,y2_x3)")
        rep = bound_query(medical, q)
        iv = oracle_bounds(medical, q)
        assert iv.lower == pytest.approx(rep.interval.lower, abs=1e-6)
        assert iv.upper == pytest.approx(rep.interval.upper, abs=1e-6)
        assert iv.lower == pytest.approx(0.509, abs=5e-4)
        assert iv.upper == pytest.approx(0.588, abs=5e-4)

    def test_medical_exact_rational(self, medical):
        q = parse_query("P(y3_x1,y1_x2,y2_x3)")
        lp = build_lp(squarify(medical), q, MIN)
        lo = solve(lp, exact=True)
        hi = solve(replace(lp, sense=MAX), exact=True)
        assert isinstance(lo, Fraction)
        assert lo == Fraction(458, 900)  # = 0.50888..., the exact optimum
        assert hi == Fraction(529, 900)

    @staticmethod
    def rational_instance(rng, n=3, total=3600):
        """Random joint with exactly consistent rational derived matrices."""
        from pocbounds import validate_dataset
        from pocbounds.lp import response_types

        W = rng.multinomial(total, np.full(n ** (n + 1), 1 / n ** (n + 1)))
        W = W.reshape(n**n, n)
        R = response_types(n, n)
        exp_fr = tuple(
            tuple(
                Fraction(int(W[R[:, t] == s].sum()), total) for s in range(n)
            )
            for t in range(n)
        )
        obs_fr = tuple(
            tuple(
                Fraction(int(W[R[:, t] == s, t].sum()), total) for s in range(n)
            )
            for t in range(n)
        )
        floats = lambda m: [[float(v) for v in row] for row in m]
        return validate_dataset(floats(exp_fr), floats(obs_fr), exact=(exp_fr, obs_fr))

    def test_exact_agrees_with_float(self):
        # rationalized random instances so exact arithmetic stays consistent
        rng = np.random.default_rng(13)
        for trial in range(3):
            ds = self.rational_instance(rng)
            q = parse_query("P(y1_x1,y2_x2,y3_x3)")
            lp = build_lp(ds, q, MIN)
            assert float(solve(lp, exact=True)) == pytest.approx(solve(lp), abs=1e-7)
            lp_max = replace(lp, sense=MAX)
            assert float(solve(lp_max, exact=True)) == pytest.approx(solve(lp_max), abs=1e-7)


class TestStructure:
    def test_redundant_experimental_rows(self):
        # one experimental row per treatment is implied by the others + normalization
        ds = derive_dataset(random_joint(3, mix_seed(12, 3, 0, 0)))
        q = parse_query("P(y1_x1,y2_x2)")
        lp = build_lp(ds, q, MAX)
        O = ds.dims.n_outcomes
        drop = [1 + t * O + (O - 1) for t in range(ds.dims.n_treatments)]
        keep = [i for i in range(lp.num_constraints) if i not in drop]
        reduced = replace(lp, A=lp.A[keep], b=lp.b[keep], exact_b=None)
        assert solve(reduced) == pytest.approx(solve(lp), abs=1e-9)
        lp_min = replace(lp, sense=MIN)
        reduced_min = replace(reduced, sense=MIN)
        assert solve(reduced_min) == pytest.approx(solve(lp_min), abs=1e-9)

    def test_squarify_leaves_lp_optima_unchanged(self):
        for seed, (t, o) in ((21, (2, 3)), (22, (3, 2)), (23, (4, 3)), (24, (3, 4))):
            ds = derive_dataset(random_joint_rect(t, o, seed))
            k = 2
            q = parse_query("P(y1_x1,y2_x2)")
            rect = oracle_bounds(ds, q, squarify_first=False)
            square = oracle_bounds(ds, q, squarify_first=True)
            assert rect.lower == pytest.approx(square.lower, abs=1e-9)
            assert rect.upper == pytest.approx(square.upper, abs=1e-9)

    def test_conditional_oracle_divides(self):
        ds = derive_dataset(random_joint(3, mix_seed(14, 3, 0, 0)))
        joint = oracle_bounds(ds, parse_query("P(y1_x1, x3, y2)"))
        cond = oracle_bounds(ds, parse_query("P(y1_x1 | x3, y2)"))
        denom = float(ds.obs[2, 1])
        assert cond.lower == pytest.approx(min(joint.lower / denom, 1.0), abs=1e-9)
        assert cond.upper == pytest.approx(min(joint.upper / denom, 1.0), abs=1e-9)

    def test_conditional_zero_denominator(self):
        exp = [[0.5, 0.5], [0.2, 0.8]]
        obs = [[0.5, 0.5], [0.0, 0.0]]
        from pocbounds import validate_dataset

        ds = validate_dataset(exp, obs)
        with pytest.raises(ZeroDenominator):
            oracle_bounds(ds, parse_query("P(y1_x1 | x2)"))

    def test_dump_format(self, medical):
        lp = build_lp(squarify(medical), parse_query("P(y1_x1)"), MIN)
        text = format_lp_text(lp)
        lines = text.strip().splitlines()
        assert lines[1].startswith("min: ")
        assert len(lines) == 2 + lp.num_constraints + 1
        assert "= 131/900" in text  # exact rational rhs from count data
        assert lines[-1] == "q_j >= 0 for all j"


class TestAgainstScipy:
    """Cross-check the self-contained simplex against an external solver."""

    def test_random_instances_match_scipy(self):
        linprog = pytest.importorskip("scipy.optimize").linprog
        for i in range(8):
            ds = derive_dataset(random_joint(3, mix_seed(15, 3, 0, i)))
            q = parse_query("P(y1_x1,y3_x2)" if i % 2 else "P(y2_x1,y1_x2,y3_x3)")
            lp = build_lp(ds, q, MIN)
            ours_min = solve(lp)
            ours_max = solve(replace(lp, sense=MAX))
            A, b = lp.A.astype(float), lp.b
            c = lp.objective.astype(float)
            ref_min = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs").fun
            ref_max = -linprog(-c, A_eq=A, b_eq=b, bounds=(0, None), method="highs").fun
            assert ours_min == pytest.approx(ref_min, abs=1e-8)
            assert ours_max == pytest.approx(ref_max, abs=1e-8)
