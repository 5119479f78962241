"""Kernel-level tests: both simplex backends must agree with each other,
with the exact solver, and with an external reference."""

from fractions import Fraction

import numpy as np
import pytest

from pocbounds._simplex import BACKEND, _pure
from pocbounds._simplex._exact import solve_standard_form_exact
from pocbounds.lp import build_lp
from pocbounds.query import parse_query
from pocbounds.scm import derive_dataset, mix_seed, random_joint

try:
    from pocbounds._simplex import _core
except ImportError:
    _core = None

BACKENDS = [("pure", _pure.solve_standard_form)]
if _core is not None:
    BACKENDS.append(("cython", _core.solve_standard_form))


def toy_problem():
    # objective 1 + x2 over x2 in [0, 0.5]: min 1 (x2=0), max 1.5 (x2=0.5)
    A = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 0.5])
    c = np.array([1.0, 2.0, 0.0])
    return A, b, c


@pytest.mark.parametrize("name,solver", BACKENDS)
class TestBackends:
    def test_toy_min_max(self, name, solver):
        A, b, c = toy_problem()
        status, value = solver(A, b, c, False)
        assert status == 0 and value == pytest.approx(1.0)
        status, value = solver(A, b, c, True)
        assert status == 0 and value == pytest.approx(1.5)

    def test_infeasible(self, name, solver):
        A = np.array([[1.0], [1.0]])
        b = np.array([1.0, 2.0])
        c = np.array([1.0])
        status, _ = solver(A, b, c, False)
        assert status == 1

    def test_unbounded(self, name, solver):
        A = np.array([[0.0, 1.0]])
        b = np.array([1.0])
        c = np.array([-1.0, 0.0])
        status, _ = solver(A, b, c, False)
        assert status == 2

    def test_redundant_rows(self, name, solver):
        A = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])
        b = np.array([1.0, 1.0, 2.0])
        c = np.array([3.0, 1.0])
        status, value = solver(A, b, c, False)
        assert status == 0 and value == pytest.approx(1.0)

    def test_negative_rhs_rows_flipped(self, name, solver):
        A = np.array([[-1.0, -1.0]])
        b = np.array([-1.0])
        c = np.array([1.0, 2.0])
        status, value = solver(A, b, c, False)
        assert status == 0 and value == pytest.approx(1.0)


class TestBackendAgreement:
    @pytest.mark.skipif(_core is None, reason="compiled kernel unavailable")
    def test_backends_match_on_oracle_problems(self):
        for i in range(10):
            ds = derive_dataset(random_joint(3, mix_seed(200, 3, 0, i)))
            lp = build_lp(ds, parse_query("P(y1_x1,y2_x2,y3_x3)"), "min")
            A = lp.A.astype(np.float64)
            c = lp.objective.astype(np.float64)
            for maximize in (False, True):
                s1, v1 = _pure.solve_standard_form(A, lp.b, c, maximize)
                s2, v2 = _core.solve_standard_form(A, lp.b, c, maximize)
                assert s1 == s2 == 0
                assert v1 == pytest.approx(v2, abs=1e-9)

    def test_exact_matches_float_on_toy(self):
        A, b, c = toy_problem()
        rows = [[Fraction(v).limit_denominator() for v in row] for row in A]
        bf = [Fraction(v).limit_denominator() for v in b]
        cf = [Fraction(v).limit_denominator() for v in c]
        status, value = solve_standard_form_exact(rows, bf, cf, False)
        assert status == 0 and value == Fraction(1)
        status, value = solve_standard_form_exact(rows, bf, cf, True)
        assert status == 0 and value == Fraction(3, 2)


def test_backend_name_reported():
    assert BACKEND in ("cython", "pure-python")
