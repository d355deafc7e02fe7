import numpy as np
import pytest

import oracles
from irlsvm.simplex import (
    EQUAL,
    GREATER_EQUAL,
    INFEASIBLE,
    LESS_EQUAL,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    check_feasible,
    solve,
)


def lp(c, constraints, bounds=None):
    return LinearProgram.build(c, constraints, bounds)


class TestSolveExamples:
    def test_single_variable(self):
        sol = solve(lp([-1.0], [([1.0], LESS_EQUAL, 1.0)], [(0, None)]))
        assert sol.status == OPTIMAL
        assert sol.x[0] == pytest.approx(1.0, abs=1e-10)
        assert sol.objective_value == pytest.approx(-1.0, abs=1e-10)

    def test_two_vertex_choice(self):
        sol = solve(lp([1.0, 1.0], [([1.0, 2.0], GREATER_EQUAL, 2.0)], [(0, None)] * 2))
        assert sol.status == OPTIMAL
        np.testing.assert_allclose(sol.x, [0.0, 1.0], atol=1e-10)
        assert sol.objective_value == pytest.approx(1.0, abs=1e-10)

    def test_unbounded(self):
        sol = solve(lp([-1.0], [], [(0, None)]))
        assert sol.status == UNBOUNDED
        assert sol.x is None

    def test_infeasible(self):
        sol = solve(lp([1.0], [([1.0], GREATER_EQUAL, 1.0), ([1.0], LESS_EQUAL, 0.0)]))
        assert sol.status == INFEASIBLE

    def test_equality_and_free_variable(self):
        # min x1 - x2 s.t. x1 + x2 = 1, x2 <= 3, both free
        sol = solve(lp([1.0, -1.0], [([1.0, 1.0], EQUAL, 1.0), ([0.0, 1.0], LESS_EQUAL, 3.0)]))
        assert sol.status == OPTIMAL
        np.testing.assert_allclose(sol.x, [-2.0, 3.0], atol=1e-9)
        assert sol.objective_value == pytest.approx(-5.0, abs=1e-9)

    def test_negative_lower_bounds(self):
        sol = solve(lp([1.0, 1.0], [([1.0, 1.0], GREATER_EQUAL, -3.0)], [(-2, 2), (-2, 2)]))
        assert sol.status == OPTIMAL
        assert sol.objective_value == pytest.approx(-3.0, abs=1e-9)

    def test_upper_bounded_only_variable(self):
        sol = solve(lp([-1.0], [], [(None, 4.0)]))
        assert sol.status == OPTIMAL
        assert sol.x[0] == pytest.approx(4.0)
        sol2 = solve(lp([1.0], [], [(None, 4.0)]))
        assert sol2.status == UNBOUNDED


class TestCheckFeasible:
    def test_contradictory(self):
        assert not check_feasible(
            lp([0.0], [([1.0], GREATER_EQUAL, 1.0), ([1.0], LESS_EQUAL, 0.0)])
        )

    def test_simplex_point(self):
        assert check_feasible(
            lp([0.0, 0.0], [([1.0, 1.0], EQUAL, 1.0)], [(0, None)] * 2)
        )

    def test_antipodal_margin_rows(self):
        # unit-margin constraints on antipodal rows force 0 >= 2
        rows = [([1.0, -1.0], GREATER_EQUAL, 1.0), ([-1.0, 1.0], GREATER_EQUAL, 1.0)]
        assert not check_feasible(lp([0.0, 0.0], rows))


class TestAgainstVertexEnumeration:
    def test_500_random_boxed_lps(self):
        rng = np.random.default_rng(20240601)
        statuses = {"optimal": 0, "infeasible": 0}
        for _ in range(500):
            c, rows, rels, rhs, lower, upper = oracles.random_boxed_lp(rng)
            expected_status, expected_obj = oracles.enumerate_boxed_lp(
                c, rows, rels, rhs, lower, upper
            )
            sol = solve(
                lp(c, list(zip(rows, rels, rhs)), list(zip(lower, upper)))
            )
            assert sol.status == expected_status, (c, rows, rels, rhs, lower, upper)
            if expected_status == "optimal":
                assert sol.objective_value == pytest.approx(expected_obj, abs=1e-7)
            statuses[expected_status] += 1
        # both branches must actually be exercised
        assert statuses["optimal"] > 100 and statuses["infeasible"] > 100

    def test_optimal_solutions_respect_constraints_and_bounds(self):
        rng = np.random.default_rng(77)
        seen = 0
        for _ in range(200):
            c, rows, rels, rhs, lower, upper = oracles.random_boxed_lp(rng)
            sol = solve(lp(c, list(zip(rows, rels, rhs)), list(zip(lower, upper))))
            if sol.status != OPTIMAL:
                continue
            seen += 1
            lhs = np.asarray(rows) @ sol.x
            for r, rel in enumerate(rels):
                if rel == LESS_EQUAL:
                    assert lhs[r] <= rhs[r] + 1e-8
                elif rel == GREATER_EQUAL:
                    assert lhs[r] >= rhs[r] - 1e-8
                else:
                    assert abs(lhs[r] - rhs[r]) <= 1e-8
            assert np.all(sol.x >= lower) and np.all(sol.x <= upper)  # exact
        assert seen > 50


class TestBuildValidation:
    def test_bad_relation(self):
        with pytest.raises(ValueError):
            lp([1.0], [([1.0], "<", 0.0)])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            lp([1.0, 2.0], [([1.0], LESS_EQUAL, 0.0)])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            lp([np.inf], [([1.0], LESS_EQUAL, 0.0)])

    def test_crossed_bounds_rejected(self):
        with pytest.raises(ValueError):
            lp([1.0], [], [(2.0, 1.0)])
