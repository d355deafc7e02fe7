import numpy as np
import pytest

import oracles
from irlsvm.mdp import (
    DimensionMismatch,
    FeatureRows,
    Mdp,
    NegativeEntry,
    RowSumViolation,
    bellman_margin,
    discounted_resolvent,
    feature_rows,
    induced_row_norm,
    matrix_sup_norm,
    mdp_from_dict,
    mdp_to_dict,
    optimal_policy_oracle,
    q_values,
    validate_transition_model,
    value_of_policy,
)


def make_mdp(p, gamma, a1=0):
    return Mdp(validate_transition_model(p), gamma=gamma, optimal_action=a1)


class TestValidateTransitionModel:
    def test_identity_rows_valid(self):
        model = validate_transition_model([np.eye(3), np.eye(3)])
        assert model.n == 3 and model.k == 2

    def test_row_sum_violation(self):
        p = [[[0.5, 0.6], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]]
        with pytest.raises(RowSumViolation) as exc:
            validate_transition_model(p)
        assert exc.value.action == 0 and exc.value.row == 0
        assert exc.value.actual_sum == pytest.approx(1.1)

    def test_negative_entry(self):
        p = [[[-0.1, 1.1], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]]
        with pytest.raises(NegativeEntry) as exc:
            validate_transition_model(p)
        assert (exc.value.action, exc.value.row, exc.value.col) == (0, 0, 0)

    def test_dimension_errors(self):
        with pytest.raises(DimensionMismatch):
            validate_transition_model(np.ones((2, 2)))
        with pytest.raises(DimensionMismatch):
            validate_transition_model(np.ones((1, 2, 2)))  # k < 2
        with pytest.raises(DimensionMismatch):
            validate_transition_model(np.ones((2, 2, 3)))

    def test_nan_row_rejected(self):
        p = np.full((2, 2, 2), 0.5)
        p[1, 1, 0] = np.nan
        with pytest.raises(RowSumViolation):
            validate_transition_model(p)

    def test_no_renormalization(self):
        p = [[[0.3, 0.7], [0.25, 0.75]], [[1.0, 0.0], [0.0, 1.0]]]
        model = validate_transition_model(p)
        np.testing.assert_array_equal(model.p, np.asarray(p, dtype=float))


class TestNorms:
    def test_stochastic_induced_norm_is_one(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = oracles.random_stochastic(rng, int(rng.integers(2, 8)))
            assert induced_row_norm(p) == pytest.approx(1.0, abs=1e-12)

    def test_hand_matrix(self):
        a = [[1.0, -2.0], [0.0, 3.0]]
        assert matrix_sup_norm(a) == 3.0
        assert induced_row_norm(a) == 3.0

    def test_zero_matrix(self):
        z = np.zeros((3, 4))
        assert matrix_sup_norm(z) == 0.0
        assert induced_row_norm(z) == 0.0

    def test_product_norm_inequality(self):
        # |AB|_sup <= induced(A) * |B|_sup on random pairs
        rng = np.random.default_rng(99)
        for _ in range(500):
            p, q, r = rng.integers(1, 7, size=3)
            a = rng.normal(size=(p, q)) * rng.uniform(0.1, 5)
            b = rng.normal(size=(q, r)) * rng.uniform(0.1, 5)
            lhs = matrix_sup_norm(a @ b)
            rhs = induced_row_norm(a) * matrix_sup_norm(b)
            assert lhs <= rhs + 1e-12 * (1 + rhs)


class TestResolvent:
    def test_identity_geometric(self):
        np.testing.assert_allclose(
            discounted_resolvent(np.eye(2), 0.5), 2.0 * np.eye(2), atol=1e-12
        )

    def test_two_state_mixing(self):
        p = np.full((2, 2), 0.5)
        m = discounted_resolvent(p, 0.5)
        np.testing.assert_allclose(m, [[1.5, 0.5], [0.5, 1.5]], atol=1e-12)
        np.testing.assert_allclose(m, oracles.neumann_resolvent(p, 0.5, 60), atol=1e-12)

    def test_gamma_zero(self):
        rng = np.random.default_rng(3)
        p = oracles.random_stochastic(rng, 4)
        np.testing.assert_array_equal(discounted_resolvent(p, 0.0), np.eye(4))

    def test_gamma_one_rejected(self):
        with pytest.raises(ValueError):
            discounted_resolvent(np.eye(2), 1.0)

    def test_resolvent_identity_property(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(2, 7))
            p = oracles.random_stochastic(rng, n)
            gamma = float(rng.uniform(0.0, 0.95))
            m = discounted_resolvent(p, gamma)
            residual = (np.eye(n) - gamma * p) @ m - np.eye(n)
            assert np.abs(residual).max() <= 1e-9


class TestFeatureRows:
    def test_gamma_zero_rows(self):
        mdp = make_mdp([[[0.9, 0.1], [0.2, 0.8]], [[0.1, 0.9], [0.1, 0.9]]], 0.0)
        f = feature_rows(mdp)
        assert f.pairs == ((1, 0), (1, 1))
        np.testing.assert_allclose(f.matrix, [[0.8, -0.8], [0.1, -0.1]], atol=1e-15)
        assert f.provenance == "exact"

    def test_resolvent_coupling(self):
        p = [[[0.5, 0.5], [0.5, 0.5]], [[1.0, 0.0], [0.3, 0.7]]]
        mdp = make_mdp(p, 0.5)
        f = feature_rows(mdp)
        np.testing.assert_allclose(f.matrix[0], [-0.5, 0.5], atol=1e-12)
        # cross-check against the truncated series
        resolvent = oracles.neumann_resolvent(np.full((2, 2), 0.5), 0.5, 60)
        expected = (np.array([0.5, 0.5]) - np.array([1.0, 0.0])) @ resolvent
        np.testing.assert_allclose(f.matrix[0], expected, atol=1e-12)

    def test_identical_actions_flag_zero_rows(self):
        p = [[[0.4, 0.6], [0.3, 0.7]]] * 2
        mdp = make_mdp(p, 0.3)
        with pytest.warns(RuntimeWarning):
            f = feature_rows(mdp)
        assert f.zero_rows == ((1, 0), (1, 1))
        np.testing.assert_allclose(f.matrix, 0.0, atol=1e-15)

    def test_rows_sum_to_zero_property(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(2, 6))
            k = int(rng.integers(2, 5))
            p = oracles.random_model(rng, n, k)
            gamma = float(rng.uniform(0.0, 0.95))
            f = feature_rows(Mdp(validate_transition_model(p), gamma))
            assert f.matrix.shape == ((k - 1) * n, n)
            assert np.abs(f.matrix.sum(axis=1)).max() <= 1e-9

    def test_ordering_respects_optimal_action(self):
        rng = np.random.default_rng(5)
        p = oracles.random_model(rng, 3, 3)
        f = feature_rows(Mdp(validate_transition_model(p), 0.2, optimal_action=1))
        assert f.pairs == ((0, 0), (0, 1), (0, 2), (2, 0), (2, 1), (2, 2))

    def test_from_rows_ad_hoc(self):
        f = FeatureRows.from_rows([[1.0, 0.0], [0.0, 1.0]])
        assert f.pairs == ((1, 0), (1, 1))
        assert f.n == 2 and len(f.rows) == 2


class TestValueOfPolicy:
    def test_identity_geometric(self):
        mdp = make_mdp([np.eye(2), np.full((2, 2), 0.5)], 0.5)
        np.testing.assert_allclose(value_of_policy(mdp, [0, 0], [1, 0]), [2, 0], atol=1e-12)

    def test_gamma_zero_returns_reward(self):
        rng = np.random.default_rng(8)
        mdp = make_mdp(oracles.random_model(rng, 3, 2), 0.0)
        r = rng.normal(size=3)
        np.testing.assert_allclose(value_of_policy(mdp, [1, 0, 1], r), r, atol=1e-14)

    def test_swap_dynamics(self):
        mdp = make_mdp([np.eye(2), [[0, 1], [1, 0]]], 0.5)
        v = value_of_policy(mdp, [1, 1], [1, 0])
        np.testing.assert_allclose(v, [4 / 3, 2 / 3], atol=1e-12)
        rollout = oracles.rollout_value(np.array([[0.0, 1.0], [1.0, 0.0]]), 0.5, np.array([1.0, 0.0]))
        np.testing.assert_allclose(v, rollout, atol=1e-12)

    def test_policy_validation(self):
        mdp = make_mdp([np.eye(2), np.eye(2)], 0.5)
        with pytest.raises(ValueError):
            value_of_policy(mdp, [0, 2], [0, 0])
        with pytest.raises(ValueError):
            value_of_policy(mdp, [0], [0, 0])


class TestQValues:
    def test_gamma_zero(self):
        mdp = make_mdp([np.eye(2), np.full((2, 2), 0.5)], 0.0)
        q = q_values(mdp, [5.0, -1.0], [1.0, 2.0])
        np.testing.assert_array_equal(q, [[1.0, 1.0], [2.0, 2.0]])

    def test_fixed_point_of_stay_policy(self):
        mdp = make_mdp([np.eye(2), np.full((2, 2), 0.5)], 0.5)
        v = value_of_policy(mdp, [0, 0], [1, 0])
        q = q_values(mdp, v, [1, 0])
        np.testing.assert_allclose(q[:, 0], [2.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(q[:, 0], v, atol=1e-12)  # Q(s, pi) = V at the fixed point

    def test_zero_value(self):
        mdp = make_mdp([np.eye(3), np.full((3, 3), 1 / 3)], 0.9)
        r = np.array([1.0, -2.0, 0.5])
        q = q_values(mdp, np.zeros(3), r)
        np.testing.assert_array_equal(q, np.repeat(r[:, None], 2, axis=1))


class TestBellmanMargin:
    F = FeatureRows.from_rows([[0.8, -0.8], [0.1, -0.1]])

    def test_zero_reward_zero_margin(self):
        margin, _ = bellman_margin(self.F, [0.0, 0.0])
        assert margin == 0.0

    def test_positive_case(self):
        margin, pair = bellman_margin(self.F, [1.0, 0.0])
        assert margin == pytest.approx(0.1, abs=1e-15)
        assert pair == (1, 1)

    def test_negative_case(self):
        margin, pair = bellman_margin(self.F, [0.0, 1.0])
        assert margin == pytest.approx(-0.8, abs=1e-15)
        assert pair == (1, 0)


class TestOptimalPolicyOracle:
    def test_stay_swap_enumeration(self):
        mdp = make_mdp([np.eye(2), [[0, 1], [1, 0]]], 0.5)
        r = np.array([1.0, 0.0])
        policy, is_a1 = optimal_policy_oracle(mdp, r, 1e-10)
        np.testing.assert_array_equal(policy, [0, 1])
        assert not is_a1
        # brute force over all four deterministic policies agrees
        best = oracles.enumerate_policies_best(mdp.p, 0.5, r)
        np.testing.assert_allclose(value_of_policy(mdp, policy, r), best, atol=1e-8)

    def test_zero_reward(self):
        rng = np.random.default_rng(10)
        mdp = make_mdp(oracles.random_model(rng, 4, 3), 0.7)
        _, is_a1 = optimal_policy_oracle(mdp, np.zeros(4), 1e-10)
        assert is_a1

    def test_margin_oracle_agreement(self):
        rng = np.random.default_rng(2024)
        checked_forward = checked_backward = 0
        for _ in range(200):
            n = int(rng.integers(2, 5))
            k = int(rng.integers(2, 4))
            mdp = make_mdp(oracles.random_model(rng, n, k), float(rng.uniform(0, 0.9)))
            r = rng.normal(size=n)
            f = feature_rows(mdp)
            margin, _ = bellman_margin(f, r)
            policy, is_a1 = optimal_policy_oracle(mdp, r, 1e-10)
            if margin >= 1e-8:
                assert is_a1
                checked_forward += 1
            if is_a1 and mdp.gamma > 0:
                v = value_of_policy(mdp, np.full(n, mdp.optimal_action), r)
                q = q_values(mdp, v, r)
                gaps = q[:, mdp.optimal_action, None] - q
                if np.all(np.delete(gaps, mdp.optimal_action, axis=1) > 1e-6):
                    assert margin >= -1e-8
                    checked_backward += 1
        assert checked_forward > 10 and checked_backward > 10


class TestJsonRoundTrip:
    def test_mdp_dict_round_trip(self):
        rng = np.random.default_rng(31)
        mdp = Mdp(validate_transition_model(oracles.random_model(rng, 3, 2)), 0.4, 1)
        again = mdp_from_dict(mdp_to_dict(mdp))
        np.testing.assert_array_equal(again.p, mdp.p)
        assert again.gamma == mdp.gamma and again.optimal_action == 1

    def test_size_mismatch_rejected(self):
        data = mdp_to_dict(make_mdp([np.eye(2), np.eye(2)], 0.5))
        data["n"] = 3
        with pytest.raises(DimensionMismatch):
            mdp_from_dict(data)

    def test_gamma_one_rejected(self):
        with pytest.raises(ValueError):
            make_mdp([np.eye(2), np.eye(2)], 1.0)
