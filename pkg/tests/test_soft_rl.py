import numpy as np
import pytest
from hypothesis import given, strategies as st

from gailkit.errors import ConvergenceError
from gailkit.mdp import TabularMdp, causal_entropy_policy, random_mdp, random_policy
from gailkit.soft_rl import exact_policy_objective, soft_min, soft_value_iteration, start_value


def one_state(n_actions, gamma, costs):
    return TabularMdp(np.ones((1, n_actions, 1)), np.ones(1), gamma, np.array([costs], float))


def test_one_state_two_actions_closed_form():
    mdp = one_state(2, 0.5, [1.0, 1.0])
    sol = soft_value_iteration(mdp, mdp.true_cost)
    assert sol.v_values[0] == pytest.approx((1 - np.log(2)) / 0.5, abs=1e-9)
    assert sol.v_values[0] == pytest.approx(0.613706, abs=1e-6)
    np.testing.assert_allclose(sol.policy, [[0.5, 0.5]], atol=1e-12)


@pytest.mark.parametrize("c,gamma", [(1.0, 0.5), (-2.0, 0.9), (0.3, 0.99)])
def test_one_state_one_action(c, gamma):
    mdp = one_state(1, gamma, [c])
    sol = soft_value_iteration(mdp, mdp.true_cost)
    assert sol.v_values[0] == pytest.approx(c / (1 - gamma), rel=1e-8)
    assert causal_entropy_policy(mdp, sol.policy) == 0.0


def test_cheaper_action_preferred_everywhere(rng):
    mdp = random_mdp(5, 3, 0.9, rng)
    cost = rng.uniform(0.5, 1.0, size=mdp.shape)
    cost[:, 1] = 0.1
    sol = soft_value_iteration(mdp, cost)
    assert np.all(sol.policy[:, 1] > 1 / 3)


def test_soft_min_stable_for_large_costs():
    q = np.array([[1000.0, 1001.0], [-1000.0, -1000.0]])
    np.testing.assert_allclose(soft_min(q), [1000 - np.log(1 + np.exp(-1)), -1000 - np.log(2)])


instances = st.tuples(st.integers(1, 4), st.integers(1, 4), st.floats(0.1, 0.95),
                      st.integers(0, 2**31 - 1))


@given(instances)
def test_softmax_consistency(spec):
    n_s, n_a, gamma, seed = spec
    rng = np.random.default_rng(seed)
    mdp = random_mdp(n_s, n_a, gamma, rng)
    sol = soft_value_iteration(mdp, rng.normal(size=mdp.shape))
    v = -np.log(np.exp(-sol.q_values).sum(1))
    np.testing.assert_allclose(sol.v_values, v, atol=1e-10)
    np.testing.assert_allclose(sol.policy, np.exp(sol.v_values[:, None] - sol.q_values), atol=1e-10)
    np.testing.assert_allclose(sol.policy.sum(1), 1.0, atol=1e-12)


@given(instances)
def test_objective_equals_start_value(spec):
    n_s, n_a, gamma, seed = spec
    rng = np.random.default_rng(seed)
    mdp = random_mdp(n_s, n_a, gamma, rng)
    cost = rng.normal(size=mdp.shape)
    sol = soft_value_iteration(mdp, cost)
    obj = exact_policy_objective(mdp, sol.policy, cost)
    assert obj == pytest.approx(start_value(mdp, sol), abs=1e-8)
    assert start_value(mdp, sol) == pytest.approx(mdp.start_dist @ sol.v_values, abs=1e-12)


def test_optimal_beats_perturbed_policies(rng):
    mdp = random_mdp(4, 3, 0.9, rng)
    cost = rng.normal(size=mdp.shape)
    sol = soft_value_iteration(mdp, cost)
    best = exact_policy_objective(mdp, sol.policy, cost)
    for _ in range(200):
        noisy = sol.policy * np.exp(rng.normal(scale=0.3, size=mdp.shape))
        noisy /= noisy.sum(1, keepdims=True)
        assert best <= exact_policy_objective(mdp, noisy, cost) + 1e-9


def test_optimal_beats_random_policies_on_3x3():
    rng = np.random.default_rng(11)
    for _ in range(3):
        mdp = random_mdp(3, 3, 0.8, rng)
        cost = rng.normal(size=mdp.shape)
        best = exact_policy_objective(mdp, soft_value_iteration(mdp, cost).policy, cost)
        others = [exact_policy_objective(mdp, random_policy(3, 3, rng), cost) for _ in range(1000)]
        assert best <= min(others) + 1e-9


def test_zero_cost_is_minimized_by_uniform(rng):
    mdp = random_mdp(4, 3, 0.9, rng)
    zero = np.zeros(mdp.shape)
    sol = soft_value_iteration(mdp, zero)
    np.testing.assert_allclose(sol.policy, np.full(mdp.shape, 1 / 3), atol=1e-12)
    pi = random_policy(4, 3, rng)
    assert exact_policy_objective(mdp, pi, zero) == pytest.approx(-causal_entropy_policy(mdp, pi))


def test_nonconvergence_carries_residual(rng):
    mdp = random_mdp(3, 2, 0.99, rng)
    with pytest.raises(ConvergenceError) as info:
        soft_value_iteration(mdp, np.ones(mdp.shape), tol=1e-12, max_iters=5)
    assert info.value.residual > 1e-12


def test_rejects_nonpositive_tol(rng):
    mdp = random_mdp(2, 2, 0.9, rng)
    with pytest.raises(ValueError):
        soft_value_iteration(mdp, np.zeros(mdp.shape), tol=0.0)


def test_residual_contracts_by_gamma(rng):
    # successive sup-norm changes shrink at least by the discount factor
    mdp = random_mdp(4, 2, 0.7, rng)
    cost = rng.normal(size=mdp.shape)
    v, changes = np.zeros(4), []
    for _ in range(30):
        q = cost + mdp.discount * mdp.transition @ v
        v_new = soft_min(q)
        changes.append(np.abs(v_new - v).max())
        v = v_new
    changes = np.array(changes)
    keep = changes[:-1] > 1e-8  # below this the ratio is rounding noise
    ratios = changes[1:][keep] / changes[:-1][keep]
    assert len(ratios) > 10
    assert np.all(ratios <= mdp.discount * (1 + 1e-9))
    sol = soft_value_iteration(mdp, cost)
    np.testing.assert_allclose(sol.v_values, v, atol=1e-4)


def test_shift_in_cost_leaves_policy_unchanged(rng):
    mdp = random_mdp(4, 3, 0.9, rng)
    cost = rng.normal(size=mdp.shape)
    a = soft_value_iteration(mdp, cost)
    b = soft_value_iteration(mdp, cost + 3.7)
    np.testing.assert_allclose(a.policy, b.policy, atol=1e-9)
    np.testing.assert_allclose(b.v_values - a.v_values, 3.7 / (1 - mdp.discount), atol=1e-8)
