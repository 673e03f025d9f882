import numpy as np
import pytest

from conftest import chain_mdp
from gailkit.envs import GridworldConfig, tabularize
from gailkit.errors import ConvergenceError
from gailkit.irl_dual import default_step_size, irl_dual_ascent, rl_after_irl, saddle_check
from gailkit.mdp import TabularMdp, lagrangian_value, occupancy_measure, random_mdp, random_policy
from gailkit.regularizers import CostClass, IndicatorRegularizer
from gailkit.soft_rl import soft_value_iteration

UNIFORM2 = np.full((2, 2), 0.5)


def converged_chain(tol=1e-9):
    mdp = chain_mdp()
    rho_e = occupancy_measure(mdp, UNIFORM2)
    return mdp, rho_e, irl_dual_ascent(mdp, rho_e, step_size=0.5, iters=5000, tol=tol)


def test_chain_uniform_expert_gap_vanishes():
    mdp, rho_e, state = converged_chain(tol=1e-4)
    assert state.primal_gap <= 1e-3
    np.testing.assert_allclose(occupancy_measure(mdp, state.policy), rho_e, atol=1e-3)


def test_history_is_monotone_in_iterate_and_nonnegative():
    _, _, state = converged_chain(tol=1e-4)
    its = [it for it, _ in state.history]
    assert its == sorted(its) and all(g >= 0 for _, g in state.history)


def test_zero_step_keeps_cost_and_gap(rng):
    mdp = random_mdp(3, 2, 0.9, rng)
    rho_e = occupancy_measure(mdp, random_policy(3, 2, rng))
    c0 = rng.normal(size=mdp.shape)
    state = irl_dual_ascent(mdp, rho_e, step_size=0.0, iters=20, cost_init=c0)
    np.testing.assert_array_equal(state.cost, c0)
    gaps = [g for _, g in state.history]
    assert max(gaps) - min(gaps) <= 1e-12


def test_soft_optimal_expert_recovered(rng):
    mdp = random_mdp(4, 3, 0.8, rng)
    c0 = rng.normal(size=mdp.shape)
    rho_e = occupancy_measure(mdp, soft_value_iteration(mdp, c0).policy)
    state = irl_dual_ascent(mdp, rho_e, step_size=0.5, iters=5000, tol=1e-6)
    assert state.primal_gap <= 1e-6
    # recovered policy reproduces the expert measure, whatever the recovered cost
    rho_tilde = occupancy_measure(mdp, soft_value_iteration(mdp, state.cost).policy)
    np.testing.assert_allclose(rho_tilde, rho_e, atol=1e-6)


def test_gap_trend_non_increasing_over_windows():
    mdp = tabularize(GridworldConfig())
    rho_e = occupancy_measure(mdp, soft_value_iteration(mdp, mdp.true_cost).policy)
    state = irl_dual_ascent(mdp, rho_e, iters=300)
    gaps = np.array([g for _, g in state.history])
    windows = gaps[: len(gaps) // 50 * 50].reshape(-1, 50).mean(1)
    assert np.all(np.diff(windows) <= 0)


def test_gridworld_exact_match_absolute_tolerance():
    mdp = tabularize(GridworldConfig(width=5, height=5, slip=0.1, discount=0.95))
    rho_e = occupancy_measure(mdp, soft_value_iteration(mdp, mdp.true_cost).policy)
    pi = rl_after_irl(mdp, rho_e, tol=1e-3, step_size=0.5)
    assert np.abs(occupancy_measure(mdp, pi) - rho_e).sum() <= 1e-3


def test_uniform_expert_gives_flat_cost(rng):
    mdp = random_mdp(3, 3, 0.8, rng)
    rho_e = occupancy_measure(mdp, np.full(mdp.shape, 1 / 3))
    state = irl_dual_ascent(mdp, rho_e, step_size=0.5, iters=3000, tol=1e-8)
    np.testing.assert_allclose(state.policy, 1 / 3, atol=1e-6)
    spread = state.cost.max(1) - state.cost.min(1)
    assert np.all(spread <= 1e-5)


def test_single_action_mdp_matches_trivially(rng):
    P = rng.dirichlet(np.ones(3), size=(3, 1))
    mdp = TabularMdp(P, np.full(3, 1 / 3), 0.9)
    rho_e = occupancy_measure(mdp, np.ones((3, 1)))
    pi = rl_after_irl(mdp, rho_e, iters=1)
    np.testing.assert_allclose(occupancy_measure(mdp, pi), rho_e, atol=1e-12)


def test_rl_after_irl_reports_nonconvergence(rng):
    mdp = random_mdp(3, 2, 0.9, rng)
    rho_e = occupancy_measure(mdp, random_policy(3, 2, rng, concentration=0.3))
    with pytest.raises(ConvergenceError) as info:
        rl_after_irl(mdp, rho_e, tol=1e-12, iters=3)
    assert info.value.history


def test_divergence_raises_with_history(rng):
    mdp = random_mdp(3, 2, 0.9, rng)
    # near-uniform expert: the zero-cost start is already close, a huge step overshoots
    rho_e = occupancy_measure(mdp, np.array([[0.51, 0.49], [0.49, 0.51], [0.5, 0.5]]))
    with pytest.raises(ConvergenceError) as info:
        irl_dual_ascent(mdp, rho_e, step_size=1e4, iters=200)
    assert len(info.value.history) >= 2


def test_default_step_size():
    assert default_step_size(chain_mdp(0.9)) == pytest.approx(0.05)


def test_constant_shift_of_recovered_cost_keeps_policy():
    mdp, _, state = converged_chain(tol=1e-6)
    a = soft_value_iteration(mdp, state.cost).policy
    b = soft_value_iteration(mdp, state.cost + 5.0).policy
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_primal_recovered_from_dual_optimum(rng):
    mdp = random_mdp(3, 2, 0.85, rng)
    rho_e = occupancy_measure(mdp, random_policy(3, 2, rng))
    state = irl_dual_ascent(mdp, rho_e, step_size=0.5, iters=5000, tol=1e-8)
    # the minimizer of L-bar(., c_tilde) over feasible measures is the soft-optimal one
    best = occupancy_measure(mdp, soft_value_iteration(mdp, state.cost).policy)
    np.testing.assert_allclose(best, rho_e, atol=1e-7)
    base = lagrangian_value(best, state.cost)
    for _ in range(50):
        other = occupancy_measure(mdp, random_policy(3, 2, rng))
        assert lagrangian_value(other, state.cost) >= base - 1e-10


# --- saddle point -----------------------------------------------------------------

def test_saddle_at_convergence():
    mdp, rho_e, state = converged_chain(tol=1e-9)
    report = saddle_check(mdp, state.rho, state.cost, rho_e, n_probes=200,
                          rng=np.random.default_rng(1))
    assert report.max_violation <= 1e-6
    assert report.max_flow_residual <= 1e-9


def test_saddle_violated_after_one_step():
    mdp = chain_mdp()
    rho_e = occupancy_measure(mdp, np.array([[0.9, 0.1], [0.3, 0.7]]))
    state = irl_dual_ascent(mdp, rho_e, step_size=0.5, iters=1)
    report = saddle_check(mdp, state.rho, state.cost, rho_e, n_probes=50,
                          rng=np.random.default_rng(2))
    assert report.max_violation > 0


def test_saddle_probes_feasible(rng):
    mdp = random_mdp(4, 3, 0.9, rng)
    rho = occupancy_measure(mdp, random_policy(4, 3, rng))
    report = saddle_check(mdp, rho, np.zeros(mdp.shape), rho, n_probes=100, rng=rng)
    assert report.max_flow_residual <= 1e-9 and report.n_probes == 100


# --- indicator regularizer ------------------------------------------------------------

@pytest.mark.parametrize("kind", ["linear_ball", "convex_hull"])
def test_indicator_ascent_stays_in_class(kind, rng):
    mdp = random_mdp(3, 2, 0.9, rng)
    rho_e = occupancy_measure(mdp, random_policy(3, 2, rng))
    cls = CostClass(kind, rng.normal(size=mdp.shape + (3,)))
    state = irl_dual_ascent(mdp, rho_e, IndicatorRegularizer(cls), step_size=0.05, iters=200)
    assert cls.contains(state.cost)
