import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gailkit.mdp import (
    TabularMdp,
    causal_entropy_occupancy,
    occupancy_measure,
    random_mdp,
    random_policy,
)
from gailkit.regularizers import (
    EXPONENTIAL,
    LOGISTIC,
    ConstantRegularizer,
    CostClass,
    GARegularizer,
    GridBoundaryWarning,
    IndicatorRegularizer,
    SurrogateLoss,
    SurrogateRegularizer,
    apprenticeship_max_cost,
    closed_form_conjugate,
    conjugate_brute_force,
    discriminator_objective,
    eval_psi_ga,
    g_ga,
    g_ga_prime,
    ga_conjugate_grid,
    golden_section,
    jsd_occupancy,
    max_cost_weights,
    min_expected_risk,
    optimal_discriminator,
    project_ball,
    project_simplex,
    psi_ga_conjugate,
    psi_surrogate,
    surrogate_conjugate,
    surrogate_g_prime,
    surrogate_to_g,
)

LOG2 = np.log(2.0)


def measure_pair(rng, n_s=3, n_a=2, gamma=0.9):
    mdp = random_mdp(n_s, n_a, gamma, rng)
    return (occupancy_measure(mdp, random_policy(n_s, n_a, rng)),
            occupancy_measure(mdp, random_policy(n_s, n_a, rng)), mdp)


def two_by_one_pair(rng, gamma=0.9):
    """Two equal-mass 2x1 measures: one-action MDPs that differ only in the start state."""
    P = rng.dirichlet(np.ones(2), size=(2, 1))
    a = TabularMdp(P, rng.dirichlet(np.ones(2)), gamma)
    b = TabularMdp(P, rng.dirichlet(np.ones(2)), gamma)
    one = np.ones((2, 1))
    return occupancy_measure(a, one), occupancy_measure(b, one)


# --- g and psi_GA -----------------------------------------------------------

def test_g_at_minus_log2():
    assert g_ga(-LOG2) == pytest.approx(2 * LOG2, abs=1e-14)


def test_psi_ga_constant_cost(rng):
    _, rho_e, _ = measure_pair(rng)
    val = eval_psi_ga(np.full(rho_e.shape, -LOG2), rho_e)
    assert val == pytest.approx(2 * LOG2 * rho_e.sum(), abs=1e-10)


def test_psi_ga_infinite_for_nonnegative_cost(rng):
    _, rho_e, _ = measure_pair(rng)
    cost = np.full(rho_e.shape, -1.0)
    cost[1, 0] = 0.0
    assert eval_psi_ga(cost, rho_e) == np.inf
    cost[1, 0] = 0.3
    assert eval_psi_ga(cost, rho_e) == np.inf


def test_psi_ga_blows_up_near_zero(rng):
    _, rho_e, _ = measure_pair(rng)
    vals = [eval_psi_ga(np.full(rho_e.shape, -eps), rho_e) for eps in (1e-1, 1e-4, 1e-8, 1e-12)]
    assert np.all(np.diff(vals) > 0) and vals[-1] > 100


def test_g_convex_midpoint():
    rng = np.random.default_rng(3)
    x, y = rng.uniform(-20, -1e-6, size=(2, 10_000))
    assert np.all(g_ga((x + y) / 2) <= (g_ga(x) + g_ga(y)) / 2 + 1e-12)


def test_g_prime_matches_finite_difference():
    x = np.linspace(-8, -0.05, 50)
    h = 1e-6
    np.testing.assert_allclose(g_ga_prime(x), (g_ga(x + h) - g_ga(x - h)) / (2 * h), rtol=1e-6)


def test_ga_subgradient_is_gradient_of_psi(rng):
    _, rho_e, _ = measure_pair(rng)
    cost = -rng.uniform(0.2, 3.0, size=rho_e.shape)
    grad = GARegularizer(rho_e).subgradient(cost)
    h = 1e-6
    for idx in np.ndindex(cost.shape):
        e = np.zeros_like(cost)
        e[idx] = h
        fd = (eval_psi_ga(cost + e, rho_e) - eval_psi_ga(cost - e, rho_e)) / (2 * h)
        assert grad[idx] == pytest.approx(fd, rel=1e-6, abs=1e-9)


# --- conjugate, discriminator and JSD ------------------------------------------

def test_conjugate_equal_measures(rng):
    rho, _, _ = measure_pair(rng, gamma=0.9)
    assert psi_ga_conjugate(rho, rho) == pytest.approx(-20 * LOG2, abs=1e-9)
    assert psi_ga_conjugate(rho, rho) == pytest.approx(-13.862944, abs=1e-6)


def test_conjugate_disjoint_supports():
    a = np.array([[2.0, 0.0], [3.0, 0.0]])
    b = np.array([[0.0, 4.0], [0.0, 1.0]])
    assert psi_ga_conjugate(a, b) == 0.0
    assert jsd_occupancy(a, b) == pytest.approx(2 * LOG2 * 5.0)


def test_conjugate_matches_per_pair_grid_over_d(rng):
    rho_pi, rho_e, _ = measure_pair(rng)
    d_grid = np.linspace(0.001, 0.999, 999)
    a, b = rho_pi.ravel()[:, None], rho_e.ravel()[:, None]
    brute = np.sum(np.max(a * np.log(d_grid) + b * np.log(1 - d_grid), axis=1))
    # the optimum lies inside the grid, so the grid can only under-shoot slightly
    assert abs(brute - psi_ga_conjugate(rho_pi, rho_e)) <= 1e-6 * max(1.0, abs(brute)) * 10


def test_optimal_discriminator_is_per_pair_maximum(rng):
    rho_pi, rho_e, _ = measure_pair(rng)
    d_star = optimal_discriminator(rho_pi, rho_e)
    np.testing.assert_allclose(d_star, rho_pi / (rho_pi + rho_e))
    best = discriminator_objective(d_star, rho_pi, rho_e)
    assert best == pytest.approx(psi_ga_conjugate(rho_pi, rho_e), abs=1e-10)
    for sign in (-1, 1):
        for idx in np.ndindex(d_star.shape):
            d = d_star.copy()
            d[idx] += sign * 1e-3
            assert discriminator_objective(d, rho_pi, rho_e) <= best


def test_jsd_zero_for_equal_and_nonnegative(rng):
    rho, other, _ = measure_pair(rng)
    assert jsd_occupancy(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert jsd_occupancy(rho, other) >= 0


@given(st.integers(0, 2**31 - 1), st.floats(0.1, 0.99))
def test_conjugate_jsd_identity(seed, gamma):
    rng = np.random.default_rng(seed)
    rho_pi, rho_e, _ = measure_pair(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)), gamma)
    lhs = psi_ga_conjugate(rho_pi, rho_e)
    rhs = jsd_occupancy(rho_pi, rho_e) - 2 * LOG2 / (1 - gamma)
    assert abs(lhs - rhs) <= 1e-9


def test_ga_conjugate_grid_2x1(rng):
    rho_pi, rho_e = two_by_one_pair(rng)
    grid = np.log(np.linspace(0.0005, 0.9995, 2000))
    assert abs(ga_conjugate_grid(rho_pi, rho_e, grid) - psi_ga_conjugate(rho_pi, rho_e)) <= 1e-3


def test_ga_regularizer_conjugate_and_brute_force(rng):
    rho_pi, rho_e = two_by_one_pair(rng)
    psi = GARegularizer(rho_e)
    assert psi.conjugate(rho_pi - rho_e) == pytest.approx(psi_ga_conjugate(rho_pi, rho_e), abs=1e-12)
    grid = np.log(np.linspace(0.002, 0.998, 400))
    brute = conjugate_brute_force(psi, rho_pi - rho_e, grid)
    assert abs(brute - psi_ga_conjugate(rho_pi, rho_e)) <= 1e-3


# --- surrogate losses ------------------------------------------------------------

def test_logistic_reduces_to_g_at_minus_log2():
    assert surrogate_to_g(LOGISTIC, -LOG2) == pytest.approx(2 * LOG2, abs=1e-12)


def test_logistic_reduction_on_grid():
    x = np.linspace(-10, -0.01, 1000)
    np.testing.assert_allclose(surrogate_to_g(LOGISTIC, x), -x - np.log1p(-np.exp(x)),
                               atol=1e-10, rtol=0)


def test_exponential_reduction_on_grid():
    x = np.linspace(-10, -0.01, 1000)
    np.testing.assert_allclose(surrogate_to_g(EXPONENTIAL, x), -x - 1 / x, atol=1e-10, rtol=0)


@pytest.mark.parametrize("phi", [LOGISTIC, EXPONENTIAL])
def test_g_outside_range_is_infinite(phi):
    assert surrogate_to_g(phi, 0.5) == np.inf
    assert np.all(np.isinf(surrogate_to_g(phi, np.array([0.0, 2.0]))))


def test_phi_inverse_failure_raises_domain_error():
    bad = SurrogateLoss("bad", lambda t: np.exp(-t), lambda y: np.log(-y), (-np.inf, 0.0))
    with pytest.raises(ArithmeticError):
        surrogate_to_g(bad, -1.0)


@pytest.mark.parametrize("phi", [LOGISTIC, EXPONENTIAL])
def test_surrogate_losses_pass_their_checks(phi):
    phi.check()


def test_check_rejects_non_decreasing_loss():
    bad = SurrogateLoss("square", lambda t: np.asarray(t) ** 2, np.sqrt, (0.0, np.inf))
    with pytest.raises(ValueError):
        bad.check()


@pytest.mark.parametrize("phi", [LOGISTIC, EXPONENTIAL])
def test_g_prime_matches_finite_difference_for_surrogates(phi):
    x = np.linspace(-5, -0.1, 30)
    h = 1e-6
    fd = (surrogate_to_g(phi, x + h) - surrogate_to_g(phi, x - h)) / (2 * h)
    np.testing.assert_allclose(surrogate_g_prime(phi, x), fd, rtol=1e-6)


def test_logistic_risk_at_equal_measures(rng):
    rho, _, _ = measure_pair(rng)
    assert min_expected_risk(LOGISTIC, rho, rho) == pytest.approx(2 * LOG2 * rho.sum(), abs=1e-8)
    assert -min_expected_risk(LOGISTIC, rho, rho) == pytest.approx(psi_ga_conjugate(rho, rho), abs=1e-8)


def test_zero_measures_have_zero_risk():
    z = np.zeros((2, 2))
    assert min_expected_risk(LOGISTIC, z, z) == 0.0
    assert min_expected_risk(EXPONENTIAL, z, z) == 0.0


@pytest.mark.parametrize("phi", [LOGISTIC, EXPONENTIAL])
@pytest.mark.parametrize("seed", range(5))
def test_negative_risk_equals_conjugate(phi, seed):
    rho_pi, rho_e, _ = measure_pair(np.random.default_rng(seed))
    neg_risk = -min_expected_risk(phi, rho_pi, rho_e)
    assert neg_risk == pytest.approx(closed_form_conjugate(phi, rho_pi, rho_e), abs=1e-8)
    assert neg_risk == pytest.approx(surrogate_conjugate(phi, rho_pi, rho_e), abs=1e-8)


def test_logistic_conjugate_is_psi_ga_conjugate(rng):
    rho_pi, rho_e, _ = measure_pair(rng)
    assert closed_form_conjugate(LOGISTIC, rho_pi, rho_e) == pytest.approx(
        psi_ga_conjugate(rho_pi, rho_e), abs=1e-10)


def test_exponential_conjugate_brute_force():
    rng = np.random.default_rng(5)
    rho_pi, rho_e = two_by_one_pair(rng)
    psi = SurrogateRegularizer(EXPONENTIAL, rho_e)
    grid = np.linspace(-4.0, -0.25, 300)
    with warnings.catch_warnings():
        warnings.simplefilter("error", GridBoundaryWarning)
        brute = conjugate_brute_force(psi, rho_pi - rho_e, grid)
    assert abs(brute - -min_expected_risk(EXPONENTIAL, rho_pi, rho_e)) <= 1e-3


def test_surrogate_psi_matches_ga_for_logistic(rng):
    _, rho_e, _ = measure_pair(rng)
    cost = -rng.uniform(0.01, 5, size=rho_e.shape)
    assert psi_surrogate(cost, rho_e, LOGISTIC) == pytest.approx(eval_psi_ga(cost, rho_e), abs=1e-10)


def test_golden_section_finds_minimum():
    x, fx = golden_section(lambda t: (t - 3.3) ** 2 + 1.0)
    assert x == pytest.approx(3.3, abs=1e-7) and fx == pytest.approx(1.0, abs=1e-14)


def test_golden_section_unbounded_fails():
    from gailkit.errors import ConvergenceError

    with pytest.raises(ConvergenceError):
        golden_section(lambda t: -t)


# --- cost classes and apprenticeship --------------------------------------------

def test_projections():
    w = project_simplex(np.array([0.8, 0.6, -0.3]))
    assert w.min() >= 0 and w.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(project_simplex(np.array([0.2, 0.3, 0.5])), [0.2, 0.3, 0.5])
    np.testing.assert_allclose(np.linalg.norm(project_ball(np.array([3.0, 4.0]))), 1.0)
    np.testing.assert_allclose(project_ball(np.array([0.3, 0.4])), [0.3, 0.4])


def test_zero_gap_linear_ball_gives_zero_cost(rng):
    rho, _, _ = measure_pair(rng)
    cls = CostClass("linear_ball", rng.normal(size=rho.shape + (3,)))
    cost, value = apprenticeship_max_cost(rho, rho, cls)
    assert value == 0.0 and np.all(cost == 0.0)


def test_indicator_basis_gives_l2_distance(rng):
    rho_pi, rho_e, _ = measure_pair(rng)
    n = rho_pi.size
    feats = np.eye(n).reshape(rho_pi.shape + (n,))
    cost, value = apprenticeship_max_cost(rho_pi, rho_e, CostClass("linear_ball", feats))
    assert value == pytest.approx(np.linalg.norm(rho_pi - rho_e), abs=1e-12)
    assert np.sum((rho_pi - rho_e) * cost) == pytest.approx(value, abs=1e-12)


def test_linear_ball_matches_monte_carlo_unit_vectors(rng):
    rho_pi, rho_e, _ = measure_pair(rng)
    feats = rng.normal(size=rho_pi.shape + (3,))
    _, value = apprenticeship_max_cost(rho_pi, rho_e, CostClass("linear_ball", feats))
    w = rng.normal(size=(100_000, 3))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    gap = np.einsum("sa,sad->d", rho_pi - rho_e, feats)
    brute = float(np.max(w @ gap))
    assert brute <= value + 1e-12
    assert value - brute <= 1e-3 * max(1.0, value)


def test_convex_hull_ties_pick_lowest_index():
    w, value = max_cost_weights(np.array([1.0, 2.0, 2.0]), np.zeros(3), "convex_hull")
    np.testing.assert_array_equal(w, [0.0, 1.0, 0.0])
    assert value == 2.0


def test_convex_hull_matches_simplex_grid(rng):
    rho_pi, rho_e, _ = measure_pair(rng, 3, 1)
    feats = rng.uniform(-1, 1, size=rho_pi.shape + (2,))
    cls = CostClass("convex_hull", feats)
    _, value = apprenticeship_max_cost(rho_pi, rho_e, cls)
    brute = conjugate_brute_force(IndicatorRegularizer(cls), rho_pi - rho_e, np.linspace(0, 1, 101))
    assert brute == pytest.approx(value, abs=1e-10)


def test_constant_regularizer_conjugate_at_zero():
    psi = ConstantRegularizer(2.5)
    assert psi.conjugate(np.zeros((2, 1))) == -2.5
    assert conjugate_brute_force(psi, np.zeros((2, 1)), np.linspace(-1, 1, 5)) == -2.5
    assert psi.conjugate(np.ones((2, 1))) == np.inf


def test_brute_force_rejects_large_instances():
    with pytest.raises(ValueError):
        conjugate_brute_force(ConstantRegularizer(), np.zeros((4, 2)), np.linspace(-1, 1, 3))


def test_brute_force_flags_boundary(rng):
    rho_pi, rho_e = two_by_one_pair(rng)
    with pytest.warns(GridBoundaryWarning):
        conjugate_brute_force(GARegularizer(rho_e), rho_pi - rho_e, np.array([-0.5, -0.4]))


@pytest.mark.parametrize("kind", ["linear_ball", "convex_hull"])
def test_entropy_regularized_apprenticeship_objective(kind, rng):
    mdp = random_mdp(3, 2, 0.9, rng)
    pi, pi_e = random_policy(3, 2, rng), random_policy(3, 2, rng)
    rho, rho_e = occupancy_measure(mdp, pi), occupancy_measure(mdp, pi_e)
    feats = rng.normal(size=(3, 2, 4))
    cls = CostClass(kind, feats)
    cost, value = apprenticeship_max_cost(rho, rho_e, cls)
    direct = -causal_entropy_occupancy(rho) + np.sum((rho - rho_e) * cost)
    via_conjugate = -causal_entropy_occupancy(rho) + IndicatorRegularizer(cls).conjugate(rho - rho_e)
    assert direct == pytest.approx(via_conjugate, abs=1e-10)
    if kind == "convex_hull":
        vertices = [np.sum((rho - rho_e) * feats[..., i]) for i in range(4)]
        assert value == pytest.approx(max(vertices), abs=1e-12)
