from gailkit.policy_opt.estimators import (
    batch_gae,
    discounted_cost_to_go,
    entropy_gradient,
    gae_advantages,
    policy_gradient,
    shaped_cost,
)
from gailkit.policy_opt.mlp import Adam, Mlp, mlp_forward, mlp_param_grad
from gailkit.policy_opt.policies import (
    CategoricalPolicy,
    GaussianPolicy,
    load_policy,
    make_policy,
)
from gailkit.policy_opt.rollout import RolloutBatch, evaluate_policy, sample_batch
from gailkit.policy_opt.trainer import PolicyOptimizer, TrpoConfig, train_expert
from gailkit.policy_opt.trpo import conjugate_gradient, natural_step_direction, trpo_step
from gailkit.policy_opt.value import ValueFn, fit_value_fn
