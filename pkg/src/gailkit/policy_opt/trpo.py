"""KL-constrained natural-gradient policy steps."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_MAX_KL = 0.01
DEFAULT_DAMPING = 0.1
DEFAULT_CG_ITERS = 10
DEFAULT_BACKTRACKS = 10


def conjugate_gradient(matvec, b, iters=DEFAULT_CG_ITERS, residual_tol=1e-10):
    x = np.zeros_like(b)
    r = b.copy()
    p = b.copy()
    rr = r @ r
    for _ in range(iters):
        if rr < residual_tol:
            break
        ap = matvec(p)
        alpha = rr / (p @ ap)
        x += alpha * p
        r -= alpha * ap
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x


@dataclass
class StepInfo:
    accepted: bool
    kl: float
    improvement: float
    step_fraction: float
    grad_norm: float


def trpo_step(
    policy, theta, grad, obs, surrogate, max_kl=DEFAULT_MAX_KL, damping=DEFAULT_DAMPING,
    cg_iters=DEFAULT_CG_ITERS, backtracks=DEFAULT_BACKTRACKS,
):
    """One trust-region step that *decreases* ``surrogate``.

    ``grad`` is the gradient of ``surrogate`` at ``theta`` and ``surrogate`` a
    callable on parameter vectors. The natural direction solves
    (F + damping I) x = grad by conjugate gradient, with F the Hessian of the
    mean KL over ``obs``; the step is scaled to the KL boundary and halved
    until the surrogate improves and the empirical mean KL is within
    ``max_kl``. Returns ``(new_theta, StepInfo)``; if no candidate passes,
    ``theta`` comes back unchanged.
    """
    if max_kl <= 0:
        raise ValueError("max_kl must be positive")
    grad = np.asarray(grad, dtype=np.float64)
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite policy gradient")
    gnorm = float(np.linalg.norm(grad))
    if gnorm == 0.0:
        return theta.copy(), StepInfo(False, 0.0, 0.0, 0.0, 0.0)

    fvp = lambda v: policy.fisher_vector_product(theta, obs, v) + damping * v
    x = conjugate_gradient(fvp, grad, cg_iters)
    shs = 0.5 * x @ fvp(x)
    if not shs > 0:
        return theta.copy(), StepInfo(False, 0.0, 0.0, 0.0, gnorm)
    full_step = -np.sqrt(max_kl / shs) * x
    f0 = surrogate(theta)
    for k in range(backtracks + 1):
        frac = 0.5**k
        cand = theta + frac * full_step
        kl = policy.kl(theta, cand, obs)
        improvement = f0 - surrogate(cand)
        if kl <= max_kl * (1 + 1e-8) and improvement > 0:
            return cand, StepInfo(True, kl, improvement, frac, gnorm)
    log.debug("TRPO line search rejected every candidate")
    return theta.copy(), StepInfo(False, 0.0, 0.0, 0.0, gnorm)


def natural_step_direction(policy, theta, grad, obs, max_kl, damping=0.0, cg_iters=None):
    """The full (pre-line-search) trust-region step, for inspection and tests."""
    cg_iters = len(grad) if cg_iters is None else cg_iters
    fvp = lambda v: policy.fisher_vector_product(theta, obs, v) + damping * v
    x = conjugate_gradient(fvp, np.asarray(grad, dtype=np.float64), cg_iters, residual_tol=1e-300)
    return -np.sqrt(max_kl / (0.5 * x @ fvp(x))) * x
