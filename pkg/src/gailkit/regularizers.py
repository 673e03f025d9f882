"""Cost regularizers, their convex conjugates and the divergences they induce.

Every regularizer acts on tabular cost functions ``c`` of shape ``(S, A)``
and returns an extended real (``np.inf`` for infeasible costs).
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import bracket

from gailkit.errors import ConvergenceError

LOG2 = np.log(2.0)
SCALAR_TOL = 1e-10


class GridBoundaryWarning(UserWarning):
    """The grid supremum sits on the grid boundary; the grid is too small or coarse."""


def g_ga(x):
    """-x - log(1 - e^x) for x < 0, +inf otherwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, np.inf)
    neg = x < 0
    out[neg] = -x[neg] - np.log(-np.expm1(x[neg]))
    return out if out.ndim else float(out)


def g_ga_prime(x):
    x = np.asarray(x, dtype=np.float64)
    return -2.0 - 1.0 / np.expm1(x)  # -1 + e^x / (1 - e^x)


def eval_psi_ga(cost, rho_expert) -> float:
    """The generative-adversarial regularizer: sum rho_E g(c) if c < 0 everywhere, else +inf."""
    cost = np.asarray(cost, dtype=np.float64)
    if np.any(cost >= 0):
        return np.inf
    return float(np.sum(np.asarray(rho_expert) * g_ga(cost)))


def _xlog_ratio(x, y):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * np.log(x / y)
    return np.where(x > 0, out, 0.0)


def psi_ga_conjugate(rho_pi, rho_expert) -> float:
    """Optimal binary log-likelihood of telling learner pairs from expert pairs.

    sum rho_pi log(rho_pi / (rho_pi + rho_E)) + rho_E log(rho_E / (rho_pi + rho_E)),
    attained per pair by D* = rho_pi / (rho_pi + rho_E).
    """
    rho_pi = np.asarray(rho_pi, dtype=np.float64)
    rho_expert = np.asarray(rho_expert, dtype=np.float64)
    total = rho_pi + rho_expert
    return float(np.sum(_xlog_ratio(rho_pi, total) + _xlog_ratio(rho_expert, total)))


def optimal_discriminator(rho_pi, rho_expert) -> np.ndarray:
    """D*(s, a) = rho_pi / (rho_pi + rho_E); 1/2 where both masses vanish."""
    rho_pi = np.asarray(rho_pi, dtype=np.float64)
    total = rho_pi + np.asarray(rho_expert, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(total > 0, rho_pi / np.where(total > 0, total, 1.0), 0.5)


def discriminator_objective(d, rho_pi, rho_expert) -> float:
    """sum rho_pi log D + rho_E log(1 - D) for a tabular D in (0, 1)."""
    d = np.asarray(d, dtype=np.float64)
    return float(np.sum(rho_pi * np.log(d) + rho_expert * np.log1p(-d)))


def jsd_occupancy(rho_pi, rho_expert) -> float:
    """KL(rho_pi || m) + KL(rho_E || m) with m the midpoint, for unnormalized measures."""
    rho_pi = np.asarray(rho_pi, dtype=np.float64)
    rho_expert = np.asarray(rho_expert, dtype=np.float64)
    mid = 0.5 * (rho_pi + rho_expert)
    return float(np.sum(_xlog_ratio(rho_pi, mid) + _xlog_ratio(rho_expert, mid)))


# --- surrogate losses -------------------------------------------------------


@dataclass(frozen=True)
class SurrogateLoss:
    """A strictly decreasing convex classification loss phi.

    ``range_t`` is the open interval (lo, hi) that -phi sweeps out; its upper
    end is minus the infimum of phi.
    """

    name: str
    phi: Callable[[np.ndarray], np.ndarray]
    phi_inv: Callable[[np.ndarray], np.ndarray]
    range_t: tuple
    dphi: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    closed_form_risk: Optional[Callable] = field(default=None, compare=False)

    def in_range(self, x):
        lo, hi = self.range_t
        x = np.asarray(x, dtype=np.float64)
        return (x > lo) & (x < hi)

    @property
    def infimum(self) -> float:
        return -self.range_t[1]

    def check(self, grid=None) -> None:
        """Numerically check strict monotonicity and midpoint convexity on a grid."""
        grid = np.linspace(-8, 8, 801) if grid is None else np.asarray(grid)
        vals = self.phi(grid)
        if not np.all(np.diff(vals) < 0):
            raise ValueError(f"{self.name}: phi is not strictly decreasing on the grid")
        mid = self.phi(0.5 * (grid[:-1] + grid[1:]))
        if np.any(mid > 0.5 * (vals[:-1] + vals[1:]) + 1e-12):
            raise ValueError(f"{self.name}: phi fails the midpoint convexity check")


def _logistic(x):
    return np.logaddexp(0.0, -np.asarray(x, dtype=np.float64))


def _logistic_inv(y):
    # y = log(1 + e^-x)  =>  x = -log(e^y - 1)
    return -np.log(np.expm1(np.asarray(y, dtype=np.float64)))


def _logistic_risk(a, b):
    return -(_xlog_ratio(a, a + b) + _xlog_ratio(b, a + b))


def _exponential_risk(a, b):
    return 2.0 * np.sqrt(a * b)


LOGISTIC = SurrogateLoss(
    "logistic",
    _logistic,
    _logistic_inv,
    (-np.inf, 0.0),
    dphi=lambda x: -0.5 * (1.0 - np.tanh(0.5 * np.asarray(x, dtype=np.float64))),
    closed_form_risk=_logistic_risk,
)
EXPONENTIAL = SurrogateLoss(
    "exponential",
    lambda x: np.exp(-np.asarray(x, dtype=np.float64)),
    lambda y: -np.log(np.asarray(y, dtype=np.float64)),
    (-np.inf, 0.0),
    dphi=lambda x: -np.exp(-np.asarray(x, dtype=np.float64)),
    closed_form_risk=_exponential_risk,
)


def surrogate_to_g(phi: SurrogateLoss, x):
    """g_phi(x) = -x + phi(-phi^{-1}(-x)) on the range of -phi, +inf elsewhere."""
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, np.inf)
    ok = phi.in_range(x)
    if np.any(ok):
        with np.errstate(all="raise"):
            try:
                inv = phi.phi_inv(-x[ok])
            except FloatingPointError as exc:
                raise ArithmeticError(f"{phi.name}: phi^-1 failed to evaluate") from exc
        out[ok] = -x[ok] + phi.phi(-inv)
    return out if out.ndim else float(out)


def surrogate_g_prime(phi: SurrogateLoss, x):
    """Derivative of g_phi on the range of -phi: -1 + phi'(-u) / phi'(u), u = phi^{-1}(-x)."""
    if phi.dphi is None:
        raise ValueError(f"{phi.name} has no derivative attached")
    x = np.asarray(x, dtype=np.float64)
    u = phi.phi_inv(-x)
    return -1.0 + phi.dphi(-u) / phi.dphi(u)


def psi_surrogate(cost, rho_expert, phi: SurrogateLoss) -> float:
    cost = np.asarray(cost, dtype=np.float64)
    if not np.all(phi.in_range(cost)):
        return np.inf
    return float(np.sum(np.asarray(rho_expert) * surrogate_to_g(phi, cost)))


INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section(fn, x0=0.0, step=1.0, tol=SCALAR_TOL, max_iter=500):
    """Minimize a unimodal scalar function; returns ``(x, f(x))``.

    A downhill bracket is found by expansion from ``(x0, x0 + step)``, then
    golden-section shrinks it to an absolute width of ``tol``.
    """
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            xa, xb, xc, *_ = bracket(fn, xa=x0, xb=x0 + step, maxiter=2000)
    except (RuntimeError, ValueError) as exc:
        raise ConvergenceError(f"bracket expansion failed: {exc}") from exc
    lo, hi = min(xa, xc), max(xa, xc)
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = fn(x2)
    else:
        raise ConvergenceError("golden-section search did not converge", residual=hi - lo)
    x = x1 if f1 < f2 else x2
    fx = min(f1, f2)
    if not np.isfinite(fx):
        raise ConvergenceError("golden-section search ended at a non-finite value", residual=fx)
    return float(x), float(fx)


def min_expected_risk(phi: SurrogateLoss, rho_pi, rho_expert) -> float:
    """R_phi = sum over pairs of min_t rho_pi phi(t) + rho_E phi(-t)."""
    a_all = np.ravel(np.asarray(rho_pi, dtype=np.float64))
    b_all = np.ravel(np.asarray(rho_expert, dtype=np.float64))
    total = 0.0
    for a, b in zip(a_all, b_all):
        if a == 0.0 or b == 0.0:
            # infimum approached as t -> +-inf
            total += (a + b) * phi.infimum
            continue
        _, val = golden_section(lambda t: a * phi.phi(t) + b * phi.phi(-t))
        total += val
    return float(total)


def surrogate_conjugate(phi: SurrogateLoss, rho_pi, rho_expert) -> float:
    """psi_phi^*(rho_pi - rho_E) by per-pair maximization over costs in the range of -phi.

    Works in the cost variable directly (no change of variables), so it is an
    independent route to the same number as ``-min_expected_risk``.
    """
    a_all = np.ravel(np.asarray(rho_pi, dtype=np.float64))
    b_all = np.ravel(np.asarray(rho_expert, dtype=np.float64))
    lo, hi = phi.range_t
    total = 0.0
    for a, b in zip(a_all, b_all):
        if a == 0.0 or b == 0.0:
            total += -(a + b) * phi.infimum
            continue

        # maximize (a - b) c - b g(c) over c in (lo, hi); parametrize c = hi - e^u
        def neg(u):
            c = hi - np.exp(u)
            if c <= lo:
                return np.inf
            return -((a - b) * c - b * surrogate_to_g(phi, c))

        _, val = golden_section(neg)
        total += -val
    return float(total)


def closed_form_conjugate(phi: SurrogateLoss, rho_pi, rho_expert) -> float:
    if phi.closed_form_risk is None:
        raise ValueError(f"{phi.name} has no closed-form minimum risk")
    return -float(np.sum(phi.closed_form_risk(np.asarray(rho_pi), np.asarray(rho_expert))))


# --- cost classes and regularizer variants ----------------------------------


def project_simplex(w):
    """Euclidean projection onto the probability simplex (sort-based)."""
    w = np.asarray(w, dtype=np.float64)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, w.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(w - css[rho] / (rho + 1), 0.0)


def project_ball(w):
    w = np.asarray(w, dtype=np.float64)
    norm = np.linalg.norm(w)
    return w / norm if norm > 1.0 else w


@dataclass
class CostClass:
    """Costs sum_i w_i f_i with w in the unit l2 ball or in the probability simplex.

    ``features`` is a tabular basis of shape (S, A, d).
    """

    kind: str
    features: np.ndarray

    def __post_init__(self):
        if self.kind not in ("linear_ball", "convex_hull"):
            raise ValueError(f"unknown cost class kind {self.kind!r}")
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 3 or self.features.shape[-1] < 1:
            raise ValueError("features must have shape (S, A, d) with d >= 1")

    @property
    def dim(self) -> int:
        return self.features.shape[-1]

    def project(self, w):
        return project_ball(w) if self.kind == "linear_ball" else project_simplex(w)

    def cost(self, w) -> np.ndarray:
        return self.features @ np.asarray(w, dtype=np.float64)

    def contains(self, cost, tol=1e-9) -> bool:
        flat = self.features.reshape(-1, self.dim)
        w, *_ = np.linalg.lstsq(flat, np.ravel(cost), rcond=None)
        if np.abs(flat @ w - np.ravel(cost)).max() > tol:
            return False
        return bool(np.allclose(self.project(w), w, atol=tol))


def max_cost_weights(fe_pi, fe_expert, kind):
    """Best cost weights against a feature-expectation gap.

    Returns ``(w, value)`` where ``value`` is the largest excess expected cost
    of the learner over the expert inside the class.
    """
    gap = np.asarray(fe_pi, dtype=np.float64) - np.asarray(fe_expert, dtype=np.float64)
    if kind == "linear_ball":
        norm = float(np.linalg.norm(gap))
        if norm == 0.0:
            return np.zeros_like(gap), 0.0
        return gap / norm, norm
    if kind == "convex_hull":
        i = int(np.argmax(gap))  # lowest index wins ties
        w = np.zeros_like(gap)
        w[i] = 1.0
        return w, float(gap[i])
    raise ValueError(f"unknown cost class kind {kind!r}")


def feature_expectations(rho, features) -> np.ndarray:
    return np.einsum("sa,sad->d", np.asarray(rho), np.asarray(features))


def apprenticeship_max_cost(rho_pi, rho_expert, cls: CostClass):
    """delta_C^*(rho_pi - rho_E): the maximizing cost table and its value."""
    w, value = max_cost_weights(
        feature_expectations(rho_pi, cls.features),
        feature_expectations(rho_expert, cls.features),
        cls.kind,
    )
    return cls.cost(w), value


class Regularizer:
    """Convex regularizer on tabular costs."""

    name = "regularizer"

    def __call__(self, cost) -> float:
        raise NotImplementedError

    def subgradient(self, cost) -> np.ndarray:
        raise NotImplementedError

    def conjugate(self, x) -> float:
        raise NotImplementedError

    def grid_costs(self, shape, grid):
        """Candidate cost tables for brute-force conjugates: the product grid."""
        axes = [np.asarray(grid, dtype=np.float64)] * int(np.prod(shape))
        for point in itertools.product(*axes):
            yield np.reshape(point, shape)


class ConstantRegularizer(Regularizer):
    name = "constant"

    def __init__(self, k=0.0):
        self.k = float(k)

    def __call__(self, cost):
        return self.k

    def subgradient(self, cost):
        return np.zeros_like(np.asarray(cost, dtype=np.float64))

    def conjugate(self, x):
        return -self.k if not np.any(np.asarray(x)) else np.inf


class IndicatorRegularizer(Regularizer):
    """delta_C: zero on the cost class, +inf off it."""

    name = "indicator"

    def __init__(self, cost_class: CostClass):
        self.cost_class = cost_class

    def __call__(self, cost):
        return 0.0 if self.cost_class.contains(cost) else np.inf

    def subgradient(self, cost):
        # zero lies in the normal cone at every point of C; ascent code projects instead
        return np.zeros_like(np.asarray(cost, dtype=np.float64))

    def conjugate(self, x):
        fe = feature_expectations(x, self.cost_class.features)
        return max_cost_weights(fe, np.zeros_like(fe), self.cost_class.kind)[1]

    def grid_costs(self, shape, grid):
        grid = np.asarray(grid, dtype=np.float64)
        d = self.cost_class.dim
        for w in itertools.product(*[grid] * d):
            w = np.array(w)
            if self.cost_class.kind == "convex_hull":
                if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
                    continue
            elif np.linalg.norm(w) > 1.0 + 1e-12:
                continue
            yield self.cost_class.cost(w)


class GARegularizer(Regularizer):
    """psi_GA built on a fixed expert occupancy measure."""

    name = "generative_adversarial"

    def __init__(self, rho_expert):
        self.rho_expert = np.asarray(rho_expert, dtype=np.float64)

    def __call__(self, cost):
        return eval_psi_ga(cost, self.rho_expert)

    def subgradient(self, cost):
        return self.rho_expert * g_ga_prime(np.minimum(cost, -1e-12))

    def conjugate(self, x):
        rho_pi = np.asarray(x, dtype=np.float64) + self.rho_expert
        if np.any(rho_pi < 0):
            return np.inf
        return psi_ga_conjugate(rho_pi, self.rho_expert)


class SurrogateRegularizer(Regularizer):
    """psi_phi from a strictly decreasing convex surrogate loss."""

    name = "surrogate"

    def __init__(self, phi: SurrogateLoss, rho_expert):
        self.phi = phi
        self.rho_expert = np.asarray(rho_expert, dtype=np.float64)

    def __call__(self, cost):
        return psi_surrogate(cost, self.rho_expert, self.phi)

    def subgradient(self, cost):
        return self.rho_expert * surrogate_g_prime(self.phi, cost)

    def conjugate(self, x):
        rho_pi = np.asarray(x, dtype=np.float64) + self.rho_expert
        if np.any(rho_pi < 0):
            return np.inf
        return surrogate_conjugate(self.phi, rho_pi, self.rho_expert)


def conjugate_brute_force(psi: Regularizer, x, grid) -> float:
    """sup over a finite grid of costs of <x, c> - psi(c).

    ``grid`` is a 1-D array of coordinate values (cost entries, or class
    weights for indicator regularizers). Emits GridBoundaryWarning when the
    supremum sits on the outer layer of the grid.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size > 6:
        raise ValueError("brute-force conjugates are limited to S * A <= 6")
    grid = np.sort(np.asarray(grid, dtype=np.float64))
    best = -np.inf
    best_cost = None
    for cost in psi.grid_costs(x.shape, grid):
        val = float(np.sum(x * cost)) - psi(cost)
        if val > best:
            best, best_cost = val, cost
    if best_cost is None:
        raise ValueError("grid produced no feasible cost")
    if not isinstance(psi, IndicatorRegularizer) and np.any(
        (best_cost == grid[0]) | (best_cost == grid[-1])
    ):
        if not isinstance(psi, ConstantRegularizer):
            warnings.warn("brute-force supremum attained on the grid boundary", GridBoundaryWarning)
    return best


def ga_conjugate_grid(rho_pi, rho_expert, grid) -> float:
    """Vectorized product-grid brute force for psi_GA^* on tiny instances."""
    x = np.ravel(np.asarray(rho_pi) - np.asarray(rho_expert))
    rho_e = np.ravel(np.asarray(rho_expert, dtype=np.float64))
    grid = np.asarray(grid, dtype=np.float64)
    mesh = np.stack(np.meshgrid(*[grid] * x.size, indexing="ij"), axis=-1).reshape(-1, x.size)
    vals = mesh @ x - g_ga(mesh) @ rho_e
    return float(vals.max())
