"""Bernoulli sigmoid likelihood and its exponentiated-quadratic lower bound.

The outcome model is p(o = 1 | theta) = sigmoid(theta @ x) for a binary
context vector x. Because this likelihood is not conjugate to a Gaussian
belief, updates go through a quadratic lower bound on the log likelihood
whose free parameters (an offset alpha and a pair of curvature anchors xi)
are tuned per context by a fixed-point iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianBelief, QuadraticFactor

__all__ = [
    "sigmoid",
    "log_sigmoid",
    "sigmoid_prob",
    "log_likelihood",
    "bound_curvature",
    "VariationalParams",
    "bound_coefficients",
    "optimize_variational_params",
    "context_vector",
]


def sigmoid(t):
    """Numerically stable logistic function, elementwise.

    Uses the exp of a non-positive argument on both branches so the result
    never overflows and underflows gracefully to 0 or 1.
    """
    if isinstance(t, (float, int)):
        t = float(t)
        if t >= 0.0:
            return 1.0 / (1.0 + math.exp(-t))
        e = math.exp(t)
        return e / (1.0 + e)
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    expt = np.exp(t[~pos])
    out[~pos] = expt / (1.0 + expt)
    if out.ndim == 0:
        return float(out)
    return out


def log_sigmoid(t):
    """log(sigmoid(t)) through log1p, stable for large negative t."""
    if isinstance(t, (float, int)):
        t = float(t)
        if t >= 0.0:
            return -math.log1p(math.exp(-t))
        return t - math.log1p(math.exp(t))
    t = np.asarray(t, dtype=float)
    out = -np.logaddexp(0.0, -t)
    if out.ndim == 0:
        return float(out)
    return out


def sigmoid_prob(theta: np.ndarray, x: np.ndarray, outcome: int) -> float:
    """Outcome probability p(outcome | theta, x) for outcome in {0, 1}."""
    _check_outcome(outcome)
    t = float(np.dot(theta, x))
    return sigmoid(t if outcome == 1 else -t)


def log_likelihood(activation, outcome: int):
    """Log outcome probability as a function of the activation theta @ x."""
    _check_outcome(outcome)
    if not isinstance(activation, (float, int)):
        activation = np.asarray(activation, dtype=float)
    return log_sigmoid(activation if outcome == 1 else -activation)


def _check_outcome(outcome: int) -> None:
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")


def bound_curvature(xi):
    """Curvature weight of the quadratic log-likelihood bound.

    Equals tanh(xi / 2) / (4 xi), an even function of xi with limit 1/8 at
    xi = 0. The removable singularity is handled explicitly.
    """
    xi = np.asarray(xi, dtype=float)
    small = np.abs(xi) < 1e-6
    safe = np.where(small, 1.0, xi)
    out = np.where(small, 0.125, np.tanh(safe / 2.0) / (4.0 * safe))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class VariationalParams:
    """Tuned parameters of the quadratic bound for one (belief, context) pair.

    ``alpha`` is the shared offset, ``xi`` the two non-negative curvature
    anchors (one per outcome branch). ``converged`` is False when the
    fixed-point iteration hit its iteration cap before the parameters
    settled; the last iterate is still returned and still yields a valid
    bound.
    """

    alpha: float
    xi: tuple[float, float]
    converged: bool = True
    iterations: int = 0


def bound_coefficients(params: VariationalParams, x: np.ndarray, outcome: int) -> QuadraticFactor:
    """Quadratic factor that lower-bounds the outcome likelihood.

    For any choice of parameters the returned factor satisfies
    factor(theta) <= p(outcome | theta, x) for all theta, with equality
    structure controlled by alpha and xi. The constant term collects the
    per-branch anchor contributions, the linear term carries the outcome
    sign, and the curvature acts only along the context direction.
    """
    _check_outcome(outcome)
    x = np.asarray(x, dtype=float)
    alpha = params.alpha
    xi0, xi1 = params.xi
    lam0 = bound_curvature(xi0)
    lam1 = bound_curvature(xi1)
    bias = 0.0
    for xi_h, lam_h in ((xi0, lam0), (xi1, lam1)):
        bias += 0.5 * xi_h + lam_h * (xi_h * xi_h - alpha * alpha) - float(np.logaddexp(0.0, xi_h))
    sign = 0.5 if outcome == 1 else -0.5
    linear = (sign + 2.0 * lam1 * alpha) * x
    quadratic = 2.0 * lam1 * np.outer(x, x)
    return QuadraticFactor(bias, linear, quadratic)


def optimize_variational_params(
    belief: GaussianBelief,
    x: np.ndarray,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> VariationalParams:
    """Tune the bound parameters for a belief and context by fixed point.

    The anchors are matched to the belief's second moments of the two branch
    activations (0 and theta @ x) around the offset, and the offset is then
    set to its stationary value given the anchors. Iteration stops when the
    largest parameter change drops below ``tol``. Hitting ``max_iter`` first
    returns the last iterate flagged as not converged.

    The parameters depend on the belief only through the activation mean
    theta @ x and variance x' cov x, so the context enters as a direction.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (belief.dim,):
        raise ValueError("context dimension does not match belief")
    act_mean = float(belief.mean @ x)
    act_var = float(x @ belief.cov @ x)

    alpha = 0.5 * act_mean
    xi0 = abs(alpha)
    xi1 = float(np.sqrt(act_var + (act_mean - alpha) ** 2))
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        lam0 = bound_curvature(xi0)
        lam1 = bound_curvature(xi1)
        alpha_new = lam1 * act_mean / (lam0 + lam1)
        xi0_new = abs(alpha_new)
        xi1_new = float(np.sqrt(act_var + (act_mean - alpha_new) ** 2))
        change = max(abs(alpha_new - alpha), abs(xi0_new - xi0), abs(xi1_new - xi1))
        alpha, xi0, xi1 = alpha_new, xi0_new, xi1_new
        if change < tol:
            converged = True
            break
    return VariationalParams(alpha=alpha, xi=(xi0, xi1), converged=converged, iterations=iterations)


def context_vector(values) -> np.ndarray:
    """Validate and return a binary context vector as a float array.

    Entries must be exactly 0 or 1. Used at module boundaries (environment
    generation, command line parsing); the numeric kernels accept the
    returned plain array.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("context must be a non-empty 1-D array")
    if not np.all((x == 0.0) | (x == 1.0)):
        raise ValueError("context entries must be 0 or 1")
    return x
