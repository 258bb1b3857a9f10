"""Approximate Bayesian fusion of a Gaussian belief with one sigmoid outcome.

Three interchangeable schemes, all returning a Gaussian posterior together
with an estimate of the normalization constant (the predictive probability
of the observed outcome):

- ``vb_fuse``: product of the belief with the tuned quadratic bound. Closed
  form, and its constant is a guaranteed lower bound on the true one.
- ``vbis_fuse``: importance sampling with the variational posterior mean as
  proposal center. Unbiased constant estimate, sampled moments.
- ``laplace_fuse``: Newton search for the posterior mode plus a curvature
  fit there. Deterministic and cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import cho_solve, cholesky

from .gaussian import LOG_2PI, GaussianBelief
from .sigmoid import (
    bound_coefficients,
    log_likelihood,
    optimize_variational_params,
    sigmoid,
)
from . import gaussian

__all__ = [
    "FusionMethod",
    "FusionResult",
    "vb_fuse",
    "vbis_fuse",
    "newton_map",
    "laplace_fuse",
    "fuse",
    "CONSTANT_FLOOR",
]

# Normalization estimates are probabilities; keep them strictly inside (0, 1)
# so downstream logs and ratios stay finite.
CONSTANT_FLOOR = 1e-12

# Importance-sampling posterior covariances get this added to the diagonal
# when the raw weighted moments are not numerically positive definite.
_JITTER = 1e-9
_JITTER_CAP = 1e-3


class FusionMethod(str, Enum):
    VB = "vb"
    VBIS = "vbis"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class FusionResult:
    """Gaussian posterior, constant estimate and per-method diagnostics."""

    posterior: GaussianBelief
    c_hat: float
    method: FusionMethod
    diagnostics: dict


def _clamp_constant(value: float) -> float:
    return float(min(max(value, CONSTANT_FLOOR), 1.0 - CONSTANT_FLOOR))


def vb_fuse(belief: GaussianBelief, x: np.ndarray, outcome: int) -> FusionResult:
    """Conjugate update through the quadratic likelihood bound.

    The bound parameters are tuned for (belief, x), the bound replaces the
    sigmoid likelihood and the resulting Gaussian product is normalized in
    closed form. Because the bound never exceeds the likelihood, c_hat never
    exceeds the true predictive probability.
    """
    x = np.asarray(x, dtype=float)
    params = optimize_variational_params(belief, x)
    factor = bound_coefficients(params, x, outcome)
    scale, posterior = gaussian.product_scale_and_posterior(belief, factor)
    return FusionResult(
        posterior=posterior,
        c_hat=_clamp_constant(scale),
        method=FusionMethod.VB,
        diagnostics={
            "iterations": params.iterations,
            "converged": params.converged,
            "alpha": params.alpha,
            "xi": params.xi,
        },
    )


def vbis_fuse(
    belief: GaussianBelief,
    x: np.ndarray,
    outcome: int,
    n_samples: int,
    rng: np.random.Generator,
) -> FusionResult:
    """Importance-sampled correction of the variational update.

    Samples from a proposal centered at the variational posterior mean with
    the prior covariance, weights each draw by prior * likelihood / proposal
    and uses the raw weight mean as the constant estimate (unbiased). The
    posterior is the Gaussian matching the self-normalized weighted moments.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    x = np.asarray(x, dtype=float)
    vb = vb_fuse(belief, x, outcome)
    proposal = GaussianBelief(vb.posterior.mean, belief.cov)
    draws = proposal.sample(rng, n_samples)
    log_w = (
        belief.logpdf(draws)
        + log_likelihood(draws @ x, outcome)
        - proposal.logpdf(draws)
    )
    weights = np.exp(log_w)
    weight_sum = float(weights.sum())
    if not np.isfinite(weight_sum) or weight_sum <= 0.0:
        raise ValueError("importance weights are degenerate (zero or non-finite sum)")
    c_hat = weight_sum / n_samples
    norm_w = weights / weight_sum
    post_mean = norm_w @ draws
    centered = draws - post_mean
    post_cov = (centered * norm_w[:, None]).T @ centered
    post_cov = 0.5 * (post_cov + post_cov.T)
    posterior, jitter = _ensure_pd(post_mean, post_cov)
    ess = 1.0 / float(norm_w @ norm_w)
    return FusionResult(
        posterior=posterior,
        c_hat=_clamp_constant(c_hat),
        method=FusionMethod.VBIS,
        diagnostics={
            "ess": ess,
            "n_samples": n_samples,
            "jitter": jitter,
            "vb_iterations": vb.diagnostics["iterations"],
            "vb_converged": vb.diagnostics["converged"],
        },
    )


def _ensure_pd(mean: np.ndarray, cov: np.ndarray) -> tuple[GaussianBelief, float]:
    jitter = 0.0
    while True:
        try:
            return GaussianBelief(mean, cov + jitter * np.eye(mean.size)), jitter
        except ValueError:
            jitter = _JITTER if jitter == 0.0 else jitter * 10.0
            if jitter > _JITTER_CAP:
                raise


def newton_map(
    belief: GaussianBelief,
    x: np.ndarray,
    outcome: int,
    tol: float = 1e-9,
    max_iter: int = 100,
) -> tuple[np.ndarray, dict]:
    """Mode of prior times likelihood by damped Newton iteration.

    Starts at the belief mean and takes Newton steps on the log product,
    halving the step (at most 30 times) whenever it fails to increase the
    objective. The objective is strictly concave so the mode is unique.
    Stops when the gradient infinity norm falls below ``tol``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (belief.dim,):
        raise ValueError("context dimension does not match belief")
    theta = belief.mean.copy()
    prec = belief.precision()

    def objective(t: np.ndarray) -> float:
        diff = t - belief.mean
        return -0.5 * float(diff @ prec @ diff) + float(log_likelihood(float(t @ x), outcome))

    obj = objective(theta)
    grad_norm = np.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        act = float(theta @ x)
        s = sigmoid(act)
        grad = -(prec @ (theta - belief.mean)) + (outcome - s) * x
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm < tol:
            converged = True
            iterations -= 1
            break
        curve = prec + s * (1.0 - s) * np.outer(x, x)
        step = np.linalg.solve(curve, grad)
        scale = 1.0
        for _ in range(30):
            candidate = theta + scale * step
            cand_obj = objective(candidate)
            if cand_obj > obj:
                theta = candidate
                obj = cand_obj
                break
            scale *= 0.5
        else:
            # This close to the mode the objective is flat to float
            # precision and cannot certify progress; fall back to the
            # gradient norm, which a full Newton step still shrinks.
            candidate = theta + step
            s_cand = sigmoid(float(candidate @ x))
            grad_cand = -(prec @ (candidate - belief.mean)) + (outcome - s_cand) * x
            if float(np.max(np.abs(grad_cand))) < grad_norm:
                theta = candidate
                obj = objective(candidate)
            else:
                break
    info = {"iterations": iterations, "grad_norm": grad_norm, "converged": converged}
    return theta, info


def laplace_fuse(belief: GaussianBelief, x: np.ndarray, outcome: int) -> FusionResult:
    """Gaussian fit at the posterior mode with a curvature-based constant.

    The posterior is N(mode, A^{-1}) where A is the negative log-product
    Hessian at the mode, and the constant estimate is the product value at
    the mode times the Gaussian volume (2 pi)^{n/2} / sqrt(det A), evaluated
    in log space.
    """
    x = np.asarray(x, dtype=float)
    theta_map, info = newton_map(belief, x, outcome)
    act = float(theta_map @ x)
    s = sigmoid(act)
    curve = belief.precision() + s * (1.0 - s) * np.outer(x, x)
    curve = 0.5 * (curve + curve.T)
    curve_chol = cholesky(curve, lower=True)
    post_cov = cho_solve((curve_chol, True), np.eye(belief.dim))
    post_cov = 0.5 * (post_cov + post_cov.T)
    log_det_curve = 2.0 * float(np.sum(np.log(np.diag(curve_chol))))
    log_c = (
        belief.logpdf(theta_map)
        + float(log_likelihood(act, outcome))
        + 0.5 * belief.dim * LOG_2PI
        - 0.5 * log_det_curve
    )
    posterior = GaussianBelief(theta_map, post_cov)
    # The curvature matrix is the posterior precision; hand it to the belief
    # so downstream quotient and divergence code skips the solve.
    object.__setattr__(posterior, "_prec", curve)
    return FusionResult(
        posterior=posterior,
        c_hat=_clamp_constant(float(np.exp(log_c))),
        method=FusionMethod.LAPLACE,
        diagnostics=dict(info),
    )


def fuse(
    belief: GaussianBelief,
    x: np.ndarray,
    outcome: int,
    method: FusionMethod,
    rng: np.random.Generator | None = None,
    n_samples: int = 1000,
) -> FusionResult:
    """Dispatch to one fusion scheme by method tag."""
    method = FusionMethod(method)
    if method is FusionMethod.VB:
        return vb_fuse(belief, x, outcome)
    if method is FusionMethod.VBIS:
        if rng is None:
            raise ValueError("vbis fusion needs a random generator")
        return vbis_fuse(belief, x, outcome, n_samples, rng)
    return laplace_fuse(belief, x, outcome)
