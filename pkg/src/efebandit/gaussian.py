"""Gaussian beliefs and exponentiated-quadratic factors.

All belief updates in this library are products of a Gaussian density with
factors of the form exp(bias + linear @ theta - 0.5 * theta @ quadratic @ theta).
Such products stay Gaussian up to a scale, and this module implements the
scale/posterior algebra in a numerically careful way (log-space scales,
Cholesky factorizations, explicit symmetrization).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

__all__ = [
    "GaussianBelief",
    "QuadraticFactor",
    "product_scale_and_posterior",
    "factor_from_quotient",
    "expected_log_factor",
    "kl_divergence",
    "random_covariance",
]

# Relative asymmetry beyond this is treated as a bug in the caller rather
# than roundoff to be silently repaired.
SYMMETRY_RTOL = 1e-10

LOG_2PI = float(np.log(2.0 * np.pi))


def _check_symmetric(mat: np.ndarray, name: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(mat))))
    asym = float(np.max(np.abs(mat - mat.T)))
    if asym > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric (relative asymmetry {asym / scale:.3e})")
    return 0.5 * (mat + mat.T)


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    """Multivariate normal distribution used as a belief over weights.

    Parameters
    ----------
    mean : (n,) array of finite reals.
    cov : (n, n) symmetric positive definite covariance. Asymmetry beyond
        1e-10 relative raises ValueError; smaller asymmetry is averaged away.
    """

    mean: np.ndarray
    cov: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False)
    _prec: np.ndarray | None = field(init=False, repr=False, default=None)
    _log_det: float | None = field(init=False, repr=False, default=None)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size == 0:
            raise ValueError("mean must be a non-empty 1-D array")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov must have shape {(mean.size, mean.size)}, got {cov.shape}")
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise ValueError("mean and cov must be finite")
        cov = _check_symmetric(cov, "cov")
        try:
            chol = cholesky(cov, lower=True)
        except np.linalg.LinAlgError as exc:
            raise ValueError("cov is not positive definite") from exc
        except ValueError as exc:
            raise ValueError("cov is not positive definite") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def chol(self) -> np.ndarray:
        """Lower-triangular Cholesky factor of the covariance."""
        return self._chol

    def log_det_cov(self) -> float:
        if self._log_det is None:
            val = 2.0 * float(np.sum(np.log(np.diag(self._chol))))
            object.__setattr__(self, "_log_det", val)
        return self._log_det

    def precision_times(self, vec: np.ndarray) -> np.ndarray:
        """Return cov^{-1} @ vec without forming the inverse."""
        if self._prec is not None:
            return self._prec @ vec
        return cho_solve((self._chol, True), vec)

    def precision(self) -> np.ndarray:
        """Inverse covariance, computed once and cached (beliefs are immutable)."""
        if self._prec is None:
            prec = cho_solve((self._chol, True), np.eye(self.dim))
            object.__setattr__(self, "_prec", 0.5 * (prec + prec.T))
        return self._prec

    def logpdf(self, theta: np.ndarray) -> np.ndarray | float:
        """Log density at one point (n,) or a batch of points (m, n)."""
        theta = np.asarray(theta, dtype=float)
        diff = np.atleast_2d(theta) - self.mean
        sol = solve_triangular(self._chol, diff.T, lower=True)
        quad = np.sum(sol * sol, axis=0)
        out = -0.5 * (self.dim * LOG_2PI + self.log_det_cov() + quad)
        if theta.ndim == 1:
            return float(out[0])
        return out

    def pdf(self, theta: np.ndarray) -> np.ndarray | float:
        return np.exp(self.logpdf(theta))

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draw one sample (n,) or, with ``size`` given, a batch (size, n)."""
        if size is None:
            z = rng.standard_normal(self.dim)
            return self.mean + self._chol @ z
        if size < 1:
            raise ValueError("size must be at least 1")
        z = rng.standard_normal((size, self.dim))
        return self.mean + z @ self._chol.T


@dataclass(frozen=True, eq=False)
class QuadraticFactor:
    """Unnormalized factor exp(bias + linear @ theta - 0.5 * theta @ quadratic @ theta).

    The quadratic coefficient must be symmetric but may be indefinite, which
    is what makes these factors usable both for likelihood bounds and for
    quotients of Gaussians.
    """

    bias: float
    linear: np.ndarray
    quadratic: np.ndarray

    def __post_init__(self):
        linear = np.asarray(self.linear, dtype=float)
        quadratic = np.asarray(self.quadratic, dtype=float)
        if linear.ndim != 1:
            raise ValueError("linear must be a 1-D array")
        if quadratic.shape != (linear.size, linear.size):
            raise ValueError("quadratic must be square and match linear")
        if not np.isfinite(self.bias) or not np.all(np.isfinite(linear)) or not np.all(
            np.isfinite(quadratic)
        ):
            raise ValueError("factor coefficients must be finite")
        quadratic = _check_symmetric(quadratic, "quadratic")
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "quadratic", quadratic)

    @property
    def dim(self) -> int:
        return self.linear.size

    def log_value(self, theta: np.ndarray) -> np.ndarray | float:
        """Log of the factor at one point (n,) or a batch (m, n)."""
        theta = np.asarray(theta, dtype=float)
        pts = np.atleast_2d(theta)
        out = self.bias + pts @ self.linear - 0.5 * np.sum((pts @ self.quadratic) * pts, axis=1)
        if theta.ndim == 1:
            return float(out[0])
        return out


def product_scale_and_posterior(
    belief: GaussianBelief, factor: QuadraticFactor
) -> tuple[float, GaussianBelief]:
    """Normalize the product of a Gaussian with an exponentiated quadratic.

    Writes N(theta; mean, cov) * factor(theta) = scale * N(theta; mean', cov')
    and returns (scale, posterior). The scale is the integral of the product
    over theta, evaluated in log space through Cholesky log-determinants.

    Raises
    ------
    ValueError
        If the combined precision cov^{-1} + quadratic is not positive
        definite, in which case the product is not normalizable.
    """
    if factor.dim != belief.dim:
        raise ValueError("factor dimension does not match belief")
    prior_prec_mean = belief.precision_times(belief.mean)
    precision = belief.precision() + factor.quadratic
    precision = 0.5 * (precision + precision.T)
    try:
        prec_chol = cholesky(precision, lower=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ValueError("combined precision is not positive definite") from exc
    post_cov = cho_solve((prec_chol, True), np.eye(belief.dim))
    post_cov = 0.5 * (post_cov + post_cov.T)
    lin = prior_prec_mean + factor.linear
    post_mean = cho_solve((prec_chol, True), lin)
    log_det_prec = 2.0 * float(np.sum(np.log(np.diag(prec_chol))))
    log_scale = (
        factor.bias
        - 0.5 * float(belief.mean @ prior_prec_mean)
        + 0.5 * float(lin @ post_mean)
        - 0.5 * belief.log_det_cov()
        - 0.5 * log_det_prec
    )
    return float(np.exp(log_scale)), GaussianBelief(post_mean, post_cov)


def factor_from_quotient(
    posterior: GaussianBelief, prior: GaussianBelief, scale: float
) -> QuadraticFactor:
    """Recover the factor that maps prior to a scaled posterior.

    Returns the QuadraticFactor such that
    scale * N(theta; posterior) = N(theta; prior) * factor(theta)
    holds pointwise. The quadratic coefficient is the precision difference
    and is allowed to be indefinite.
    """
    if posterior.dim != prior.dim:
        raise ValueError("posterior dimension does not match prior")
    if not np.isfinite(scale) or scale <= 0.0:
        raise ValueError("scale must be positive and finite")
    post_prec_mean = posterior.precision_times(posterior.mean)
    prior_prec_mean = prior.precision_times(prior.mean)
    quadratic = posterior.precision() - prior.precision()
    quadratic = 0.5 * (quadratic + quadratic.T)
    linear = post_prec_mean - prior_prec_mean
    bias = (
        float(np.log(scale))
        - 0.5 * posterior.log_det_cov()
        + 0.5 * prior.log_det_cov()
        - 0.5 * float(posterior.mean @ post_prec_mean)
        + 0.5 * float(prior.mean @ prior_prec_mean)
    )
    return QuadraticFactor(bias, linear, quadratic)


def expected_log_factor(factor: QuadraticFactor, belief: GaussianBelief) -> float:
    """Expectation of the log factor under the belief, in closed form.

    E[bias + linear @ theta - 0.5 theta' Q theta] evaluated at the belief's
    moments: bias + linear @ mean - 0.5 (trace(Q cov) + mean' Q mean).
    """
    if factor.dim != belief.dim:
        raise ValueError("factor dimension does not match belief")
    mean = belief.mean
    # trace(Q cov) via the elementwise sum, valid because both are symmetric.
    quad_term = float(np.sum(factor.quadratic * belief.cov)) + float(
        mean @ factor.quadratic @ mean
    )
    return factor.bias + float(factor.linear @ mean) - 0.5 * quad_term


def kl_divergence(p: GaussianBelief, q: GaussianBelief) -> float:
    """KL(p || q) between two Gaussians in closed form. Non-negative."""
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    diff = q.mean - p.mean
    trace_term = float(np.sum(q.precision() * p.cov))
    maha = float(diff @ q.precision_times(diff))
    kl = 0.5 * (trace_term + maha - p.dim + q.log_det_cov() - p.log_det_cov())
    return max(kl, 0.0)


def random_covariance(
    dim: int, rng: np.random.Generator, normalize: bool = True
) -> np.ndarray:
    """Random symmetric positive definite covariance from a uniform Gram matrix.

    Draws a dim x dim matrix with entries uniform on [0, 1), forms its Gram
    matrix and rebuilds it from the SVD with singular values clamped below at
    1e-6. With ``normalize`` (the default) the singular values are rescaled so
    the largest equals 1, giving a unit spectral radius; without it the raw
    Gram scale is kept, which grows roughly linearly with ``dim``. The clamp
    keeps the result invertible even when the Gram matrix is close to rank
    deficient.
    """
    if dim < 1:
        raise ValueError("dim must be at least 1")
    mat = rng.random((dim, dim))
    gram = mat.T @ mat
    u, vals, _ = np.linalg.svd(gram)
    vals = np.clip(vals, 1e-6, None)
    if normalize:
        vals = vals / vals.max()
    cov = (u * vals) @ u.T
    return 0.5 * (cov + cov.T)
