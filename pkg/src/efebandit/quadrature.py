"""Dense-grid quadrature reference for low-dimensional belief updates.

Everything here is deliberately independent of the approximate machinery:
integrals are evaluated on a tensor-product trapezoid grid in whitened
coordinates, spanning +/- 8 standard deviations per axis. Whitening (theta
= mean + chol(cov) @ u) turns the belief into a standard normal, so the
grid resolves even strongly correlated or nearly singular covariances,
and the trapezoid rule on these smooth Gaussian-tailed integrands
converges far past the tolerances used in the test suite. Supports
dimensions 1 to 3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .efe import EfeBreakdown, PriorPreference
from .gaussian import LOG_2PI, GaussianBelief
from .sigmoid import log_likelihood

__all__ = ["OracleEfe", "OracleFusion", "oracle_efe", "oracle_fusion"]

MAX_DIM = 3
HALF_WIDTH_SD = 8.0


@dataclass(frozen=True)
class OracleFusion:
    """Exact normalization constant and posterior moments for one outcome."""

    constant: float
    post_mean: np.ndarray
    post_cov: np.ndarray


@dataclass(frozen=True)
class OracleEfe:
    """Exact expected free energy of one action with per-outcome constants."""

    breakdown: EfeBreakdown
    constants: tuple[float, float]


def _axis(nodes: int):
    if nodes < 2:
        raise ValueError("nodes must be at least 2")
    ax = np.linspace(-HALF_WIDTH_SD, HALF_WIDTH_SD, nodes)
    step = ax[1] - ax[0]
    w = np.full(nodes, step)
    w[0] = 0.5 * step
    w[-1] = 0.5 * step
    return ax, w


def _iter_whitened_grid(dim: int, nodes: int):
    """Yield (u_points, weights) blocks covering the whitened tensor grid."""
    if dim > MAX_DIM:
        raise ValueError(f"grid quadrature supports up to {MAX_DIM} dimensions")
    ax, w = _axis(nodes)
    if dim == 1:
        yield ax[:, None], w
        return
    if dim == 2:
        aa, bb = np.meshgrid(ax, ax, indexing="ij")
        yield np.column_stack([aa.ravel(), bb.ravel()]), np.outer(w, w).ravel()
        return
    # Three dimensions: slice along the first axis to bound memory.
    bb, cc = np.meshgrid(ax, ax, indexing="ij")
    plane = np.column_stack([bb.ravel(), cc.ravel()])
    plane_w = np.outer(w, w).ravel()
    for a_val, a_w in zip(ax, w):
        yield np.column_stack([np.full(plane.shape[0], a_val), plane]), a_w * plane_w


def _log_standard_normal(u: np.ndarray) -> np.ndarray:
    return -0.5 * (u.shape[1] * LOG_2PI + np.sum(u * u, axis=1))


def oracle_fusion(
    belief: GaussianBelief, x: np.ndarray, outcome: int, nodes: int = 400
) -> OracleFusion:
    """Grid-integrated normalization constant and posterior moments.

    The posterior here is the true (non-Gaussian) normalized product of the
    belief with the sigmoid likelihood; the returned moments are its exact
    mean and covariance up to grid error.
    """
    x = np.asarray(x, dtype=float)
    total = 0.0
    first = np.zeros(belief.dim)
    second = np.zeros((belief.dim, belief.dim))
    for upts, ww in _iter_whitened_grid(belief.dim, nodes):
        pts = belief.mean + upts @ belief.chol.T
        dens = np.exp(_log_standard_normal(upts) + log_likelihood(pts @ x, outcome)) * ww
        total += float(dens.sum())
        first += dens @ pts
        second += (pts * dens[:, None]).T @ pts
    mean = first / total
    cov = second / total - np.outer(mean, mean)
    cov = 0.5 * (cov + cov.T)
    return OracleFusion(constant=total, post_mean=mean, post_cov=cov)


def oracle_efe(
    belief: GaussianBelief,
    x: np.ndarray,
    pref: PriorPreference,
    nodes: int = 400,
) -> OracleEfe:
    """Expected free energy of an action by direct numerical integration.

    Per outcome o the integrand is q(theta) p(o | theta) times the log ratio
    log(C_o / pref_o) - log p(o | theta) with C_o the outcome's predictive
    probability under the belief. The pragmatic and epistemic parts come from
    the same grid sums, so total = pragmatic - epistemic holds to roundoff.
    """
    x = np.asarray(x, dtype=float)
    consts = [0.0, 0.0]
    plogp = [0.0, 0.0]
    for upts, ww in _iter_whitened_grid(belief.dim, nodes):
        act = belief.mean @ x + upts @ (belief.chol.T @ x)
        base = np.exp(_log_standard_normal(upts)) * ww
        for o in (0, 1):
            ll = log_likelihood(act, o)
            mass = base * np.exp(ll)
            consts[o] += float(mass.sum())
            plogp[o] += float((mass * ll).sum())
    per_outcome = tuple(
        consts[o] * (np.log(consts[o]) - pref.log_prob(o)) - plogp[o] for o in (0, 1)
    )
    pragmatic = -sum(consts[o] * pref.log_prob(o) for o in (0, 1))
    epistemic = sum(plogp) - sum(consts[o] * np.log(consts[o]) for o in (0, 1))
    breakdown = EfeBreakdown(
        per_outcome=per_outcome,
        total=float(sum(per_outcome)),
        pragmatic=float(pragmatic),
        epistemic=float(epistemic),
    )
    return OracleEfe(breakdown=breakdown, constants=(float(consts[0]), float(consts[1])))
