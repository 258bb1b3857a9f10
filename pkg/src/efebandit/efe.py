"""Expected free energy of candidate actions under Gaussian beliefs.

For each arm and each hypothetical outcome the belief is fused with that
outcome, and the fused scale and posterior are converted back into an
effective likelihood factor. The expected free energy then combines a risk
term (how far the predicted outcome distribution sits from the preferred
one) with an information term (how much the posterior would move), and the
arm minimizing the total is selected.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np

from .fusion import FusionMethod, FusionResult, fuse
from .gaussian import GaussianBelief, expected_log_factor, factor_from_quotient, kl_divergence

__all__ = [
    "PriorPreference",
    "EfeBreakdown",
    "outcome_efe",
    "efe_total",
    "select_action_active_inference",
]

_PREF_SUM_TOL = 1e-12


@dataclass(frozen=True)
class PriorPreference:
    """Preferred outcome distribution (p0 for failure, p1 for success).

    Both entries must lie strictly inside (0, 1) and sum to one. Sharply
    peaked preferences (for example p1 = 0.999) make the risk term dominate
    action selection; near-uniform ones leave it to the information term.
    """

    p0: float
    p1: float

    def __post_init__(self):
        if not (0.0 < self.p0 < 1.0 and 0.0 < self.p1 < 1.0):
            raise ValueError("preference entries must lie strictly in (0, 1)")
        if abs(self.p0 + self.p1 - 1.0) > _PREF_SUM_TOL:
            raise ValueError("preference entries must sum to 1")

    def prob(self, outcome: int) -> float:
        return self.p1 if outcome == 1 else self.p0

    def log_prob(self, outcome: int) -> float:
        return log(self.prob(outcome))


@dataclass(frozen=True)
class EfeBreakdown:
    """Expected free energy of one action split two ways.

    ``per_outcome`` sums exactly to ``total``. ``pragmatic`` (expected
    preference surprise) minus ``epistemic`` (expected information gain)
    equals the total only up to the approximation quality of the fusion
    scheme that produced the parts.
    """

    per_outcome: tuple[float, float]
    total: float
    pragmatic: float
    epistemic: float


def outcome_efe(fusion: FusionResult, belief: GaussianBelief, pref: PriorPreference, outcome: int) -> float:
    """Contribution of one hypothetical outcome, from its fusion result.

    The fused (scale, posterior) pair is rewritten as an effective
    likelihood factor against the belief; the contribution is then
    c * log(c / pref) - c * E_posterior[log factor].
    """
    c = fusion.c_hat
    factor = factor_from_quotient(fusion.posterior, belief, c)
    risk = c * (log(c) - pref.log_prob(outcome))
    anticipated = c * expected_log_factor(factor, fusion.posterior)
    return risk - anticipated


def efe_total(
    belief: GaussianBelief,
    x: np.ndarray,
    pref: PriorPreference,
    method: FusionMethod,
    rng: np.random.Generator | None = None,
    n_samples: int = 1000,
) -> EfeBreakdown:
    """Expected free energy of one action with its decomposition.

    Runs one fusion per hypothetical outcome (fresh importance samples each
    time for the sampling scheme) and assembles the per-outcome terms plus
    the pragmatic/epistemic split from the same fusion results. The split
    weighs each outcome by its estimated predictive probability and uses the
    closed-form Gaussian divergence from posterior to belief.
    """
    per_outcome = []
    pragmatic = 0.0
    epistemic = 0.0
    for o in (0, 1):
        fusion = fuse(belief, x, o, method, rng=rng, n_samples=n_samples)
        per_outcome.append(outcome_efe(fusion, belief, pref, o))
        pragmatic -= fusion.c_hat * pref.log_prob(o)
        epistemic += fusion.c_hat * kl_divergence(fusion.posterior, belief)
    return EfeBreakdown(
        per_outcome=(per_outcome[0], per_outcome[1]),
        total=per_outcome[0] + per_outcome[1],
        pragmatic=pragmatic,
        epistemic=epistemic,
    )


def select_action_active_inference(
    beliefs: list[GaussianBelief],
    x: np.ndarray,
    pref: PriorPreference,
    method: FusionMethod,
    rng: np.random.Generator | None = None,
    n_samples: int = 1000,
) -> int:
    """Index of the arm with the smallest expected free energy.

    Arms are evaluated in index order (which also fixes the random-draw
    order for the sampling scheme) and exact ties go to the lowest index.
    """
    if not beliefs:
        raise ValueError("beliefs must be non-empty")
    totals = np.array(
        [efe_total(b, x, pref, method, rng=rng, n_samples=n_samples).total for b in beliefs]
    )
    return int(np.argmin(totals))
