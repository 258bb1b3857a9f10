"""Action-selection policies and the shared belief-update step.

Four policies over the same per-arm Gaussian belief state: a cheating
oracle that reads the true probabilities, epsilon-greedy on the plug-in
outcome probability, linear Thompson sampling and active inference
(minimum expected free energy). All learning policies share the same
belief updates, parameterized by the fusion method.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .efe import PriorPreference, select_action_active_inference
from .fusion import FusionMethod, fuse
from .gaussian import GaussianBelief

__all__ = [
    "PolicyKind",
    "AgentState",
    "initial_state",
    "oracle_select",
    "epsilon_greedy_select",
    "thompson_select",
    "select_arm",
    "update_belief",
]


class PolicyKind(str, Enum):
    ORACLE = "oracle"
    EPS_GREEDY = "eps-greedy"
    LTS = "lts"
    AI = "ai"


@dataclass(frozen=True)
class AgentState:
    """Immutable bandit-agent state; updates return a new instance."""

    beliefs: tuple[GaussianBelief, ...]
    policy: PolicyKind
    fusion: FusionMethod
    epsilon: float
    pref: PriorPreference
    pull_counts: np.ndarray
    n_samples: int = 1000

    @property
    def n_arms(self) -> int:
        return len(self.beliefs)


def initial_state(
    n_arms: int,
    dim: int,
    policy: PolicyKind,
    fusion: FusionMethod = FusionMethod.LAPLACE,
    epsilon: float = 0.25,
    pref: PriorPreference | None = None,
    n_samples: int = 1000,
) -> AgentState:
    """Fresh agent with standard-normal beliefs and zero pull counts."""
    if n_arms < 1 or dim < 1:
        raise ValueError("n_arms and dim must be at least 1")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if pref is None:
        pref = PriorPreference(0.001, 0.999)
    belief = GaussianBelief(np.zeros(dim), np.eye(dim))
    return AgentState(
        beliefs=(belief,) * n_arms,
        policy=PolicyKind(policy),
        fusion=FusionMethod(fusion),
        epsilon=float(epsilon),
        pref=pref,
        pull_counts=np.zeros(n_arms, dtype=np.int64),
        n_samples=int(n_samples),
    )


def oracle_select(true_probs: np.ndarray) -> int:
    """Best arm by true outcome probability, lowest index on ties."""
    return int(np.argmax(true_probs))


def epsilon_greedy_select(state: AgentState, x: np.ndarray, rng: np.random.Generator) -> int:
    """Uniform arm with probability epsilon, else the plug-in greedy arm.

    The greedy arm maximizes the plug-in success probability
    sigmoid(mean @ x); the sigmoid is monotone so the comparison is done on
    the activations directly.
    """
    if rng.random() < state.epsilon:
        return int(rng.integers(state.n_arms))
    activations = np.array([float(b.mean @ x) for b in state.beliefs])
    return int(np.argmax(activations))


def thompson_select(state: AgentState, x: np.ndarray, rng: np.random.Generator) -> int:
    """One posterior draw per arm, then the best sampled activation.

    Draws are taken in arm-index order so the stream consumption is
    reproducible. Monotonicity of the sigmoid again reduces the argmax to
    the linear activations.
    """
    sampled = np.array([float(b.sample(rng) @ x) for b in state.beliefs])
    return int(np.argmax(sampled))


def select_arm(
    state: AgentState,
    x: np.ndarray,
    rng: np.random.Generator,
    true_probs: np.ndarray | None = None,
) -> int:
    """Dispatch selection for the state's policy."""
    if state.policy is PolicyKind.ORACLE:
        if true_probs is None:
            raise ValueError("oracle selection needs the true probabilities")
        return oracle_select(true_probs)
    if state.policy is PolicyKind.EPS_GREEDY:
        return epsilon_greedy_select(state, x, rng)
    if state.policy is PolicyKind.LTS:
        return thompson_select(state, x, rng)
    return select_action_active_inference(
        list(state.beliefs), x, state.pref, state.fusion, rng=rng, n_samples=state.n_samples
    )


def update_belief(
    state: AgentState,
    arm: int,
    x: np.ndarray,
    outcome: int,
    rng: np.random.Generator,
) -> AgentState:
    """Fuse the pulled arm's belief with the observed outcome.

    Only the pulled arm changes. The oracle policy keeps its beliefs fixed
    (it never reads them) but still counts the pull.
    """
    if not 0 <= arm < state.n_arms:
        raise ValueError(f"arm index {arm} out of range")
    counts = state.pull_counts.copy()
    counts[arm] += 1
    if state.policy is PolicyKind.ORACLE:
        return replace(state, pull_counts=counts)
    fused = fuse(state.beliefs[arm], x, outcome, state.fusion, rng=rng, n_samples=state.n_samples)
    beliefs = state.beliefs[:arm] + (fused.posterior,) + state.beliefs[arm + 1 :]
    return replace(state, beliefs=beliefs, pull_counts=counts)
