"""Synthetic contextual Bernoulli bandit environments.

An environment fixes one weight vector per arm and a single binary context
shared by every round; each pull of arm k returns success with probability
sigmoid(theta_k @ x). Environments are immutable after generation and can
be round-tripped through a JSON manifest for audit and replay.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianBelief, random_covariance
from .sigmoid import context_vector, sigmoid

__all__ = [
    "Environment",
    "generate_environment",
    "pull",
    "cumulative_regret",
    "env_to_manifest",
    "env_from_manifest",
]

_REGRET_ROUNDOFF = 1e-9


@dataclass(frozen=True, eq=False)
class Environment:
    """Fixed ground truth of one bandit instance.

    ``true_thetas`` has one row per arm, ``context`` is the shared binary
    context and ``true_probs``/``best_prob`` are derived success
    probabilities. ``seed`` is bookkeeping only (None when the environment
    came from an externally seeded stream).
    """

    true_thetas: np.ndarray
    context: np.ndarray
    true_probs: np.ndarray
    best_prob: float
    seed: int | None = None

    def __post_init__(self):
        thetas = np.array(self.true_thetas, dtype=float)
        context = context_vector(self.context).copy()
        probs = np.array(self.true_probs, dtype=float)
        if thetas.ndim != 2 or thetas.shape[0] < 1:
            raise ValueError("true_thetas must be a (n_arms, dim) array")
        if context.shape != (thetas.shape[1],):
            raise ValueError("context dimension does not match true_thetas")
        if probs.shape != (thetas.shape[0],):
            raise ValueError("true_probs must have one entry per arm")
        if not np.all((probs > 0.0) & (probs < 1.0)):
            raise ValueError("true_probs must lie strictly in (0, 1)")
        if float(probs.max()) != self.best_prob:
            raise ValueError("best_prob must equal max(true_probs)")
        for arr in (thetas, context, probs):
            arr.flags.writeable = False
        object.__setattr__(self, "true_thetas", thetas)
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "true_probs", probs)
        object.__setattr__(self, "best_prob", float(self.best_prob))

    @property
    def n_arms(self) -> int:
        return self.true_thetas.shape[0]

    @property
    def dim(self) -> int:
        return self.true_thetas.shape[1]


def generate_environment(
    n_arms: int,
    dim: int,
    rng: np.random.Generator,
    seed: int | None = None,
) -> Environment:
    """Draw a fresh environment from the generative model.

    Per arm, in order: a mean with entries uniform on [0, 1), an unnormalized
    Gram-matrix covariance, then one weight draw from that Gaussian. After all
    arms, the context entries are i.i.d. fair coin flips. The draw order is
    part of the reproducibility contract.

    The covariance is deliberately left at its raw Gram scale: context scores
    theta @ x then spread over tens of logits, so every instance mixes
    near-certain successes with near-certain failures and policies are
    separated by how fast they find a good arm. Normalizing the spectral
    radius instead would push almost every arm above 0.9 at higher dimensions
    and the policies would become statistically indistinguishable.
    """
    if n_arms < 1 or dim < 1:
        raise ValueError("n_arms and dim must be at least 1")
    thetas = np.empty((n_arms, dim))
    for k in range(n_arms):
        mean = rng.random(dim)
        cov = random_covariance(dim, rng, normalize=False)
        thetas[k] = GaussianBelief(mean, cov).sample(rng)
    context = (rng.random(dim) < 0.5).astype(float)
    probs = sigmoid(thetas @ context)
    # Scores beyond ~37 logits round the sigmoid to exactly 0.0 or 1.0 in
    # floats even though the true probability is interior; clamp to the
    # nearest representable interior value so downstream strictness holds.
    probs = np.clip(probs, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    return Environment(
        true_thetas=thetas,
        context=context,
        true_probs=probs,
        best_prob=float(probs.max()),
        seed=seed,
    )


def pull(env: Environment, arm: int, rng: np.random.Generator) -> int:
    """Bernoulli outcome of pulling one arm under the fixed context."""
    if not 0 <= arm < env.n_arms:
        raise ValueError(f"arm index {arm} out of range")
    return int(rng.random() < env.true_probs[arm])


def cumulative_regret(env: Environment, pull_counts: np.ndarray) -> float:
    """Expected-shortfall regret of a pull allocation.

    With T total pulls, returns T * best_prob - sum_k N_k * true_probs[k].
    Non-negative by construction; tiny negative roundoff is clamped to 0.
    """
    counts = np.asarray(pull_counts)
    if counts.shape != (env.n_arms,):
        raise ValueError("pull_counts must have one entry per arm")
    if np.any(counts < 0) or not np.issubdtype(counts.dtype, np.integer):
        raise ValueError("pull_counts must be non-negative integers")
    total = int(counts.sum())
    value = total * env.best_prob - float(counts @ env.true_probs)
    if value < 0.0:
        if value < -_REGRET_ROUNDOFF:
            raise AssertionError(f"negative regret {value} beyond roundoff")
        value = 0.0
    return value


def env_to_manifest(env: Environment) -> str:
    """Serialize an environment to a JSON text manifest.

    Floats go through Python's shortest round-trip repr, so parsing the
    manifest back reproduces the environment bit for bit.
    """
    payload = {
        "seed": env.seed,
        "n_arms": env.n_arms,
        "dim": env.dim,
        "true_thetas": env.true_thetas.tolist(),
        "context": env.context.tolist(),
        "true_probs": env.true_probs.tolist(),
        "best_prob": env.best_prob,
    }
    return json.dumps(payload, indent=2)


def env_from_manifest(text: str) -> Environment:
    """Rebuild an environment from its JSON manifest."""
    payload = json.loads(text)
    return Environment(
        true_thetas=np.array(payload["true_thetas"], dtype=float),
        context=np.array(payload["context"], dtype=float),
        true_probs=np.array(payload["true_probs"], dtype=float),
        best_prob=float(payload["best_prob"]),
        seed=payload.get("seed"),
    )
