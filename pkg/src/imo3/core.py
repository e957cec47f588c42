"""Shared domain types: problems, policies, value vectors, utility arithmetic.

Contexts and actions are dense integer indices; policies are tabular
(one probability row per context). All types are immutable after
construction and every operation here is a pure function.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

SIMPLEX_ATOL = 1e-9

# A value vector is a length-d float array (expected per-round reward per
# objective); a scalarization is a length-d trade-off vector.
ValueVector = np.ndarray
Scalarization = np.ndarray


@dataclass(frozen=True)
class Policy:
    """Tabular stochastic policy: row x of ``probs`` is the distribution over actions in context x."""

    probs: np.ndarray  # shape (num_contexts, num_actions)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2:
            raise ValueError(f"policy matrix must be 2-D, got shape {p.shape}")
        if np.any(p < -SIMPLEX_ATOL):
            raise ValueError("policy has negative action probabilities")
        row_sums = p.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > 1e-6):
            bad = int(np.argmax(np.abs(row_sums - 1.0)))
            raise ValueError(f"policy row {bad} sums to {row_sums[bad]:.9f}, not 1")
        object.__setattr__(self, "probs", p)
        self.probs.setflags(write=False)

    @property
    def num_contexts(self) -> int:
        return self.probs.shape[0]

    @property
    def num_actions(self) -> int:
        return self.probs.shape[1]

    @staticmethod
    def uniform(num_contexts: int, num_actions: int) -> "Policy":
        return Policy(np.full((num_contexts, num_actions), 1.0 / num_actions))

    @staticmethod
    def point_mass(num_contexts: int, num_actions: int, actions) -> "Policy":
        """Deterministic policy playing ``actions[x]`` in context x."""
        probs = np.zeros((num_contexts, num_actions))
        probs[np.arange(num_contexts), np.asarray(actions, dtype=int)] = 1.0
        return Policy(probs)


@dataclass(frozen=True)
class ProblemSpec:
    """A tabular multi-objective bandit instance.

    ``reward_sampler(context, action, rng)`` returns a length-d reward on the
    normalized scale; mean rewards lie in [0, 1]^d, though noisy samples may
    exit that box. ``true_mean_rewards`` is present when the objectives are
    known analytically (or empirically from a full ingestion dataset);
    otherwise ``evaluation_data`` supplies a held-out log for empirical
    policy values.
    """

    num_contexts: int
    num_actions: int
    num_objectives: int
    context_distribution: np.ndarray
    reward_sampler: Callable[[int, int, np.random.Generator], np.ndarray]
    true_mean_rewards: Optional[np.ndarray] = None  # (|X|, K, d)
    evaluation_data: Optional[object] = None  # problems.LogDataset
    problem_id: str = "custom"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("num_contexts", "num_actions", "num_objectives"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        px = np.asarray(self.context_distribution, dtype=float)
        if px.shape != (self.num_contexts,):
            raise ValueError("context_distribution shape mismatch")
        if np.any(px < 0) or abs(px.sum() - 1.0) > SIMPLEX_ATOL:
            raise ValueError("context_distribution is not a probability vector")
        object.__setattr__(self, "context_distribution", px)
        if self.true_mean_rewards is not None:
            means = np.asarray(self.true_mean_rewards, dtype=float)
            expected = (self.num_contexts, self.num_actions, self.num_objectives)
            if means.shape != expected:
                raise ValueError(f"true_mean_rewards shape {means.shape} != {expected}")
            object.__setattr__(self, "true_mean_rewards", means)


def _check_dims(a: np.ndarray, b: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"{what}: dimension mismatch {a.shape} vs {b.shape}")
    return a, b


def utility(theta: Scalarization, v: ValueVector) -> float:
    """Scalarized utility of a value vector: the dot product theta . v."""
    theta, v = _check_dims(theta, v, "utility")
    return float(theta @ v)


def simple_regret(theta_star: Scalarization, v_opt: ValueVector, v_chosen: ValueVector) -> float:
    """Utility gap between the optimal value vector and the chosen one under theta_star."""
    return utility(theta_star, v_opt) - utility(theta_star, v_chosen)


def true_value(problem: ProblemSpec, pi: Policy) -> ValueVector:
    """Exact expected value of ``pi``.

    Analytic mode (known mean rewards) computes
    sum_x P(x) sum_a pi(a|x) E[r | x, a]; empirical mode importance-weights
    the problem's full evaluation dataset with exact propensities and no
    clipping.
    """
    if pi.probs.shape != (problem.num_contexts, problem.num_actions):
        raise ValueError("policy shape does not match problem")
    if problem.true_mean_rewards is not None:
        # (X,) @ [(X,K) * (X,K,d) summed over K] -> (d,)
        per_context = np.einsum("xk,xkd->xd", pi.probs, problem.true_mean_rewards)
        return problem.context_distribution @ per_context
    data = problem.evaluation_data
    if data is None:
        raise ValueError("problem has neither analytic means nor an evaluation dataset")
    weights = pi.probs[data.contexts, data.actions] / data.propensities
    return weights @ data.rewards / len(data)
