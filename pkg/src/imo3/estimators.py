"""Off-policy value estimators for vector rewards: DM, clipped IPS, DR.

All three estimators are linear in the policy over their feasible sets,
which the optimizer exploits; ``linear_value_map`` exposes that linear form
directly as a per-(context, action) value tensor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Policy, ValueVector
from .problems import LogDataset

ESTIMATOR_KINDS = ("dm", "ips", "dr")


@dataclass(frozen=True)
class RewardModel:
    """Empirical-mean reward model r_hat(a, x) with per-pair support counts."""

    mean_estimates: np.ndarray  # (|X|, K, d)
    support_counts: np.ndarray  # (|X|, K) int

    def __post_init__(self):
        if not np.all(np.isfinite(self.mean_estimates)):
            raise ValueError("reward model contains non-finite entries")


def fit_reward_model(data: LogDataset) -> RewardModel:
    """Empirical mean per (x, a); pairs never logged fall back to the global per-objective mean."""
    if len(data) == 0:
        raise ValueError("cannot fit a reward model on an empty dataset")
    num_x, num_a = data.logging_policy.probs.shape
    d = data.num_objectives
    sums = np.zeros((num_x, num_a, d))
    counts = np.zeros((num_x, num_a), dtype=int)
    np.add.at(sums, (data.contexts, data.actions), data.rewards)
    np.add.at(counts, (data.contexts, data.actions), 1)
    means = np.where(counts[..., None] > 0, sums / np.maximum(counts, 1)[..., None],
                     data.rewards.mean(axis=0))
    return RewardModel(mean_estimates=means, support_counts=counts)


def _check_policy(data: LogDataset, pi: Policy) -> None:
    if pi.probs.shape != data.logging_policy.probs.shape:
        raise ValueError("policy shape does not match the dataset's logging policy")


def dm_estimate(model: RewardModel, data: LogDataset, pi: Policy) -> ValueVector:
    """Direct method: (1/N) sum_j sum_a pi(a|x_j) r_hat(a, x_j)."""
    if len(data) == 0:
        raise ValueError("empty dataset")
    _check_policy(data, pi)
    counts = np.bincount(data.contexts, minlength=pi.num_contexts)
    return np.einsum("x,xk,xkd->d", counts / len(data), pi.probs, model.mean_estimates)


def ips_estimate(data: LogDataset, pi: Policy, clip_m: float = 10.0) -> ValueVector:
    """Clipped inverse propensity scoring: weights min{M, pi/pi0} on logged rewards."""
    if clip_m <= 0:
        raise ValueError("clip level M must be positive")
    _check_policy(data, pi)
    if np.any(data.propensities <= 0):
        raise ValueError("nonpositive propensity in dataset")
    w = np.minimum(clip_m, pi.probs[data.contexts, data.actions] / data.propensities)
    return w @ data.rewards / len(data)


def dr_estimate(model: RewardModel, data: LogDataset, pi: Policy, clip_m: float | None = None) -> ValueVector:
    """Doubly robust: unclipped importance-weighted model residuals plus the DM baseline.

    ``clip_m`` optionally clips the residual weights for numerical safety;
    the default keeps the ratio unclipped.
    """
    _check_policy(data, pi)
    if np.any(data.propensities <= 0):
        raise ValueError("nonpositive propensity in dataset")
    w = pi.probs[data.contexts, data.actions] / data.propensities
    if clip_m is not None:
        w = np.minimum(clip_m, w)
    residual = data.rewards - model.mean_estimates[data.contexts, data.actions]
    return w @ residual / len(data) + dm_estimate(model, data, pi)


def linear_value_map(
    estimator_kind: str,
    data: LogDataset,
    model: RewardModel | None = None,
    clip_m: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-(x, a) value tensor W and feasibility caps for the chosen estimator.

    For any policy pi inside the caps, V_hat(pi) = sum_{x,a} pi(a|x) W[x,a];
    this is the linear form the per-context LP optimizer maximizes. Caps are
    1 for DM/DR and M * pi0(a|x) for IPS (the unclipped-policy set).
    """
    if estimator_kind not in ESTIMATOR_KINDS:
        raise ValueError(f"unknown estimator {estimator_kind!r}; expected one of {ESTIMATOR_KINDS}")
    num_x, num_a = data.logging_policy.probs.shape
    n, d = len(data), data.num_objectives
    counts = np.bincount(data.contexts, minlength=num_x)
    caps = np.ones((num_x, num_a))

    if estimator_kind == "dm":
        if model is None:
            raise ValueError("DM needs a reward model")
        return (counts / n)[:, None, None] * model.mean_estimates, caps

    if np.any(data.propensities <= 0):
        raise ValueError("nonpositive propensity in dataset")
    # Per-pair sum of importance-weighted rewards; pi0 taken from the policy table.
    weighted = np.zeros((num_x, num_a, d))
    np.add.at(weighted, (data.contexts, data.actions), data.rewards / data.propensities[:, None])
    weighted /= n
    if estimator_kind == "ips":
        if clip_m is None:
            raise ValueError("IPS needs a clip level M")
        return weighted, clip_m * data.logging_policy.probs
    # DR: importance-weighted residual sums plus the DM term.
    if model is None:
        raise ValueError("DR needs a reward model")
    pair_counts = np.zeros((num_x, num_a))
    np.add.at(pair_counts, (data.contexts, data.actions), 1.0 / data.propensities)
    residual = weighted - pair_counts[..., None] * model.mean_estimates / n
    return residual + (counts / n)[:, None, None] * model.mean_estimates, caps


def policy_value_from_map(value_map: np.ndarray, pi: Policy) -> ValueVector:
    """Evaluate the linear form at a policy (valid inside the estimator's caps)."""
    return np.einsum("xk,xkd->d", pi.probs, value_map)
