"""Policy identification algorithms: the G-optimal-design interactive method
and the Rand-P / Rand-T / Log-TS baselines.

Each algorithm maps (problem, logged dataset, designer channel, config) to a
final policy plus the elicited trade-off vector, issuing exactly T channel
queries. Runs are deterministic given the config seed and the channel's own
randomness.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Policy, ProblemSpec, simple_regret, true_value
from .design import g_optimal_design, sample_from_design
from .elicitation import (
    ChannelError,
    QueryRecord,
    logistic_mle,
    min_sigmoid_derivative,
)
from .estimators import (
    dm_estimate,
    dr_estimate,
    fit_reward_model,
    ips_estimate,
    linear_value_map,
    policy_value_from_map,
)
from .optimizer import (
    ScalarizedCoefficients,
    coefficients_from_map,
    optimize_scalarized,
    true_value_coefficients,
)
from .problems import LogDataset

DUPLICATE_TOL = 1e-9  # infinity-norm threshold for collapsing candidate values


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by all algorithms."""

    budget_t: int
    preselect_l: int = 500
    estimator_kind: str = "ips"
    clip_m: float = 10.0
    seed: int = 0
    ridge: float = 1e-6
    design_tolerance: float = 0.05
    force_theta: Optional[np.ndarray] = None  # bypass elicitation (oracle mode)

    def __post_init__(self):
        if self.budget_t < 1 or self.preselect_l < 1:
            raise ValueError("budget_t and preselect_l must be >= 1")
        if self.clip_m <= 0 or self.ridge < 0 or self.design_tolerance <= 0:
            raise ValueError("clip_m/design_tolerance must be positive, ridge nonnegative")


@dataclass(frozen=True)
class RunResult:
    final_policy: Policy
    theta_hat: np.ndarray
    candidates: list  # list of (Policy, value vector) pairs
    queries: list  # list of QueryRecord
    simple_regret: Optional[float]
    diagnostics: dict = field(default_factory=dict)
    error: Optional[str] = None


class _EstimatorContext:
    """Per-dataset estimator state: linear value map, caps, and the record-level estimator."""

    def __init__(self, data: LogDataset, config: RunConfig):
        self.data = data
        self.kind = config.estimator_kind
        self.clip_m = config.clip_m
        self.model = fit_reward_model(data) if self.kind in ("dm", "dr") else None
        clip = config.clip_m if self.kind == "ips" else None
        self.value_map, self.caps = linear_value_map(self.kind, data, model=self.model, clip_m=clip)

    def coefficients(self, theta: np.ndarray) -> ScalarizedCoefficients:
        return coefficients_from_map(self.value_map, self.caps, theta)

    def optimize(self, theta: np.ndarray) -> Policy:
        return optimize_scalarized(self.coefficients(theta))

    def value_in_caps(self, pi: Policy) -> np.ndarray:
        """Estimated value for policies inside the caps (linear form applies)."""
        return policy_value_from_map(self.value_map, pi)

    def value(self, pi: Policy) -> np.ndarray:
        """Estimated value for arbitrary policies (record-level, clipping applied)."""
        if self.kind == "dm":
            return dm_estimate(self.model, self.data, pi)
        if self.kind == "ips":
            return ips_estimate(self.data, pi, clip_m=self.clip_m)
        return dr_estimate(self.model, self.data, pi)


def sample_unit_ball(rng: np.random.Generator, d: int) -> np.ndarray:
    """Uniform draw from the d-dimensional unit ball."""
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    return direction * rng.random() ** (1.0 / d)


def _preselect(ctx: _EstimatorContext, l: int, rng: np.random.Generator) -> list[tuple[Policy, np.ndarray]]:
    d = ctx.data.num_objectives
    candidates: list[tuple[Policy, np.ndarray]] = []
    for _ in range(l):
        theta = sample_unit_ball(rng, d)
        pi = ctx.optimize(theta)
        v = ctx.value_in_caps(pi)
        if not any(np.max(np.abs(v - kept_v)) < DUPLICATE_TOL for _, kept_v in candidates):
            candidates.append((pi, v))
    return candidates


def preselect_candidates(
    data: LogDataset, estimator_kind: str, l: int, seed: int, clip_m: float = 10.0
) -> list[tuple[Policy, np.ndarray]]:
    """Discretize the policy space: optimal policies under l random scalarizations,
    with duplicate value vectors collapsed (first occurrence kept).
    """
    config = RunConfig(budget_t=1, preselect_l=l, estimator_kind=estimator_kind, clip_m=clip_m)
    return _preselect(_EstimatorContext(data, config), l, np.random.default_rng(seed))


def _finish(
    problem: ProblemSpec,
    ctx: _EstimatorContext,
    config: RunConfig,
    channel,
    candidates,
    queries,
    diagnostics,
    final_policy: Optional[Policy] = None,
    error: Optional[str] = None,
) -> RunResult:
    """Shared tail: MLE, global optimization under theta_hat, diagnostics, regret."""
    if config.force_theta is not None:
        theta_hat = np.asarray(config.force_theta, dtype=float)
    elif queries:
        theta_hat = logistic_mle(queries, ridge=config.ridge)
    else:
        theta_hat = np.zeros(ctx.data.num_objectives)
    if final_policy is None:
        final_policy = ctx.optimize(theta_hat)

    if queries:
        answers = [q.answer for q in queries]
        shown = np.array([q.value_vector for q in queries])
        diagnostics["c_min_observed"] = min_sigmoid_derivative(theta_hat, shown)
        diagnostics["degenerate_answers"] = len(set(answers)) < 2
    v_final = ctx.value_in_caps(final_policy)
    diagnostics["final_value_hat"] = v_final.tolist()
    diagnostics["final_utility_hat"] = float(theta_hat @ v_final)
    regret = None
    theta_star = getattr(channel, "theta_star", None)
    if theta_star is not None and problem.true_mean_rewards is not None:
        regret = evaluate_simple_regret(problem, theta_star, final_policy)
        diagnostics["estimator_error"] = float(
            np.linalg.norm(ctx.value(final_policy) - true_value(problem, final_policy))
        )
    return RunResult(
        final_policy=final_policy,
        theta_hat=theta_hat,
        candidates=list(candidates),
        queries=list(queries),
        simple_regret=regret,
        diagnostics=diagnostics,
        error=error,
    )


def evaluate_simple_regret(problem: ProblemSpec, theta_star: np.ndarray, policy: Policy) -> float:
    """Regret of a policy against the exact optimum under theta_star (analytic problems)."""
    opt = optimize_scalarized(true_value_coefficients(problem, theta_star))
    return simple_regret(theta_star, true_value(problem, opt), true_value(problem, policy))


def run_imo3(problem: ProblemSpec, data: LogDataset, channel, config: RunConfig) -> RunResult:
    """Preselect candidates under random scalarizations, query the designer by
    G-optimal design over their estimated values, fit the trade-off MLE, and
    optimize globally under it.
    """
    rng = np.random.default_rng(config.seed)
    ctx = _EstimatorContext(data, config)
    candidates = _preselect(ctx, config.preselect_l, rng)
    values = np.array([v for _, v in candidates])
    weights = g_optimal_design(values, tolerance=config.design_tolerance)
    diagnostics = {
        "g_value": weights.g_value,
        "effective_dim": weights.effective_dim,
        "num_candidates": len(candidates),
    }
    queries: list[QueryRecord] = []
    try:
        for t in range(1, config.budget_t + 1):
            idx = sample_from_design(weights, rng)
            v = values[idx]
            queries.append(QueryRecord(value_vector=v, answer=channel.ask(v), round=t))
    except ChannelError as exc:
        return _finish(problem, ctx, config, channel, candidates, queries, diagnostics,
                       error=str(exc))
    return _finish(problem, ctx, config, channel, candidates, queries, diagnostics)


def run_rand_p(problem: ProblemSpec, data: LogDataset, channel, config: RunConfig) -> RunResult:
    """Baseline: query uniformly random policies (each row uniform on the simplex)."""
    rng = np.random.default_rng(config.seed)
    ctx = _EstimatorContext(data, config)
    num_x, num_a = data.logging_policy.probs.shape
    queries: list[QueryRecord] = []
    try:
        for t in range(1, config.budget_t + 1):
            pi = Policy(rng.dirichlet(np.ones(num_a), size=num_x))
            v = ctx.value(pi)  # random policies may violate the caps; clip at record level
            queries.append(QueryRecord(value_vector=v, answer=channel.ask(v), round=t))
    except ChannelError as exc:
        return _finish(problem, ctx, config, channel, [], queries, {}, error=str(exc))
    return _finish(problem, ctx, config, channel, [], queries, {})


def run_rand_t(problem: ProblemSpec, data: LogDataset, channel, config: RunConfig) -> RunResult:
    """Baseline: query policies optimal under uniformly random trade-off vectors."""
    rng = np.random.default_rng(config.seed)
    ctx = _EstimatorContext(data, config)
    d = data.num_objectives
    queries: list[QueryRecord] = []
    try:
        for t in range(1, config.budget_t + 1):
            pi = ctx.optimize(sample_unit_ball(rng, d))
            v = ctx.value_in_caps(pi)
            queries.append(QueryRecord(value_vector=v, answer=channel.ask(v), round=t))
    except ChannelError as exc:
        return _finish(problem, ctx, config, channel, [], queries, {}, error=str(exc))
    return _finish(problem, ctx, config, channel, [], queries, {})


def run_log_ts(problem: ProblemSpec, data: LogDataset, channel, config: RunConfig) -> RunResult:
    """Baseline: logistic Thompson sampling with a Laplace-approximate posterior;
    the returned policy is the average of the T queried policies.
    """
    rng = np.random.default_rng(config.seed)
    ctx = _EstimatorContext(data, config)
    d = data.num_objectives
    prior_precision = max(config.ridge, 1e-6)
    queries: list[QueryRecord] = []
    policy_sum = np.zeros_like(data.logging_policy.probs)
    trace_path = []
    try:
        for t in range(1, config.budget_t + 1):
            if queries:
                shown = np.array([q.value_vector for q in queries])
                answers = np.array([q.answer for q in queries], dtype=float)
                mu = logistic_mle((shown, answers), ridge=prior_precision)
                p = 1.0 / (1.0 + np.exp(-(shown @ mu)))
                hess = shown.T @ ((p * (1 - p))[:, None] * shown) + prior_precision * np.eye(d)
            else:
                mu = np.zeros(d)
                hess = prior_precision * np.eye(d)
            cov = np.linalg.inv(hess)
            trace_path.append(float(np.trace(cov)))
            theta_t = rng.multivariate_normal(mu, cov, method="cholesky")
            pi = ctx.optimize(theta_t)
            policy_sum += pi.probs
            v = ctx.value_in_caps(pi)
            queries.append(QueryRecord(value_vector=v, answer=channel.ask(v), round=t))
    except ChannelError as exc:
        return _finish(problem, ctx, config, channel, [], queries,
                       {"posterior_trace": trace_path}, error=str(exc))
    averaged = Policy(policy_sum / config.budget_t)
    return _finish(problem, ctx, config, channel, [], queries,
                   {"posterior_trace": trace_path}, final_policy=averaged)


ALGORITHMS: dict[str, Callable[..., RunResult]] = {
    "imo3": run_imo3,
    "rand_p": run_rand_p,
    "rand_t": run_rand_t,
    "log_ts": run_log_ts,
}
