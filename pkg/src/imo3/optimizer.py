"""Scalarized policy optimization over the tabular policy polytope.

The scalarized objective theta . V_hat(pi) is linear in the policy entries
and the feasible set decomposes per context into a simplex intersected with
box caps, so each context reduces to a fractional-knapsack fill. A vertex
enumeration oracle is included for testing.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import Policy, ProblemSpec, Scalarization
from .estimators import RewardModel, linear_value_map
from .problems import LogDataset


@dataclass(frozen=True)
class ScalarizedCoefficients:
    """Linear objective coefficients per (context, action) with per-entry upper bounds."""

    coeffs: np.ndarray  # (|X|, K)
    caps: np.ndarray  # (|X|, K); 1 when unconstrained, M * pi0(a|x) for IPS

    def __post_init__(self):
        if self.coeffs.shape != self.caps.shape:
            raise ValueError("coeffs and caps shapes disagree")
        if np.any(self.caps <= 0):
            raise ValueError("caps must be strictly positive")


def coefficients_from_map(value_map: np.ndarray, caps: np.ndarray, theta: Scalarization) -> ScalarizedCoefficients:
    """Contract a (|X|, K, d) linear value tensor against theta."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (value_map.shape[2],):
        raise ValueError("theta dimension does not match the value map")
    return ScalarizedCoefficients(coeffs=value_map @ theta, caps=np.asarray(caps, dtype=float))


def scalarized_coefficients(
    estimator_kind: str,
    data: LogDataset,
    theta: Scalarization,
    model: RewardModel | None = None,
    clip_m: float | None = None,
) -> ScalarizedCoefficients:
    """Coefficients such that theta . V_hat(pi) = sum_{x,a} coeffs[x,a] * pi(a|x) on the feasible set."""
    value_map, caps = linear_value_map(estimator_kind, data, model=model, clip_m=clip_m)
    return coefficients_from_map(value_map, caps, theta)


def true_value_coefficients(problem: ProblemSpec, theta: Scalarization) -> ScalarizedCoefficients:
    """Coefficients of the exact scalarized value theta . V(pi) (analytic problems only)."""
    if problem.true_mean_rewards is None:
        raise ValueError("problem has no analytic mean rewards")
    coeffs = problem.context_distribution[:, None] * (problem.true_mean_rewards @ np.asarray(theta, dtype=float))
    return ScalarizedCoefficients(coeffs=coeffs, caps=np.ones_like(coeffs))


def optimize_scalarized(sc: ScalarizedCoefficients) -> Policy:
    """Per-context greedy water-filling: assign mass to actions by descending
    coefficient, each up to its cap, until total mass 1 is placed.

    Ties break toward the lowest action index, making the result
    deterministic. Raises if some context's caps cannot hold unit mass.
    """
    num_x, num_k = sc.coeffs.shape
    probs = np.zeros((num_x, num_k))
    for x in range(num_x):
        # lexsort: primary key is -coeff (descending), secondary the action index.
        order = np.lexsort((np.arange(num_k), -sc.coeffs[x]))
        remaining = 1.0
        for a in order:
            take = min(min(sc.caps[x, a], 1.0), remaining)
            probs[x, a] = take
            remaining -= take
            if remaining <= 0.0:
                break
        if remaining > 1e-9:
            raise ValueError(f"infeasible caps in context {x}: total capacity below 1")
        if remaining > 0.0:  # distribute float drift to any action with slack
            for a in order:
                slack = min(sc.caps[x, a], 1.0) - probs[x, a]
                if slack > 0:
                    probs[x, a] += min(slack, remaining)
                    break
    return Policy(probs)


def scalarized_value(sc: ScalarizedCoefficients, pi: Policy) -> float:
    return float(np.sum(sc.coeffs * pi.probs))


def _context_vertices(caps: np.ndarray) -> list[np.ndarray]:
    """All vertices of {p in simplex : p <= caps} for one context (small K only)."""
    k = len(caps)
    caps = np.minimum(caps, 1.0)
    vertices = []
    actions = range(k)
    for rsize in range(k + 1):
        for saturated in itertools.combinations(actions, rsize):
            base = sum(caps[list(saturated)])
            if base > 1.0 + 1e-12:
                continue
            rest = 1.0 - base
            if rest <= 1e-12:
                if abs(rest) <= 1e-12:
                    p = np.zeros(k)
                    p[list(saturated)] = caps[list(saturated)]
                    vertices.append(p)
                continue
            for j in actions:
                if j in saturated or caps[j] < rest - 1e-12:
                    continue
                p = np.zeros(k)
                p[list(saturated)] = caps[list(saturated)]
                p[j] = rest
                vertices.append(p)
    return vertices


def brute_force_optimize(
    problem_or_map, theta: Scalarization, caps: np.ndarray | None = None
) -> Policy:
    """Enumeration oracle for the scalarized LP (testing only; small instances).

    Accepts either an analytic ``ProblemSpec`` (optimizes the true value) or
    a (|X|, K, d) linear value tensor. Without caps it enumerates all
    deterministic context-to-action maps; with caps it enumerates the
    vertices of each per-context capped simplex.
    """
    theta = np.asarray(theta, dtype=float)
    if isinstance(problem_or_map, ProblemSpec):
        problem = problem_or_map
        if problem.true_mean_rewards is None:
            raise ValueError("brute force over a problem needs analytic mean rewards")
        value_map = problem.context_distribution[:, None, None] * problem.true_mean_rewards
    else:
        value_map = np.asarray(problem_or_map, dtype=float)
    num_x, num_k, _ = value_map.shape
    coeffs = value_map @ theta

    if caps is None:
        if num_k**num_x > 2_000_000:
            raise ValueError("instance too large for brute-force enumeration")
        best_util, best = -np.inf, None
        for assignment in itertools.product(range(num_k), repeat=num_x):
            util = coeffs[np.arange(num_x), assignment].sum()
            if util > best_util + 1e-15:
                best_util, best = util, assignment
        return Policy.point_mass(num_x, num_k, best)

    caps = np.asarray(caps, dtype=float)
    probs = np.zeros((num_x, num_k))
    for x in range(num_x):
        if num_k > 12:
            raise ValueError("instance too large for vertex enumeration")
        vertices = _context_vertices(caps[x])
        if not vertices:
            raise ValueError(f"infeasible caps in context {x}")
        values = [coeffs[x] @ p for p in vertices]
        probs[x] = vertices[int(np.argmax(values))]
    return Policy(probs)
