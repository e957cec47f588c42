"""Designer interaction: logistic response model, answer channels, ridge MLE.

A designer channel answers "is this value vector acceptable?" with a binary
response. The simulated channel draws Bernoulli answers from the logistic
response model under a hidden trade-off vector; the scripted channel replays
recorded answers (and is the suspension point for live HTTP sessions).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .core import Scalarization, ValueVector, utility


@dataclass(frozen=True)
class QueryRecord:
    """One elicitation round: the value vector shown, the binary answer, the round index (1-based)."""

    value_vector: np.ndarray
    answer: int
    round: int

    def __post_init__(self):
        if self.answer not in (0, 1):
            raise ValueError("answer must be 0 or 1")


class ChannelError(Exception):
    """A live designer channel failed (expired or abandoned session)."""

    def __init__(self, message: str, completed: int = 0):
        super().__init__(message)
        self.completed = completed


class AwaitingAnswer(Exception):
    """Raised by a scripted channel when the next answer is not yet available.

    Carries the pending round, the value vector that should be shown, and how
    many rounds completed so far; the session service catches this to suspend
    a run at the designer boundary.
    """

    def __init__(self, round_index: int, value_vector: np.ndarray, completed: int):
        super().__init__(f"awaiting answer for round {round_index}")
        self.round_index = round_index
        self.value_vector = value_vector
        self.completed = completed


def response_probability(theta: Scalarization, v: ValueVector) -> float:
    """Probability the designer answers "acceptable": sigmoid of theta . v."""
    return float(expit(utility(theta, v)))


class SimulatedDesigner:
    """Bernoulli answers from the logistic response model under a hidden theta_star."""

    def __init__(self, theta_star: Scalarization, rng: np.random.Generator):
        self.theta_star = np.asarray(theta_star, dtype=float)
        self.rng = rng

    def ask(self, v: ValueVector) -> int:
        return int(self.rng.random() < response_probability(self.theta_star, v))


class ScriptedDesigner:
    """Replays a fixed answer list; raises AwaitingAnswer once it runs out."""

    def __init__(self, answers):
        self.answers = [int(a) for a in answers]
        self.cursor = 0

    def ask(self, v: ValueVector) -> int:
        if self.cursor >= len(self.answers):
            raise AwaitingAnswer(self.cursor + 1, np.asarray(v, dtype=float), self.cursor)
        answer = self.answers[self.cursor]
        self.cursor += 1
        return answer


def penalized_loglik(theta: np.ndarray, values: np.ndarray, answers: np.ndarray, ridge: float) -> float:
    z = values @ theta
    # log sigmoid(z) = -log(1 + exp(-z)) computed stably.
    ll = np.sum(answers * -np.logaddexp(0.0, -z) + (1 - answers) * -np.logaddexp(0.0, z))
    return float(ll - 0.5 * ridge * theta @ theta)


def loglik_gradient(theta: np.ndarray, values: np.ndarray, answers: np.ndarray, ridge: float) -> np.ndarray:
    return values.T @ (answers - expit(values @ theta)) - ridge * theta


def logistic_mle(
    queries: list[QueryRecord] | tuple[np.ndarray, np.ndarray],
    ridge: float = 1e-6,
    max_iters: int = 100,
    grad_tol: float = 1e-8,
) -> Scalarization:
    """Ridge-penalized logistic MLE of the trade-off vector.

    Newton iterations with step halving when the penalized likelihood fails
    to improve. The small ridge keeps the optimum finite under separation
    (all answers identical) without materially moving identified components.
    """
    if isinstance(queries, tuple):
        values, answers = queries
    else:
        if not queries:
            raise ValueError("need at least one query")
        values = np.array([q.value_vector for q in queries], dtype=float)
        answers = np.array([q.answer for q in queries], dtype=float)
    values = np.atleast_2d(values)
    answers = np.asarray(answers, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite feature vectors")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")

    d = values.shape[1]
    theta = np.zeros(d)
    ll = penalized_loglik(theta, values, answers, ridge)
    for _ in range(max_iters):
        grad = loglik_gradient(theta, values, answers, ridge)
        if np.max(np.abs(grad)) <= grad_tol:
            break
        p = expit(values @ theta)
        weights = p * (1.0 - p)
        hess = values.T @ (weights[:, None] * values) + ridge * np.eye(d)
        step = np.linalg.solve(hess, grad)
        # Backtrack until the penalized likelihood does not decrease.
        scale = 1.0
        for _ in range(50):
            candidate = theta + scale * step
            ll_new = penalized_loglik(candidate, values, answers, ridge)
            if ll_new >= ll:
                theta, ll = candidate, ll_new
                break
            scale *= 0.5
        else:
            break
    return theta


def min_sigmoid_derivative(theta: Scalarization, values: np.ndarray) -> float:
    """Smallest sigmoid derivative over the presented value vectors (diagnostic only)."""
    p = expit(np.atleast_2d(values) @ np.asarray(theta, dtype=float))
    return float(np.min(p * (1.0 - p)))
