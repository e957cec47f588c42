"""Benchmark problem construction and logged-data generation.

Provides the ZDT1 grid instance, a pluggable variant for external objective
functions (crashworthiness-style), a stock-prices CSV loader, Dirichlet
logging policies, and i.i.d. log generation with exact propensities.
"""
from __future__ import annotations

import csv
import datetime as _dt
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .core import Policy, ProblemSpec


@dataclass(frozen=True)
class LoggedRecord:
    """One logged interaction: context, action, realized reward vector, propensity."""

    context: int
    action: int
    reward: np.ndarray
    propensity: float


@dataclass(frozen=True)
class LogDataset:
    """Immutable logged dataset stored columnwise for vectorized estimators."""

    contexts: np.ndarray  # (N,) int
    actions: np.ndarray  # (N,) int
    rewards: np.ndarray  # (N, d) float
    propensities: np.ndarray  # (N,) float
    logging_policy: Policy
    problem_id: str = "custom"
    seed: int = 0

    def __post_init__(self):
        n = len(self.contexts)
        if not (len(self.actions) == len(self.propensities) == self.rewards.shape[0] == n):
            raise ValueError("column lengths disagree")
        if np.any(self.propensities <= 0):
            raise ValueError("all propensities must be strictly positive")
        num_x, num_a = self.logging_policy.probs.shape
        if np.any(self.contexts < 0) or np.any(self.contexts >= num_x):
            raise ValueError("context index out of bounds")
        if np.any(self.actions < 0) or np.any(self.actions >= num_a):
            raise ValueError("action index out of bounds")
        for arr in (self.contexts, self.actions, self.rewards, self.propensities):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.contexts)

    @property
    def num_objectives(self) -> int:
        return self.rewards.shape[1]

    @property
    def records(self) -> list[LoggedRecord]:
        return [
            LoggedRecord(int(x), int(a), r, float(p))
            for x, a, r, p in zip(self.contexts, self.actions, self.rewards, self.propensities)
        ]

    @classmethod
    def from_records(
        cls, records: Sequence[LoggedRecord], logging_policy: Policy,
        problem_id: str = "custom", seed: int = 0,
    ) -> "LogDataset":
        return cls(
            contexts=np.array([r.context for r in records], dtype=int),
            actions=np.array([r.action for r in records], dtype=int),
            rewards=np.array([r.reward for r in records], dtype=float),
            propensities=np.array([r.propensity for r in records], dtype=float),
            logging_policy=logging_policy,
            problem_id=problem_id,
            seed=seed,
        )


def zdt1_objectives(x: Sequence[float]) -> tuple[float, float]:
    """Raw ZDT1 objectives: F1 = 5*x1, F2 = g*(1 - sqrt(x1/g)) with g = 1 + 9*mean(x[1:])."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("ZDT1 needs a vector of at least 2 coordinates")
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("ZDT1 coordinates must lie in [0, 1]")
    f1 = 5.0 * x[0]
    g = 1.0 + 9.0 * x[1:].sum() / (len(x) - 1)
    f2 = g * (1.0 - np.sqrt(x[0] / g))
    return float(f1), float(f2)


# Analytic ranges of the raw ZDT1 objectives on [0,1]^5.
ZDT1_BOUNDS = ((0.0, 5.0), (0.0, 10.0))


def _grid_problem(
    objective_fns: Sequence[Callable[[np.ndarray], float]],
    contexts: np.ndarray,
    actions: np.ndarray,
    noise_sd: float,
    bounds: Sequence[tuple[float, float]],
    problem_id: str,
    metadata: Optional[dict] = None,
) -> ProblemSpec:
    """Tabular problem over (action variables, context variables) grids.

    The decision vector passed to each objective is the action variables
    followed by the context variables. Gaussian noise is applied on the raw
    objective scale, then everything is affinely mapped to [0, 1] using
    ``bounds``; noisy samples may exit the box (no clipping).
    """
    contexts = np.atleast_2d(np.asarray(contexts, dtype=float))
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    d = len(objective_fns)
    lows = np.array([b[0] for b in bounds], dtype=float)
    spans = np.array([b[1] - b[0] for b in bounds], dtype=float)
    spans[spans == 0] = 1.0

    raw = np.empty((len(contexts), len(actions), d))
    for xi, cvec in enumerate(contexts):
        for ai, avec in enumerate(actions):
            z = np.concatenate([avec, cvec])
            for oi, fn in enumerate(objective_fns):
                val = float(fn(z))
                if not np.isfinite(val):
                    raise ValueError(f"objective {oi} returned non-finite value at x={xi}, a={ai}")
                raw[xi, ai, oi] = val
    means = (raw - lows) / spans

    def sampler(x: int, a: int, rng: np.random.Generator) -> np.ndarray:
        return means[x, a] + rng.normal(0.0, noise_sd, size=d) / spans

    meta = {
        "objective_lows": lows.tolist(),
        "objective_spans": spans.tolist(),
        "noise_sd": noise_sd,
        "context_grid": contexts.tolist(),
        "action_grid": actions.tolist(),
    }
    meta.update(metadata or {})
    return ProblemSpec(
        num_contexts=len(contexts),
        num_actions=len(actions),
        num_objectives=d,
        context_distribution=np.full(len(contexts), 1.0 / len(contexts)),
        reward_sampler=sampler,
        true_mean_rewards=means,
        problem_id=problem_id,
        metadata=meta,
    )


def build_zdt1_problem(
    seed: int, num_contexts: int = 5, num_actions: int = 10, noise_sd: float = 0.5
) -> ProblemSpec:
    """ZDT1 instance: contexts are sampled (x4, x5) pairs, actions are (x1, x2, x3) triples."""
    rng = np.random.default_rng(seed)
    contexts = rng.uniform(size=(num_contexts, 2))
    actions = rng.uniform(size=(num_actions, 3))
    fns = [lambda z: zdt1_objectives(z)[0], lambda z: zdt1_objectives(z)[1]]
    meta = {"objective_names": ["F1", "F2"], "objective_units": ["", ""], "seed": seed}
    return _grid_problem(fns, contexts, actions, noise_sd, ZDT1_BOUNDS, "zdt1", meta)


def build_pluggable_problem(
    objective_fns: Sequence[Callable[[np.ndarray], float]],
    contexts,
    actions,
    noise_sd: float = 0.0,
    seed: int = 0,
    objective_bounds: Optional[Sequence[tuple[float, float]]] = None,
    problem_id: str = "pluggable",
) -> ProblemSpec:
    """Grid problem with user-supplied objective callables.

    When ``objective_bounds`` is omitted the normalization range is the
    observed min/max of each objective over the grid (recorded in metadata).
    """
    contexts = np.atleast_2d(np.asarray(contexts, dtype=float))
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    if objective_bounds is None:
        raw = np.array([
            [[float(fn(np.concatenate([a, c]))) for fn in objective_fns] for a in actions]
            for c in contexts
        ])
        if not np.all(np.isfinite(raw)):
            raise ValueError("objective returned non-finite value on the grid")
        objective_bounds = [
            (float(raw[..., i].min()), float(raw[..., i].max())) for i in range(len(objective_fns))
        ]
    meta = {"seed": seed}
    return _grid_problem(
        objective_fns, contexts, actions, noise_sd, objective_bounds, problem_id, meta
    )


def make_dirichlet_logging_policy(problem: ProblemSpec, alpha: float, seed: int) -> Policy:
    """One independent Dirichlet(alpha, ..., alpha) draw per context."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.full(problem.num_actions, alpha), size=problem.num_contexts)
    # Dirichlet draws are strictly positive almost surely; guard the pathological case.
    probs = np.maximum(probs, 1e-300)
    probs /= probs.sum(axis=1, keepdims=True)
    return Policy(probs)


def generate_log(problem: ProblemSpec, pi0: Policy, n: int, seed: int) -> LogDataset:
    """Sample n i.i.d. records: x ~ P_x, a ~ pi0(.|x), r from the problem's reward sampler."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    contexts = rng.choice(problem.num_contexts, size=n, p=problem.context_distribution)
    actions = np.empty(n, dtype=int)
    for x in range(problem.num_contexts):
        idx = np.flatnonzero(contexts == x)
        if len(idx):
            actions[idx] = rng.choice(problem.num_actions, size=len(idx), p=pi0.probs[x])
    rewards = np.empty((n, problem.num_objectives))
    for j in range(n):
        rewards[j] = problem.reward_sampler(int(contexts[j]), int(actions[j]), rng)
    propensities = pi0.probs[contexts, actions]
    return LogDataset(
        contexts=contexts,
        actions=actions,
        rewards=rewards,
        propensities=propensities,
        logging_policy=pi0,
        problem_id=problem.problem_id,
        seed=seed,
    )


def save_log(dataset: LogDataset, path) -> None:
    """Write a dataset as newline-delimited JSON with a header object on line 1."""
    header = {
        "problem_id": dataset.problem_id,
        "seed": dataset.seed,
        "d": dataset.num_objectives,
        "K": dataset.logging_policy.num_actions,
        "num_contexts": dataset.logging_policy.num_contexts,
        "pi0": dataset.logging_policy.probs.tolist(),
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for x, a, r, p in zip(
            dataset.contexts, dataset.actions, dataset.rewards, dataset.propensities
        ):
            fh.write(json.dumps({"x": int(x), "a": int(a), "r": r.tolist(), "p": float(p)}) + "\n")


def load_log(path) -> LogDataset:
    with open(path) as fh:
        header = json.loads(fh.readline())
        rows = [json.loads(line) for line in fh if line.strip()]
    return LogDataset(
        contexts=np.array([r["x"] for r in rows], dtype=int),
        actions=np.array([r["a"] for r in rows], dtype=int),
        rewards=np.array([r["r"] for r in rows], dtype=float),
        propensities=np.array([r["p"] for r in rows], dtype=float),
        logging_policy=Policy(np.array(header["pi0"], dtype=float)),
        problem_id=header["problem_id"],
        seed=header["seed"],
    )


def _parse_price_csv(path) -> tuple[list[str], list[_dt.date], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise ValueError("empty CSV") from None
        if not head or head[0].strip().lower() != "date" or len(head) < 2:
            raise ValueError("CSV header must be 'date,TICKER1,TICKER2,...'")
        tickers = [c.strip() for c in head[1:]]
        dates, prices = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) != len(head):
                raise ValueError(f"row {lineno}: expected {len(head)} columns, got {len(row)}")
            try:
                dates.append(_dt.date.fromisoformat(row[0].strip()))
            except ValueError:
                raise ValueError(f"row {lineno}: bad ISO date {row[0]!r}") from None
            vals = []
            for col, cell in zip(tickers, row[1:]):
                cell = cell.strip()
                if not cell:
                    raise ValueError(f"row {lineno}: missing price for {col}")
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(f"row {lineno}: non-numeric price {cell!r} for {col}") from None
            prices.append(vals)
    if not dates:
        raise ValueError("CSV contains no data rows")
    order = np.argsort(dates)
    dates = [dates[i] for i in order]
    return tickers, dates, np.asarray(prices, dtype=float)[order]


def build_stock_problem(prices_csv_path) -> ProblemSpec:
    """Stock investment instance from a daily closing-price CSV.

    Actions are tickers, contexts are calendar quarters. A reward draws a
    uniformly random consecutive-day pair within the quarter (with
    replacement); objective 1 is the relative gain (next close minus close),
    objective 2 the absolute difference as volatility. Both are affinely
    normalized to [0, 1] over all observed pairs, with the scales recorded in
    metadata. True mean rewards are the per-(quarter, ticker) means over all
    pairs in the CSV.
    """
    tickers, dates, prices = _parse_price_csv(prices_csv_path)

    quarters: dict[tuple[int, int], list[int]] = {}
    for i, day in enumerate(dates):
        quarters.setdefault((day.year, (day.month - 1) // 3 + 1), []).append(i)
    kept = []
    for key in sorted(quarters):
        if len(quarters[key]) < 2:
            warnings.warn(f"dropping quarter {key[0]}Q{key[1]}: fewer than 2 trading days")
        else:
            kept.append(key)
    if not kept:
        raise ValueError("no quarter has at least 2 trading days")

    # gains[q] has shape (pairs_in_q, K): next-day close minus close.
    gains = []
    for key in kept:
        idx = quarters[key]
        gains.append(prices[idx[1:]] - prices[idx[:-1]])
    all_gain = np.concatenate(gains, axis=0)
    raw = np.stack([all_gain, np.abs(all_gain)], axis=-1)  # (pairs, K, 2)
    lows = raw.reshape(-1, 2).min(axis=0)
    spans = raw.reshape(-1, 2).max(axis=0) - lows
    spans[spans == 0] = 1.0

    num_x, num_a = len(kept), len(tickers)
    pair_rewards = []  # per quarter: (pairs, K, 2) normalized
    means = np.empty((num_x, num_a, 2))
    for qi, g in enumerate(gains):
        norm = (np.stack([g, np.abs(g)], axis=-1) - lows) / spans
        pair_rewards.append(norm)
        means[qi] = norm.mean(axis=0)

    def sampler(x: int, a: int, rng: np.random.Generator) -> np.ndarray:
        block = pair_rewards[x]
        return block[rng.integers(len(block)), a].copy()

    return ProblemSpec(
        num_contexts=num_x,
        num_actions=num_a,
        num_objectives=2,
        context_distribution=np.full(num_x, 1.0 / num_x),
        reward_sampler=sampler,
        true_mean_rewards=means,
        problem_id="stock",
        metadata={
            "objective_names": ["relative_gain", "volatility"],
            "objective_units": ["$", "$"],
            "objective_lows": lows.tolist(),
            "objective_spans": spans.tolist(),
            "tickers": tickers,
            "quarters": [f"{y}Q{q}" for y, q in kept],
        },
    )
