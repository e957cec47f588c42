"""Experiment sweeps: vary budget T, log size N, and estimator across
algorithms, averaging simple regret over datasets, trade-off draws, and
repeated runs. Emits a detail+aggregate CSV with a JSON metadata sidecar.

Seeds for every run are derived from the master seed with a splitmix-style
stream, so any single run can be re-executed in isolation and parallel
execution never changes the output bytes.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .algorithms import ALGORITHMS, RunConfig, sample_unit_ball
from .core import ProblemSpec
from .elicitation import SimulatedDesigner
from .problems import (
    build_stock_problem,
    build_zdt1_problem,
    generate_log,
    make_dirichlet_logging_policy,
)

_MASK = (1 << 64) - 1

DETAIL_FIELDS = [
    "row_type", "problem", "algorithm", "estimator", "T", "N",
    "dataset_idx", "theta_idx", "rep_idx", "seed", "simple_regret",
    "mean", "stderr", "n_runs",
]


def derive_seed(master: int, *salts) -> int:
    """Deterministic child seed from the master seed and a salt path."""
    state = master & _MASK
    for salt in salts:
        for byte in str(salt).encode():
            state = (state ^ byte) & _MASK
            state = (state + 0x9E3779B97F4A7C15) & _MASK
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
            state = z ^ (z >> 31)
    return state


@dataclass(frozen=True)
class SweepSpec:
    problem: str = "zdt1"
    problem_kwargs: dict = field(default_factory=dict)
    t_grid: tuple = (10, 50, 100, 200)
    n_grid: tuple = (20000,)
    estimators: tuple = ("ips",)
    algorithms: tuple = ("imo3", "rand_p", "rand_t", "log_ts")
    num_log_datasets: int = 10
    num_theta_stars: int = 10
    runs_per_combo: int = 5
    preselect_l: int = 500
    clip_m: float = 10.0
    ridge: float = 1e-6
    design_tolerance: float = 0.05
    dirichlet_alpha: float = 10.0
    master_seed: int = 7
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.t_grid or not self.n_grid or not self.algorithms or not self.estimators:
            raise ValueError("grids, algorithms, and estimators must be nonempty")
        for name in ("num_log_datasets", "num_theta_stars", "runs_per_combo"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")


def build_problem(spec: SweepSpec) -> ProblemSpec:
    if spec.problem == "zdt1":
        kwargs = dict(spec.problem_kwargs)
        kwargs.setdefault("seed", derive_seed(spec.master_seed, "problem"))
        return build_zdt1_problem(**kwargs)
    if spec.problem == "stock":
        return build_stock_problem(spec.problem_kwargs["prices_csv_path"])
    raise ValueError(f"unknown problem {spec.problem!r}; known: zdt1, stock")


def _dataset_rows(spec: SweepSpec, n: int, ds_idx: int) -> list[dict]:
    """All detail rows for one (N, dataset) cell; the unit of parallelism."""
    problem = build_problem(spec)
    pi0 = make_dirichlet_logging_policy(
        problem, spec.dirichlet_alpha, derive_seed(spec.master_seed, "pi0", n, ds_idx)
    )
    data = generate_log(problem, pi0, n, derive_seed(spec.master_seed, "log", n, ds_idx))
    rows = []
    for th_idx in range(spec.num_theta_stars):
        theta_rng = np.random.default_rng(derive_seed(spec.master_seed, "theta", th_idx))
        theta_star = sample_unit_ball(theta_rng, problem.num_objectives)
        for rep in range(spec.runs_per_combo):
            for algo in spec.algorithms:
                for est in spec.estimators:
                    for t in spec.t_grid:
                        seed = derive_seed(
                            spec.master_seed, algo, est, t, n, ds_idx, th_idx, rep
                        )
                        config = RunConfig(
                            budget_t=t,
                            preselect_l=spec.preselect_l,
                            estimator_kind=est,
                            clip_m=spec.clip_m,
                            seed=seed,
                            ridge=spec.ridge,
                            design_tolerance=spec.design_tolerance,
                        )
                        channel = SimulatedDesigner(
                            theta_star, np.random.default_rng(derive_seed(seed, "channel"))
                        )
                        result = ALGORITHMS[algo](problem, data, channel, config)
                        rows.append({
                            "row_type": "detail",
                            "problem": spec.problem,
                            "algorithm": algo,
                            "estimator": est,
                            "T": t,
                            "N": n,
                            "dataset_idx": ds_idx,
                            "theta_idx": th_idx,
                            "rep_idx": rep,
                            "seed": seed,
                            "simple_regret": result.simple_regret,
                            "mean": "",
                            "stderr": "",
                            "n_runs": "",
                        })
    return rows


def aggregate_rows(detail: list[dict]) -> list[dict]:
    """Mean and standard error per (algorithm, estimator, T, N)."""
    groups: dict[tuple, list[float]] = {}
    meta: dict[tuple, dict] = {}
    for row in detail:
        key = (row["algorithm"], row["estimator"], row["T"], row["N"])
        groups.setdefault(key, []).append(float(row["simple_regret"]))
        meta[key] = row
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3])):
        vals = np.array(groups[key])
        stderr = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        out.append({
            "row_type": "aggregate",
            "problem": meta[key]["problem"],
            "algorithm": key[0],
            "estimator": key[1],
            "T": key[2],
            "N": key[3],
            "dataset_idx": "",
            "theta_idx": "",
            "rep_idx": "",
            "seed": "",
            "simple_regret": "",
            "mean": float(vals.mean()),
            "stderr": stderr,
            "n_runs": len(vals),
        })
    return out


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Execute the sweep; returns detail rows followed by aggregate rows and
    writes them to ``spec.out`` (plus a JSON sidecar) when a path is given.
    """
    if spec.out is not None:
        # Fail on an unwritable destination before any computation.
        with open(spec.out, "w") as fh:
            fh.write("")
    cells = [(n, ds) for n in spec.n_grid for ds in range(spec.num_log_datasets)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_dataset_rows, [spec] * len(cells),
                                   [n for n, _ in cells], [ds for _, ds in cells]))
    else:
        chunks = [_dataset_rows(spec, n, ds) for n, ds in cells]
    detail = [row for chunk in chunks for row in chunk]
    detail.sort(key=lambda r: (
        r["algorithm"], r["estimator"], r["T"], r["N"],
        r["dataset_idx"], r["theta_idx"], r["rep_idx"],
    ))
    rows = detail + aggregate_rows(detail)
    if spec.out is not None:
        write_results(rows, spec.out, spec)
    return rows


def write_results(rows: list[dict], path: str, spec: SweepSpec) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=DETAIL_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    problem = build_problem(spec)
    sidecar = {
        "spec": {k: v for k, v in dataclasses.asdict(spec).items()},
        "code_version": __version__,
        "normalization": {
            "objective_lows": problem.metadata.get("objective_lows"),
            "objective_spans": problem.metadata.get("objective_spans"),
        },
    }
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def read_results(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


KNOWN_METRICS = ("simple_regret",)


def emit_plot_data(rows: list[dict], metric: str = "simple_regret") -> list[dict]:
    """Per-(algorithm, estimator) series of (grid value, mean, standard error),
    recomputed from the detail rows.

    The x axis is whichever of T / N takes more than one value (T preferred).
    """
    if metric not in KNOWN_METRICS:
        raise ValueError(f"unknown metric {metric!r}; known metrics: {list(KNOWN_METRICS)}")
    detail = [r for r in rows if r["row_type"] == "detail"]
    if not detail:
        raise ValueError("results table has no detail rows")
    t_vals = {int(r["T"]) for r in detail}
    x_name = "T" if len(t_vals) > 1 or len({int(r["N"]) for r in detail}) == 1 else "N"
    groups: dict[tuple, list[float]] = {}
    for r in detail:
        key = (r["algorithm"], r["estimator"], int(r[x_name]))
        groups.setdefault(key, []).append(float(r[metric]))
    series = []
    for (algo, est, x) in sorted(groups):
        vals = np.array(groups[(algo, est, x)])
        stderr = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        series.append({
            "algorithm": algo, "estimator": est, "x_name": x_name, "x": x,
            "mean": float(vals.mean()), "stderr": stderr, "n_runs": len(vals),
        })
    return series


def write_plot_data(series: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["algorithm", "estimator", "x_name", "x", "mean", "stderr", "n_runs"],
            lineterminator="\n",
        )
        writer.writeheader()
        writer.writerows(series)


def default_workers() -> int:
    return int(os.environ.get("IMO3_THREADS", "1"))
