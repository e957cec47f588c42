"""HTTP session service for live designer elicitation.

A session runs the interactive algorithm server-side and suspends at each
designer query; the companion console (or any HTTP client) answers rounds
one at a time. Sessions are persisted as append-only JSONL event logs so a
restarted server resumes mid-session. A session is re-driven from its
recorded answers on every request, which makes answer submission idempotent
per round and guarantees replay equivalence with the in-process library
path.
"""
from __future__ import annotations

import json
import secrets
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .algorithms import RunConfig, RunResult, run_imo3
from .core import ProblemSpec
from .elicitation import AwaitingAnswer, ScriptedDesigner
from .problems import LogDataset, build_zdt1_problem, generate_log, make_dirichlet_logging_policy

PROBLEM_BUILDERS = {
    "zdt1": build_zdt1_problem,
}


class SessionConfig(BaseModel):
    problem_id: str = "zdt1"
    problem_seed: int = 0
    dataset_n: int = Field(default=5000, ge=1)
    dataset_seed: int = 0
    dirichlet_alpha: float = Field(default=10.0, gt=0)
    budget_t: int = Field(default=20, ge=1)
    preselect_l: int = Field(default=500, ge=1)
    estimator_kind: str = "ips"
    clip_m: float = Field(default=10.0, gt=0)
    seed: int = 0
    ridge: float = Field(default=1e-6, ge=0)
    design_tolerance: float = Field(default=0.05, gt=0)


class AnswerBody(BaseModel):
    round: int = Field(ge=1)
    answer: int


class _RecordingChannel:
    """Scripted replay that remembers the (vector, answer) pair of every answered round."""

    def __init__(self, answers: list[int]):
        self._inner = ScriptedDesigner(answers)
        self.asked: list[tuple[np.ndarray, int]] = []

    def ask(self, v: np.ndarray) -> int:
        answer = self._inner.ask(v)  # raises AwaitingAnswer when out of answers
        self.asked.append((np.asarray(v, dtype=float).copy(), answer))
        return answer


class SessionStore:
    """Append-only JSONL event logs, one file per session."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        if not session_id.isalnum():
            raise HTTPException(404, "unknown session")
        return self.data_dir / f"{session_id}.jsonl"

    def create(self, config: SessionConfig) -> str:
        session_id = secrets.token_hex(12)
        event = {"type": "created", "config": config.model_dump(), "at": time.time()}
        with open(self._path(session_id), "w") as fh:
            fh.write(json.dumps(event) + "\n")
        return session_id

    def load(self, session_id: str) -> tuple[SessionConfig, list[int], float]:
        path = self._path(session_id)
        if not path.exists():
            raise HTTPException(404, "unknown session")
        config, answers, updated = None, [], 0.0
        with open(path) as fh:
            for line in fh:
                event = json.loads(line)
                updated = event["at"]
                if event["type"] == "created":
                    config = SessionConfig(**event["config"])
                elif event["type"] == "answer":
                    answers.append(int(event["answer"]))
        if config is None:
            raise HTTPException(500, "corrupt session log")
        return config, answers, updated

    def append_answer(self, session_id: str, answer: int) -> None:
        event = {"type": "answer", "answer": int(answer), "at": time.time()}
        with open(self._path(session_id), "a") as fh:
            fh.write(json.dumps(event) + "\n")


def _display_values(problem: ProblemSpec, v: np.ndarray) -> list[dict]:
    """Normalized model values alongside de-normalized human-readable objective values."""
    meta = problem.metadata
    names = meta.get("objective_names", [f"objective {i + 1}" for i in range(len(v))])
    units = meta.get("objective_units", [""] * len(v))
    lows = np.asarray(meta.get("objective_lows", np.zeros(len(v))), dtype=float)
    spans = np.asarray(meta.get("objective_spans", np.ones(len(v))), dtype=float)
    raw = lows + spans * np.asarray(v, dtype=float)
    return [
        {"name": names[i], "unit": units[i], "value": float(raw[i]), "normalized": float(v[i])}
        for i in range(len(v))
    ]


def _result_view(problem: ProblemSpec, result: RunResult) -> dict:
    v_hat = np.asarray(result.diagnostics["final_value_hat"], dtype=float)
    return {
        "theta_hat": result.theta_hat.tolist(),
        "final_policy": result.final_policy.probs.tolist(),
        "final_value": v_hat.tolist(),
        "final_value_display": _display_values(problem, v_hat),
        "utility_under_theta_hat": result.diagnostics["final_utility_hat"],
        "num_candidates": len(result.candidates),
        "g_value": result.diagnostics.get("g_value"),
    }


def create_app(data_dir="sessions", session_ttl_hours: float = 24.0) -> FastAPI:
    app = FastAPI(title="imo3 elicitation service")
    store = SessionStore(Path(data_dir))
    cache: dict[tuple, tuple[ProblemSpec, LogDataset]] = {}

    def environment(config: SessionConfig) -> tuple[ProblemSpec, LogDataset]:
        if config.problem_id not in PROBLEM_BUILDERS:
            raise HTTPException(404, f"unknown problem {config.problem_id!r}")
        if config.estimator_kind not in ("dm", "ips", "dr"):
            raise HTTPException(
                422,
                {"field": "estimator_kind", "error": f"unknown estimator {config.estimator_kind!r}"},
            )
        key = (config.problem_id, config.problem_seed, config.dataset_n,
               config.dataset_seed, config.dirichlet_alpha)
        if key not in cache:
            problem = PROBLEM_BUILDERS[config.problem_id](seed=config.problem_seed)
            pi0 = make_dirichlet_logging_policy(problem, config.dirichlet_alpha, config.dataset_seed)
            data = generate_log(problem, pi0, config.dataset_n, config.dataset_seed)
            cache[key] = (problem, data)
        return cache[key]

    def snapshot(session_id: str, config: SessionConfig, answers: list[int], updated: float) -> dict:
        if time.time() - updated > session_ttl_hours * 3600:
            return {
                "session_id": session_id,
                "state": "expired",
                "progress": {"answered": len(answers), "total": config.budget_t},
            }
        problem, data = environment(config)
        run_config = RunConfig(
            budget_t=config.budget_t,
            preselect_l=config.preselect_l,
            estimator_kind=config.estimator_kind,
            clip_m=config.clip_m,
            seed=config.seed,
            ridge=config.ridge,
            design_tolerance=config.design_tolerance,
        )
        channel = _RecordingChannel(answers)
        body: dict = {
            "session_id": session_id,
            "progress": {"answered": len(answers), "total": config.budget_t},
            "config": config.model_dump(),
        }
        try:
            result = run_imo3(problem, data, channel, run_config)
        except AwaitingAnswer as pending:
            body["state"] = "awaiting_answer"
            body["query"] = {
                "round": pending.round_index,
                "total": config.budget_t,
                "values": pending.value_vector.tolist(),
                "display": _display_values(problem, pending.value_vector),
            }
        else:
            body["state"] = "completed"
            body["result"] = _result_view(problem, result)
        body["history"] = [
            {
                "round": i + 1,
                "values": v.tolist(),
                "display": _display_values(problem, v),
                "answer": answer,
            }
            for i, (v, answer) in enumerate(channel.asked)
        ]
        return body

    @app.get("/problems")
    def list_problems():
        return {"problems": sorted(PROBLEM_BUILDERS)}

    @app.post("/sessions", status_code=201)
    def create_session(config: SessionConfig):
        environment(config)  # validate before persisting
        session_id = store.create(config)
        cfg, answers, updated = store.load(session_id)
        return snapshot(session_id, cfg, answers, updated)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        config, answers, updated = store.load(session_id)
        return snapshot(session_id, config, answers, updated)

    @app.post("/sessions/{session_id}/answers")
    def submit_answer(session_id: str, body: AnswerBody):
        if body.answer not in (0, 1):
            raise HTTPException(422, {"field": "answer", "error": "answer must be 0 or 1"})
        config, answers, updated = store.load(session_id)
        if time.time() - updated > session_ttl_hours * 3600:
            raise HTTPException(410, "session expired")
        pending_round = len(answers) + 1
        if body.round < pending_round or len(answers) >= config.budget_t:
            if body.round <= len(answers):
                # Duplicate submission of an answered round: idempotent replay.
                return snapshot(session_id, config, answers, updated)
            raise HTTPException(409, "session already completed")
        if body.round > pending_round:
            raise HTTPException(409, f"expected answer for round {pending_round}")
        store.append_answer(session_id, body.answer)
        config, answers, updated = store.load(session_id)
        return snapshot(session_id, config, answers, updated)

    return app
