"""HTTP facade over the scheduling laboratory.

Every operation works on a scenario supplied as INI text in the request, so
the service holds no state between calls and can run next to the CLI in one
process or stand alone behind uvicorn.
"""
from __future__ import annotations

import base64
import binascii
import tempfile
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException

from ..agent.training import AgentParams, Hyperparams, rollout_greedy, train
from ..bench import AXES, ExperimentConfig, apply_axis, run_experiment, solve_one
from ..scenario_io import ScenarioFileError, parse_scenario
from ..trace import ChannelTrace
from . import models


def _scenario(ini_text: str):
    try:
        return parse_scenario(ini_text)
    except ScenarioFileError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _agent(b64: str) -> AgentParams:
    try:
        blob = base64.b64decode(b64, validate=True)
        return AgentParams.from_bytes(blob)
    except (binascii.Error, ValueError, EOFError) as exc:
        raise HTTPException(status_code=422, detail=f"bad agent blob: {exc}") from exc


def create_app() -> FastAPI:
    app = FastAPI(title="uavsched", version="0.1.0")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "service": "uavsched"}

    @app.post("/solve")
    def solve(req: models.SolveRequest) -> models.SolveResponse:
        scenario = _scenario(req.scenario_ini)
        trace = ChannelTrace.generate(scenario, req.seed)
        out = solve_one(
            req.solver,
            scenario,
            trace,
            req.seed,
            episodes=req.episodes,
            epsilon=req.epsilon,
            budget_nodes=req.budget_nodes,
            budget_seconds=req.budget_seconds,
        )
        energy = None
        hover = None
        slots = None
        if out.breakdown is not None and out.schedule is not None:
            bd = out.breakdown
            energy = models.EnergyReport(
                total_j=bd.total_j,
                comm_j=bd.comm_j,
                hover_j=bd.hover_j,
                delivered_ratio=bd.delivered_ratio,
                feasible=bd.feasible,
            )
            hover = [int(t) for t in out.schedule.hover_lengths(scenario)]
            slots = out.schedule.slots.tolist()
        return models.SolveResponse(
            solver=req.solver,
            status=out.status,
            wall_ms=out.wall_ms,
            energy=energy,
            hover_frames=hover,
            slot_groups=slots,
        )

    @app.post("/sweep")
    def sweep(req: models.SweepRequest) -> models.SweepResponse:
        scenario = _scenario(req.scenario_ini)
        if req.axis not in AXES:
            raise HTTPException(status_code=422, detail=f"axis must be one of {AXES}")
        try:
            cfg = ExperimentConfig(
                axis=req.axis,
                values=tuple(req.values),
                solvers=tuple(req.solvers),
                seeds=tuple(req.seeds),
                episodes=req.episodes,
                epsilon=req.epsilon,
                budget_nodes=req.budget_nodes,
                budget_seconds=req.budget_seconds,
            )
            for value in cfg.values:
                apply_axis(scenario, cfg.axis, value)  # fail fast on a bad grid
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        result = run_experiment(scenario, cfg)
        return models.SweepResponse(
            axis=cfg.axis,
            energy_csv=result.energy_csv(),
            timing_csv=result.timing_csv(),
            learning_csv=result.learning_csv(),
        )

    @app.post("/train")
    def train_agent(req: models.TrainRequest) -> models.TrainResponse:
        scenario = _scenario(req.scenario_ini)
        try:
            hyper = Hyperparams(
                episodes=req.episodes,
                epsilon=req.epsilon,
                reward_variant=req.reward_variant,
                restrict=req.restrict,
                deterministic_policy=req.deterministic_policy,
                hidden=tuple(req.hidden),
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        params, curve = train(scenario, hyper, req.seed)
        return models.TrainResponse(
            agent_b64=base64.b64encode(params.to_bytes()).decode("ascii"),
            curve=[
                models.CurvePoint(
                    episode=s.episode,
                    reward=s.reward,
                    energy_j=s.energy_j,
                    delivered_ratio=s.delivered_ratio,
                )
                for s in curve
            ],
        )

    @app.post("/eval")
    def eval_agent(req: models.EvalRequest) -> models.SolveResponse:
        scenario = _scenario(req.scenario_ini)
        params = _agent(req.agent_b64)
        trace = ChannelTrace.generate(scenario, req.seed)
        t0 = time.perf_counter()
        try:
            schedule, bd = rollout_greedy(params, scenario, trace)
        except ValueError as exc:
            raise HTTPException(
                status_code=422, detail=f"agent does not fit this scenario: {exc}"
            ) from exc
        wall = (time.perf_counter() - t0) * 1e3
        return models.SolveResponse(
            solver="acdsos",
            status="ok" if bd.feasible else "infeasible",
            wall_ms=wall,
            energy=models.EnergyReport(
                total_j=bd.total_j,
                comm_j=bd.comm_j,
                hover_j=bd.hover_j,
                delivered_ratio=bd.delivered_ratio,
                feasible=bd.feasible,
            ),
            hover_frames=[int(t) for t in schedule.hover_lengths(scenario)],
            slot_groups=schedule.slots.tolist(),
        )

    @app.post("/verify")
    def verify(req: models.VerifyRequest) -> models.VerifyResponse:
        from ..acceptance import run_all

        scenario = _scenario(req.scenario_ini) if req.scenario_ini else None
        results, artifacts = run_all(desk_scenario=scenario, out_dir=req.out_dir)
        criteria = [
            models.CriterionReport(
                number=r.number, name=r.name, passed=r.passed, detail=r.detail
            )
            for r in results
        ]
        return models.VerifyResponse(
            criteria=criteria,
            all_primary_passed=all(r.passed for r in results if r.passed is not None),
            artifacts=[str(p) for p in artifacts],
        )

    @app.post("/dump-trace")
    def dump_trace(req: models.TraceRequest) -> models.TraceResponse:
        scenario = _scenario(req.scenario_ini)
        trace = ChannelTrace.generate(scenario, req.seed)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "trace.csv"
            trace.dump_csv(str(path))
            text = path.read_text()
        return models.TraceResponse(csv_text=text)

    return app


app = create_app()
