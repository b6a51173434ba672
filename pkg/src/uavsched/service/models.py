"""Request/response bodies for the HTTP service.

Scenarios travel as INI text inside the request body, so a remote server
never needs access to the caller's filesystem.  Agent parameters travel as
base64 of the flat binary format used on disk.
"""
from __future__ import annotations

from pydantic import BaseModel, Field

from ..bench import SOLVERS


class SolveRequest(BaseModel):
    scenario_ini: str
    solver: str = Field(pattern="^(" + "|".join(SOLVERS) + ")$")
    seed: int = 0
    episodes: int = 400
    epsilon: float = 1.2
    budget_nodes: int = 200_000
    budget_seconds: float = 300.0


class EnergyReport(BaseModel):
    total_j: float
    comm_j: float
    hover_j: float
    delivered_ratio: float
    feasible: bool


class SolveResponse(BaseModel):
    solver: str
    status: str
    wall_ms: float
    energy: EnergyReport | None = None
    hover_frames: list[int] | None = None
    # group id per (frame, slot); 0 marks frames outside the hover window
    slot_groups: list[list[int]] | None = None


class SweepRequest(BaseModel):
    scenario_ini: str
    axis: str
    values: list[float]
    solvers: list[str] = ["greedy", "gss-heu"]
    seeds: list[int] = [0, 1, 2]
    episodes: int = 400
    epsilon: float = 1.2
    budget_nodes: int = 200_000
    budget_seconds: float = 300.0


class SweepResponse(BaseModel):
    axis: str
    energy_csv: str
    timing_csv: str
    learning_csv: str | None = None


class TrainRequest(BaseModel):
    scenario_ini: str
    seed: int = 0
    episodes: int = 400
    epsilon: float = 1.2
    reward_variant: str = Field(default="A", pattern="^[ABC]$")
    restrict: bool = True
    deterministic_policy: bool = False
    hidden: list[int] = [100, 100, 100]


class CurvePoint(BaseModel):
    episode: int
    reward: float
    energy_j: float
    delivered_ratio: float


class TrainResponse(BaseModel):
    agent_b64: str
    curve: list[CurvePoint]


class EvalRequest(BaseModel):
    scenario_ini: str
    agent_b64: str
    seed: int = 0


class VerifyRequest(BaseModel):
    scenario_ini: str | None = None  # desk scenario override
    out_dir: str | None = None  # server-side directory for CSV artifacts


class CriterionReport(BaseModel):
    number: int
    name: str
    passed: bool | None  # None: not checked in this component
    detail: str


class VerifyResponse(BaseModel):
    criteria: list[CriterionReport]
    all_primary_passed: bool
    artifacts: list[str]


class TraceRequest(BaseModel):
    scenario_ini: str
    seed: int = 0


class TraceResponse(BaseModel):
    csv_text: str
