"""HTTP service tests against an in-process client: endpoint contracts,
body validation, and round-trips between the train/eval and trace endpoints."""
import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import MICRO_INI
from uavsched.agent.training import AgentParams
from uavsched.scenario_io import parse_scenario
from uavsched.service.app import app
from uavsched.trace import ChannelTrace

TWO_CLUSTER_INI = """\
[clusters]
cluster1 = 0.1, 0.2
cluster2 = 0.15

[limits]
t_max = 4
slots_per_frame = 2
"""

BAD_FSMC_INI = MICRO_INI + "\n[fsmc]\nlevels = 0, 1\nrow0 = 0.5, 0.4\nrow1 = 0.5, 0.5\n"


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_healthz(self, client):
        resp = client.get("/healthz")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "service": "uavsched"}


class TestSolve:
    def _solve(self, client, solver, **extra):
        body = {"scenario_ini": MICRO_INI, "solver": solver, "seed": 3, **extra}
        resp = client.post("/solve", json=body)
        assert resp.status_code == 200, resp.text
        return resp.json()

    def test_greedy_reports_consistent_energy(self, client):
        out = self._solve(client, "greedy")
        assert out["solver"] == "greedy"
        assert out["status"] in ("ok", "infeasible")
        energy = out["energy"]
        assert energy["total_j"] == pytest.approx(
            energy["comm_j"] + energy["hover_j"], rel=1e-12
        )
        assert len(out["slot_groups"]) == 3  # one row per frame
        assert all(len(row) == 2 for row in out["slot_groups"])
        assert sum(out["hover_frames"]) <= 3

    def test_hover_search_solver(self, client):
        out = self._solve(client, "gss-heu")
        assert out["status"] in ("ok", "infeasible")
        assert out["energy"] is not None and out["wall_ms"] >= 0.0

    def test_exact_solver_optimal(self, client):
        out = self._solve(client, "exact", budget_seconds=30.0)
        assert out["status"] == "optimal"
        assert out["energy"]["feasible"] is True

    def test_exact_never_above_greedy(self, client):
        exact = self._solve(client, "exact", budget_seconds=30.0)
        greedy = self._solve(client, "greedy")
        assert exact["energy"]["total_j"] <= greedy["energy"]["total_j"] + 1e-9

    def test_unknown_solver_rejected_by_schema(self, client):
        resp = client.post(
            "/solve", json={"scenario_ini": MICRO_INI, "solver": "annealing"}
        )
        assert resp.status_code == 422  # pydantic pattern, never reaches the core

    def test_bad_scenario_ini(self, client):
        resp = client.post(
            "/solve", json={"scenario_ini": BAD_FSMC_INI, "solver": "greedy"}
        )
        assert resp.status_code == 422
        assert "fsmc" in resp.json()["detail"]

    def test_malformed_ini_text(self, client):
        resp = client.post(
            "/solve", json={"scenario_ini": "cluster1 = 1", "solver": "greedy"}
        )
        assert resp.status_code == 422
        assert "malformed scenario text" in resp.json()["detail"]


@pytest.fixture(scope="module")
def trained(client):
    resp = client.post(
        "/train",
        json={
            "scenario_ini": MICRO_INI,
            "seed": 0,
            "episodes": 2,
            "hidden": [8, 8],
        },
    )
    assert resp.status_code == 200, resp.text
    return resp.json()


class TestTrainEval:
    def test_returns_decodable_agent_and_curve(self, trained):
        params = AgentParams.from_bytes(base64.b64decode(trained["agent_b64"]))
        assert params.restrict is True
        assert [p["episode"] for p in trained["curve"]] == [1, 2]
        for point in trained["curve"]:
            assert point["energy_j"] >= 0.0
            assert 0.0 <= point["delivered_ratio"] <= 1.0 + 1e-12

    def test_eval_round_trip(self, client, trained):
        resp = client.post(
            "/eval",
            json={
                "scenario_ini": MICRO_INI,
                "agent_b64": trained["agent_b64"],
                "seed": 3,
            },
        )
        assert resp.status_code == 200, resp.text
        out = resp.json()
        assert out["solver"] == "acdsos"
        assert out["status"] in ("ok", "infeasible")
        energy = out["energy"]
        assert energy["total_j"] == pytest.approx(
            energy["comm_j"] + energy["hover_j"], rel=1e-12
        )

    def test_eval_rejects_corrupt_base64(self, client):
        resp = client.post(
            "/eval", json={"scenario_ini": MICRO_INI, "agent_b64": "!!!not-base64!!!"}
        )
        assert resp.status_code == 422
        assert "bad agent blob" in resp.json()["detail"]

    def test_eval_rejects_wrong_magic(self, client):
        blob = base64.b64encode(b"JUNKJUNKJUNK").decode()
        resp = client.post("/eval", json={"scenario_ini": MICRO_INI, "agent_b64": blob})
        assert resp.status_code == 422
        assert "bad agent blob" in resp.json()["detail"]

    def test_eval_rejects_mismatched_scenario(self, client, trained):
        resp = client.post(
            "/eval",
            json={"scenario_ini": TWO_CLUSTER_INI, "agent_b64": trained["agent_b64"]},
        )
        assert resp.status_code == 422
        assert "does not fit" in resp.json()["detail"]

    def test_bad_reward_variant_rejected_by_schema(self, client):
        resp = client.post(
            "/train",
            json={"scenario_ini": MICRO_INI, "episodes": 1, "reward_variant": "Z"},
        )
        assert resp.status_code == 422


class TestSweep:
    def test_small_sweep_returns_csv_bodies(self, client):
        resp = client.post(
            "/sweep",
            json={
                "scenario_ini": MICRO_INI,
                "axis": "K",
                "values": [1.0],
                "solvers": ["greedy"],
                "seeds": [0],
            },
        )
        assert resp.status_code == 200, resp.text
        out = resp.json()
        assert out["axis"] == "K"
        lines = out["energy_csv"].splitlines()
        assert lines[0] == "solver,K,seed,total_J,comm_J,hover_J,delivered_ratio,status"
        assert len(lines) == 2
        assert out["timing_csv"].splitlines()[0] == "solver,K,seed,wall_ms"
        assert out["learning_csv"] is None

    def test_bad_axis(self, client):
        resp = client.post(
            "/sweep",
            json={"scenario_ini": MICRO_INI, "axis": "banana", "values": [1.0]},
        )
        assert resp.status_code == 422
        assert "axis" in resp.json()["detail"]

    def test_unknown_solver_in_grid(self, client):
        resp = client.post(
            "/sweep",
            json={
                "scenario_ini": MICRO_INI,
                "axis": "K",
                "values": [1.0],
                "solvers": ["annealing"],
            },
        )
        assert resp.status_code == 422
        assert "unknown solvers" in resp.json()["detail"]

    def test_bad_value_grid_fails_fast(self, client):
        resp = client.post(
            "/sweep",
            json={"scenario_ini": MICRO_INI, "axis": "K", "values": [0.0]},
        )
        assert resp.status_code == 422
        assert "at least 1" in resp.json()["detail"]


class TestDumpTrace:
    def test_csv_round_trips_through_the_loader(self, client, tmp_path):
        resp = client.post(
            "/dump-trace", json={"scenario_ini": MICRO_INI, "seed": 3}
        )
        assert resp.status_code == 200, resp.text
        path = tmp_path / "trace.csv"
        path.write_text(resp.json()["csv_text"])
        scenario = parse_scenario(MICRO_INI)
        loaded = ChannelTrace.load_csv(str(path), scenario, seed=3)
        direct = ChannelTrace.generate(scenario, seed=3)
        for a, b in zip(loaded.level_idx, direct.level_idx):
            assert np.array_equal(a, b)

    def test_trace_needs_a_valid_scenario(self, client):
        resp = client.post("/dump-trace", json={"scenario_ini": BAD_FSMC_INI})
        assert resp.status_code == 422
