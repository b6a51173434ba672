"""Command-line client tests: the runner drives the real in-process service,
so these cover argument parsing, file I/O, exit codes, and error surfacing."""
import json

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import MICRO_INI
from uavsched.agent.training import AgentParams
from uavsched.cli import main
from uavsched.scenario_io import parse_scenario
from uavsched.trace import ChannelTrace

OVERSIZED_INI = """\
[clusters]
cluster1 = 1000

[limits]
t_max = 2
slots_per_frame = 2
"""

BAD_FSMC_INI = MICRO_INI + "\n[fsmc]\nlevels = 0, 1\nrow0 = 0.5, 0.4\nrow1 = 0.5, 0.5\n"


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def micro_ini(tmp_path):
    path = tmp_path / "micro.ini"
    path.write_text(MICRO_INI)
    return str(path)


class TestHelp:
    def test_lists_every_subcommand(self, runner):
        res = runner.invoke(main, ["--help"])
        assert res.exit_code == 0
        for cmd in ("solve", "sweep", "train", "eval", "verify", "dump-trace", "serve"):
            assert cmd in res.output


class TestSolve:
    def test_prints_the_energy_split(self, runner, micro_ini):
        res = runner.invoke(
            main, ["solve", "--scenario", micro_ini, "--solver", "greedy", "--seed", "3"]
        )
        assert res.exit_code == 0, res.output
        assert "solver=greedy status=ok" in res.output
        assert "total_J=0.0344" in res.output
        assert "hover_frames=" in res.output

    def test_default_solver_is_the_hover_search(self, runner, micro_ini):
        res = runner.invoke(main, ["solve", "--scenario", micro_ini, "--seed", "3"])
        assert res.exit_code == 0, res.output
        assert "solver=gss-heu status=ok" in res.output

    def test_out_writes_the_full_response(self, runner, micro_ini, tmp_path):
        out = tmp_path / "solve.json"
        res = runner.invoke(
            main,
            ["solve", "--scenario", micro_ini, "--solver", "exact", "--seed", "3",
             "--budget-seconds", "30", "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        data = json.loads(out.read_text())
        assert data["status"] == "optimal"
        assert data["energy"]["total_j"] == pytest.approx(0.0344, abs=1e-6)

    def test_infeasible_instance_exits_nonzero(self, runner, tmp_path):
        path = tmp_path / "oversized.ini"
        path.write_text(OVERSIZED_INI)
        res = runner.invoke(
            main, ["solve", "--scenario", str(path), "--solver", "greedy"]
        )
        assert res.exit_code == 1
        assert "status=infeasible" in res.output

    def test_missing_scenario_file_is_a_usage_error(self, runner, tmp_path):
        res = runner.invoke(main, ["solve", "--scenario", str(tmp_path / "no.ini")])
        assert res.exit_code == 2

    def test_service_validation_error_is_surfaced(self, runner, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text(BAD_FSMC_INI)
        res = runner.invoke(main, ["solve", "--scenario", str(path)])
        assert res.exit_code == 1
        assert "/solve failed (422)" in res.output


class TestTrainEval:
    def test_train_then_eval_round_trip(self, runner, micro_ini, tmp_path):
        agent = tmp_path / "agent.bin"
        res = runner.invoke(
            main,
            ["train", "--scenario", micro_ini, "--episodes", "2", "--out", str(agent)],
        )
        assert res.exit_code == 0, res.output
        assert "trained 2 episodes" in res.output
        params = AgentParams.load(str(agent))
        assert params.restrict is True

        res = runner.invoke(
            main,
            ["eval", "--scenario", micro_ini, "--agent", str(agent), "--seed", "3"],
        )
        assert res.exit_code == 0, res.output
        assert "status=ok" in res.output and "total_J=" in res.output

    def test_eval_requires_an_existing_agent_file(self, runner, micro_ini, tmp_path):
        res = runner.invoke(
            main,
            ["eval", "--scenario", micro_ini, "--agent", str(tmp_path / "no.bin")],
        )
        assert res.exit_code == 2


class TestSweep:
    def test_writes_the_csv_artifacts(self, runner, micro_ini, tmp_path):
        out = tmp_path / "sweep"
        res = runner.invoke(
            main,
            ["sweep", "--scenario", micro_ini, "--axis", "K", "--values", "1",
             "--solver", "greedy", "--seed", "0", "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        energy = (out / "energy_vs_K.csv").read_text().splitlines()
        assert energy[0] == "solver,K,seed,total_J,comm_J,hover_J,delivered_ratio,status"
        assert len(energy) == 2
        assert (out / "timing_vs_K.csv").is_file()
        assert not (out / "learning_curve.csv").exists()  # no learning solver ran

    def test_bad_values_grid(self, runner, micro_ini, tmp_path):
        res = runner.invoke(
            main,
            ["sweep", "--scenario", micro_ini, "--axis", "K", "--values", "2,x",
             "--out", str(tmp_path / "sweep")],
        )
        assert res.exit_code == 1
        assert "bad --values" in res.output

    def test_axis_is_a_closed_choice(self, runner, micro_ini, tmp_path):
        res = runner.invoke(
            main,
            ["sweep", "--scenario", micro_ini, "--axis", "banana", "--values", "1",
             "--out", str(tmp_path / "sweep")],
        )
        assert res.exit_code == 2


class TestDumpTrace:
    def test_csv_round_trips(self, runner, micro_ini, tmp_path):
        out = tmp_path / "trace.csv"
        res = runner.invoke(
            main,
            ["dump-trace", "--scenario", micro_ini, "--seed", "3", "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        scenario = parse_scenario(MICRO_INI)
        loaded = ChannelTrace.load_csv(str(out), scenario, seed=3)
        direct = ChannelTrace.generate(scenario, seed=3)
        for a, b in zip(loaded.level_idx, direct.level_idx):
            assert np.array_equal(a, b)
