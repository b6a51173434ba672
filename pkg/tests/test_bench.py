"""Sweep-harness tests: axis application, cell seeding, CSV artifact shape,
solver dispatch, and byte-determinism of the energy tables."""
import math

import numpy as np
import pytest

from uavsched.bench import (
    AGENT_SOLVERS,
    AXES,
    SOLVERS,
    ExperimentConfig,
    ExperimentResult,
    apply_axis,
    cell_trace_seed,
    run_experiment,
    solve_one,
    _num,
)
from uavsched.scenario import RadioConfig, Scenario
from uavsched.trace import ChannelTrace


class TestCellTraceSeed:
    def test_frozen_values(self):
        assert cell_trace_seed(0, 0) == 90_001
        assert cell_trace_seed(1, 0) == 91_010
        assert cell_trace_seed(2, 3) == 92_022

    def test_distinct_across_nearby_cells(self):
        seeds = {cell_trace_seed(vi, s) for vi in range(5) for s in range(50)}
        assert len(seeds) == 250


class TestApplyAxis:
    def setup_method(self):
        self.sc = Scenario(demands_bits=((1e5, 2e5), (3e5,)), t_max=8)

    def test_k_cycles_the_demand_lists(self):
        grown = apply_axis(self.sc, "K", 3)
        assert grown.demands_bits == ((1e5, 2e5, 1e5), (3e5, 3e5, 3e5))

    def test_k_can_shrink(self):
        assert apply_axis(self.sc, "K", 1).demands_bits == ((1e5,), (3e5,))

    def test_k_below_one_rejected(self):
        with pytest.raises(ValueError, match="at least 1"):
            apply_axis(self.sc, "K", 0)

    def test_t_max_swaps_the_horizon(self):
        assert apply_axis(self.sc, "T_max", 12).t_max == 12

    def test_t_max_must_cover_the_route(self):
        with pytest.raises(ValueError, match="at least one frame"):
            apply_axis(self.sc, "T_max", 1)

    @pytest.mark.parametrize("axis", ["epsilon", "alpha_a"])
    def test_hyperparameter_axes_leave_scenario_alone(self, axis):
        assert apply_axis(self.sc, axis, 0.5) is self.sc


class TestExperimentConfig:
    def test_axes_catalog(self):
        assert AXES == ("K", "T_max", "epsilon", "alpha_a")
        assert set(AGENT_SOLVERS) <= set(SOLVERS)

    def test_accepts_every_known_solver(self):
        cfg = ExperimentConfig(axis="K", values=(2.0,), solvers=SOLVERS)
        assert cfg.solvers == SOLVERS

    def test_unknown_axis_rejected(self):
        with pytest.raises(ValueError, match="axis"):
            ExperimentConfig(axis="banana", values=(1.0,))

    def test_unknown_solver_rejected(self):
        with pytest.raises(ValueError, match="solvers"):
            ExperimentConfig(axis="K", values=(1.0,), solvers=("simplexish",))

    def test_empty_grids_rejected(self):
        with pytest.raises(ValueError, match="values"):
            ExperimentConfig(axis="K", values=())
        with pytest.raises(ValueError, match="seeds"):
            ExperimentConfig(axis="K", values=(1.0,), seeds=())


class TestSolveOne:
    def test_unknown_solver_raises(self, micro, micro_trace):
        with pytest.raises(ValueError, match="unknown solver"):
            solve_one("annealing", micro, micro_trace, 0)

    def test_greedy_outcome_is_scored_by_the_objective(self, micro, micro_trace):
        out = solve_one("greedy", micro, micro_trace, 0)
        assert out.status in ("ok", "infeasible")
        assert out.breakdown is not None
        assert out.breakdown.total_j == pytest.approx(
            out.breakdown.comm_j + out.breakdown.hover_j, rel=1e-12
        )
        assert out.wall_ms >= 0.0 and out.curve is None

    def test_bruteforce_refuses_oversized_catalogs(self):
        sc = Scenario(
            demands_bits=((1e5,) * 10,), radio=RadioConfig(slots_per_frame=2), t_max=3
        )
        trace = ChannelTrace.generate(sc, seed=1)
        out = solve_one("bruteforce", sc, trace, 0)
        assert out.status == "refused"
        assert out.schedule is None and out.breakdown is None


# ---------------------------------------------------------------------------
# Full sweeps on the one-user scenario (every solver cheap)


@pytest.fixture(scope="module")
def exact_sweep(request):
    micro = request.getfixturevalue("micro")
    cfg = ExperimentConfig(
        axis="K",
        values=(1.0,),
        solvers=("exact", "bruteforce", "greedy", "gss-heu"),
        seeds=(0, 1),
        budget_seconds=30.0,
    )
    return cfg, run_experiment(micro, cfg)


class TestRunExperiment:
    def test_row_grid_is_complete_and_ordered(self, exact_sweep):
        cfg, res = exact_sweep
        assert len(res.rows) == len(cfg.solvers) * len(cfg.values) * len(cfg.seeds)
        key = [(r.solver, r.value, r.seed) for r in res.rows]
        expected = [
            (s, v, sd) for s in cfg.solvers for v in cfg.values for sd in cfg.seeds
        ]
        assert key == expected

    def test_exact_and_exhaustive_agree(self, exact_sweep):
        _, res = exact_sweep
        by = {(r.solver, r.seed): r for r in res.rows}
        for seed in (0, 1):
            ex, bf = by[("exact", seed)], by[("bruteforce", seed)]
            assert ex.status == "optimal" and bf.status == "optimal"
            assert ex.total_j == pytest.approx(bf.total_j, rel=1e-9)

    def test_heuristics_meet_or_flag(self, exact_sweep):
        _, res = exact_sweep
        by = {(r.solver, r.seed): r for r in res.rows}
        for seed in (0, 1):
            opt = by[("bruteforce", seed)].total_j
            for solver in ("greedy", "gss-heu"):
                row = by[(solver, seed)]
                if row.status == "ok":
                    assert row.total_j >= opt - 1e-9  # never beats the optimum

    def test_energy_csv_layout(self, exact_sweep):
        cfg, res = exact_sweep
        text = res.energy_csv()
        lines = text.splitlines()
        assert lines[0] == "solver,K,seed,total_J,comm_J,hover_J,delivered_ratio,status"
        assert len(lines) == 1 + len(res.rows)
        assert text.endswith("\n")
        first = lines[1].split(",")
        assert first[0] == "exact" and first[1] == "1" and first[2] == "0"
        float(first[3])  # numeric columns parse

    def test_timing_csv_layout(self, exact_sweep):
        _, res = exact_sweep
        lines = res.timing_csv().splitlines()
        assert lines[0] == "solver,K,seed,wall_ms"
        assert all(float(ln.split(",")[3]) >= 0.0 for ln in lines[1:])

    def test_no_learning_curves_without_agents(self, exact_sweep):
        _, res = exact_sweep
        assert res.curves == [] and res.learning_csv() is None

    def test_write_emits_the_csv_files(self, exact_sweep, tmp_path):
        _, res = exact_sweep
        paths = res.write(tmp_path)
        names = sorted(p.name for p in paths)
        assert names == ["energy_vs_K.csv", "timing_vs_K.csv"]
        assert (tmp_path / "energy_vs_K.csv").read_text() == res.energy_csv()

    def test_energy_csv_is_deterministic(self, micro, exact_sweep):
        cfg, res = exact_sweep
        again = run_experiment(micro, cfg)
        assert again.energy_csv() == res.energy_csv()


@pytest.fixture(scope="module")
def agent_sweep(request):
    micro = request.getfixturevalue("micro")
    cfg = ExperimentConfig(
        axis="epsilon",
        values=(1.0, 1.5),
        solvers=("acdsos",),
        seeds=(0,),
        episodes=2,
        hidden=(8, 8),
    )
    return cfg, run_experiment(micro, cfg)


class TestAgentSweep:
    def test_exponent_lands_in_the_curve_label(self, agent_sweep):
        _, res = agent_sweep
        assert [label for label, _, _ in res.curves] == ["acdsos-eps1", "acdsos-eps1.5"]

    def test_learning_csv_layout(self, agent_sweep):
        cfg, res = agent_sweep
        lines = res.learning_csv().splitlines()
        assert lines[0] == "solver,seed,episode,reward,energy_J,delivered_ratio"
        assert len(lines) == 1 + len(cfg.values) * len(cfg.seeds) * cfg.episodes
        label, seed, episode = lines[1].split(",")[:3]
        assert (label, seed, episode) == ("acdsos-eps1", "0", "1")

    def test_rows_scored_like_any_other_solver(self, agent_sweep):
        _, res = agent_sweep
        for row in res.rows:
            assert row.status in ("ok", "infeasible")
            assert math.isfinite(row.total_j)


class TestNumberFormat:
    def test_nine_significant_digits(self):
        assert _num(1.0 / 3.0) == "0.333333333"
        assert _num(1.0) == "1"
        assert _num(123456789012.0) == "1.23456789e+11"
