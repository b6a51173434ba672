"""Exact-solver oracles: the hand-rolled simplex against scipy.optimize,
product-linearisation tightness, and branch-and-bound against exhaustive
enumeration on instances small enough to enumerate."""
from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import linprog

from uavsched.environment import objective, validate_schedule
from uavsched.exact.bnb import BnbConfig, solve_exact
from uavsched.exact.brute import LEAF_CAP, brute_force, optimal_block_energy
from uavsched.exact.ilp import linearize, mccormick_rows
from uavsched.exact.simplex import solve_lp
from uavsched.trace import ChannelTrace


def _retarget_trace(trace, scenario):
    """Same frozen levels, different demand profile."""
    return ChannelTrace(scenario=scenario, level_idx=trace.level_idx, seed=trace.seed)


class TestSimplexAgainstScipy:
    def _random_lp(self, rng):
        n = int(rng.integers(3, 7))
        m = int(rng.integers(2, 6))
        c = rng.normal(size=n)
        a_ub = rng.normal(size=(m, n))
        b_ub = rng.uniform(0.5, 3.0, size=m)
        lb = np.zeros(n)
        ub = rng.uniform(0.5, 4.0, size=n)
        return c, a_ub, b_ub, lb, ub

    def test_box_bounded_lps_match(self):
        rng = np.random.default_rng(1234)
        for _ in range(30):
            c, a_ub, b_ub, lb, ub = self._random_lp(rng)
            mine = solve_lp(c, a_ub=a_ub, b_ub=b_ub, lb=lb, ub=ub)
            ref = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=list(zip(lb, ub)))
            assert ref.status == 0
            assert mine.status == "optimal"
            assert mine.objective == pytest.approx(ref.fun, abs=1e-7)
            assert np.all(mine.x >= lb - 1e-9) and np.all(mine.x <= ub + 1e-9)
            assert np.all(a_ub @ mine.x <= b_ub + 1e-7)

    def test_equalities_match(self):
        rng = np.random.default_rng(77)
        for _ in range(15):
            c, a_ub, b_ub, lb, ub = self._random_lp(rng)
            n = c.size
            a_eq = np.ones((1, n))
            b_eq = np.array([0.5 * float(ub.sum())])
            mine = solve_lp(c, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=b_eq, lb=lb, ub=ub)
            ref = linprog(
                c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=list(zip(lb, ub))
            )
            if ref.status == 2:
                assert mine.status == "infeasible"
                continue
            assert ref.status == 0 and mine.status == "optimal"
            assert mine.objective == pytest.approx(ref.fun, abs=1e-7)
            assert float(mine.x.sum()) == pytest.approx(b_eq[0], abs=1e-8)

    def test_infeasible_detected(self):
        # x <= -1 with x >= 0 cannot hold
        out = solve_lp(
            np.array([1.0]),
            a_ub=np.array([[1.0]]),
            b_ub=np.array([-1.0]),
            lb=np.zeros(1),
            ub=np.ones(1),
        )
        assert out.status == "infeasible"

    def test_minimum_on_box_corner(self):
        out = solve_lp(np.array([2.0, -3.0]), lb=np.zeros(2), ub=np.array([1.0, 2.0]))
        assert out.status == "optimal"
        assert out.objective == pytest.approx(-6.0, abs=1e-9)
        assert np.allclose(out.x, [0.0, 2.0], atol=1e-9)


class TestProductRows:
    def test_rows_collapse_to_product_at_binary_points(self):
        a, b = mccormick_rows(jz=0, jnu=1, jlam=2, n_vars=3)
        assert a.shape[0] == b.shape[0] == 3
        for v_nu in (0.0, 1.0):
            for v_lam in (0.0, 1.0):
                lo, hi = 0.0, 1.0
                for row, rhs in zip(a, b):
                    free = rhs - row[1] * v_nu - row[2] * v_lam
                    if row[0] > 0:
                        hi = min(hi, free / row[0])
                    elif row[0] < 0:
                        lo = max(lo, free / row[0])
                assert lo == pytest.approx(v_nu * v_lam, abs=1e-12)
                assert hi == pytest.approx(v_nu * v_lam, abs=1e-12)

    def test_fractional_point_keeps_standard_envelope(self):
        a, b = mccormick_rows(jz=0, jnu=1, jlam=2, n_vars=3)
        lo, hi = 0.0, 1.0
        for row, rhs in zip(a, b):
            free = rhs - row[1] * 0.5 - row[2] * 0.5
            if row[0] > 0:
                hi = min(hi, free / row[0])
            elif row[0] < 0:
                lo = max(lo, free / row[0])
        assert lo == pytest.approx(0.0, abs=1e-12)  # max(0, nu+lam-1)
        assert hi == pytest.approx(0.5, abs=1e-12)  # min(nu, lam)


class TestLinearize:
    def test_variable_catalog(self, two_cluster, two_cluster_trace):
        ins = linearize(two_cluster, two_cluster_trace)
        kinds = {}
        for key in ins.var_index:
            kinds[key[0]] = kinds.get(key[0], 0) + 1
        # nu: (N+1 positions) x T; lam and z pair up one-to-one
        assert kinds["nu"] == 3 * two_cluster.t_max
        assert kinds["lam"] == kinds["z"]
        assert len(ins.names) == len(ins.c)
        assert len(ins.row_names_ub) == ins.a_ub.shape[0]
        assert len(set(ins.row_names_ub)) == len(ins.row_names_ub)
        assert ins.a_ub.shape[1] == len(ins.c) == ins.lb.size == ins.ub.size

    def test_lp_relaxation_lower_bounds_the_optimum(self, two_cluster, two_cluster_trace):
        ins = linearize(two_cluster, two_cluster_trace)
        lp = solve_lp(
            ins.c,
            a_ub=ins.a_ub,
            b_ub=ins.b_ub,
            a_eq=ins.a_eq,
            b_eq=ins.b_eq,
            lb=ins.lb,
            ub=ins.ub,
        )
        rep = brute_force(two_cluster, two_cluster_trace)
        assert lp.status == "optimal"
        assert lp.objective <= rep.objective + 1e-9


class TestBranchAndBound:
    def test_matches_exhaustive_optimum(self, two_cluster, two_cluster_trace):
        br = brute_force(two_cluster, two_cluster_trace)
        bb = solve_exact(two_cluster, two_cluster_trace, BnbConfig())
        assert br.status == "optimal" and bb.status == "optimal"
        assert bb.objective == pytest.approx(br.objective, rel=1e-9)
        assert bb.gap <= 1e-9
        assert bb.bound <= bb.objective + 1e-9
        assert validate_schedule(two_cluster, two_cluster_trace, bb.schedule) == []
        bd = objective(two_cluster, two_cluster_trace, bb.schedule)
        assert bd.total_j == pytest.approx(bb.objective, rel=1e-9)

    def test_matches_on_single_cluster(self, one_cluster, one_cluster_trace):
        br = brute_force(one_cluster, one_cluster_trace)
        bb = solve_exact(one_cluster, one_cluster_trace, BnbConfig())
        assert br.status == bb.status == "optimal"
        assert bb.objective == pytest.approx(br.objective, rel=1e-9)

    def test_infeasible_demand_agrees(self, two_cluster, two_cluster_trace):
        starved = two_cluster.with_updates(demands_bits=((1e9, 1e9), (1e9,)))
        tr = two_cluster_trace
        br = brute_force(starved, _retarget_trace(tr, starved))
        bb = solve_exact(starved, _retarget_trace(tr, starved), BnbConfig())
        assert br.status == "infeasible" and bb.status == "infeasible"
        assert br.schedule is None

    def test_node_budget_reported(self, two_cluster, two_cluster_trace):
        bb = solve_exact(
            two_cluster,
            two_cluster_trace,
            BnbConfig(max_nodes=1, rounding_heuristic=False),
        )
        assert bb.status in ("budget", "optimal")
        if bb.status == "budget":
            assert bb.n_nodes <= 1
            assert bb.gap >= 0.0 or np.isinf(bb.gap)
        assert bb.bound_history  # at least the root relaxation is recorded


class TestBruteForce:
    def test_leaf_cap_refuses_large_enumerations(self, two_cluster, two_cluster_trace):
        with pytest.raises(ValueError, match="cap"):
            brute_force(two_cluster, two_cluster_trace, leaf_cap=10)
        assert LEAF_CAP == 100_000_000

    def test_report_is_consistent(self, two_cluster, two_cluster_trace):
        rep = brute_force(two_cluster, two_cluster_trace)
        assert rep.breakdown.total_j == pytest.approx(rep.objective, rel=1e-12)
        assert rep.breakdown.feasible
        assert rep.n_paths >= 1 and rep.n_blocks >= 1

    def test_block_energy_idle_never_hurts(self, one_cluster, one_cluster_trace):
        strict = optimal_block_energy(
            one_cluster, one_cluster_trace, 1, 0, 3, allow_idle=False
        )
        idle = optimal_block_energy(
            one_cluster, one_cluster_trace, 1, 0, 3, allow_idle=True
        )
        assert idle <= strict + 1e-12

    def test_block_energy_monotone_with_idle(self, one_cluster, one_cluster_trace):
        curve = [
            optimal_block_energy(one_cluster, one_cluster_trace, 1, 0, t, allow_idle=True)
            for t in (1, 2, 3, 4)
        ]
        finite = [v for v in curve if np.isfinite(v)]
        assert all(b <= a + 1e-12 for a, b in zip(finite, finite[1:]))
