"""Mission-dynamics invariants: frame accounting, schedule validation, and
agreement between the dynamic stepper and the static schedule objective."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavsched.channel import RadioConfig
from uavsched.environment import (
    EnergyBreakdown,
    Schedule,
    frame_step,
    hover_energy_per_frame,
    new_episode,
    objective,
    validate_schedule,
)
from uavsched.exact.brute import brute_force
from uavsched.propulsion import PropulsionParams
from uavsched.scenario import Scenario
from uavsched.trace import ChannelTrace


def test_hover_energy_per_frame_oracle():
    # 1 ms slots * 10 slots * 10 W = 0.1 J per hovered frame
    sc = Scenario(demands_bits=((1.0,),))
    assert hover_energy_per_frame(sc) == pytest.approx(0.1, rel=1e-12)
    sc2 = Scenario(demands_bits=((1.0,),), radio=RadioConfig(slots_per_frame=2))
    assert hover_energy_per_frame(sc2) == pytest.approx(0.02, rel=1e-12)


def test_new_episode_starts_at_cluster_one(two_cluster):
    state = new_episode(two_cluster)
    assert state.t == 1 and state.position == 1
    assert np.array_equal(state.residual_bits[0], [1.0e5, 2.0e5])
    assert state.total_residual == pytest.approx(4.5e5)
    assert state.cluster_residual(2) == pytest.approx(1.5e5)


class TestFrameStep:
    def test_delivery_capped_and_position_advances(self):
        sc = Scenario(
            demands_bits=((10.0, 10.0),), radio=RadioConfig(slots_per_frame=2), t_max=3
        )
        tr = ChannelTrace.generate(sc, seed=1)
        state = new_episode(sc)
        nxt, delivered, energy = frame_step(sc, tr, state, [3, 3])
        assert np.all(delivered <= 10.0 + 1e-12)
        assert np.all(nxt.residual_bits[0] >= 0.0)
        if nxt.cluster_residual(1) == 0.0:
            assert nxt.position == 2  # the dock, for a single cluster
        assert energy >= hover_energy_per_frame(sc)
        assert nxt.t == 2

    def test_no_advance_while_demand_left(self, two_cluster, two_cluster_trace):
        state = new_episode(two_cluster)
        nxt, _, _ = frame_step(two_cluster, two_cluster_trace, state, [1, 1])
        assert nxt.position == 1  # one singleton slot pair cannot clear 0.3 Mbit

    def test_docked_frames_are_free_and_group_less(self, two_cluster, two_cluster_trace):
        state = new_episode(two_cluster)
        state.position = two_cluster.dock
        nxt, delivered, energy = frame_step(two_cluster, two_cluster_trace, state, None)
        assert energy == 0.0 and delivered.size == 0
        assert nxt.position == two_cluster.dock
        with pytest.raises(ValueError, match="docked"):
            frame_step(two_cluster, two_cluster_trace, state, [1, 1])

    def test_episode_end_and_bad_inputs(self, two_cluster, two_cluster_trace):
        state = new_episode(two_cluster)
        state.t = two_cluster.t_max + 1
        with pytest.raises(ValueError, match="over"):
            frame_step(two_cluster, two_cluster_trace, state, [1, 1])
        state = new_episode(two_cluster)
        with pytest.raises(ValueError, match="every timeslot"):
            frame_step(two_cluster, two_cluster_trace, state, [1])
        with pytest.raises(ValueError, match="out of range"):
            frame_step(two_cluster, two_cluster_trace, state, [1, 99])


class TestSchedule:
    def test_from_blocks_layout(self, two_cluster):
        sched = Schedule.from_blocks(
            two_cluster, [np.array([[1, 2], [3, 3]]), np.array([[1, 1]])]
        )
        assert np.array_equal(sched.nu[0], [1, 1, 0, 0])
        assert np.array_equal(sched.nu[1], [0, 0, 1, 0])
        assert np.array_equal(sched.nu[2], [0, 0, 0, 1])  # trailing dock
        assert np.array_equal(sched.slots[:3], [[1, 2], [3, 3], [1, 1]])
        assert np.array_equal(sched.hover_lengths(two_cluster), [2, 1])
        assert np.array_equal(sched.start_offsets(two_cluster), [0, 2])

    def test_from_blocks_overflow_rejected(self, two_cluster):
        with pytest.raises(ValueError, match="exceed"):
            Schedule.from_blocks(
                two_cluster,
                [np.ones((3, 2), dtype=int), np.ones((2, 2), dtype=int)],
            )

    def test_from_blocks_wrong_width_rejected(self, two_cluster):
        with pytest.raises(ValueError, match="width"):
            Schedule.from_blocks(two_cluster, [np.ones((1, 3), dtype=int)])


class TestValidateSchedule:
    def _good(self, sc, tr):
        rep = brute_force(sc, tr)
        assert rep.status == "optimal"
        return rep.schedule

    def test_optimal_schedule_is_clean(self, two_cluster, two_cluster_trace):
        sched = self._good(two_cluster, two_cluster_trace)
        assert validate_schedule(two_cluster, two_cluster_trace, sched) == []

    def test_shape_mismatch_short_circuits(self, two_cluster, two_cluster_trace):
        sched = Schedule(nu=np.zeros((2, 2)), slots=np.zeros((2, 2), dtype=int))
        out = validate_schedule(two_cluster, two_cluster_trace, sched)
        assert len(out) == 1 and "shape" in out[0]

    def test_every_rule_reports(self, two_cluster, two_cluster_trace):
        sched = self._good(two_cluster, two_cluster_trace)
        nu, slots = sched.nu.copy(), sched.slots.copy()

        bad = Schedule(nu=nu.copy(), slots=slots.copy())
        bad.nu[:, 0] = 0
        bad.nu[1, 0] = 1  # start over cluster 2
        msgs = "\n".join(validate_schedule(two_cluster, two_cluster_trace, bad))
        assert "start over cluster 1" in msgs

        bad = Schedule(nu=nu.copy(), slots=slots.copy())
        bad.nu[0, -1] = 1  # two positions in the final frame
        msgs = "\n".join(validate_schedule(two_cluster, two_cluster_trace, bad))
        assert "one-position" in msgs

        # hover c1, dock, then c2: leaves the absorbing dock
        bad_nu = np.zeros_like(nu)
        bad_nu[0, 0] = 1
        bad_nu[2, 1] = 1
        bad_nu[1, 2] = 1
        bad_nu[2, 3] = 1
        bad_slots = np.zeros_like(slots)
        bad_slots[0] = 1
        bad_slots[2] = 1
        msgs = "\n".join(
            validate_schedule(two_cluster, two_cluster_trace, Schedule(bad_nu, bad_slots))
        )
        assert "absorbing" in msgs and "succession" in msgs

        bad = Schedule(nu=nu.copy(), slots=slots.copy())
        dock_frames = np.nonzero(bad.nu[2])[0]
        bad.slots[dock_frames[0]] = 1  # transmit while docked
        msgs = "\n".join(validate_schedule(two_cluster, two_cluster_trace, bad))
        assert "docked frame" in msgs

        bad = Schedule(nu=nu.copy(), slots=slots.copy())
        hover_frames = np.nonzero(bad.nu[0])[0]
        bad.slots[hover_frames[0], 0] = 0  # silent slot while hovering
        msgs = "\n".join(validate_schedule(two_cluster, two_cluster_trace, bad))
        assert "every slot must carry a group" in msgs

    def test_demand_unmet_reported(self, two_cluster, two_cluster_trace):
        starved = two_cluster.with_updates(demands_bits=((1e9, 1e9), (1e9,)))
        sched = self._good(two_cluster, two_cluster_trace)
        msgs = "\n".join(validate_schedule(starved, two_cluster_trace, sched))
        assert "demand unmet" in msgs


class TestObjective:
    def test_total_is_comm_plus_hover(self, two_cluster, two_cluster_trace):
        rep = brute_force(two_cluster, two_cluster_trace)
        bd = objective(two_cluster, two_cluster_trace, rep.schedule)
        assert bd.total_j == pytest.approx(bd.comm_j + bd.hover_j, rel=1e-12)
        assert bd.feasible and bd.violations == ()
        assert bd.delivered_ratio == pytest.approx(1.0)
        assert bd.flight_j == 0.0

    def test_flight_energy_is_a_separate_line(self, two_cluster, two_cluster_trace):
        sc = two_cluster.with_updates(
            propulsion=PropulsionParams(leg_distances_m=(100.0,))
        )
        rep = brute_force(sc, two_cluster_trace)
        off = objective(sc, two_cluster_trace, rep.schedule)
        on = objective(sc, two_cluster_trace, rep.schedule, include_flight=True)
        assert off.flight_j == 0.0 and on.flight_j > 0.0
        assert on.total_j == off.total_j  # hover+comm objective is unchanged

    def test_matches_dynamic_replay(self, two_cluster, two_cluster_trace):
        """Replaying the optimal schedule through the stepper must reproduce
        the static bill exactly: same energy, same per-user delivery."""
        sc, tr = two_cluster, two_cluster_trace
        rep = brute_force(sc, tr)
        sched = rep.schedule
        bd = objective(sc, tr, sched)
        state = new_episode(sc)
        energy = 0.0
        delivered = 0.0
        for t in range(1, sc.t_max + 1):
            planned = int(np.argmax(sched.nu[:, t - 1])) + 1
            assert state.position == planned  # plan and dynamics agree
            groups = None if planned == sc.dock else [int(g) for g in sched.slots[t - 1]]
            state, got, e = frame_step(sc, tr, state, groups)
            energy += e
            delivered += float(got.sum())
        assert energy == pytest.approx(bd.total_j, rel=1e-12)
        assert delivered == pytest.approx(
            bd.delivered_ratio * sc.total_demand_bits, rel=1e-12
        )
        assert state.total_residual == pytest.approx(0.0, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    rows=st.lists(
        st.tuples(st.integers(1, 3), st.integers(1, 3)), min_size=0, max_size=4
    )
)
def test_objective_invariants_hold_for_any_block(rows):
    sc = Scenario(
        demands_bits=((1.2e5, 0.8e5),), radio=RadioConfig(slots_per_frame=2), t_max=4
    )
    tr = ChannelTrace.generate(sc, seed=11)
    sched = Schedule.from_blocks(sc, [np.array(rows, dtype=int).reshape(len(rows), 2)])
    bd = objective(sc, tr, sched)
    assert isinstance(bd, EnergyBreakdown)
    assert bd.comm_j >= 0.0 and bd.hover_j >= 0.0
    assert bd.total_j == pytest.approx(bd.comm_j + bd.hover_j, rel=1e-12)
    assert 0.0 <= bd.delivered_ratio <= 1.0
    assert bd.feasible == (not bd.violations)
    assert bd.hover_j == pytest.approx(len(rows) * hover_energy_per_frame(sc), rel=1e-12)
