"""Mission dynamics and schedule accounting.

The UAV starts over cluster 1 at frame 1, hovers over the current cluster
until its residual demand hits zero, moves to the next cluster, and finally to
the virtual dock N+1 which carries no groups and burns no energy.  A mission
is infeasible when frames run past t_max with residual demand left.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import comm_energy_per_slot, data_per_slot, sinr
from .scenario import Scenario, group_members
from .trace import ChannelTrace


@dataclass
class EnvState:
    """Snapshot before frame t is played.  residual_bits[n-1][k] tracks user
    k of cluster n; position is the 1-based serving cluster (dock = N+1)."""

    t: int
    position: int
    residual_bits: tuple[np.ndarray, ...]

    def cluster_residual(self, n: int) -> float:
        return float(self.residual_bits[n - 1].sum())

    @property
    def total_residual(self) -> float:
        return float(sum(r.sum() for r in self.residual_bits))

    def copy(self) -> "EnvState":
        return EnvState(
            t=self.t,
            position=self.position,
            residual_bits=tuple(r.copy() for r in self.residual_bits),
        )


def new_episode(scenario: Scenario) -> EnvState:
    return EnvState(
        t=1,
        position=1,
        residual_bits=tuple(scenario.demands(n) for n in range(1, scenario.n_clusters + 1)),
    )


def hover_energy_per_frame(scenario: Scenario) -> float:
    cfg = scenario.radio
    return cfg.slot_duration_s * cfg.slots_per_frame * scenario.propulsion.hover_power_w


def frame_step(
    scenario: Scenario,
    trace: ChannelTrace,
    state: EnvState,
    slot_groups: list[int] | None,
) -> tuple[EnvState, np.ndarray, float]:
    """Play one frame and return (next state, credited bits per user, energy).

    slot_groups assigns one group id of the serving cluster to each of the I
    timeslots; it must be None (or empty) exactly when the UAV is docked.
    Credited delivery is capped at each user's residual so residuals never go
    negative; the cap is applied slot by slot within the frame.
    """
    if state.t > scenario.t_max:
        raise ValueError("episode is over; no frames left to play")
    nxt = state.copy()
    nxt.t = state.t + 1
    n = state.position
    if n == scenario.dock:
        if slot_groups:
            raise ValueError("docked frames cannot schedule groups")
        return nxt, np.zeros(0), 0.0

    cfg = scenario.radio
    if slot_groups is None or len(slot_groups) != cfg.slots_per_frame:
        raise ValueError("hovering frames must assign every timeslot a group")
    n_grp = scenario.n_groups(n)
    residual = nxt.residual_bits[n - 1]
    delivered = np.zeros_like(residual)
    energy = hover_energy_per_frame(scenario)
    for g in slot_groups:
        if not 1 <= g <= n_grp:
            raise ValueError(f"group id {g} out of range for cluster {n}")
        beta = trace.beta(n, g, state.t)
        energy += comm_energy_per_slot(beta, cfg)
        for pos, k in enumerate(group_members(g)):
            gamma = sinr(beta, pos, cfg.tx_power_w, cfg.noise_power_w)
            credit = min(data_per_slot(gamma, cfg), residual[k])
            residual[k] -= credit
            delivered[k] += credit
    if residual.sum() <= 0.0:
        nxt.position = n + 1
    return nxt, delivered, energy


# ---------------------------------------------------------------------------
# Schedules


@dataclass
class Schedule:
    """Static mission plan: nu[n-1, t-1] marks cluster n hovered at frame t
    (row N is the dock) and slots[t-1, i] holds that slot's group id (0 when
    docked).  One group per slot is structural, matching the one-group rule."""

    nu: np.ndarray
    slots: np.ndarray

    @classmethod
    def from_blocks(
        cls, scenario: Scenario, assignments: list[np.ndarray]
    ) -> "Schedule":
        """Build the canonical forward schedule from per-cluster assignment
        blocks; assignments[n-1] has shape (t_n, I).  Trailing frames dock."""
        t_max, n_clusters = scenario.t_max, scenario.n_clusters
        i_slots = scenario.radio.slots_per_frame
        nu = np.zeros((n_clusters + 1, t_max), dtype=np.int8)
        slots = np.zeros((t_max, i_slots), dtype=np.int32)
        t = 0
        for n, block in enumerate(assignments, start=1):
            block = np.asarray(block, dtype=np.int32)
            if block.size and block.shape[1] != i_slots:
                raise ValueError("assignment block width must equal slots_per_frame")
            for row in block:
                if t >= t_max:
                    raise ValueError("assignment blocks exceed t_max")
                nu[n - 1, t] = 1
                slots[t] = row
                t += 1
        nu[n_clusters, t:] = 1
        return cls(nu=nu, slots=slots)

    def hover_lengths(self, scenario: Scenario) -> np.ndarray:
        """Frames spent over each real cluster."""
        return self.nu[: scenario.n_clusters].sum(axis=1)

    def start_offsets(self, scenario: Scenario) -> np.ndarray:
        """Frames elapsed before each cluster's block starts."""
        lengths = self.hover_lengths(scenario)
        return np.concatenate(([0], np.cumsum(lengths)[:-1]))


def validate_schedule(
    scenario: Scenario, trace: ChannelTrace, schedule: Schedule
) -> list[str]:
    """Check every mission constraint; returns human-readable violations."""
    v: list[str] = []
    t_max, n_clusters = scenario.t_max, scenario.n_clusters
    i_slots = scenario.radio.slots_per_frame
    nu, slots = schedule.nu, schedule.slots
    if nu.shape != (n_clusters + 1, t_max) or slots.shape != (t_max, i_slots):
        return [f"shape mismatch: nu {nu.shape}, slots {slots.shape}"]
    if not np.isin(nu, (0, 1)).all():
        v.append("hover indicators must be binary")
    if not (nu.sum(axis=0) == 1).all():
        v.append("one-position rule broken: some frame has sum(nu) != 1")
    if nu[0, 0] != 1:
        v.append("mission must start over cluster 1 at frame 1")
    for t in range(t_max - 1):
        for n in range(n_clusters):  # real clusters only
            if nu[n, t] > nu[n, t + 1] + nu[n + 1, t + 1]:
                v.append(f"succession broken at cluster {n + 1}, frame {t + 1}")
    docked = False
    for t in range(t_max):
        if docked and nu[n_clusters, t] != 1:
            v.append(f"dock is absorbing but frame {t + 1} leaves it")
        docked = docked or nu[n_clusters, t] == 1
    for t in range(t_max):
        n = int(np.argmax(nu[:, t])) + 1
        if n == scenario.dock:
            if np.any(slots[t] != 0):
                v.append(f"docked frame {t + 1} schedules groups")
        else:
            n_grp = scenario.n_groups(n)
            if np.any(slots[t] < 1) or np.any(slots[t] > n_grp):
                v.append(f"frame {t + 1}: every slot must carry a group of cluster {n}")
    for n in range(1, n_clusters + 1):
        d, _ = trace.tables(n)
        got = np.zeros(scenario.n_users(n))
        for t in range(t_max):
            if nu[n - 1, t] != 1:
                continue
            for g in slots[t]:
                if 1 <= g <= scenario.n_groups(n):
                    got += d[t, g - 1]
        short = scenario.demands(n) - got
        for k in np.nonzero(short > 1e-9)[0]:
            v.append(
                f"demand unmet: cluster {n} user {k + 1} short {short[k]:.6g} bits"
            )
    return v


@dataclass(frozen=True)
class EnergyBreakdown:
    comm_j: float
    hover_j: float
    flight_j: float
    delivered_ratio: float
    feasible: bool
    violations: tuple[str, ...] = field(default_factory=tuple)

    @property
    def total_j(self) -> float:
        return self.comm_j + self.hover_j


def objective(
    scenario: Scenario,
    trace: ChannelTrace,
    schedule: Schedule,
    include_flight: bool = False,
) -> EnergyBreakdown:
    """Energy bill and feasibility of a schedule on a frozen trace.

    Communication and hover energy follow the per-slot accounting used by the
    environment; delivered_ratio caps each user at their own demand.  Flight
    energy between stops is a separate line item, off by default because the
    hover/comm trade-off is independent of it.
    """
    violations = validate_schedule(scenario, trace, schedule)
    comm = 0.0
    delivered_capped = 0.0
    nu, slots = schedule.nu, schedule.slots
    hover_frames = int(schedule.hover_lengths(scenario).sum())
    for n in range(1, scenario.n_clusters + 1):
        d, e = trace.tables(n)
        got = np.zeros(scenario.n_users(n))
        for t in np.nonzero(nu[n - 1])[0]:
            for g in slots[t]:
                if 1 <= g <= scenario.n_groups(n):
                    comm += e[t, g - 1]
                    got += d[t, g - 1]
        delivered_capped += float(np.minimum(got, scenario.demands(n)).sum())
    hover = hover_energy_per_frame(scenario) * hover_frames
    flight = 0.0
    if include_flight:
        from .propulsion import optimal_flying_speed

        flight = optimal_flying_speed(scenario.propulsion)[1]
    ratio = delivered_capped / scenario.total_demand_bits
    return EnergyBreakdown(
        comm_j=comm,
        hover_j=hover,
        flight_j=flight,
        delivered_ratio=min(1.0, ratio),
        feasible=not violations,
        violations=tuple(violations),
    )
