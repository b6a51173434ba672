"""Channel-quality-greedy scheduling baseline (energy-blind)."""
from __future__ import annotations

import math

import numpy as np

from ..environment import EnergyBreakdown, Schedule, objective
from ..scenario import Scenario, group_members, group_size
from ..trace import ChannelTrace
from .bounds import hovering_bound


def _best_channel_group(
    trace: ChannelTrace, n: int, t: int, candidates: list[int]
) -> int:
    """Group with the highest summed own-coefficient gain; ties prefer fewer
    members, then the lower id (deterministic)."""
    best_g, best_key = candidates[0], None
    for g in candidates:
        score = float(np.trace(trace.beta(n, g, t)))
        key = (-score, group_size(g), g)
        if best_key is None or key < best_key:
            best_g, best_key = g, key
    return best_g


def greedy_baseline(
    scenario: Scenario, trace: ChannelTrace
) -> tuple[Schedule, EnergyBreakdown]:
    """Frame-by-frame schedule that always serves the strongest channel.

    Per hovered frame the whole frame's slots go to the group of still-unmet
    users with the highest summed diagonal gain; energy never enters the
    choice.  A cluster is served until its demands are met or its
    demand-proportional frame budget runs out, minimum one frame because the
    hover chain admits no skips.
    """
    t_bars = hovering_bound(scenario)
    i_slots = scenario.radio.slots_per_frame
    blocks: list[np.ndarray] = []
    tau = 0
    for n in range(1, scenario.n_clusters + 1):
        d, _ = trace.tables(n)
        residual = scenario.demands(n).astype(float).copy()
        cap = max(1, math.ceil(t_bars[n - 1] - 1e-9))
        cap = min(cap, scenario.t_max - tau - (scenario.n_clusters - n))
        rows: list[list[int]] = []
        for rel in range(max(cap, 1)):
            t = tau + rel
            if t >= scenario.t_max:
                break
            unmet = {k for k in range(residual.size) if residual[k] > 1e-9}
            if not unmet and rel > 0:
                break
            if unmet:
                candidates = [
                    g
                    for g in scenario.groups(n)
                    if set(group_members(g)) <= unmet
                ]
            else:  # mandatory visit frame: plain strongest channel
                candidates = scenario.groups(n)
            g = _best_channel_group(trace, n, t + 1, candidates)
            rows.append([g] * i_slots)
            residual = np.maximum(residual - i_slots * d[t, g - 1], 0.0)
        blocks.append(np.array(rows, dtype=np.int32))
        tau += len(rows)
    schedule = Schedule.from_blocks(scenario, blocks)
    return schedule, objective(scenario, trace, schedule)
