"""Exact block-energy curve probes for the monotonicity test suite."""
from __future__ import annotations

from math import comb

import numpy as np

from ..exact.brute import LEAF_CAP, optimal_block_energy
from ..scenario import Scenario
from ..trace import ChannelTrace


def lemma1_probe(
    scenario: Scenario,
    trace: ChannelTrace,
    n: int,
    t_values: list[int],
    start: int = 0,
) -> list[float]:
    """Optimal communication energy of cluster ``n``'s block as a function of
    its hover length.

    Each entry is the exact minimum over all slot assignments for that
    length (exhaustive search), with ``inf`` marking lengths whose demands
    cannot be met.  Slots are allowed to idle here: a longer block can then
    always reuse a shorter block's plan and leave the extra slots silent, so
    the finite part of the curve is non-increasing and the invariant suite
    asserts exactly that.  (The schedule model proper forces a transmission
    in every hovered slot, whose curve may rise past the demand knee.)
    """
    per_frame = comb(scenario.n_groups(n) + 1 + scenario.radio.slots_per_frame - 1,
                     scenario.radio.slots_per_frame)
    worst = max((t for t in t_values if t > 0), default=0)
    if per_frame**max(worst, 1) > LEAF_CAP:
        raise ValueError(
            f"search space {per_frame}^{worst} exceeds the exhaustive cap"
        )
    out: list[float] = []
    for t in t_values:
        if t <= 0 or start + t > scenario.t_max:
            out.append(np.inf)
            continue
        out.append(optimal_block_energy(scenario, trace, n, start, t, allow_idle=True))
    return out
