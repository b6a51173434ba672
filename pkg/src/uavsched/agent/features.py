"""State featurization for the learning agent.

The raw mission state (full per-group gain tables, residual demands, serving
cluster) is far too wide to feed a small dense network, so the channel part is
summarized per cluster by the coefficients that generate everything else under
the quantized-gain model: each user's own singleton gain plus the pairwise
cross terms of the all-users group.  Everything is normalized to [0, 1].
"""
from __future__ import annotations

import numpy as np

from ..environment import EnvState
from ..scenario import Scenario
from ..trace import ChannelTrace


def feature_length(scenario: Scenario) -> int:
    """Fixed feature-vector width for a scenario.

    Per cluster: K singleton gains + K(K-1) cross gains; then one residual
    fraction per cluster and a one-hot position over the N+1 stops."""
    n = scenario.n_clusters
    chan = sum(k + k * (k - 1) for k in (scenario.n_users(c) for c in range(1, n + 1)))
    return chan + n + (n + 1)


def encode_state(scenario: Scenario, trace: ChannelTrace, state: EnvState) -> np.ndarray:
    """Feature vector for the frame about to be played.

    Channel features are read from the frozen trace at state.t (clamped to the
    final frame for the terminal snapshot, where no frame remains to play);
    residuals are scaled by their initial value."""
    levels = scenario.fsmc.level_array()
    top = levels[-1] if levels[-1] > 0 else 1.0
    t = min(state.t, scenario.t_max)
    parts: list[np.ndarray] = []
    for n in range(1, scenario.n_clusters + 1):
        sing = levels[trace.singleton_levels(n, t)] / top
        parts.append(sing)
        k = scenario.n_users(n)
        if k > 1:
            full = levels[trace.full_group_levels(n, t)] / top
            parts.append(full[~np.eye(k, dtype=bool)])
    initial = [scenario.demands(n).sum() for n in range(1, scenario.n_clusters + 1)]
    resid = np.array(
        [state.cluster_residual(n) / initial[n - 1] for n in range(1, scenario.n_clusters + 1)]
    )
    parts.append(resid)
    onehot = np.zeros(scenario.n_clusters + 1)
    onehot[min(state.position, scenario.dock) - 1] = 1.0
    parts.append(onehot)
    return np.concatenate(parts)
