"""Per-cluster hover-frame budgets derived from the demand profile."""
from __future__ import annotations

import numpy as np

from ..scenario import Scenario


def hovering_bound(scenario: Scenario) -> np.ndarray:
    """Frame budget per cluster, proportional to its share of total demand.

    Splits the mission horizon T_max across clusters by demanded bits:
    t_bar[n] = T_max * (cluster n demand) / (total demand).  The budgets are
    real-valued and sum to exactly T_max; search routines round as needed.
    """
    per_cluster = np.array(
        [scenario.demands(n).sum() for n in range(1, scenario.n_clusters + 1)]
    )
    total = per_cluster.sum()
    if total <= 0:
        raise ValueError("hovering_bound needs a positive total demand")
    return scenario.t_max * per_cluster / total
