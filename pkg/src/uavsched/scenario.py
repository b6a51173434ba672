"""Mission description: clusters with per-user demands plus shared constants.

User groups of a K-user cluster are the nonempty subsets, identified by their
bitmask 1..2^K-1 (bit k set = user k is a member).  The bitmask doubles as the
1-based group index everywhere, so group id g has members(g) as its bit list.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import FsmcModel, RadioConfig
from .propulsion import PropulsionParams

MBIT = 1e6


def group_members(g: int) -> tuple[int, ...]:
    """User indices (0-based) of group id g (bitmask, 1-based id space)."""
    if g < 1:
        raise ValueError("group ids start at 1")
    return tuple(k for k in range(g.bit_length()) if g >> k & 1)


def group_size(g: int) -> int:
    return bin(g).count("1")


def n_groups(n_users: int) -> int:
    return (1 << n_users) - 1


@dataclass(frozen=True)
class Scenario:
    """One mission instance.  demands_bits[n][k] is user k of cluster n's queue."""

    demands_bits: tuple[tuple[float, ...], ...]
    radio: RadioConfig = field(default_factory=RadioConfig)
    propulsion: PropulsionParams = field(default_factory=PropulsionParams)
    fsmc: FsmcModel = field(default_factory=FsmcModel)
    t_max: int = 160
    name: str = "scenario"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "demands_bits", tuple(tuple(float(q) for q in c) for c in self.demands_bits)
        )
        self.validate()

    def validate(self) -> None:
        if not self.demands_bits:
            raise ValueError("need at least one cluster")
        for c, cluster in enumerate(self.demands_bits):
            if not cluster:
                raise ValueError(f"cluster {c + 1} has no users")
            if any(q <= 0 for q in cluster):
                raise ValueError(f"cluster {c + 1} has a nonpositive demand")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        self.radio.validate()
        self.propulsion.validate()

    # -- shapes -------------------------------------------------------------
    @property
    def n_clusters(self) -> int:
        return len(self.demands_bits)

    @property
    def dock(self) -> int:
        """Index of the virtual terminal cluster (1-based N+1)."""
        return self.n_clusters + 1

    def n_users(self, n: int) -> int:
        """User count of 1-based cluster n."""
        return len(self.demands_bits[n - 1])

    def n_groups(self, n: int) -> int:
        return n_groups(self.n_users(n))

    def demands(self, n: int) -> np.ndarray:
        return np.asarray(self.demands_bits[n - 1], dtype=float)

    @property
    def total_demand_bits(self) -> float:
        return float(sum(sum(c) for c in self.demands_bits))

    def groups(self, n: int) -> list[int]:
        """All group ids of cluster n in bitmask order."""
        return list(range(1, self.n_groups(n) + 1))

    def with_updates(self, **changes) -> "Scenario":
        from dataclasses import replace

        return replace(self, **changes)
