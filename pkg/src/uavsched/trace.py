"""Frozen channel realisation for one episode.

Every coefficient of every group table evolves as an independent finite-state
chain.  A ChannelTrace materialises the whole level-index history up front so
the environment, the exact solver and every heuristic consume byte-identical
channels for a given (scenario, seed).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .channel import fsmc_step
from .scenario import Scenario, group_members, group_size


def _cluster_layout(scenario: Scenario, n: int) -> tuple[np.ndarray, int]:
    """Offsets of each group's flattened K_g x K_g block in the cluster row."""
    sizes = [group_size(g) ** 2 for g in scenario.groups(n)]
    offsets = np.zeros(len(sizes) + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    return offsets, int(offsets[-1])


@dataclass
class ChannelTrace:
    """Level indices per cluster: arrays of shape (t_max, n_coefficients)."""

    scenario: Scenario
    level_idx: tuple[np.ndarray, ...]
    seed: int

    def __post_init__(self) -> None:
        self._tables: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    @classmethod
    def generate(cls, scenario: Scenario, seed: int) -> "ChannelTrace":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        n_levels = scenario.fsmc.n_levels
        trans = scenario.fsmc.transition
        arrays = []
        for n in range(1, scenario.n_clusters + 1):
            _, width = _cluster_layout(scenario, n)
            hist = np.empty((scenario.t_max, width), dtype=np.int8)
            state = rng.integers(0, n_levels, size=width, dtype=np.int8)
            hist[0] = state
            for t in range(1, scenario.t_max):
                state = fsmc_step(state, trans, rng)
                hist[t] = state
            arrays.append(hist)
        return cls(scenario=scenario, level_idx=tuple(arrays), seed=seed)

    # -- accessors ----------------------------------------------------------
    def _offsets(self, n: int) -> np.ndarray:
        return _cluster_layout(self.scenario, n)[0]

    def beta(self, n: int, g: int, t: int) -> np.ndarray:
        """Dequantised gain table of group g in cluster n at frame t (1-based)."""
        offs = self._offsets(n)
        s = group_size(g)
        idx = self.level_idx[n - 1][t - 1, offs[g - 1] : offs[g]]
        return self.scenario.fsmc.level_array()[idx].reshape(s, s)

    def singleton_levels(self, n: int, t: int) -> np.ndarray:
        """Level indices of every singleton group's own coefficient at frame t."""
        offs = self._offsets(n)
        ids = [1 << k for k in range(self.scenario.n_users(n))]
        return np.array([self.level_idx[n - 1][t - 1, offs[g - 1]] for g in ids])

    def full_group_levels(self, n: int, t: int) -> np.ndarray:
        """Full-group level-index table (K x K) at frame t."""
        k = self.scenario.n_users(n)
        g = (1 << k) - 1
        offs = self._offsets(n)
        return self.level_idx[n - 1][t - 1, offs[g - 1] : offs[g]].reshape(k, k)

    def tables(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-frame delivery and energy lookups for cluster n.

        Returns (d, e): d[t, g, k] is the bits user k receives from one slot of
        group g+1 at frame t+1 (zero if k is not a member); e[t, g] is that
        slot's transmit energy.
        """
        if n in self._tables:
            return self._tables[n]
        sc = self.scenario
        cfg = sc.radio
        t_max, k_users = sc.t_max, sc.n_users(n)
        n_grp = sc.n_groups(n)
        levels = sc.fsmc.level_array()
        offs = self._offsets(n)
        hist = self.level_idx[n - 1]
        d = np.zeros((t_max, n_grp, k_users))
        e = np.zeros((t_max, n_grp))
        p, sigma2 = cfg.tx_power_w, cfg.noise_power_w
        bits_scale = cfg.slot_duration_s * cfg.bandwidth_hz
        for g in range(1, n_grp + 1):
            members = group_members(g)
            s = len(members)
            block = levels[hist[:, offs[g - 1] : offs[g]]].reshape(t_max, s, s)
            diag = np.einsum("tkk->tk", block)
            interference = (block.sum(axis=2) - diag) * p
            gamma = diag * p / (interference + sigma2)
            d[:, g - 1, list(members)] = bits_scale * np.log2(1.0 + gamma)
            e[:, g - 1] = cfg.slot_duration_s * diag.sum(axis=1) * p
        self._tables[n] = (d, e)
        return d, e

    # -- (de)serialisation ----------------------------------------------------
    def dump_csv(self, path: str) -> None:
        """Write the flat (cluster, group, pair, frame, level) table."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cluster", "group", "pair", "frame", "level"])
            for n in range(1, self.scenario.n_clusters + 1):
                offs = self._offsets(n)
                hist = self.level_idx[n - 1]
                for g in self.scenario.groups(n):
                    for pair in range(group_size(g) ** 2):
                        col = offs[g - 1] + pair
                        for t in range(self.scenario.t_max):
                            w.writerow([n, g, pair, t + 1, int(hist[t, col])])

    @classmethod
    def load_csv(cls, path: str, scenario: Scenario, seed: int = -1) -> "ChannelTrace":
        arrays = []
        for n in range(1, scenario.n_clusters + 1):
            _, width = _cluster_layout(scenario, n)
            arrays.append(np.full((scenario.t_max, width), -1, dtype=np.int8))
        all_offsets = [
            _cluster_layout(scenario, n)[0] for n in range(1, scenario.n_clusters + 1)
        ]
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                n = int(row["cluster"])
                g = int(row["group"])
                pair = int(row["pair"])
                t = int(row["frame"])
                lvl = int(row["level"])
                if not 1 <= n <= scenario.n_clusters:
                    raise ValueError(f"cluster {n} out of range")
                if not 1 <= g <= scenario.n_groups(n):
                    raise ValueError(f"group {g} out of range for cluster {n}")
                if not 0 <= lvl < scenario.fsmc.n_levels:
                    raise ValueError(f"level index {lvl} out of range")
                offs = all_offsets[n - 1]
                if pair < 0 or offs[g - 1] + pair >= offs[g]:
                    raise ValueError(f"pair {pair} out of range for group {g}")
                if not 1 <= t <= scenario.t_max:
                    raise ValueError(f"frame {t} out of range")
                arrays[n - 1][t - 1, offs[g - 1] + pair] = lvl
        for arr in arrays:
            if np.any(arr < 0):
                raise ValueError("trace file is missing coefficients")
        return cls(scenario=scenario, level_idx=tuple(arrays), seed=seed)
