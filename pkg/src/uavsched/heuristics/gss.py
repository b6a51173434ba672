"""Golden-section search over per-cluster hover lengths.

Clusters are processed in visit order; for each one the search brackets the
hover length on [0, t_bar] (demand-proportional budget), probes the two
golden points, and keeps the sub-bracket with the lower total energy.  Each
probe prices one block subproblem via guided local search; infeasible probes
score +inf so the bracket drifts toward feasible lengths.  The search is
exact only for unimodal energy curves; on multimodal ones it returns a good
local choice, which is the intended trade-off.

Probe points are rounded up to integers on both golden formulas.  When the
bracket shifts right, the default update recomputes the new upper probe with
the same round-up formula as the lower probe (the literal recurrence this
implements); ``mirrored_upper_update`` switches to the mirrored golden
formula instead.  Both variants shrink the bracket by the golden ratio per
step and keep x < u <= v < y on integer brackets.

Two adaptations deal with the integer, finite-horizon setting:

- The continuous recurrence degenerates on brackets a few frames wide (the
  two rounded probe points collide and the loop can exit pointing at an
  unexamined length), so the chosen length is the cheapest length actually
  priced, polished by a unit-step descent that prices both neighbours until
  no single-frame move improves.
- Cluster budgets interact: every cluster after the current one is reserved
  one frame up front (the visit chain admits no skips), and when a later
  cluster still cannot meet demand, a repair pass shrinks the latest earlier
  cluster that stays feasible one frame shorter, then rebuilds the clusters
  in between without letting them regrow.  The pass is bounded and either
  frees enough frames or reports infeasibility.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..environment import (
    EnergyBreakdown,
    Schedule,
    hover_energy_per_frame,
    objective,
)
from ..scenario import Scenario
from ..trace import ChannelTrace
from .bounds import hovering_bound
from .mmkp import MmkpInstance, mmkp_gls

GOLDEN = 0.618


@dataclass(frozen=True)
class GssConfig:
    gls_iters: int = 2000
    gls_restart_after: int = 200
    gls_penalty_weight: float | None = None
    # False: after a right shift the new upper probe reuses the round-up
    # low-point formula; True: it uses the mirrored golden formula
    mirrored_upper_update: bool = False


@dataclass(frozen=True)
class GssProbe:
    cluster: int
    t: int
    e_comm_j: float
    e_hover_j: float
    feasible: bool


@dataclass
class GssReport:
    status: str  # "ok" | "infeasible"
    schedule: Schedule | None
    breakdown: EnergyBreakdown | None
    hover_frames: list[int]
    probes: list[GssProbe] = field(default_factory=list)


def write_probe_csv(probes: list[GssProbe], path: str) -> None:
    """Per-cluster search trace (probe hover length and its energy split)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cluster", "t", "e_comm_j", "e_hover_j", "feasible"])
        for p in probes:
            w.writerow(
                [p.cluster, p.t, f"{p.e_comm_j:.9g}", f"{p.e_hover_j:.9g}", int(p.feasible)]
            )


class _ClusterPricer:
    """Prices hover lengths for one cluster anchored at a fixed start frame.

    Every priced length is memoised, so repeated probes (golden collisions,
    the refinement descent, repair passes) cost one local search each at
    most.  Prices are total energies: block communication energy plus the
    hovering bill for the candidate length, +inf when demand does not fit.
    """

    def __init__(
        self,
        scenario: Scenario,
        trace: ChannelTrace,
        n: int,
        tau: int,
        config: GssConfig,
        hover_j: float,
        probes: list[GssProbe],
    ) -> None:
        self.scenario = scenario
        self.trace = trace
        self.n = n
        self.tau = tau
        self.config = config
        self.hover_j = hover_j
        self.probes = probes
        self.cache: dict[int, tuple[np.ndarray | None, float, bool]] = {}

    def price(self, t: int, cap: int) -> float:
        t = int(t)
        if t < 1 or t > cap:
            return math.inf
        if t not in self.cache:
            ins = MmkpInstance.from_block(self.scenario, self.trace, self.n, self.tau, t)
            assign, e_comm, feas = mmkp_gls(
                ins,
                max_iters=self.config.gls_iters,
                restart_after=self.config.gls_restart_after,
                penalty_weight=self.config.gls_penalty_weight,
            )
            self.cache[t] = (assign, e_comm, feas)
            self.probes.append(
                GssProbe(self.n, t, e_comm, self.hover_j * t if feas else math.inf, feas)
            )
        assign, e_comm, feas = self.cache[t]
        return e_comm + self.hover_j * t if feas else math.inf

    def assignment(self, t: int) -> np.ndarray | None:
        return self.cache[t][0]

    def _best_priced(self, cap: int) -> int | None:
        best_t, best_val = None, math.inf
        for t in sorted(self.cache):
            val = self.price(t, cap)
            if val < best_val:
                best_t, best_val = t, val
        return best_t

    def _search(self, y_top: float, cap: int) -> None:
        x: float = 0.0
        y: float = y_top
        u = math.ceil(y - GOLDEN * (y - x))
        v = math.ceil(x + GOLDEN * (y - x))
        while abs(y - x) > 1:
            if self.price(u, cap) < self.price(v, cap):
                x, y, v = x, v, u
                u = math.ceil(y - GOLDEN * (y - x))
            else:
                x, u = u, v
                if self.config.mirrored_upper_update:
                    v = math.ceil(x + GOLDEN * (y - x))
                else:
                    v = math.ceil(y - GOLDEN * (y - x))
        self.price(int(v), cap)

    def _refine(self, t: int, cap: int) -> int:
        while True:
            here = self.price(t, cap)
            down = self.price(t - 1, cap)
            up = self.price(t + 1, cap)
            if down < here and down <= up:
                t -= 1
            elif up < here:
                t += 1
            else:
                return t

    def solve(self, t_bar: float, cap: int) -> int | None:
        """Cheapest hover length found, or None when none fits demand."""
        if cap < 1:
            return None
        self._search(max(min(t_bar, float(cap)), 1.0), cap)
        if self._best_priced(cap) is None:
            # demand did not fit under the proportional budget: widen the
            # bracket once to every frame still available, then give up
            self._search(float(cap), cap)
        best = self._best_priced(cap)
        if best is None:
            return None
        return self._refine(best, cap)


def gss_heu(
    scenario: Scenario, trace: ChannelTrace, config: GssConfig | None = None
) -> GssReport:
    """Hover lengths by golden-section search, slots by guided local search.

    Returns the assembled schedule with its energy breakdown; when demand
    cannot be met within the horizon even after the repair pass the report
    comes back with status "infeasible" and no schedule.
    """
    config = config or GssConfig()
    n_clusters = scenario.n_clusters
    t_bars = hovering_bound(scenario)
    hover_j = hover_energy_per_frame(scenario)
    probes: list[GssProbe] = []
    pricers: dict[tuple[int, int], _ClusterPricer] = {}

    def pricer(n: int, tau: int) -> _ClusterPricer:
        key = (n, tau)
        if key not in pricers:
            pricers[key] = _ClusterPricer(scenario, trace, n, tau, config, hover_j, probes)
        return pricers[key]

    # chosen[i] = (tau, length, pricer) for cluster i+1
    chosen: list[tuple[int, int, _ClusterPricer]] = []
    # regrowth caps imposed on rebuilt clusters during repair (1-based index)
    growth_cap: dict[int, int] = {}
    repairs = 0
    max_repairs = n_clusters * scenario.t_max

    while len(chosen) < n_clusters:
        n = len(chosen) + 1
        tau = sum(length for _, length, _ in chosen)
        cap = scenario.t_max - tau - (n_clusters - n)
        cap = min(cap, growth_cap.get(n, cap))
        pr = pricer(n, tau)
        t_star = pr.solve(float(t_bars[n - 1]), cap)
        if t_star is not None:
            chosen.append((tau, t_star, pr))
            continue
        # repair: free one frame from the latest earlier cluster that stays
        # feasible one frame shorter, then rebuild everything after it
        repairs += 1
        shrink_at = None
        if repairs <= max_repairs:
            for m in range(len(chosen), 0, -1):
                tau_m, len_m, pr_m = chosen[m - 1]
                if len_m > 1 and math.isfinite(pr_m.price(len_m - 1, len_m - 1)):
                    shrink_at = m
                    break
        if shrink_at is None:
            return GssReport("infeasible", None, None, [], probes)
        for j in range(shrink_at + 1, len(chosen) + 1):
            growth_cap[j] = min(growth_cap.get(j, chosen[j - 1][1]), chosen[j - 1][1])
        tau_m, len_m, pr_m = chosen[shrink_at - 1]
        chosen = chosen[: shrink_at - 1] + [(tau_m, len_m - 1, pr_m)]

    hover_frames = [length for _, length, _ in chosen]
    blocks = []
    for _, length, pr in chosen:
        assign = pr.assignment(length)
        assert assign is not None
        blocks.append(assign)
    schedule = Schedule.from_blocks(scenario, blocks)
    breakdown = objective(scenario, trace, schedule)
    return GssReport("ok", schedule, breakdown, hover_frames, probes)
