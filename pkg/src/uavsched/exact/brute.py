"""Exhaustive reference solver for tiny instances.

Slots within a frame see the same channel, so per-frame assignments are
enumerated as multisets of I groups (combinations with replacement) instead of
ordered slot vectors.  Hover paths (t_1..t_N, sum <= T_max, each >= 1) are
enumerated outright; the per-cluster block subproblem is memoised on
(cluster, start frame, length).  All prunes are sound: additive nonnegative
cost bound, monotone best-case delivery bound, and pointwise dominance between
frame assignments, so the result is exact.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from ..environment import EnergyBreakdown, Schedule, hover_energy_per_frame, objective
from ..scenario import Scenario
from ..trace import ChannelTrace

LEAF_CAP = 100_000_000


@dataclass
class BruteReport:
    status: str  # "optimal" | "infeasible"
    objective: float
    schedule: Schedule | None
    breakdown: EnergyBreakdown | None
    n_paths: int
    n_blocks: int


def _paths(n_clusters: int, t_max: int):
    """All hover-length vectors (t_1..t_N), each >= 1, sum <= t_max."""
    for total in range(n_clusters, t_max + 1):
        for cuts in itertools.combinations(range(1, total), n_clusters - 1):
            bounds = (0, *cuts, total)
            yield tuple(bounds[i + 1] - bounds[i] for i in range(n_clusters))


def _frame_options(d: np.ndarray, e: np.ndarray, t: int, i_slots: int, n_grp: int):
    """Nondominated frame assignments at frame t, sorted by energy.

    Returns (combos, deliv, cost): combos is a list of group-id tuples."""
    combos = list(itertools.combinations_with_replacement(range(1, n_grp + 1), i_slots))
    deliv = np.array([d[t, [g - 1 for g in c], :].sum(axis=0) for c in combos])
    cost = np.array([e[t, [g - 1 for g in c]].sum() for c in combos])
    order = np.lexsort((np.arange(len(combos)), cost))
    keep: list[int] = []
    for idx in order:
        dominated = False
        for kid in keep:
            if cost[kid] <= cost[idx] + 1e-15 and np.all(deliv[kid] >= deliv[idx] - 1e-12):
                dominated = True
                break
        if not dominated:
            keep.append(int(idx))
    return (
        [combos[i] for i in keep],
        deliv[keep],
        cost[keep],
    )


class _BlockSolver:
    """Exact minimum-energy assignment for one cluster block.

    With ``allow_idle`` a zero-delivery, zero-cost pseudo-group is prepended
    so slots may stay silent; group ids in returned plans then carry that
    offset and are only meaningful for pricing, not for schedules."""

    def __init__(
        self, scenario: Scenario, trace: ChannelTrace, n: int, allow_idle: bool = False
    ):
        self.scenario = scenario
        self.n = n
        self.d, self.e = trace.tables(n)
        if allow_idle:
            self.d = np.concatenate(
                [np.zeros((self.d.shape[0], 1, self.d.shape[2])), self.d], axis=1
            )
            self.e = np.concatenate([np.zeros((self.e.shape[0], 1)), self.e], axis=1)
        self.i_slots = scenario.radio.slots_per_frame
        self.n_grp = self.e.shape[1]
        self.demands = scenario.demands(n)
        self._options: dict[int, tuple] = {}
        self.cache: dict[tuple[int, int], tuple[float, tuple | None]] = {}

    def options(self, t: int):
        if t not in self._options:
            self._options[t] = _frame_options(self.d, self.e, t, self.i_slots, self.n_grp)
        return self._options[t]

    def solve(self, start: int, length: int) -> tuple[float, tuple | None]:
        """(comm energy, per-frame combos) or (inf, None) if demands cannot
        be met in frames start..start+length-1 (0-based)."""
        key = (start, length)
        if key in self.cache:
            return self.cache[key]
        frames = list(range(start, start + length))
        opts = [self.options(t) for t in frames]
        # suffix bounds: cheapest possible remaining cost, best possible delivery
        min_cost_suffix = np.zeros(length + 1)
        max_deliv_suffix = np.zeros((length + 1, self.demands.size))
        for rel in range(length - 1, -1, -1):
            _, deliv, cost = opts[rel]
            min_cost_suffix[rel] = min_cost_suffix[rel + 1] + cost.min()
            max_deliv_suffix[rel] = max_deliv_suffix[rel + 1] + deliv.max(axis=0)

        best_cost = np.inf
        best_plan: tuple | None = None

        # greedy warm start (max capped coverage, cost-sorted ties) seeds the
        # incumbent so the cost-bound prune bites from the first descent
        residual = self.demands.copy()
        greedy_plan = []
        greedy_cost = 0.0
        for rel in range(length):
            _, deliv, fcost = opts[rel]
            covered = np.minimum(deliv, residual[None, :]).sum(axis=1)
            idx = int(np.argmax(covered))
            greedy_plan.append(idx)
            greedy_cost += fcost[idx]
            residual = np.maximum(residual - deliv[idx], 0.0)
        if residual.sum() <= 1e-12:
            best_cost = greedy_cost
            best_plan = tuple(greedy_plan)

        plan = [0] * length

        def rec(rel: int, residual: np.ndarray, cost: float) -> None:
            nonlocal best_cost, best_plan
            if cost + min_cost_suffix[rel] >= best_cost:
                return
            if np.any(residual > max_deliv_suffix[rel] + 1e-9):
                return
            if rel == length:
                best_cost = cost
                best_plan = tuple(plan)
                return
            combos, deliv, fcost = opts[rel]
            for idx in range(len(combos)):
                plan[rel] = idx
                rec(rel + 1, np.maximum(residual - deliv[idx], 0.0), cost + fcost[idx])

        rec(0, self.demands.copy(), 0.0)
        if best_plan is None:
            result: tuple[float, tuple | None] = (np.inf, None)
        else:
            result = (
                best_cost,
                tuple(opts[rel][0][best_plan[rel]] for rel in range(length)),
            )
        self.cache[key] = result
        return result


def _enumeration_size(scenario: Scenario, t_max: int) -> int:
    """Upper bound on enumeration leaves across all memoised blocks."""
    total = 0
    n_clusters = scenario.n_clusters
    i_slots = scenario.radio.slots_per_frame
    for n in range(1, n_clusters + 1):
        n_opt = comb(i_slots + scenario.n_groups(n) - 1, i_slots)
        for start in range(n - 1, t_max):
            max_len = t_max - start - (n_clusters - n)
            for length in range(1, max_len + 1):
                total += n_opt**length
                if total > 10 * LEAF_CAP:
                    return total
    return total


def brute_force(
    scenario: Scenario, trace: ChannelTrace, leaf_cap: int = LEAF_CAP
) -> BruteReport:
    size = _enumeration_size(scenario, scenario.t_max)
    if size > leaf_cap:
        raise ValueError(
            f"enumeration would visit ~{size:.3g} leaves, above the cap {leaf_cap:.3g}"
        )
    solvers = {
        n: _BlockSolver(scenario, trace, n) for n in range(1, scenario.n_clusters + 1)
    }
    hover_j = hover_energy_per_frame(scenario)
    best = np.inf
    best_path: tuple[int, ...] | None = None
    best_plans: list[tuple] | None = None
    n_paths = 0
    for path in _paths(scenario.n_clusters, scenario.t_max):
        n_paths += 1
        cost = hover_j * sum(path)
        plans: list[tuple] = []
        start = 0
        ok = True
        for n, length in enumerate(path, start=1):
            block_cost, plan = solvers[n].solve(start, length)
            if plan is None or cost + block_cost >= best:
                ok = False
                break
            cost += block_cost
            plans.append(plan)
            start += length
        if ok and cost < best:
            best = cost
            best_path = path
            best_plans = plans
    if best_path is None or best_plans is None:
        return BruteReport("infeasible", np.inf, None, None, n_paths, 0)
    blocks = [
        np.array([list(combo) for combo in plan], dtype=np.int32).reshape(
            len(plan), scenario.radio.slots_per_frame
        )
        for plan in best_plans
    ]
    schedule = Schedule.from_blocks(scenario, blocks)
    breakdown = objective(scenario, trace, schedule)
    n_blocks = sum(len(s.cache) for s in solvers.values())
    return BruteReport(
        status="optimal",
        objective=breakdown.total_j,
        schedule=schedule,
        breakdown=breakdown,
        n_paths=n_paths,
        n_blocks=n_blocks,
    )


def optimal_block_energy(
    scenario: Scenario,
    trace: ChannelTrace,
    n: int,
    start: int,
    length: int,
    allow_idle: bool = False,
) -> float:
    """Exact minimum communication energy for cluster n occupying frames
    start+1 .. start+length (start is 0-based), inf if infeasible.

    ``allow_idle`` lets slots stay silent instead of forcing a transmission
    in every hovered slot; the resulting curve over ``length`` is
    non-increasing, whereas the mandatory-transmission curve can rise once
    demands are already covered."""
    return _BlockSolver(scenario, trace, n, allow_idle=allow_idle).solve(start, length)[0]
