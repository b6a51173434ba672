"""Branch-and-bound over the 0/1 linearisation.

One LpCore is solved cold at the root; every other node re-optimises from the
current basis with the dual method after applying the node's bound fixes
(branching only ever moves variable bounds).  Search: depth-first dive to a
first incumbent, then best-first on the parent LP bound.  Branching variable:
most fractional, ties to the lowest column index.  Incumbents are rebuilt as
schedules and validated/priced by the environment before being accepted.

The search presolves the instance before branching: on the instance's
feasible region every product variable coincides with its lam factor
(z <= lam componentwise while both families sum to nu per slot), so the z
block substitutes away exactly.  Node relaxation values are unchanged; the
working LP just loses one variable and four rows per product term.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from ..environment import Schedule, objective, validate_schedule
from ..scenario import Scenario
from ..trace import ChannelTrace
from .ilp import IlpInstance, linearize
from .simplex import LpCore

INT_TOL = 1e-7


@dataclass
class BnbConfig:
    max_nodes: int = 200_000
    max_seconds: float = 300.0
    rounding_heuristic: bool = True


@dataclass
class BnbReport:
    status: str  # "optimal" | "budget" | "infeasible"
    objective: float
    bound: float
    gap: float
    n_nodes: int
    schedule: Schedule | None
    bound_history: list[float] = field(default_factory=list)
    wall_s: float = 0.0


def _reduced_arrays(ins: IlpInstance):
    """Substitute z := lam out of the instance for the search LP.

    Valid whenever the instance carries the per-slot occupancy equalities
    (sum_g lam = nu and sum_g z = nu): together with z <= lam they force
    z = lam on the whole relaxed region, so dropping the z block and folding
    its objective/constraint coefficients onto lam preserves every node's LP
    value.  Returns None when those rows are absent (unreduced instance from
    a caller), in which case the search runs on the full arrays.
    """
    has_occ = any(nm.startswith("slotocc") for nm in ins.row_names_eq)
    has_prod = any(nm.startswith("slotprod") for nm in ins.row_names_eq)
    if not (has_occ and has_prod):
        return None
    n_keep = next(
        (j for j, nm in enumerate(ins.names) if nm.startswith("z_")), len(ins.names)
    )
    pairs = [
        (j, ins.var_index[("lam",) + key[1:]])
        for key, j in ins.var_index.items()
        if key[0] == "z"
    ]
    zcols = np.array([p[0] for p in pairs], dtype=np.int64)
    lcols = np.array([p[1] for p in pairs], dtype=np.int64)

    def fold(rows: np.ndarray) -> np.ndarray:
        red = rows[:, :n_keep].copy()
        if zcols.size:
            red[:, lcols] += rows[:, zcols]
        return red

    keep_ub = [
        i
        for i, nm in enumerate(ins.row_names_ub)
        if not nm.startswith(("mc_", "oneslot"))
    ]
    keep_eq = [
        i
        for i, nm in enumerate(ins.row_names_eq)
        if not nm.startswith(("fullframe", "slotprod"))
    ]
    c = ins.c[:n_keep].copy()
    if zcols.size:
        c[lcols] += ins.c[zcols]
    return (
        c,
        fold(ins.a_ub[keep_ub]),
        ins.b_ub[keep_ub],
        fold(ins.a_eq[keep_eq]),
        ins.b_eq[keep_eq],
        ins.lb[:n_keep],
        ins.ub[:n_keep],
        ins.integral[:n_keep],
    )


def _extract_schedule(ins: IlpInstance, x: np.ndarray) -> Schedule:
    sc = ins.scenario
    t_max, i_slots = sc.t_max, sc.radio.slots_per_frame
    nu = np.zeros((sc.n_clusters + 1, t_max), dtype=np.int8)
    slots = np.zeros((t_max, i_slots), dtype=np.int32)
    for t in range(1, t_max + 1):
        vals = [x[ins.var_index[("nu", n, t)]] for n in range(1, sc.n_clusters + 2)]
        n_star = int(np.argmax(vals)) + 1
        nu[n_star - 1, t - 1] = 1
        if n_star <= sc.n_clusters:
            for i in range(1, i_slots + 1):
                lams = np.array(
                    [x[ins.var_index[("lam", n_star, t, i, g)]] for g in sc.groups(n_star)]
                )
                slots[t - 1, i - 1] = int(np.argmax(lams)) + 1
    return Schedule(nu=nu, slots=slots)


def _rounding_incumbent(
    ins: IlpInstance, x_frac: np.ndarray
) -> tuple[Schedule, float] | None:
    """Round the fractional hover mass into an integer plan, then fill slots
    greedily: cover residual demand first, cheapest group once covered."""
    sc, trace = ins.scenario, ins.trace
    i_slots = sc.radio.slots_per_frame
    t_float = np.array(
        [
            sum(x_frac[ins.var_index[("nu", n, t)]] for t in range(1, sc.t_max + 1))
            for n in range(1, sc.n_clusters + 1)
        ]
    )
    lengths = np.maximum(1, np.rint(t_float).astype(int))
    while lengths.sum() > sc.t_max:
        lengths[int(np.argmax(lengths))] -= 1
        if lengths.min() < 1:
            return None
    blocks = []
    start = 0
    for n in range(1, sc.n_clusters + 1):
        d, e = trace.tables(n)
        residual = sc.demands(n).copy()
        block = np.zeros((lengths[n - 1], i_slots), dtype=np.int32)
        for rel in range(lengths[n - 1]):
            t = start + rel
            for i in range(i_slots):
                covered = np.minimum(d[t], residual[None, :]).sum(axis=1)
                if covered.max() > 0.0:
                    g = int(np.argmax(covered))
                else:
                    g = int(np.argmin(e[t]))
                block[rel, i] = g + 1
                residual = np.maximum(residual - d[t, g], 0.0)
        blocks.append(block)
        start += lengths[n - 1]
        if residual.sum() > 1e-9:
            return None  # rounded hover mass cannot cover this cluster
    schedule = Schedule.from_blocks(sc, blocks)
    if validate_schedule(sc, trace, schedule):
        return None
    bd = objective(sc, trace, schedule)
    return schedule, bd.total_j


def solve_exact(
    scenario: Scenario,
    trace: ChannelTrace,
    config: BnbConfig | None = None,
    instance: IlpInstance | None = None,
) -> BnbReport:
    config = config or BnbConfig()
    t_start = time.perf_counter()
    ins = instance if instance is not None else linearize(scenario, trace)
    red = _reduced_arrays(ins)
    if red is None:
        arrays = (ins.c, ins.a_ub, ins.b_ub, ins.a_eq, ins.b_eq, ins.lb, ins.ub)
        branch_mask = ins.integral
    else:
        arrays = red[:7]
        branch_mask = red[7]
    c_s, aub_s, bub_s, aeq_s, beq_s, lb_s, ub_s = arrays
    core = LpCore(c_s, aub_s, bub_s, aeq_s, beq_s, lb_s, ub_s)
    root = core.primal_solve()
    n_nodes = 1
    bound_history: list[float] = []
    if root.status == "infeasible":
        return BnbReport("infeasible", np.inf, np.inf, np.inf, n_nodes, None, [], 0.0)
    if root.status != "optimal":
        raise RuntimeError(f"root relaxation failed: {root.status}")

    incumbent: Schedule | None = None
    incumbent_val = np.inf
    if config.rounding_heuristic:
        rounded = _rounding_incumbent(ins, root.x)
        if rounded is not None:
            incumbent, incumbent_val = rounded

    eps_inc = lambda v: v - max(1e-12, 1e-10 * abs(v))

    def node_result(fixes: dict[int, tuple[float, float]]):
        nonlocal core
        lb2, ub2 = lb_s.copy(), ub_s.copy()
        for j, (lo, hi) in fixes.items():
            lb2[j], ub2[j] = lo, hi
        core.set_structural_bounds(lb2, ub2)
        res = core.dual_resolve()
        if res.status == "optimal" or (res.status == "infeasible" and res.clean):
            return res
        # a warm-start verdict reached through sign repairs or budget trouble
        # must never prune a live subtree: re-derive it from a cold solve and
        # keep the fresh basis when it is usable
        fresh = LpCore(c_s, aub_s, bub_s, aeq_s, beq_s, lb2, ub2)
        res = fresh.primal_solve()
        if res.status == "optimal":
            core = fresh
        elif res.status != "infeasible":
            raise RuntimeError(f"node LP failed: {res.status}")
        return res

    def fractional_var(x: np.ndarray) -> int | None:
        frac = np.minimum(x - np.floor(x), np.ceil(x) - x)
        frac = np.where(branch_mask, frac, 0.0)
        j = int(np.argmax(frac))
        return j if frac[j] > INT_TOL else None

    def try_incumbent(x: np.ndarray) -> None:
        nonlocal incumbent, incumbent_val
        schedule = _extract_schedule(ins, x)
        violations = validate_schedule(scenario, trace, schedule)
        if violations:
            raise RuntimeError(
                "integral LP point produced an invalid schedule: " + violations[0]
            )
        val = objective(scenario, trace, schedule).total_j
        if val < incumbent_val:
            incumbent, incumbent_val = schedule, val

    heap: list[tuple[float, int, dict]] = []
    seq = 0
    global_bound = root.objective

    def out_of_budget() -> bool:
        return (
            n_nodes >= config.max_nodes
            or time.perf_counter() - t_start > config.max_seconds
        )

    # ---- dive phase -------------------------------------------------------
    current: tuple[float, dict] | None = (root.objective, {})
    current_x = root.x
    diving = True
    while True:
        if diving and current is not None:
            parent_bound, fixes = current
            x = current_x
            j = fractional_var(x)
            if j is None:
                try_incumbent(x)
                diving = False
                current = None
            else:
                lo_first = x[j] < 0.5
                child_a = dict(fixes)
                child_b = dict(fixes)
                child_a[j] = (0.0, 0.0)
                child_b[j] = (1.0, 1.0)
                prefer, other = (child_a, child_b) if lo_first else (child_b, child_a)
                heapq.heappush(heap, (parent_bound, seq, other))
                seq += 1
                if out_of_budget():
                    diving = False
                    current = None
                    heapq.heappush(heap, (parent_bound, seq, prefer))
                    seq += 1
                else:
                    res = node_result(prefer)
                    n_nodes += 1
                    bound_history.append(global_bound)
                    if res.status == "optimal" and res.objective < incumbent_val:
                        current = (max(res.objective, parent_bound), prefer)
                        current_x = res.x
                    else:
                        diving = False
                        current = None
            continue

        # ---- best-first phase ----------------------------------------------
        if not heap:
            status = "optimal" if incumbent is not None else "infeasible"
            global_bound = incumbent_val if incumbent is not None else np.inf
            break
        key, _, fixes = heapq.heappop(heap)
        global_bound = max(global_bound, min(key, incumbent_val))
        if key >= eps_inc(incumbent_val):
            continue  # pruned by bound without an LP solve
        if out_of_budget():
            heapq.heappush(heap, (key, seq, fixes))
            seq += 1
            status = "budget"
            break
        res = node_result(fixes)
        n_nodes += 1
        bound_history.append(global_bound)
        if res.status != "optimal" or res.objective >= eps_inc(incumbent_val):
            continue
        j = fractional_var(res.x)
        if j is None:
            try_incumbent(res.x)
            continue
        for fix in ((0.0, 0.0), (1.0, 1.0)):
            child = dict(fixes)
            child[j] = fix
            heapq.heappush(heap, (max(res.objective, key), seq, child))
            seq += 1

    wall = time.perf_counter() - t_start
    if incumbent is None:
        gap = np.inf
        val = np.inf
    else:
        val = incumbent_val
        gap = max(0.0, (val - global_bound) / max(abs(val), 1e-30))
    bound_history.append(global_bound)
    return BnbReport(
        status=status,
        objective=val,
        bound=global_bound,
        gap=gap,
        n_nodes=n_nodes,
        schedule=incumbent,
        bound_history=bound_history,
        wall_s=wall,
    )
