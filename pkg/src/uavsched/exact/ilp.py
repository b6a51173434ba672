"""Mixed 0/1 linearisation of the joint scheduling problem on a frozen trace.

Decision variables, in deterministic column order:
  nu[n, t]        n = 1..N+1 (dock last), t = 1..T         binary
  lam[n, t, i, g] real clusters only                        binary
  z[n, t, i, g]   product nu*lam, McCormick-linearised      continuous [0, 1]

Objective: sum_z e[t, g] * z  +  hover_energy_per_frame * sum_{n<=N} nu.
Every z gets exactly three product rows (z <= nu, z <= lam, z >= nu + lam - 1),
which are exact for a binary-binary product.  On top of the defining rows the
builder emits per-slot occupancy equalities (sum_g lam = nu and sum_g z = nu),
which hold at every integral point and sharpen the LP relaxation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..environment import hover_energy_per_frame
from ..scenario import Scenario
from ..trace import ChannelTrace
from .simplex import SimplexResult, solve_lp


@dataclass
class IlpInstance:
    c: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integral: np.ndarray  # bool mask over columns
    names: list[str]
    scenario: Scenario
    trace: ChannelTrace
    var_index: dict[tuple, int] = field(default_factory=dict)
    row_names_ub: list[str] = field(default_factory=list)
    row_names_eq: list[str] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return self.c.size

    def solve_relaxation(
        self, lb: np.ndarray | None = None, ub: np.ndarray | None = None
    ) -> SimplexResult:
        return solve_lp(
            self.c,
            self.a_ub,
            self.b_ub,
            self.a_eq,
            self.b_eq,
            self.lb if lb is None else lb,
            self.ub if ub is None else ub,
        )

    def lp_text(self) -> str:
        """CPLEX-style LP listing, a developer aid for cross-checking."""
        lines = ["Minimize", " obj: " + _expr(self.c, self.names)]
        lines.append("Subject To")
        for i in range(self.a_ub.shape[0]):
            name = self.row_names_ub[i] if i < len(self.row_names_ub) else f"ub{i}"
            lines.append(f" {name}: " + _expr(self.a_ub[i], self.names) + f" <= {self.b_ub[i]:.12g}")
        for i in range(self.a_eq.shape[0]):
            name = self.row_names_eq[i] if i < len(self.row_names_eq) else f"eq{i}"
            lines.append(f" {name}: " + _expr(self.a_eq[i], self.names) + f" = {self.b_eq[i]:.12g}")
        lines.append("Bounds")
        for j, name in enumerate(self.names):
            lines.append(f" {self.lb[j]:.12g} <= {name} <= {self.ub[j]:.12g}")
        lines.append("Binaries")
        lines.append(" " + " ".join(n for j, n in enumerate(self.names) if self.integral[j]))
        lines.append("End")
        return "\n".join(lines)


def _expr(coeffs: np.ndarray, names: list[str]) -> str:
    terms = []
    for j in np.nonzero(coeffs)[0]:
        v = coeffs[j]
        sign = "+" if v >= 0 else "-"
        terms.append(f"{sign} {abs(v):.12g} {names[j]}")
    if not terms:
        return "0"
    return " ".join(terms).lstrip("+ ")


def linearize(scenario: Scenario, trace: ChannelTrace) -> IlpInstance:
    """Build the full 0/1 program for one frozen trace."""
    n_clusters = scenario.n_clusters
    t_max = scenario.t_max
    i_slots = scenario.radio.slots_per_frame
    hover_j = hover_energy_per_frame(scenario)

    names: list[str] = []
    var_index: dict[tuple, int] = {}

    def add_var(key: tuple, name: str) -> int:
        var_index[key] = len(names)
        names.append(name)
        return var_index[key]

    for n in range(1, n_clusters + 2):
        for t in range(1, t_max + 1):
            add_var(("nu", n, t), f"nu_{n}_{t}")
    for n in range(1, n_clusters + 1):
        for t in range(1, t_max + 1):
            for i in range(1, i_slots + 1):
                for g in scenario.groups(n):
                    add_var(("lam", n, t, i, g), f"lam_{n}_{t}_{i}_{g}")
    for n in range(1, n_clusters + 1):
        for t in range(1, t_max + 1):
            for i in range(1, i_slots + 1):
                for g in scenario.groups(n):
                    add_var(("z", n, t, i, g), f"z_{n}_{t}_{i}_{g}")

    n_vars = len(names)
    c = np.zeros(n_vars)
    lb = np.zeros(n_vars)
    ub = np.ones(n_vars)
    integral = np.zeros(n_vars, dtype=bool)
    for (kind, *rest), j in var_index.items():
        integral[j] = kind in ("nu", "lam")

    tables = {n: trace.tables(n) for n in range(1, n_clusters + 1)}
    for n in range(1, n_clusters + 1):
        _, e = tables[n]
        for t in range(1, t_max + 1):
            for i in range(1, i_slots + 1):
                for g in scenario.groups(n):
                    c[var_index[("z", n, t, i, g)]] = e[t - 1, g - 1]
        for t in range(1, t_max + 1):
            c[var_index[("nu", n, t)]] = hover_j

    rows_ub: list[np.ndarray] = []
    rhs_ub: list[float] = []
    names_ub: list[str] = []
    rows_eq: list[np.ndarray] = []
    rhs_eq: list[float] = []
    names_eq: list[str] = []

    def ub_row(name: str) -> np.ndarray:
        row = np.zeros(n_vars)
        rows_ub.append(row)
        rhs_ub.append(0.0)
        names_ub.append(name)
        return row

    def eq_row(name: str) -> np.ndarray:
        row = np.zeros(n_vars)
        rows_eq.append(row)
        rhs_eq.append(0.0)
        names_eq.append(name)
        return row

    # demand rows: -sum d*z <= -q.  Coefficients are clipped at q: the product
    # variables are 0/1 at every integral point, where sum(min(d, q)) >= q is
    # equivalent to sum(d) >= q, and the clipped row is tighter fractionally.
    for n in range(1, n_clusters + 1):
        d, _ = tables[n]
        for k in range(scenario.n_users(n)):
            q_k = scenario.demands(n)[k]
            row = ub_row(f"demand_{n}_{k + 1}")
            for t in range(1, t_max + 1):
                for g in scenario.groups(n):
                    dv = min(d[t - 1, g - 1, k], q_k)
                    if dv > 0.0:
                        for i in range(1, i_slots + 1):
                            row[var_index[("z", n, t, i, g)]] = -dv
            rhs_ub[-1] = -q_k

    # succession: nu[n,t] - nu[n,t+1] - nu[n+1,t+1] <= 0 for real clusters
    for n in range(1, n_clusters + 1):
        for t in range(1, t_max):
            row = ub_row(f"succ_{n}_{t}")
            row[var_index[("nu", n, t)]] = 1.0
            row[var_index[("nu", n, t + 1)]] = -1.0
            row[var_index[("nu", n + 1, t + 1)]] = -1.0

    # the dock is absorbing: nu[N+1,t] <= nu[N+1,t+1]
    for t in range(1, t_max):
        row = ub_row(f"dock_{t}")
        row[var_index[("nu", n_clusters + 1, t)]] = 1.0
        row[var_index[("nu", n_clusters + 1, t + 1)]] = -1.0

    # the mission starts over cluster 1
    lb[var_index[("nu", 1, 1)]] = 1.0

    # full-frame rule: sum_{i,g} lam = I * nu for real clusters
    for n in range(1, n_clusters + 1):
        for t in range(1, t_max + 1):
            row = eq_row(f"fullframe_{n}_{t}")
            for i in range(1, i_slots + 1):
                for g in scenario.groups(n):
                    row[var_index[("lam", n, t, i, g)]] = 1.0
            row[var_index[("nu", n, t)]] = -float(i_slots)

    # one group per slot
    for n in range(1, n_clusters + 1):
        for t in range(1, t_max + 1):
            for i in range(1, i_slots + 1):
                row = ub_row(f"oneslot_{n}_{t}_{i}")
                for g in scenario.groups(n):
                    row[var_index[("lam", n, t, i, g)]] = 1.0
                rhs_ub[-1] = 1.0

    # one position per frame (dock included)
    for t in range(1, t_max + 1):
        row = eq_row(f"onepos_{t}")
        for n in range(1, n_clusters + 2):
            row[var_index[("nu", n, t)]] = 1.0
        rhs_eq[-1] = 1.0

    # strengthening rows, valid for every integral point: each hovering frame
    # fills every slot with exactly one group, and the slot's product
    # variables then sum to the hover indicator as well.  Neither family cuts
    # off an integral solution, but both tie fractional hover mass to
    # fractional usage, which tightens the LP bound considerably.
    for n in range(1, n_clusters + 1):
        for t in range(1, t_max + 1):
            for i in range(1, i_slots + 1):
                row = eq_row(f"slotocc_{n}_{t}_{i}")
                for g in scenario.groups(n):
                    row[var_index[("lam", n, t, i, g)]] = 1.0
                row[var_index[("nu", n, t)]] = -1.0
                row = eq_row(f"slotprod_{n}_{t}_{i}")
                for g in scenario.groups(n):
                    row[var_index[("z", n, t, i, g)]] = 1.0
                row[var_index[("nu", n, t)]] = -1.0

    # rounding cuts on the hover count: user k can collect at most
    # I * max_{t, g containing k} d bits per frame, so cluster n needs at
    # least ceil(q_k / that) hovering frames.  The fractional relaxation
    # would otherwise pay for fractions of a frame.
    for n in range(1, n_clusters + 1):
        d, _ = tables[n]
        min_frames = 1
        for k in range(scenario.n_users(n)):
            dmax = float(d[:, :, k].max())
            if dmax <= 0.0:
                min_frames = t_max + 1  # user can never be served: infeasible
                break
            need = scenario.demands(n)[k] / (i_slots * dmax)
            min_frames = max(min_frames, int(np.ceil(need - 1e-12)))
        row = ub_row(f"frames_{n}")
        for t in range(1, t_max + 1):
            row[var_index[("nu", n, t)]] = -1.0
        rhs_ub[-1] = -float(min_frames)

    # volume cut: a frame at cluster n can deliver at most I times the best
    # single-group total, so the hover pattern must cover the summed demand
    for n in range(1, n_clusters + 1):
        d, _ = tables[n]
        cap = i_slots * d.sum(axis=2).max(axis=1)  # per frame t
        row = ub_row(f"capvol_{n}")
        for t in range(1, t_max + 1):
            row[var_index[("nu", n, t)]] = -float(cap[t - 1])
        rhs_ub[-1] = -float(scenario.demands(n).sum())

    # slot-count cuts: serving user k takes at least ceil(q_k / best rate)
    # scheduled slots, and the product variables count those slots
    for n in range(1, n_clusters + 1):
        d, _ = tables[n]
        for k in range(scenario.n_users(n)):
            dmax = float(d[:, :, k].max())
            if dmax <= 0.0:
                continue  # the frames cut already flags this as infeasible
            n_slots = int(np.ceil(scenario.demands(n)[k] / dmax - 1e-12))
            row = ub_row(f"slots_{n}_{k + 1}")
            for t in range(1, t_max + 1):
                for g in scenario.groups(n):
                    if d[t - 1, g - 1, k] > 0.0:
                        for i in range(1, i_slots + 1):
                            row[var_index[("z", n, t, i, g)]] = -1.0
            rhs_ub[-1] = -float(n_slots)

    # slots inside a frame are exchangeable (the channel model is per-frame),
    # so force non-increasing group ids across slots: this keeps exactly one
    # canonical representative of each within-frame multiset
    for n in range(1, n_clusters + 1):
        for t in range(1, t_max + 1):
            for i in range(1, i_slots):
                row = ub_row(f"slotsym_{n}_{t}_{i}")
                for g in scenario.groups(n):
                    row[var_index[("lam", n, t, i, g)]] = -float(g)
                    row[var_index[("lam", n, t, i + 1, g)]] = float(g)

    # McCormick product rows
    for n in range(1, n_clusters + 1):
        for t in range(1, t_max + 1):
            for i in range(1, i_slots + 1):
                for g in scenario.groups(n):
                    jz = var_index[("z", n, t, i, g)]
                    jl = var_index[("lam", n, t, i, g)]
                    jn = var_index[("nu", n, t)]
                    row = ub_row(f"mc_nu_{n}_{t}_{i}_{g}")
                    row[jz] = 1.0
                    row[jn] = -1.0
                    row = ub_row(f"mc_lam_{n}_{t}_{i}_{g}")
                    row[jz] = 1.0
                    row[jl] = -1.0
                    row = ub_row(f"mc_both_{n}_{t}_{i}_{g}")
                    row[jz] = -1.0
                    row[jn] = 1.0
                    row[jl] = 1.0
                    rhs_ub[-1] = 1.0

    return IlpInstance(
        c=c,
        a_ub=np.asarray(rows_ub),
        b_ub=np.asarray(rhs_ub),
        a_eq=np.asarray(rows_eq),
        b_eq=np.asarray(rhs_eq),
        lb=lb,
        ub=ub,
        integral=integral,
        names=names,
        scenario=scenario,
        trace=trace,
        var_index=var_index,
        row_names_ub=names_ub,
        row_names_eq=names_eq,
    )


def mccormick_rows(jz: int, jnu: int, jlam: int, n_vars: int) -> tuple[np.ndarray, np.ndarray]:
    """Standalone product envelope for w = x*y on [0,1]^2, returned as
    (A, b) with rows w-x <= 0, w-y <= 0, -w+x+y <= 1."""
    a = np.zeros((3, n_vars))
    b = np.array([0.0, 0.0, 1.0])
    a[0, jz], a[0, jnu] = 1.0, -1.0
    a[1, jz], a[1, jlam] = 1.0, -1.0
    a[2, jz], a[2, jnu], a[2, jlam] = -1.0, 1.0, 1.0
    return a, b
