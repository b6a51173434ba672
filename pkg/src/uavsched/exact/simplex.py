"""Dense bounded-variable simplex: two-phase primal plus a dual method.

Solves  min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lb <= x <= ub
with finite lower bounds and possibly infinite upper bounds.  This is the
whole LP layer of the exact solver: no external LP/MILP dependency.

Primal pricing is Dantzig with a lowest-index tie-break, falling back to
Bland's rule after a run of degenerate pivots (guarantees termination).  The
dual method re-optimises after bound changes only (branch-and-bound nodes):
the basis stays dual-feasible when variable bounds move, so a handful of dual
pivots replaces a from-scratch solve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-10
DEGENERATE_STREAK = 40
REFRESH_EVERY = 256


@dataclass
class SimplexResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit" | "numerical"
    x: np.ndarray | None
    objective: float
    iterations: int
    # False marks a verdict reached after mid-run dual-sign repairs; callers
    # that prune on "infeasible" should re-derive such verdicts cold.
    clean: bool = True

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class LpCore:
    """Equality-form working state shared by the primal and dual methods.

    Columns are [structurals | slacks | artificials]; artificials are never
    priced and are pinned to zero once phase 1 ends.  A B^-1 b vector rides
    along with every pivot so basic values can be rebuilt after bound moves.
    """

    def __init__(
        self,
        c: np.ndarray,
        a_ub: np.ndarray | None = None,
        b_ub: np.ndarray | None = None,
        a_eq: np.ndarray | None = None,
        b_eq: np.ndarray | None = None,
        lb: np.ndarray | None = None,
        ub: np.ndarray | None = None,
    ):
        c = np.asarray(c, dtype=float)
        n = c.size
        blocks: list[np.ndarray] = []
        rhs_parts: list[np.ndarray] = []
        senses: list[str] = []
        if a_ub is not None and len(a_ub):
            a_ub = np.atleast_2d(np.asarray(a_ub, dtype=float))
            blocks.append(a_ub)
            rhs_parts.append(np.atleast_1d(np.asarray(b_ub, dtype=float)))
            senses += ["<"] * a_ub.shape[0]
        if a_eq is not None and len(a_eq):
            a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
            blocks.append(a_eq)
            rhs_parts.append(np.atleast_1d(np.asarray(b_eq, dtype=float)))
            senses += ["="] * a_eq.shape[0]
        a_struct = np.vstack(blocks) if blocks else np.zeros((0, n))
        self.b = np.concatenate(rhs_parts) if rhs_parts else np.zeros(0)
        m = a_struct.shape[0]
        # Row equilibration: bit-scale rows (coefficients ~1e5) next to unit
        # combinatorial rows blow up tableau entries and amplify pivot
        # roundoff until dual signs rot.  Dividing each row by a power of two
        # near its max coefficient is exact in floating point and leaves the
        # structural solution untouched (only slack units change).
        if m:
            mx = np.abs(a_struct).max(axis=1)
            expo = np.where(mx > 0, np.round(np.log2(np.maximum(mx, 1e-300))), 0.0)
            self.row_scale = np.exp2(expo)
            a_struct = a_struct / self.row_scale[:, None]
            self.b = self.b / self.row_scale
        else:
            self.row_scale = np.ones(0)
        lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float).copy()
        ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float).copy()
        if not np.all(np.isfinite(lb)):
            raise ValueError("lower bounds must be finite")

        self.n_struct = n
        n_slack = senses.count("<")
        self.art0 = n + n_slack
        total = n + n_slack + m
        self.m, self.n = m, total
        self.a = np.zeros((m, total))
        self.a[:, :n] = a_struct
        self.lb = np.concatenate([lb, np.zeros(n_slack + m)])
        self.ub = np.concatenate([ub, np.full(n_slack, np.inf), np.zeros(m)])
        slack_at = n
        for i, s in enumerate(senses):
            if s == "<":
                self.a[i, slack_at] = 1.0
                slack_at += 1
        self.c_full = np.concatenate([c, np.zeros(n_slack + m)])
        self.pricable = np.ones(total, dtype=bool)
        self.pricable[self.art0 :] = False

        self.t = np.zeros((m, total))
        self.binv_b = np.zeros(m)
        self.basis = np.zeros(m, dtype=np.int64)
        self.in_basis = np.zeros(total, dtype=bool)
        self.at_upper = np.zeros(total, dtype=bool)
        self.xb = np.zeros(m)
        self.iterations = 0
        self._phase1_done = False
        self._since_refresh = 0  # pivots since t was last rebuilt exactly

    # -- shared plumbing -----------------------------------------------------
    def nonbasic_value(self, j: int) -> float:
        if self.at_upper[j]:
            return self.ub[j]
        return self.lb[j]

    def nonbasic_values(self) -> np.ndarray:
        v = np.where(self.at_upper, self.ub, self.lb).astype(float)
        v[~np.isfinite(v)] = 0.0
        v[self.basis] = 0.0
        return v

    def solution(self) -> np.ndarray:
        x = np.where(self.at_upper, self.ub, self.lb).astype(float)
        x[~np.isfinite(x)] = 0.0
        x[self.basis] = self.xb
        return x

    def objective_value(self) -> float:
        return float(self.c_full @ self.solution())

    def reduced_costs(self, c: np.ndarray) -> np.ndarray:
        red = c - c[self.basis] @ self.t
        red[self.basis] = 0.0
        return red

    def recompute_xb(self) -> None:
        v = self.nonbasic_values()
        nz = np.nonzero(v)[0]
        self.xb = self.binv_b - (self.t[:, nz] @ v[nz] if nz.size else 0.0)

    def _pivot(self, row: int, col: int) -> None:
        piv = self.t[row, col]
        self.t[row] /= piv
        self.binv_b[row] /= piv
        factors = self.t[:, col].copy()
        factors[row] = 0.0
        self.t -= np.outer(factors, self.t[row])
        self.binv_b -= factors * self.binv_b[row]
        self.t[:, col] = 0.0
        self.t[row, col] = 1.0
        self._since_refresh += 1

    def refactorize(self) -> None:
        """Rebuild T = B^-1 A and B^-1 b from the basis, killing drift."""
        b_cols = self.a[:, self.basis]
        try:
            binv = np.linalg.inv(b_cols)
        except np.linalg.LinAlgError:
            binv = np.linalg.pinv(b_cols)
        self.t = binv @ self.a
        self.binv_b = binv @ self.b
        self.t[:, self.basis] = 0.0
        self.t[np.arange(self.m), self.basis] = 1.0
        self._since_refresh = 0
        self.recompute_xb()

    # -- primal method --------------------------------------------------------
    def primal_run(self, c: np.ndarray, max_iter: int) -> str:
        red = self.reduced_costs(c)
        degen_run = 0
        while True:
            if self.iterations >= max_iter:
                return "iteration_limit"
            if self._since_refresh >= REFRESH_EVERY:
                self.refactorize()
                red = self.reduced_costs(c)
            use_bland = degen_run >= DEGENERATE_STREAK
            enter = self._primal_entering(red, use_bland)
            if enter is None:
                return "optimal"
            direction = -1.0 if self.at_upper[enter] else 1.0
            col = self.t[:, enter]
            step, leave_row, leave_to_upper = self._primal_ratio(enter, direction, col, use_bland)
            if step is None:
                return "unbounded"
            self.iterations += 1
            degen_run = degen_run + 1 if step <= FEAS_TOL else 0
            if leave_row is None:
                self.xb -= direction * step * col
                self.at_upper[enter] = ~self.at_upper[enter]
                continue
            leaving = self.basis[leave_row]
            enter_value = self.nonbasic_value(enter) + direction * step
            self.xb -= direction * step * col
            self.xb[leave_row] = enter_value
            self.basis[leave_row] = enter
            self.in_basis[enter] = True
            self.in_basis[leaving] = False
            self.at_upper[leaving] = leave_to_upper
            self._pivot(leave_row, enter)
            red = red - red[enter] * self.t[leave_row]
            red[self.basis] = 0.0

    def _primal_entering(self, red: np.ndarray, bland: bool) -> int | None:
        viol = np.where(self.at_upper, red, -red)
        viol[~self.pricable] = -np.inf
        viol[self.in_basis] = -np.inf
        viol[self.ub - self.lb <= FEAS_TOL] = -np.inf
        candidates = np.nonzero(viol > OPT_TOL)[0]
        if candidates.size == 0:
            return None
        if bland:
            return int(candidates[0])
        return int(candidates[np.argmax(viol[candidates])])

    def _primal_ratio(
        self, enter: int, direction: float, col: np.ndarray, bland: bool
    ) -> tuple[float | None, int | None, bool]:
        d = direction * col
        lb_b = self.lb[self.basis]
        ub_b = self.ub[self.basis]
        steps = np.full(self.m, np.inf)
        to_upper_mask = np.zeros(self.m, dtype=bool)
        dec = d > PIVOT_TOL
        steps[dec] = (self.xb[dec] - lb_b[dec]) / d[dec]
        inc = d < -PIVOT_TOL
        has_ub = inc & np.isfinite(ub_b)
        steps[has_ub] = (ub_b[has_ub] - self.xb[has_ub]) / (-d[has_ub])
        to_upper_mask[has_ub] = True
        flip = self.ub[enter] - self.lb[enter]
        best = steps.min(initial=np.inf)
        if not np.isfinite(best) and not np.isfinite(flip):
            return None, None, False
        if flip <= best:
            return float(max(flip, 0.0)), None, False
        rows = np.nonzero(steps <= best + FEAS_TOL)[0]
        if bland:
            row = int(rows[np.argmin(self.basis[rows])])
        else:
            row = int(rows[np.argmax(np.abs(d[rows]))])
        return float(max(steps[row], 0.0)), row, bool(to_upper_mask[row])

    def primal_solve(self, max_iter: int | None = None) -> SimplexResult:
        """Cold start: phase-1 artificial basis, then optimise c.

        max_iter is a per-call pivot budget (self.iterations accumulates
        across calls, so the cap is taken relative to its current value).
        """
        m, total = self.m, self.n
        if max_iter is None:
            max_iter = 2000 + 50 * (m + total)
        max_iter = self.iterations + max_iter
        if np.any(self.lb[: self.n_struct] > self.ub[: self.n_struct] + FEAS_TOL):
            return SimplexResult("infeasible", None, np.inf, 0)
        start = self.lb.copy()
        resid = self.b - self.a[:, : self.art0] @ start[: self.art0]
        for i in range(m):
            j = self.art0 + i
            self.a[i, j] = 1.0 if resid[i] >= 0 else -1.0
            self.basis[i] = j
            self.in_basis[:] = False
            self.xb[i] = abs(resid[i])
        self.in_basis[self.basis] = True
        self.at_upper[:] = False
        self.ub[self.art0 :] = np.inf
        self.t = self.a.copy()
        self.binv_b = self.b.copy()
        for i in range(m):
            if self.a[i, self.art0 + i] < 0:
                self.t[i] *= -1.0
                self.binv_b[i] *= -1.0
        self._since_refresh = 0

        c1 = np.zeros(total)
        c1[self.art0 :] = 1.0
        status = self.primal_run(c1, max_iter)
        phase1_obj = float(c1 @ self.solution())
        if status == "iteration_limit":
            return SimplexResult(status, None, np.inf, self.iterations)
        if phase1_obj > 1e-7:
            return SimplexResult("infeasible", None, np.inf, self.iterations)
        self.ub[self.art0 :] = 0.0
        basic_art = np.isin(self.basis, np.arange(self.art0, total))
        self.xb[basic_art & (np.abs(self.xb) < 1e-7)] = 0.0
        self._phase1_done = True

        status = self.primal_run(self.c_full, max_iter)
        if status != "optimal":
            return SimplexResult(status, None, np.inf, self.iterations)
        return self._finish()

    def _finish(self) -> SimplexResult:
        x_full = self.solution()
        if self.m and np.max(np.abs(self.a @ x_full - self.b)) > 1e-6:
            self.refactorize()
            x_full = self.solution()
            if np.max(np.abs(self.a @ x_full - self.b)) > 1e-6:
                # the basis cannot reproduce the original rows: numerically
                # unusable, never report it as an optimum
                return SimplexResult("numerical", None, np.inf, self.iterations, clean=False)
        x = np.clip(x_full[: self.n_struct], self.lb[: self.n_struct], self.ub[: self.n_struct])
        obj = float(self.c_full[: self.n_struct] @ x)
        return SimplexResult("optimal", x, obj, self.iterations)

    # -- dual method -----------------------------------------------------------
    def set_structural_bounds(self, lb: np.ndarray, ub: np.ndarray) -> None:
        self.lb[: self.n_struct] = lb
        self.ub[: self.n_struct] = ub

    def _anchor_nonbasics(self, red: np.ndarray) -> tuple[bool, bool]:
        """Re-side nonbasic variables so flags agree with reduced-cost signs.

        Bound changes can release variables that were fixed at the previous
        solve; pricing skips fixed columns, so their reduced costs carry no
        sign guarantee and the stored side may be dual-infeasible.  Flipping
        the side restores dual feasibility (the dual method then repairs the
        primal).  Returns (ok, flipped): ok is False when a released variable
        wants an infinite bound, i.e. re-siding alone cannot fix the basis.
        """
        movable = self.pricable & ~self.in_basis & (self.ub - self.lb > FEAS_TOL)
        wants_upper = movable & ~self.at_upper & (red < -OPT_TOL)
        wants_lower = movable & self.at_upper & (red > OPT_TOL)
        if np.any(wants_upper & ~np.isfinite(self.ub)):
            return False, False
        flipped = bool(wants_upper.any() or wants_lower.any())
        self.at_upper[wants_upper] = True
        self.at_upper[wants_lower] = False
        return True, flipped

    def dual_resolve(self, max_iter: int | None = None) -> SimplexResult:
        """Re-optimise after bound changes, starting from the current basis.

        Requires a completed primal_solve earlier (dual-feasible basis).  The
        at-upper flags are patched for bounds that became infinite-free or
        pinned, nonbasics released from fixed bounds are re-sided to match
        their reduced-cost signs, then dual pivots restore primal feasibility.
        """
        if not self._phase1_done:
            raise RuntimeError("dual_resolve needs a completed primal_solve first")
        budget = 2000 + 50 * (self.m + self.n) if max_iter is None else max_iter
        ceiling = self.iterations + budget
        if np.any(self.lb > self.ub + FEAS_TOL):
            return SimplexResult("infeasible", None, np.inf, self.iterations)
        # nonbasic at-upper flags must point at finite bounds
        bad = self.at_upper & ~np.isfinite(self.ub)
        bad[self.basis] = False
        self.at_upper[bad] = False
        red = self.reduced_costs(self.c_full)
        ok, _ = self._anchor_nonbasics(red)
        if not ok:
            return self.primal_solve(budget)
        self.recompute_xb()
        degen_run = 0
        pivots = 0
        anchor_rounds = 0
        while True:
            if self.iterations >= ceiling:
                return SimplexResult("iteration_limit", None, np.inf, self.iterations)
            if self._since_refresh >= REFRESH_EVERY:
                self.refactorize()
                red = self.reduced_costs(self.c_full)
            lb_b = self.lb[self.basis]
            ub_b = self.ub[self.basis]
            below = lb_b - self.xb
            above = self.xb - ub_b
            above[~np.isfinite(ub_b)] = -np.inf
            viol = np.maximum(below, above)
            worst = float(viol.max(initial=-np.inf))
            if worst <= 1e-8:
                # never trust a terminal verdict built on a drifted tableau:
                # rebuild exactly, then re-check feasibility and dual signs
                if self._since_refresh:
                    self.refactorize()
                    red = self.reduced_costs(self.c_full)
                    continue
                ok, flipped = self._anchor_nonbasics(red)
                if not ok:
                    return self.primal_solve(budget)
                if not flipped:
                    return self._finish()
                anchor_rounds += 1
                if anchor_rounds > 100:
                    return self.primal_solve(budget)
                self.recompute_xb()
                continue
            use_bland = degen_run >= DEGENERATE_STREAK
            if use_bland:
                rows = np.nonzero(viol > 1e-8)[0]
                row = int(rows[np.argmin(self.basis[rows])])
            else:
                row = int(np.argmax(viol))
            needs_increase = below[row] >= above[row]
            alpha = self.t[row].copy()
            cand = self._dual_candidates(alpha, needs_increase)
            if cand.size == 0:
                # a tight row that drifted below its bound has no candidates
                # either; certify infeasibility on an exact tableau only, and
                # only when nonbasic sides agree with the reduced-cost signs —
                # pivots driven by rotten signs can park the basis at a corner
                # that merely looks boxed in
                if self._since_refresh:
                    self.refactorize()
                    red = self.reduced_costs(self.c_full)
                    continue
                ok, flipped = self._anchor_nonbasics(red)
                if not ok:
                    return self.primal_solve(budget)
                if flipped:
                    anchor_rounds += 1
                    if anchor_rounds > 100:
                        return self.primal_solve(budget)
                    self.recompute_xb()
                    continue
                return SimplexResult(
                    "infeasible", None, np.inf, self.iterations,
                    clean=anchor_rounds == 0,
                )
            ratios = np.abs(red[cand]) / np.abs(alpha[cand])
            if use_bland:
                enter = int(cand[np.argmin(ratios + 1e9 * (ratios > ratios.min() + 1e-12))])
            else:
                best = ratios.min()
                near = cand[ratios <= best + 1e-12]
                enter = int(near[np.argmax(np.abs(alpha[near]))])
            target = lb_b[row] if needs_increase else ub_b[row]
            delta_e = (self.xb[row] - target) / alpha[enter]
            self.iterations += 1
            pivots += 1
            degen_run = degen_run + 1 if abs(delta_e) <= FEAS_TOL else 0
            leaving = self.basis[row]
            enter_value = self.nonbasic_value(enter) + delta_e
            self.xb -= delta_e * self.t[:, enter]
            self.xb[row] = enter_value
            self.basis[row] = enter
            self.in_basis[enter] = True
            self.in_basis[leaving] = False
            self.at_upper[leaving] = not needs_increase
            self._pivot(row, enter)
            red = red - red[enter] * self.t[row]
            red[self.basis] = 0.0

    def _dual_candidates(self, alpha: np.ndarray, needs_increase: bool) -> np.ndarray:
        movable = self.pricable & ~self.in_basis & (self.ub - self.lb > FEAS_TOL)
        if needs_increase:
            ok_lower = (~self.at_upper) & (alpha < -PIVOT_TOL)
            ok_upper = self.at_upper & (alpha > PIVOT_TOL)
        else:
            ok_lower = (~self.at_upper) & (alpha > PIVOT_TOL)
            ok_upper = self.at_upper & (alpha < -PIVOT_TOL)
        return np.nonzero(movable & (ok_lower | ok_upper))[0]


def solve_lp(
    c: np.ndarray,
    a_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    a_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
    lb: np.ndarray | None = None,
    ub: np.ndarray | None = None,
    max_iter: int | None = None,
) -> SimplexResult:
    """One-shot two-phase bounded simplex over the LpCore."""
    core = LpCore(c, a_ub, b_ub, a_eq, b_eq, lb, ub)
    return core.primal_solve(max_iter)
