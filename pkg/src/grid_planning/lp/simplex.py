"""
Bounded-variable primal simplex (two-phase, dense revised form).

Rows are equilibrated by max-abs scaling and completed with one slack per
inequality; artificials are added only where the slack basis cannot absorb
the residual of the starting point. Pricing is Dantzig with lowest-index
ties; while pivots are degenerate Bland's rule takes over. The basis
inverse is carried in product form and refactored every
``refactor_every`` pivots.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from grid_planning.lp.model import (
    LinearProgram,
    Sense,
    SolverSettings,
    SolveResult,
    SolveStatus,
)

log = logging.getLogger(__name__)

_BASIC, _LOWER, _UPPER, _FREE = 0, 1, 2, 3
_DEGENERATE_STEP = 1e-12


def solve_lp(lp: LinearProgram, settings: SolverSettings = SolverSettings()) -> SolveResult:
    if settings.backend == "highs":
        from grid_planning.lp.highs import solve_highs

        return solve_highs(lp, frozenset(), settings)
    return _BoundedSimplex(lp, settings).solve()


class _BoundedSimplex:
    def __init__(self, lp: LinearProgram, settings: SolverSettings) -> None:
        self.lp = lp
        self.settings = settings
        self.iterations = 0

        m, n = lp.n_rows, lp.n_vars
        a = lp.a.toarray()
        b = lp.b.copy()
        scale = np.abs(a).max(axis=1) if m else np.zeros(0)
        scale[scale == 0.0] = 1.0
        a /= scale[:, None]
        b /= scale

        # starting point: every structural variable at a finite bound (or 0 if free)
        x0 = np.where(np.isfinite(lp.lb), lp.lb, np.where(np.isfinite(lp.ub), lp.ub, 0.0))
        resid = b - a @ x0

        slack_rows = [i for i, s in enumerate(lp.senses) if s is not Sense.EQ]
        cols = [a]
        lb = [lp.lb]
        ub = [lp.ub]
        basis = np.full(m, -1, dtype=int)
        values = [x0]

        n_slack = len(slack_rows)
        s_mat = np.zeros((m, n_slack))
        s_lb = np.zeros(n_slack)
        s_ub = np.zeros(n_slack)
        s_val = np.zeros(n_slack)
        need_art = []
        tol = settings.feasibility_tol
        for k, i in enumerate(slack_rows):
            s_mat[i, k] = 1.0
            if lp.senses[i] is Sense.LE:
                s_ub[k] = np.inf
                covered = resid[i] >= -tol
            else:
                s_lb[k] = -np.inf
                covered = resid[i] <= tol
            if covered:
                basis[i] = n + k
                s_val[k] = resid[i]
            else:
                need_art.append(i)
        need_art.extend(i for i, s in enumerate(lp.senses) if s is Sense.EQ)
        need_art.sort()
        cols.append(s_mat)
        lb.append(s_lb)
        ub.append(s_ub)
        values.append(s_val)

        n_art = len(need_art)
        art_mat = np.zeros((m, n_art))
        art_val = np.zeros(n_art)
        for k, i in enumerate(need_art):
            sign = 1.0 if resid[i] >= 0 else -1.0
            art_mat[i, k] = sign
            art_val[k] = abs(resid[i])
            basis[i] = n + n_slack + k
        cols.append(art_mat)
        lb.append(np.zeros(n_art))
        ub.append(np.full(n_art, np.inf))
        values.append(art_val)

        self.n = n
        self.n_art = n_art
        self.art_start = n + n_slack
        self.m_rows = m
        self.a = np.hstack(cols)
        self.b = b
        self.lb = np.concatenate(lb)
        self.ub = np.concatenate(ub)
        self.x = np.concatenate(values)
        self.basis = basis
        self.state = np.empty(self.a.shape[1], dtype=np.int8)
        for j in range(self.a.shape[1]):
            if np.isfinite(self.lb[j]) and self.x[j] == self.lb[j]:
                self.state[j] = _LOWER
            elif np.isfinite(self.ub[j]) and self.x[j] == self.ub[j]:
                self.state[j] = _UPPER
            else:
                self.state[j] = _FREE
        self.state[basis] = _BASIC
        self.b_inv = np.diag(1.0 / self.a[np.arange(m), basis]) if m else np.zeros((0, 0))
        self._since_refactor = 0
        self._bland = False

    # ---------------- phases ----------------

    def solve(self) -> SolveResult:
        if self.n_art:
            cost = np.zeros(self.a.shape[1])
            cost[self.art_start :] = 1.0
            status = self._iterate(cost)
            if status is SolveStatus.ITERATION_LIMIT:
                return self._result(status)
            infeas = float(self.x[self.art_start :].sum())
            if infeas > self.settings.feasibility_tol * max(1.0, float(np.abs(self.b).max())):
                log.debug("[simplex] infeasible phase1=%.3e iters=%d", infeas, self.iterations)
                return SolveResult(SolveStatus.INFEASIBLE, None, np.inf, iterations=self.iterations)
            # artificials are pinned at zero from here on
            self.ub[self.art_start :] = 0.0
            self.x[self.art_start :] = np.where(
                self.state[self.art_start :] == _BASIC, self.x[self.art_start :], 0.0
            )
            nonbasic = self.state[self.art_start :] != _BASIC
            self.state[self.art_start :][nonbasic] = _LOWER

        cost = np.zeros(self.a.shape[1])
        cost[: self.n] = self.lp.c
        status = self._iterate(cost)
        return self._result(status)

    def _result(self, status: SolveStatus) -> SolveResult:
        x = self.x[: self.n].copy()
        # snap values that drifted onto a bound
        lb, ub = self.lp.lb, self.lp.ub
        tol = self.settings.feasibility_tol
        x = np.where(np.abs(x - lb) <= tol, lb, x)
        x = np.where(np.abs(x - ub) <= tol, ub, x)
        if status is SolveStatus.UNBOUNDED:
            return SolveResult(status, x, -np.inf, iterations=self.iterations)
        return SolveResult(status, x, float(self.lp.c @ x), iterations=self.iterations)

    # ---------------- pivoting ----------------

    def _iterate(self, cost: np.ndarray) -> SolveStatus:
        s = self.settings
        checked_after_refactor = False
        while True:
            if self.iterations >= s.max_iterations:
                log.warning("[simplex] iteration limit reached iters=%d", self.iterations)
                return SolveStatus.ITERATION_LIMIT
            if self._since_refactor >= s.refactor_every:
                self._refactor()

            j, direction = self._price(cost)
            if j is None:
                if self._since_refactor and not checked_after_refactor:
                    self._refactor()
                    checked_after_refactor = True
                    continue
                return SolveStatus.OPTIMAL
            checked_after_refactor = False

            alpha = self.b_inv @ self.a[:, j]
            step = self._ratio_test(j, direction, alpha)
            if step is None:
                return SolveStatus.UNBOUNDED
            theta, row = step
            self._pivot(j, direction, alpha, theta, row)
            self.iterations += 1
            self._bland = theta <= _DEGENERATE_STEP

    def _price(self, cost: np.ndarray) -> tuple[Optional[int], int]:
        tol = self.settings.optimality_tol
        y = cost[self.basis] @ self.b_inv
        d = cost - y @ self.a
        st = self.state
        movable = self.ub > self.lb
        inc = ((st == _LOWER) | (st == _FREE)) & (d < -tol) & movable
        dec = ((st == _UPPER) | (st == _FREE)) & (d > tol) & movable
        cand = inc | dec
        if not cand.any():
            return None, 0
        if self._bland:
            j = int(np.argmax(cand))
        else:
            j = int(np.argmax(np.where(cand, np.abs(d), -1.0)))
        return j, (1 if inc[j] else -1)

    def _ratio_test(
        self, j: int, direction: int, alpha: np.ndarray
    ) -> Optional[tuple[float, int]]:
        ptol = self.settings.pivot_tol
        xb = self.x[self.basis]
        lb_b = self.lb[self.basis]
        ub_b = self.ub[self.basis]
        delta = -direction * alpha

        theta_rows = np.full(self.m_rows, np.inf)
        down = (delta < -ptol) & np.isfinite(lb_b)
        up = (delta > ptol) & np.isfinite(ub_b)
        theta_rows[down] = (xb[down] - lb_b[down]) / -delta[down]
        theta_rows[up] = (ub_b[up] - xb[up]) / delta[up]
        np.maximum(theta_rows, 0.0, out=theta_rows)

        flip = self.ub[j] - self.lb[j]
        best = float(theta_rows.min()) if self.m_rows else np.inf
        if np.isfinite(flip) and flip <= best:
            return float(flip), -1
        if not np.isfinite(best):
            return None
        ties = np.flatnonzero(theta_rows <= best + 1e-12 * max(1.0, best))
        if self._bland:
            row = int(ties[np.argmin(self.basis[ties])])
        else:
            row = int(ties[np.argmax(np.abs(alpha[ties]))])
        return best, row

    def _pivot(self, j: int, direction: int, alpha: np.ndarray, theta: float, row: int) -> None:
        delta = -direction * alpha
        self.x[self.basis] += delta * theta
        if row < 0:
            # bound flip, basis unchanged
            if direction > 0:
                self.x[j] = self.ub[j]
                self.state[j] = _UPPER
            else:
                self.x[j] = self.lb[j]
                self.state[j] = _LOWER
            return

        self.x[j] += direction * theta
        leaving = self.basis[row]
        if delta[row] < 0:
            self.x[leaving] = self.lb[leaving]
            self.state[leaving] = _LOWER
        else:
            self.x[leaving] = self.ub[leaving]
            self.state[leaving] = _UPPER
        self.basis[row] = j
        self.state[j] = _BASIC

        # eta update of the basis inverse
        pivot = alpha[row]
        eta = -alpha / pivot
        eta[row] = 1.0 / pivot
        pivot_row = self.b_inv[row].copy()
        self.b_inv += np.outer(eta, pivot_row)
        self.b_inv[row] = eta[row] * pivot_row
        self._since_refactor += 1

    def _refactor(self) -> None:
        try:
            b_inv = np.linalg.inv(self.a[:, self.basis])
        except np.linalg.LinAlgError:
            log.debug("[simplex] singular basis at refactor, keeping product form")
            self._since_refactor = 0
            return
        self.b_inv = b_inv
        nonbasic = self.state != _BASIC
        rhs = self.b - self.a[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = b_inv @ rhs
        self._since_refactor = 0
