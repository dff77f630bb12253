from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import NumericError
from .utils.rng import STREAM_SIMPLEX, generator

logger = logging.getLogger(__name__)

PivotRule = Literal["bland", "dantzig"]
Status = Literal["optimal", "infeasible", "unbounded"]

OPT_TOL = 1e-9
FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
PERTURBATION = 1e-7
REFACTOR_EVERY = 40


@dataclass(frozen=True, eq=False)
class SimplexResult:
    status: Status
    objective: float
    x: np.ndarray = field(repr=False)
    pivots: int


class SimplexTableau:
    """Dense tableau over fixed data `A x = b`: `T[:, :-1]` holds B^-1 A, `T[:, -1]` B^-1 b.

    The tableau is recomputed from `A` and `b` every few pivots so rounding error
    does not accumulate across long degenerate runs.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int], rule: PivotRule):
        self.A = np.array(A, dtype=float)
        self.b = np.array(b, dtype=float)
        self.basis = list(basis)
        self.rule = rule
        self.pivots = 0
        self.stale = 0
        self.refactor()

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def refactor(self) -> None:
        if self.m == 0:
            self.T = np.zeros((0, self.A.shape[1] + 1))
        else:
            try:
                self.T = np.linalg.solve(
                    self.A[:, self.basis], np.hstack([self.A, self.b[:, None]])
                )
            except np.linalg.LinAlgError as exc:
                raise NumericError("singular basis during refactorization") from exc
        self.stale = 0

    def set_rhs(self, b: np.ndarray) -> None:
        self.b = np.array(b, dtype=float)
        self.refactor()

    def keep_columns(self, ncols: int) -> None:
        if any(j >= ncols for j in self.basis):
            raise NumericError("dropped column is still basic")
        self.A = self.A[:, :ncols]
        self.T = np.hstack([self.T[:, :ncols], self.T[:, -1:]])

    def pivot(self, i: int, j: int) -> None:
        T = self.T
        T[i] /= T[i, j]
        col = T[:, j].copy()
        col[i] = 0.0
        T -= np.outer(col, T[i])
        self.basis[i] = j
        self.pivots += 1
        self.stale += 1
        if self.stale >= REFACTOR_EVERY:
            self.refactor()

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        r = cost - cost[self.basis] @ self.T[:, :-1]
        r[self.basis] = 0.0
        return r

    def entering(self, r: np.ndarray) -> int | None:
        candidates = np.flatnonzero(r < -OPT_TOL)
        if candidates.size == 0:
            return None
        if self.rule == "bland":
            return int(candidates[0])
        return int(candidates[np.argmin(r[candidates])])

    def leaving(self, j: int) -> int | None:
        """Two-pass ratio test: bound the step with relaxed rows, then take the largest pivot."""
        col = self.T[:, j]
        tol = max(PIVOT_TOL, 1e-9 * float(np.abs(col).max(initial=0.0)))
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return None
        rhs = self.T[rows, -1]
        bound = ((rhs + FEAS_TOL) / col[rows]).min()
        eligible = rows[rhs / col[rows] <= bound]
        best = col[eligible].max()
        ties = eligible[col[eligible] >= best * (1.0 - 1e-9)]
        return int(min(ties, key=lambda i: self.basis[i]))

    def _guard(self, max_pivots: int) -> None:
        if self.pivots >= max_pivots:
            raise NumericError(f"cycling guard triggered after {self.pivots} pivots")

    def optimize(self, cost: np.ndarray, max_pivots: int) -> Status:
        while True:
            j = self.entering(self.reduced_costs(cost))
            i = None if j is None else self.leaving(j)
            if j is None or i is None:
                if self.stale:
                    self.refactor()
                    continue
                return "optimal" if j is None else "unbounded"
            self._guard(max_pivots)
            self.pivot(i, j)

    def restore_feasibility(self, cost: np.ndarray, max_pivots: int) -> Status:
        """Dual simplex from a dual-feasible basis; reports infeasible on a Farkas row."""
        while True:
            rhs = self.T[:, -1]
            if self.m == 0 or rhs.min() >= -FEAS_TOL:
                return "optimal"
            r = int(np.argmin(rhs))
            row = self.T[r, :-1]
            candidates = np.flatnonzero(row < -PIVOT_TOL)
            candidates = candidates[~np.isin(candidates, self.basis)]
            if candidates.size == 0:
                if self.stale:
                    self.refactor()
                    continue
                return "infeasible"
            d = np.maximum(self.reduced_costs(cost)[candidates], 0.0)
            ratios = d / -row[candidates]
            best = ratios.min()
            ties = candidates[ratios <= best + OPT_TOL]
            j = int(ties[np.argmin(row[ties])])
            self._guard(max_pivots)
            self.pivot(r, j)

    def solution(self, size: int) -> np.ndarray:
        x = np.zeros(self.T.shape[1] - 1)
        x[self.basis] = np.maximum(self.T[:, -1], 0.0)
        return x[:size]


def _activity_range(A: np.ndarray, upper: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row activity bounds over the box 0 <= x <= upper."""
    unbounded = ~np.isfinite(upper)
    u = np.where(unbounded, 0.0, upper)
    pos = np.maximum(A, 0.0)
    neg = np.minimum(A, 0.0)
    hi = pos @ u
    lo = neg @ u
    hi[(pos[:, unbounded] > 0).any(axis=1)] = np.inf
    lo[(neg[:, unbounded] < 0).any(axis=1)] = -np.inf
    return lo, hi


def solve_lp(
    cost: np.ndarray,
    A_le: np.ndarray,
    b_le: np.ndarray,
    A_ge: np.ndarray,
    b_ge: np.ndarray,
    upper: np.ndarray | None = None,
    *,
    rule: PivotRule = "bland",
    max_pivots: int = 50_000,
    seed: int = 0,
) -> SimplexResult:
    """minimize cost @ x  s.t.  A_le x <= b_le, A_ge x >= b_ge, 0 <= x <= upper.

    Rows implied by the box are dropped and the rest scaled to unit max norm.
    Both phases run on right-hand sides relaxed by a small seeded amount; the
    exact right-hand side is then restored and repaired with dual simplex pivots.
    """
    cost = np.asarray(cost, dtype=float)
    nv = cost.size
    A_le = np.asarray(A_le, dtype=float).reshape(-1, nv)
    A_ge = np.asarray(A_ge, dtype=float).reshape(-1, nv)
    b_le = np.asarray(b_le, dtype=float).ravel()
    b_ge = np.asarray(b_ge, dtype=float).ravel()
    box = np.full(nv, np.inf) if upper is None else np.asarray(upper, dtype=float)

    # Every row as sign * (a x) <= sign * b, then presolved against the box.
    A = np.vstack([A_le, -A_ge])
    b = np.concatenate([b_le, -b_ge])
    lo, hi = _activity_range(A, box)
    if np.any(lo > b + FEAS_TOL * (1.0 + np.abs(b))):
        logger.debug("presolve: a row cannot be met inside the box")
        return SimplexResult("infeasible", float("nan"), np.zeros(nv), 0)
    keep = hi > b
    logger.debug("presolve dropped %d of %d rows", int((~keep).sum()), keep.size)
    A, b = A[keep], b[keep]
    finite = np.flatnonzero(np.isfinite(box))
    A = np.vstack([A, np.eye(nv)[finite]])
    b = np.concatenate([b, box[finite]])

    norms = np.abs(A).max(axis=1, initial=0.0)
    norms[norms == 0.0] = 1.0
    A /= norms[:, None]
    b /= norms
    m = b.size

    # Relaxing every <= row keeps any feasible point feasible.
    rng = generator(seed, STREAM_SIMPLEX)
    relaxed = b + PERTURBATION * (1.0 + np.abs(b)) * rng.uniform(0.5, 1.0, size=m)
    slack_sign = np.ones(m)
    flip = relaxed < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    relaxed[flip] *= -1.0
    slack_sign[flip] = -1.0

    needs_art = np.flatnonzero(slack_sign < 0)
    art = np.zeros((m, needs_art.size))
    art[needs_art, np.arange(needs_art.size)] = 1.0
    full = np.hstack([A, np.diag(slack_sign).reshape(m, m), art])
    ncols = full.shape[1]
    basis = [nv + i for i in range(m)]
    for a, i in enumerate(needs_art):
        basis[i] = nv + m + a

    tab = SimplexTableau(full, relaxed, basis, rule)

    if needs_art.size:
        phase1 = np.zeros(ncols)
        phase1[nv + m :] = 1.0
        tab.optimize(phase1, max_pivots)
        infeas = float(phase1[tab.basis] @ tab.T[:, -1])
        if infeas > 1e-8 * max(1.0, float(np.abs(relaxed).max(initial=0.0))):
            logger.debug("phase 1 infeasibility %.3g after %d pivots", infeas, tab.pivots)
            return SimplexResult("infeasible", float("nan"), np.zeros(nv), tab.pivots)
        # Slack columns give [A | S] full row rank, so every artificial can leave.
        for i in range(tab.m):
            if tab.basis[i] >= nv + m:
                row = np.abs(tab.T[i, : nv + m])
                k = int(np.argmax(row))
                if row[k] <= PIVOT_TOL:
                    raise NumericError("artificial variable stuck in the basis")
                tab.pivot(i, k)
        tab.keep_columns(nv + m)
        ncols = nv + m

    phase2 = np.zeros(ncols)
    phase2[:nv] = cost
    if tab.optimize(phase2, max_pivots) == "unbounded":
        return SimplexResult("unbounded", float("-inf"), tab.solution(nv), tab.pivots)

    tab.set_rhs(b)
    if tab.restore_feasibility(phase2, max_pivots) == "infeasible":
        logger.debug("exact right-hand side infeasible after %d pivots", tab.pivots)
        return SimplexResult("infeasible", float("nan"), np.zeros(nv), tab.pivots)
    if tab.optimize(phase2, max_pivots) == "unbounded":
        return SimplexResult("unbounded", float("-inf"), tab.solution(nv), tab.pivots)
    x = tab.solution(nv)
    logger.debug("simplex optimal after %d pivots", tab.pivots)
    return SimplexResult("optimal", float(cost @ x), x, tab.pivots)
