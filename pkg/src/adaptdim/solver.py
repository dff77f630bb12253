from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.sparse import csr_matrix, diags

from .errors import InputError, NoCertificateError, NumericError
from .models import BudgetProbe, SolverStats
from .program import LdmProgram

logger = logging.getLogger(__name__)

# Origin of a form row: ("row", index into prog.rows) | ("box", z var) | ("budget", -1)
Origin = tuple[str, int]


@dataclass(frozen=True, eq=False)
class PackingCoveringForm:
    """P x <= p, C x >= c, x >= 0, all coefficients non-negative.

    Columns are the program's variables followed by one complement z̄ per z variable.
    """

    P: csr_matrix = field(repr=False)
    p: np.ndarray = field(repr=False)
    C: csr_matrix = field(repr=False)
    c: np.ndarray = field(repr=False)
    num_z: int
    num_vars: int
    beta: float
    budget: float | None = None
    packing_origin: tuple[Origin, ...] = field(default=(), repr=False)
    covering_origin: tuple[Origin, ...] = field(default=(), repr=False)

    @property
    def num_columns(self) -> int:
        return self.num_vars + self.num_z

    def bounded_columns(self) -> np.ndarray:
        """z and z̄ columns; the box rows keep them at most 1 (+beta)."""
        mask = np.ones(self.num_columns, dtype=bool)
        mask[self.num_z : self.num_vars] = False
        return mask

    def packing_ratio(self, x: np.ndarray) -> np.ndarray:
        act = self.P @ x
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(self.p > 0, act / np.where(self.p > 0, self.p, 1.0), 0.0)
        ratio[(self.p <= 0) & (act > 1e-12)] = np.inf
        return ratio

    def covering_slack(self, x: np.ndarray) -> np.ndarray:
        return self.C @ x - self.c


def to_packing_covering(
    prog: LdmProgram, beta: float, *, budget: float | None = None
) -> PackingCoveringForm:
    """Rewrite every row with non-negative coefficients.

    A negative coefficient a on z becomes |a| on z̄ with |a| added to the
    right-hand side (z = 1 - z̄); boxes become z + z̄ >= 1 and z + z̄ <= 1; an
    optional budget row bounds the objective.
    """
    if not 0.0 < beta <= 0.5:
        raise InputError("beta must lie in (0, 1/2]")
    nz, nv = prog.num_z, prog.num_vars
    pk: tuple[list[int], list[int], list[float]] = ([], [], [])
    cv: tuple[list[int], list[int], list[float]] = ([], [], [])
    p_rhs: list[float] = []
    c_rhs: list[float] = []
    p_origin: list[Origin] = []
    c_origin: list[Origin] = []

    def emit(
        target: tuple[list[int], list[int], list[float]],
        rhs_list: list[float],
        terms: list[tuple[int, float]],
        rhs: float,
    ) -> None:
        r = len(rhs_list)
        for col, a in terms:
            target[0].append(r)
            target[1].append(col)
            target[2].append(a)
        rhs_list.append(rhs)

    for idx, row in enumerate(prog.rows):
        rhs = row.rhs
        terms: list[tuple[int, float]] = []
        for v, a in row.coeffs:
            if a >= 0:
                terms.append((v, a))
            elif v < nz:
                terms.append((nv + v, -a))
                rhs -= a
            else:
                raise InputError(f"negative coefficient on unbounded variable {v}")
        if row.sense == "<=":
            emit(pk, p_rhs, terms, rhs)
            p_origin.append(("row", idx))
        else:
            emit(cv, c_rhs, terms, rhs)
            c_origin.append(("row", idx))

    for q in range(nz):
        emit(pk, p_rhs, [(q, 1.0), (nv + q, 1.0)], 1.0)
        p_origin.append(("box", q))
        emit(cv, c_rhs, [(q, 1.0), (nv + q, 1.0)], 1.0)
        c_origin.append(("box", q))

    if budget is not None:
        weights = [(v, float(a)) for v, a in enumerate(prog.objective) if a != 0]
        emit(pk, p_rhs, weights, float(budget))
        p_origin.append(("budget", -1))

    ncols = nv + nz

    def matrix(parts: tuple[list[int], list[int], list[float]], m: int) -> csr_matrix:
        return csr_matrix((parts[2], (parts[0], parts[1])), shape=(m, ncols))

    return PackingCoveringForm(
        P=matrix(pk, len(p_rhs)),
        p=np.asarray(p_rhs, dtype=float),
        C=matrix(cv, len(c_rhs)),
        c=np.asarray(c_rhs, dtype=float),
        num_z=nz,
        num_vars=nv,
        beta=beta,
        budget=budget,
        packing_origin=tuple(p_origin),
        covering_origin=tuple(c_origin),
    )


@dataclass(frozen=True, eq=False)
class MwuOutcome:
    status: Literal["feasible", "infeasible", "uncertified"]
    x: np.ndarray | None = field(default=None, repr=False)
    overshoot: float = 0.0
    iterations: int = 0
    epsilon: float = 0.0


def _row_scale(M: csr_matrix, rhs: np.ndarray, keep: np.ndarray) -> csr_matrix:
    scale = np.zeros_like(rhs)
    scale[keep] = 1.0 / rhs[keep]
    return (diags(scale) @ M).tocsr()[keep]


def _mwu_pass(
    form: PackingCoveringForm, epsilon: float, max_iterations: int
) -> tuple[Literal["feasible", "infeasible"], np.ndarray | None, int]:
    ncols = form.num_columns
    if np.any(form.p < 0):
        return "infeasible", None, 0

    # Zero right-hand sides pin every column they touch to 0.
    forced = np.zeros(ncols, dtype=bool)
    zero_rows = np.flatnonzero(form.p == 0)
    if zero_rows.size:
        forced[np.unique(form.P[zero_rows].indices)] = True

    # A packing row over bounded columns whose coefficients sum to at most its
    # rhs holds automatically once the boxes hold.
    bounded = form.bounded_columns()
    row_nnz_unbounded = np.asarray(
        (form.P[:, ~bounded] != 0).sum(axis=1) if (~bounded).any() else np.zeros(len(form.p))
    ).ravel()
    row_sum = np.asarray(form.P.sum(axis=1)).ravel()
    keep_p = (form.p > 0) & ~((row_nnz_unbounded == 0) & (row_sum <= form.p))
    keep_c = form.c > 0

    P = _row_scale(form.P, form.p, keep_p)
    C = _row_scale(form.C, form.c, keep_c)
    free = diags((~forced).astype(float))
    P = (P @ free).tocsr()
    C = (C @ free).tocsr()
    mp, mc = P.shape[0], C.shape[0]

    x = np.zeros(ncols)
    if mc == 0:
        return "feasible", x, 0
    if np.any(np.asarray(C.sum(axis=1)).ravel() <= 0):
        return "infeasible", None, 0

    PT, CT = P.T.tocsr(), C.T.tocsr()
    U = max(1.0, math.log(max(mp + mc, 2)) / epsilon**2)
    log_up, log_down = math.log1p(epsilon), math.log1p(-epsilon)
    px = np.zeros(mp)
    cx = np.zeros(mc)
    active = np.ones(mc, dtype=bool)

    for it in range(1, max_iterations + 1):
        if mp:
            lp = px * log_up
            wp = np.exp(lp - lp.max())
            num = PT @ wp / wp.sum()
        else:
            num = np.zeros(ncols)
        lc = np.where(active, cx * log_down, -np.inf)
        wc = np.exp(lc - lc[active].max())
        den = CT @ wc / wc.sum()
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
        lam[forced] = np.inf
        if lam.min() > 1.0 + 1e-12:
            logger.debug("infeasibility certificate after %d iterations", it)
            return "infeasible", None, it

        step = (lam <= 1.0 + epsilon).astype(float)
        dp = P @ step if mp else np.zeros(0)
        dc = C @ step
        grow = max(float(dp.max()) if mp else 0.0, float(dc[active].max()))
        alpha = 1.0 / grow
        x += alpha * step
        px += alpha * dp
        cx += alpha * dc
        active &= cx < U
        if not active.any():
            return "feasible", x / float(cx.min()), it

    raise NoCertificateError(
        f"solver iteration cap ({max_iterations}) reached without a certificate",
        iterations=max_iterations,
        budget=form.budget,
    )


def solve_mwu(
    form: PackingCoveringForm,
    *,
    max_iterations: int = 2_000_000,
    epsilon: float | None = None,
    retries: int = 2,
) -> MwuOutcome:
    """Mixed packing/covering feasibility by multiplicative weights.

    Returns x with C x >= c and P x <= (1 + beta) p, or a proof that P x <= p,
    C x >= c has no solution. Precision is tightened when the overshoot check
    fails.
    """
    beta = form.beta
    if not 0.0 < beta <= 0.5:
        raise InputError("beta must lie in (0, 1/2]")
    eps = epsilon if epsilon is not None else beta / 3.0
    total = 0
    for attempt in range(retries + 1):
        try:
            status, x, used = _mwu_pass(form, eps, max_iterations - total)
        except NoCertificateError as e:
            e.iterations = max_iterations
            raise
        total += used
        if status == "infeasible" or x is None:
            return MwuOutcome(status="infeasible", iterations=total, epsilon=eps)
        overshoot = float(form.packing_ratio(x).max()) if form.p.size else 0.0
        if overshoot <= 1.0 + beta + 1e-12:
            return MwuOutcome(
                status="feasible", x=x, overshoot=overshoot, iterations=total, epsilon=eps
            )
        logger.debug("overshoot %.6f > 1+beta on attempt %d; tightening", overshoot, attempt)
        eps /= 2.0
    raise NoCertificateError(
        f"packing overshoot stayed above 1+beta={1 + beta:g}",
        iterations=total,
        budget=form.budget,
    )


@dataclass(frozen=True, eq=False)
class FractionalSolution:
    z: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    objective: float
    overshoot: float
    beta: float
    budget: float | None
    iterations: int
    trace: tuple[BudgetProbe, ...] = ()
    form: PackingCoveringForm | None = field(default=None, repr=False)

    def values(self) -> np.ndarray:
        """z (clipped to [0, 1]) followed by c, indexed like the program's variables."""
        return np.concatenate([self.z, self.c])

    def stats(self) -> SolverStats:
        form = self.form
        return SolverStats(
            beta=self.beta,
            iterations=self.iterations,
            overshoot=self.overshoot,
            budget_trace=list(self.trace),
            rows_packing=form.P.shape[0] if form is not None else 0,
            rows_covering=form.C.shape[0] if form is not None else 0,
            variables=form.num_columns if form is not None else 0,
        )


def default_beta(t: int, n: int) -> float:
    denom = t * math.log2(max(n, 2))
    return 0.25 if denom <= 0 else min(0.25, 1.0 / denom)


def _raise(v: np.ndarray, terms: list[tuple[int, float]], need: float, cap: float) -> bool:
    moved = False
    for k, a in terms:
        if need <= 0.0:
            break
        step = min(cap - v[k], need / a)
        if step > 0.0:
            v[k] += step
            need -= a * step
            moved = True
    return moved


def reconcile(prog: LdmProgram, v: np.ndarray, *, max_sweeps: int = 200) -> int:
    """Restore the program's covering and nesting rows on `v = [z, c]` in place.

    The form only ties z to its complement through z + z̄ in [1, 1 + beta], so a
    row with a negative z term can fail in program space. Values only move up:
    cost variables absorb the deficit where a row has one, z variables (capped
    at 1) otherwise, and a nesting row z^i <= z^(i+1) raises its upper side.
    Returns the number of rows still violated.
    """
    nz = prog.num_z
    watched = [r for r in prog.rows if r.sense == ">=" or r.rhs == 0.0]
    if not watched:
        return 0
    ri = [k for k, r in enumerate(watched) for _ in r.coeffs]
    ci = [col for r in watched for col, _ in r.coeffs]
    data = [a for r in watched for _, a in r.coeffs]
    M = csr_matrix((data, (ri, ci)), shape=(len(watched), v.size))
    rhs = np.array([r.rhs for r in watched])
    sign = np.array([1.0 if r.sense == ">=" else -1.0 for r in watched])

    def violated() -> np.ndarray:
        return np.flatnonzero(sign * (M @ v - rhs) < -1e-12)

    for sweep in range(max_sweeps):
        bad = violated()
        if bad.size == 0:
            if sweep:
                logger.debug("program rows reconciled after %d sweeps", sweep)
            return 0
        moved = False
        for k in bad:
            row = watched[k]
            if row.sense == ">=":
                need = row.rhs - row.activity(v)
                if need <= 0.0:
                    continue
                costs = [(j, a) for j, a in row.coeffs if j >= nz and a > 0]
                if costs:
                    j, a = costs[0]
                    v[j] += need / a
                    moved = True
                else:
                    moved |= _raise(v, [(j, a) for j, a in row.coeffs if a > 0], need, 1.0)
            else:
                excess = row.activity(v)
                if excess > 0.0:
                    moved |= _raise(v, [(j, -a) for j, a in row.coeffs if a < 0], excess, 1.0)
        if not moved:
            break
    remaining = int(np.sum(sign * (M @ v - rhs) < -1e-9))
    if remaining:
        logger.warning("%d program rows still violated after reconciling", remaining)
    return remaining


def _solution(
    prog: LdmProgram, form: PackingCoveringForm, out: MwuOutcome, iterations: int, trace: list
) -> FractionalSolution:
    assert out.x is not None
    x = out.x
    v = x[: prog.num_vars].copy()
    v[: prog.num_z] = np.clip(v[: prog.num_z], 0.0, 1.0)
    reconcile(prog, v)
    z = v[: prog.num_z]
    c = v[prog.num_z :]
    return FractionalSolution(
        z=z,
        c=c,
        x=x,
        objective=float(prog.objective[prog.num_z :] @ c),
        overshoot=out.overshoot,
        beta=form.beta,
        budget=form.budget,
        iterations=iterations,
        trace=tuple(trace),
        form=form,
    )


def zero_cost_point(prog: LdmProgram, beta: float) -> FractionalSolution | None:
    """The all-ones selection with zero cost, if it satisfies every row exactly."""
    if np.any(prog.objective < 0):
        return None
    x = np.zeros(prog.num_vars)
    x[: prog.num_z] = 1.0
    if prog.violations(x):
        return None
    ratios = [row.activity(x) / row.rhs for row in prog.rows if row.sense == "<=" and row.rhs > 0]
    overshoot = max(ratios, default=0.0)
    logger.debug("z = 1, c = 0 is feasible; optimum is 0")
    return FractionalSolution(
        z=x[: prog.num_z].copy(),
        c=x[prog.num_z :].copy(),
        x=np.concatenate([x, np.zeros(prog.num_z)]),
        objective=0.0,
        overshoot=overshoot,
        beta=beta,
        budget=0.0,
        iterations=0,
        trace=(BudgetProbe(budget=0.0, feasible=True, iterations=0, overshoot=overshoot),),
    )


def minimize_cost(
    prog: LdmProgram,
    beta: float | None = None,
    *,
    max_iterations: int = 2_000_000,
    bisection_max_steps: int = 40,
    presolve: bool = True,
) -> FractionalSolution:
    """Smallest certified budget by bisection over feasibility probes.

    With `presolve`, the point z = 1, c = 0 is tried first: when it satisfies
    every row it is optimal, since the objective is non-negative. Budget 0 is
    probed next; otherwise the search runs on [0, sum of objective weights]
    (doubling the upper end if needed) until hi <= (1 + beta) * lo.
    """
    if beta is None:
        t = prog.instance.t if prog.instance is not None else 1
        beta = default_beta(t, prog.num_c)
    if presolve:
        exact = zero_cost_point(prog, beta)
        if exact is not None:
            return exact
    trace: list[BudgetProbe] = []
    iterations = 0

    def probe(budget: float) -> tuple[PackingCoveringForm, MwuOutcome]:
        nonlocal iterations
        form = to_packing_covering(prog, beta, budget=budget)
        remaining = max_iterations - iterations
        if remaining <= 0:
            raise NoCertificateError(
                f"solver iteration cap ({max_iterations}) reached",
                iterations=iterations,
                budget=budget,
            )
        try:
            out = solve_mwu(form, max_iterations=remaining)
        except NoCertificateError as e:
            # Budgets this close to the optimum count as not certified feasible.
            if e.iterations is None or e.iterations >= remaining:
                raise
            out = MwuOutcome(status="uncertified", iterations=e.iterations)
        iterations += out.iterations
        trace.append(
            BudgetProbe(
                budget=budget,
                feasible=out.status == "feasible",
                iterations=out.iterations,
                overshoot=out.overshoot if out.status == "feasible" else None,
            )
        )
        logger.debug("budget %.6g: %s (%d it)", budget, out.status, out.iterations)
        return form, out

    form, out = probe(0.0)
    if out.status == "feasible":
        return _solution(prog, form, out, iterations, trace)

    lo = 0.0
    hi = max(float(prog.objective.sum()), 1e-12)
    best: tuple[PackingCoveringForm, MwuOutcome] | None = None
    for _ in range(64):
        form, out = probe(hi)
        if out.status == "feasible":
            best = (form, out)
            break
        lo, hi = hi, 2.0 * hi
    if best is None:
        raise NumericError("program is infeasible at every budget tried")

    for _ in range(bisection_max_steps):
        if hi <= (1.0 + beta) * lo:
            break
        mid = 0.5 * (lo + hi)
        form, out = probe(mid)
        if out.status == "feasible":
            hi, best = mid, (form, out)
        else:
            lo = mid
    return _solution(prog, best[0], best[1], iterations, trace)
