"""Exact, exponential-time references for small instances.

Everything here refuses inputs above a fixed size with ScaleExceededError
("oracle scale exceeded") instead of running for hours.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from operator import or_

import numpy as np

from .config import Settings
from .errors import ScaleExceededError
from .hierarchy import nearest_in_level
from .metric import MetricSample, sub_sample
from .models import OracleSummary
from .pipeline import LdmRun
from .program import LdmProgram, Row
from .rounding import mapping_cost
from .simplex import PivotRule, SimplexResult, solve_lp
from .utils.rng import STREAM_SIGMA, generator

logger = logging.getLogger(__name__)

DDIM_MAX_N = 12
LDM_MAX_N = 10
LIPSCHITZ_MC_MAX_N = 24


def _scale_guard(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise ScaleExceededError(
            f"oracle scale exceeded: {what} needs n <= {limit}, got {n}", limit=limit
        )


def _bits(mask: np.ndarray) -> int:
    return sum(1 << int(i) for i in np.flatnonzero(mask))


def _min_cover(ball: int, masks: list[int], limit: int) -> int:
    """Fewest masks whose union contains `ball`, or limit + 1 if more than `limit` are needed."""
    parts = {m & ball for m in masks} - {0}
    # Drop parts strictly contained in another part.
    useful = sorted(
        (m for m in parts if not any(o != m and (o | m) == o for o in parts)),
        key=lambda m: (-bin(m).count("1"), m),
    )
    for size in range(1, limit + 1):
        for combo in combinations(useful, size):
            if reduce(or_, combo) == ball:
                return size
    return limit + 1


@dataclass(frozen=True)
class DoublingConstant:
    value: float
    constant: int
    center: int = 0
    radius: float = 0.0


def _balls(sample: MetricSample):
    d = sample.distances
    for x in range(sample.n):
        for r in np.unique(d[x][d[x] > 0]):
            ball = _bits(d[x] <= r)
            yield x, float(r), ball, [_bits(d[y] <= r / 2.0) for y in range(sample.n)]


def exact_ddim(sample: MetricSample, *, max_n: int = DDIM_MAX_N) -> DoublingConstant:
    """log2 of the doubling constant: over every ball B(x, r), r a distance from
    x, the fewest r/2-balls centered at sample points that cover it."""
    _scale_guard(sample.n, max_n, "exact_ddim")
    best = DoublingConstant(value=0.0, constant=1)
    for x, r, ball, masks in _balls(sample):
        size = bin(ball).count("1")
        if size <= best.constant:
            continue
        need = _min_cover(ball, masks, size)
        if need > best.constant:
            best = DoublingConstant(value=math.log2(need), constant=need, center=x, radius=r)
    return best


def ddim_at_most(sample: MetricSample, D: float) -> bool:
    """Whether every ball is covered by at most 2^D half-radius balls."""
    cap = math.floor(2.0**D + 1e-12)
    for _, _, ball, masks in _balls(sample):
        if bin(ball).count("1") <= cap:
            continue
        if _min_cover(ball, masks, cap) > cap:
            return False
    return True


@dataclass(frozen=True)
class LdmOptimum:
    T: tuple[int, ...]
    cost: float


def brute_force_ldm(
    sample: MetricSample, D: float, *, max_n: int = LDM_MAX_N
) -> LdmOptimum:
    """Cheapest subset with exact ddim <= D; ties go to the lexicographically smallest subset.

    Cost is in the units of `sample`.
    """
    _scale_guard(sample.n, max_n, "brute_force_ldm")
    n = sample.n
    subsets = [
        tuple(i for i in range(n) if mask >> i & 1) for mask in range(1, 1 << n)
    ]
    ranked = sorted((mapping_cost(sample, T), T) for T in subsets)
    for cost, T in ranked:
        if ddim_at_most(sub_sample(sample, T), D):
            return LdmOptimum(T=T, cost=cost)
    raise AssertionError("a singleton always has ddim 0")


def _assignment(prog: LdmProgram, selected: set[tuple[int, int]]) -> np.ndarray:
    """z from the selection and the smallest c that rows (7) and (8) allow."""
    inst = prog.instance
    assert inst is not None
    t = inst.t
    x = np.zeros(prog.num_vars)
    for key in selected:
        x[prog.z_index[key]] = 1.0
    for j in range(prog.num_c):
        zt = x[prog.z_var(t, j)]
        need = inst.delta * (1.0 - zt)
        for i in range(t + 1):
            covered = x[list(prog.neighborhood(i, j).F)].sum()
            need = max(need, 2.0**-i * (1.0 - zt - covered))
        x[prog.c_var(j)] = max(0.0, need)
    return x


def feasibility_witness(prog: LdmProgram, T: tuple[int, ...] | list[int]) -> np.ndarray:
    """Integral assignment built from a sub-hierarchy around T.

    Every point of T pulls its nearest level-i point into level i and all
    higher levels; rows (3) and (9) that still fail get their level center
    added until none do. The resulting cost is at most the mapping cost of T.
    """
    inst = prog.instance
    assert inst is not None and prog.centers is not None
    h, t = inst.hierarchy, inst.t
    selected: set[tuple[int, int]] = set()
    for w in T:
        for i in range(t + 1):
            u = nearest_in_level(h, int(w), i)
            selected.update((k, u) for k in range(i, t + 1))

    while True:
        x = _assignment(prog, selected)
        bad = [row for row in prog.rows if row.family in ("3", "9") and row.slack(x) < -1e-9]
        if not bad:
            return x
        for row in bad:
            center = int(prog.centers[row.i, row.j])
            selected.update((k, center) for k in range(row.i, t + 1))


def check_assignment(prog: LdmProgram, x: np.ndarray, tol: float = 1e-9) -> list[Row]:
    """Rows violated by x (box bounds included as pseudo-rows of family 'box')."""
    bad = prog.violations(x, tol)
    z = x[: prog.num_z]
    for v in np.flatnonzero((z < -tol) | (z > 1.0 + tol)):
        bad.append(Row(family="box", sense="<=", coeffs=((int(v), 1.0),), rhs=1.0))
    for v in np.flatnonzero(x[prog.num_z :] < -tol):
        bad.append(Row(family="box", sense=">=", coeffs=((prog.num_z + int(v), 1.0),), rhs=0.0))
    return bad


def program_matrices(
    prog: LdmProgram,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    nv = prog.num_vars
    le = [r for r in prog.rows if r.sense == "<="]
    ge = [r for r in prog.rows if r.sense == ">="]

    def dense(rows: list[Row]) -> np.ndarray:
        M = np.zeros((len(rows), nv))
        for k, row in enumerate(rows):
            for v, a in row.coeffs:
                M[k, v] = a
        return M

    upper = np.full(nv, np.inf)
    upper[: prog.num_z] = 1.0
    return (
        dense(le),
        np.array([r.rhs for r in le]),
        dense(ge),
        np.array([r.rhs for r in ge]),
        upper,
    )


def reference_lp(
    prog: LdmProgram, *, rule: PivotRule = "bland", max_variables: int = 200
) -> SimplexResult:
    """Exact optimum of the relaxed program (z in [0, 1], c >= 0)."""
    if prog.num_vars > max_variables:
        raise ScaleExceededError(
            f"oracle scale exceeded: {prog.num_vars} variables > {max_variables}",
            limit=max_variables,
        )
    A_le, b_le, A_ge, b_ge, upper = program_matrices(prog)
    res = solve_lp(prog.objective, A_le, b_le, A_ge, b_ge, upper, rule=rule)
    logger.debug("reference LP: %s %.9g after %d pivots", res.status, res.objective, res.pivots)
    return res


@dataclass(frozen=True, eq=False)
class MonteCarlo:
    mean: float
    stderr: float
    draws: int
    values: np.ndarray = field(repr=False)


def _summarize(values: np.ndarray) -> MonteCarlo:
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return MonteCarlo(mean=float(values.mean()), stderr=stderr, draws=values.size, values=values)


def _sigmas(n: int, draws: int, seed: int) -> np.ndarray:
    rng = generator(seed, STREAM_SIGMA)
    return rng.integers(0, 2, size=(draws, n)) * 2 - 1


def mc_rademacher_linear(X: np.ndarray, *, draws: int = 200, seed: int = 0) -> MonteCarlo:
    """E_sigma sup_{||w||<=1} (1/n) sum sigma_i <w, x_i> = E ||sum sigma_i x_i|| / n."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    values = np.linalg.norm(_sigmas(n, draws, seed) @ X, axis=1) / n
    return _summarize(values)


def mc_rademacher_lipschitz(
    sample: MetricSample,
    L: float,
    *,
    draws: int = 50,
    seed: int = 0,
    max_n: int = LIPSCHITZ_MC_MAX_N,
) -> MonteCarlo:
    """Empirical Rademacher complexity of L-Lipschitz [-1, 1]-valued functions.

    Each draw solves an LP over g = f + 1 in [0, 2] with g_i - g_j <= L*rho_ij;
    sigma and -sigma share a value.
    """
    _scale_guard(sample.n, max_n, "mc_rademacher_lipschitz")
    n = sample.n
    d = sample.distances
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    A = np.zeros((len(pairs), n))
    for r, (i, j) in enumerate(pairs):
        A[r, i], A[r, j] = 1.0, -1.0
    b = np.array([L * d[i, j] for i, j in pairs])
    upper = np.full(n, 2.0)
    empty = np.zeros((0, n))

    cache: dict[tuple[int, ...], float] = {}
    values = np.empty(draws)
    for k, sigma in enumerate(_sigmas(n, draws, seed)):
        key = tuple(int(s) for s in (sigma if sigma[0] > 0 else -sigma))
        if key not in cache:
            s = np.asarray(key, dtype=float)
            res = solve_lp(-s, A, b, empty, np.zeros(0), upper)
            cache[key] = (-res.objective - s.sum()) / n
        values[k] = cache[key]
    return _summarize(values)


def run_oracle(run: LdmRun, settings: Settings | None = None) -> OracleSummary:
    """Exact references for a finished run on a normalized sample; costs in input units."""
    settings = settings or Settings()
    sample = run.instance.sample
    scale = sample.scale_factor
    ddim = exact_ddim(sample)
    best = brute_force_ldm(sample, run.instance.D)
    lp = reference_lp(run.program, max_variables=settings.reference_max_variables)
    optimum = best.cost * scale
    if optimum > 0:
        ratio = run.rounded.mapping_cost / optimum
    else:
        ratio = 1.0 if run.rounded.mapping_cost == 0 else None
    return OracleSummary(
        exact_ddim=ddim.value,
        T_star=[sample.ids[p] for p in best.T],
        ldm_optimum=optimum,
        lp_optimum=lp.objective * scale if lp.status == "optimal" else None,
        cost_ratio=ratio,
    )
