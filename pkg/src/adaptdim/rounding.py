from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .hierarchy import NetHierarchy
from .metric import DdimEstimate, MetricSample, estimate_ddim, sub_sample
from .models import AuditReport, AuditViolation, ReduceResult
from .program import LdmInstance, LdmProgram
from .solver import FractionalSolution

logger = logging.getLogger(__name__)

ROUND_UP = 0.5
SUPPORT = 0.25


@dataclass(frozen=True, eq=False)
class RoundedSolution:
    """Integral selection S'' produced from a fractional solution.

    `selected` holds (level, point) pairs; `T` is S''_t as sorted point indices.
    Costs are in the units of the un-normalized sample.
    """

    sample: MetricSample = field(repr=False)
    selected: frozenset[tuple[int, int]] = field(repr=False)
    levels: tuple[tuple[int, ...], ...]
    hierarchy_dd: NetHierarchy = field(repr=False)
    mapping_cost: float
    ddim: DdimEstimate
    lp_objective: float

    @property
    def T(self) -> tuple[int, ...]:
        return self.levels[-1]

    def assignment(self) -> np.ndarray:
        """Nearest point of T for every sample point (ties to the lowest index)."""
        T = np.asarray(self.T, dtype=np.int64)
        return T[np.argmin(self.sample.distances[:, T], axis=1)]

    def to_result(self, *, D: float, beta: float) -> ReduceResult:
        ids = self.sample.ids
        return ReduceResult(
            T=[ids[p] for p in self.T],
            mapping_cost=self.mapping_cost,
            ddim_estimate=self.ddim.value,
            lp_objective=self.lp_objective,
            levels=[[ids[p] for p in level] for level in self.levels],
            D=D,
            beta=beta,
        )


def mapping_cost(sample: MetricSample, T: tuple[int, ...] | list[int]) -> float:
    """sum_j multiplicity_j * rho(v_j, T), in normalized units."""
    idx = np.asarray(T, dtype=np.int64)
    return float(sample.weights @ sample.distances[:, idx].min(axis=1))


def round_solution(
    frac: FractionalSolution,
    prog: LdmProgram,
    *,
    ddim_cache: dict[tuple[int, ...], DdimEstimate] | None = None,
) -> RoundedSolution:
    """Round up every z^t_j >= 1/2; then per level admit, in ascending j, each F^i_j
    that has fractional support >= 1/4 at some level k >= i and misses every set
    admitted before, rounding up its center at that level and all higher ones."""
    inst = prog.instance
    assert inst is not None and prog.centers is not None
    sample = inst.sample
    n, t = sample.n, inst.t
    z = frac.z

    sums = np.zeros((t + 1, n))
    for i in range(t + 1):
        for j in range(n):
            sums[i, j] = z[list(prog.neighborhood(i, j).F)].sum()
    # support[i, j]: exists k >= i with sum over F^k_j >= 1/4
    support = np.flip(np.maximum.accumulate(np.flip(sums, axis=0), axis=0), axis=0) >= SUPPORT

    selected: set[tuple[int, int]] = set()
    for j in range(n):
        if z[prog.z_var(t, j)] >= ROUND_UP:
            selected.add((t, j))

    for i in range(t + 1):
        taken: set[int] = set()
        for j in range(n):
            if not support[i, j]:
                continue
            F = prog.neighborhood(i, j).F
            if taken.intersection(F):
                continue
            taken.update(F)
            center = int(prog.centers[i, j])
            for k in range(i, t + 1):
                selected.add((k, center))

    if not any(level == t for level, _ in selected):
        logger.warning("rounding selected nothing; keeping the root at every level")
        root = inst.hierarchy.levels[0][0]
        selected.update((k, root) for k in range(t + 1))

    return _package(inst, frozenset(selected), frac.objective, ddim_cache)


def _package(
    inst: LdmInstance,
    selected: frozenset[tuple[int, int]],
    lp_objective: float,
    ddim_cache: dict[tuple[int, ...], DdimEstimate] | None = None,
) -> RoundedSolution:
    sample = inst.sample
    t = inst.t
    levels = tuple(tuple(sorted(p for k, p in selected if k == i)) for i in range(t + 1))
    T = levels[-1]
    if ddim_cache is not None and T in ddim_cache:
        ddim = ddim_cache[T]
    else:
        ddim = estimate_ddim(sub_sample(sample, T))
        if ddim_cache is not None:
            ddim_cache[T] = ddim
    cost = mapping_cost(sample, T) * sample.scale_factor
    logger.debug("rounded: |T|=%d cost=%.6g ddim~%.3f", len(T), cost, ddim.value)
    return RoundedSolution(
        sample=sample,
        selected=selected,
        levels=levels,
        hierarchy_dd=NetHierarchy.from_levels(levels, sample.distances),
        mapping_cost=cost,
        ddim=ddim,
        lp_objective=lp_objective * sample.scale_factor,
    )


def from_selection(
    inst: LdmInstance, selected: set[tuple[int, int]], lp_objective: float = 0.0
) -> RoundedSolution:
    """Package a hand-made selection (audits and oracle witnesses)."""
    return _package(inst, frozenset(selected), lp_objective)


def audit(sol: RoundedSolution, inst: LdmInstance) -> AuditReport:
    """Nesting, packing (at most (2h)^{4D'} selected points in any G-ball) and
    covering (every selected level-i point within (3f+2)*2^-k of a selected
    level-k point for all k < i)."""
    sample = inst.sample
    d = sample.distances
    ids = sample.ids
    t = inst.t
    cap = float((2.0 * inst.h) ** (4.0 * inst.Dprime))
    by_level = [
        np.asarray(sorted(p for k, p in sol.selected if k == i), dtype=np.int64)
        for i in range(t + 1)
    ]

    def report(
        violation: AuditViolation | None, max_count: int = 0, max_ratio: float = 0.0
    ) -> AuditReport:
        return AuditReport(
            ok=violation is None,
            packing_cap=cap,
            max_packing_count=max_count,
            max_covering_ratio=max_ratio,
            violation=violation,
        )

    for i, p in sorted(sol.selected):
        for k in range(i + 1, t + 1):
            if (k, p) not in sol.selected:
                return report(
                    AuditViolation(
                        clause="nested", level=i, witness=[ids[p]], detail=f"missing at level {k}"
                    )
                )

    max_count = 0
    for i in range(t + 1):
        chosen = by_level[i]
        if chosen.size == 0:
            continue
        radius = inst.g * 2.0**-i
        for w in inst.hierarchy.levels[i]:
            count = int(np.count_nonzero(d[w, chosen] <= radius))
            max_count = max(max_count, count)
            if count > cap:
                return report(
                    AuditViolation(
                        clause="packing",
                        level=i,
                        witness=[ids[w]],
                        detail=f"{count} selected points in the G-ball, cap {cap:g}",
                    ),
                    max_count,
                )

    slack = 3 * inst.f + 2
    max_ratio = 0.0
    for i in range(1, t + 1):
        for p in by_level[i]:
            for k in range(i):
                if by_level[k].size == 0:
                    return report(
                        AuditViolation(
                            clause="covering",
                            level=k,
                            witness=[ids[int(p)]],
                            detail=f"no selected point at level {k}",
                        ),
                        max_count,
                        max_ratio,
                    )
                gap = float(d[p, by_level[k]].min()) / 2.0**-k
                max_ratio = max(max_ratio, gap)
                if gap > slack:
                    return report(
                        AuditViolation(
                            clause="covering",
                            level=k,
                            witness=[ids[int(p)]],
                            detail=f"distance {gap:g}*2^-{k} exceeds {slack}*2^-{k}",
                        ),
                        max_count,
                        max_ratio,
                    )
    return report(None, max_count, max_ratio)
