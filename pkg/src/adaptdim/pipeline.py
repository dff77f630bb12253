from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .config import Settings
from .hierarchy import NetHierarchy, build_hierarchy
from .metric import DdimEstimate, MetricSample
from .models import ReduceResult
from .program import LdmInstance, LdmProgram, build_program
from .rounding import RoundedSolution, audit, round_solution
from .solver import FractionalSolution, minimize_cost

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LdmRun:
    instance: LdmInstance = field(repr=False)
    program: LdmProgram = field(repr=False)
    fractional: FractionalSolution = field(repr=False)
    rounded: RoundedSolution

    def result(self, *, stats: bool = False) -> ReduceResult:
        res = self.rounded.to_result(D=self.instance.D, beta=self.fractional.beta)
        res.audit = audit(self.rounded, self.instance)
        if stats:
            res.stats = self.fractional.stats()
        return res


def reduce_dimension(
    sample: MetricSample,
    D: float,
    settings: Settings | None = None,
    *,
    hierarchy: NetHierarchy | None = None,
    presolve: bool = True,
    ddim_cache: dict[tuple[int, ...], DdimEstimate] | None = None,
) -> LdmRun:
    """Solve the relaxed program for target dimension D on a normalized sample and round it."""
    settings = settings or Settings()
    h = hierarchy if hierarchy is not None else build_hierarchy(sample)
    inst = LdmInstance(sample=sample, hierarchy=h, D=D)
    prog = build_program(inst)
    frac = minimize_cost(
        prog,
        settings.beta,
        max_iterations=settings.mwu_max_iterations,
        bisection_max_steps=settings.bisection_max_steps,
        presolve=presolve,
    )
    rounded = round_solution(frac, prog, ddim_cache=ddim_cache)
    logger.info("D=%g: |T|=%d cost=%.6g", D, len(rounded.T), rounded.mapping_cost)
    return LdmRun(instance=inst, program=prog, fractional=frac, rounded=rounded)
