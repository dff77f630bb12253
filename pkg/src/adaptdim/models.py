from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class TripleViolation(BaseModel):
    """d(i, j) > d(i, k) + d(k, j) beyond tolerance; k is the intermediate point."""

    i: str
    j: str
    k: str
    d_ij: float
    d_ik: float
    d_kj: float
    excess: float


class ValidationReport(BaseModel):
    ok: bool
    n: int = Field(ge=0)
    exhaustive: bool
    checked_triples: int = Field(ge=0)
    tolerance: float
    violation: TripleViolation | None = None

    @property
    def message(self) -> str:
        if self.violation is None:
            return f"metric ok ({self.n} points, {self.checked_triples} triples checked)"
        v = self.violation
        return (
            f"triangle inequality violated for ({v.i}, {v.j}, {v.k}): "
            f"d({v.i},{v.j})={v.d_ij:g} > d({v.i},{v.k})+d({v.k},{v.j})={v.d_ik + v.d_kj:g}"
        )


class DdimWitnessModel(BaseModel):
    center: str
    radius: float
    packing_size: int = Field(ge=1)


class DdimReport(BaseModel):
    value: float = Field(ge=0)
    witness: DdimWitnessModel | None = None


class HierarchyDump(BaseModel):
    t: int = Field(ge=0)
    levels: list[list[str]]
    c: float = Field(ge=1)


HierarchyClause = Literal["nested", "root", "top", "packing", "covering"]


class HierarchyViolation(BaseModel):
    clause: HierarchyClause
    level: int
    pair: list[str]
    detail: str = ""


class HierarchyReport(BaseModel):
    ok: bool
    hierarchy: HierarchyDump
    violation: HierarchyViolation | None = None
    level_sizes: list[int] = Field(default_factory=list)


class BudgetProbe(BaseModel):
    budget: float
    feasible: bool
    iterations: int
    overshoot: float | None = None


class SolverStats(BaseModel):
    beta: float
    iterations: int
    overshoot: float
    budget_trace: list[BudgetProbe] = Field(default_factory=list)
    rows_packing: int
    rows_covering: int
    variables: int


AuditClause = Literal["nested", "packing", "covering"]


class AuditViolation(BaseModel):
    clause: AuditClause
    level: int
    witness: list[str]
    detail: str = ""


class AuditReport(BaseModel):
    ok: bool
    packing_cap: float
    max_packing_count: int
    max_covering_ratio: float
    violation: AuditViolation | None = None


class OracleSummary(BaseModel):
    exact_ddim: float | None = None
    T_star: list[str] | None = None
    ldm_optimum: float | None = None
    lp_optimum: float | None = None
    cost_ratio: float | None = None


class ReduceResult(BaseModel):
    T: list[str]
    mapping_cost: float = Field(ge=0)
    ddim_estimate: float = Field(ge=0)
    lp_objective: float = Field(ge=0)
    levels: list[list[str]]

    D: float
    beta: float
    audit: AuditReport | None = None
    stats: SolverStats | None = None
    oracle: OracleSummary | None = None


class ReduceSweep(BaseModel):
    runs: list[ReduceResult] = Field(min_length=1)


class CutoffRow(BaseModel):
    k: int = Field(ge=0)
    eta: float = Field(ge=0)
    rademacher: float = Field(ge=0)
    empirical_hinge: float = Field(ge=0)
    hinge_bound: float
    vc_reference: float = Field(ge=0)


class CutoffSummary(BaseModel):
    n: int = Field(ge=1)
    N: int = Field(ge=1)
    delta: float
    centered: bool
    chosen_k: int = Field(ge=0)
    chosen_bound: float | None = None
    warning: str | None = None


class EuclidBoundReport(BaseModel):
    k: int = Field(ge=0)
    eta: float = Field(ge=0)
    n: int = Field(ge=1)
    delta: float
    empirical_hinge: float = Field(ge=0)
    rademacher: float
    hinge_bound: float
    vc_reference: float


class MetricBoundReport(BaseModel):
    L: float = Field(gt=0)
    n: int = Field(ge=1)
    D: float
    eta_normalized: float = Field(ge=0)
    gamma: float
    delta: float
    sample_margin_loss: float = Field(ge=0, le=1)
    rademacher: float
    rademacher_perturbed: float
    generalization_bound: float
    log_covering_at_gamma: float | None = None


class BoundRow(BaseModel):
    D: int = Field(ge=1)
    gamma: float
    eta_total: float = Field(ge=0)
    eta_normalized: float = Field(ge=0)
    sample_margin_loss: float = Field(ge=0, le=1)
    rademacher: float
    bound: float
    anchors: int = Field(ge=1)


class Anchor(BaseModel):
    id: str
    target: float = Field(ge=-1, le=1)
    coords: list[float] | None = None


class ModelFile(BaseModel):
    """Trained Lipschitz classifier as written by `train` and read by `predict`."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["points", "matrix"]
    D: int = Field(ge=1)
    L: float = Field(gt=0)
    gamma: float = Field(gt=0, lt=1)
    scale_factor: float = Field(gt=0)
    eta_total: float = Field(ge=0)
    eta_normalized: float = Field(ge=0)
    delta: float
    bound: float
    anchors: list[Anchor] = Field(min_length=1)
    table: list[BoundRow] = Field(default_factory=list)

    @model_validator(mode="after")
    def _validate_anchor_coords(self) -> ModelFile:
        if self.kind == "points":
            dims = {len(a.coords) if a.coords is not None else -1 for a in self.anchors}
            if len(dims) != 1 or -1 in dims:
                raise ValueError("points models need coordinates of one dimension on every anchor")
        return self


Command = Literal["validate", "hierarchy", "reduce", "pca-cutoff", "train", "predict"]


class RunConfig(BaseModel):
    """Everything that determines a CLI run; logged at debug level."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    inputs: list[Path] = Field(default_factory=list)
    delta: float = 0.05
    beta: float | None = None
    D: int | None = None
    sweep: bool = False
    output: Path | None = None
    seed: int = Field(default=0, ge=0)
    stats: bool = False
    center: bool = False
    oracle: bool = False

    @model_validator(mode="after")
    def _validate_ranges(self) -> RunConfig:
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.beta is not None and not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.D is not None and self.sweep:
            raise ValueError("Use only one of D or sweep")
        return self


class InspectReport(BaseModel):
    validation: ValidationReport
    n_distinct: int = Field(ge=1)
    diameter: float = Field(ge=0)
    min_distance: float = Field(ge=0)
    ddim: DdimReport | None = None
