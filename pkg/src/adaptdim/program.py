from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import InputError
from .hierarchy import NetHierarchy, nearest_in_level
from .metric import MetricSample

logger = logging.getLogger(__name__)

E_RADIUS = 7
F_RADIUS = 12
G_RADIUS = 114
H_RADIUS = 126

Sense = Literal["<=", ">="]
Family = Literal["2", "3", "4", "5", "6", "7", "8", "9", "budget"]

FAMILIES: tuple[str, ...] = ("2", "3", "4", "5", "6", "7", "8", "9")


def dprime(D: float) -> float:
    """log2(2^{3D} + 1), the exponent used by the packing rows."""
    return math.log2(2.0 ** (3.0 * D) + 1.0)


@dataclass(frozen=True, eq=False)
class LdmInstance:
    sample: MetricSample = field(repr=False)
    hierarchy: NetHierarchy = field(repr=False)
    D: float
    e: int = E_RADIUS
    f: int = F_RADIUS
    g: int = G_RADIUS
    h: int = H_RADIUS

    def __post_init__(self) -> None:
        if self.D < 1:
            raise InputError(f"target dimension D must be >= 1, got {self.D}")
        if self.h != self.f + self.g:
            raise InputError("radius constants must satisfy h = f + g")
        if self.hierarchy.c != 1:
            raise InputError("the program needs a hierarchy with c = 1")

    @property
    def Dprime(self) -> float:
        return dprime(self.D)

    @property
    def t(self) -> int:
        return self.hierarchy.t

    @property
    def delta(self) -> float:
        return self.sample.min_distance()

    def packing_rhs(self, radius: int, exponent: float = 1.0) -> float:
        """ceil((2*radius)^(exponent*D')), rounded up against float underestimation."""
        return float(math.ceil((2.0 * radius) ** (exponent * self.Dprime)))


@dataclass(frozen=True)
class Neighborhood:
    center: int
    E: tuple[int, ...]
    F: tuple[int, ...]
    G: tuple[int, ...]
    H: tuple[int, ...]


@dataclass(frozen=True)
class Row:
    family: str
    sense: Sense
    coeffs: tuple[tuple[int, float], ...]
    rhs: float
    i: int = -1
    j: int = -1
    k: int = -1

    def activity(self, x: np.ndarray) -> float:
        return float(sum(a * x[v] for v, a in self.coeffs))

    def slack(self, x: np.ndarray) -> float:
        """Non-negative iff the row holds at x."""
        act = self.activity(x)
        return act - self.rhs if self.sense == ">=" else self.rhs - act


@dataclass(frozen=True, eq=False)
class LdmProgram:
    """Rows over variables [z..., c...]; z variables are boxed in [0, 1]."""

    rows: tuple[Row, ...]
    num_z: int
    num_c: int
    objective: np.ndarray = field(repr=False)
    instance: LdmInstance | None = field(default=None, repr=False)
    z_index: dict[tuple[int, int], int] = field(default_factory=dict, repr=False)
    z_key: tuple[tuple[int, int], ...] = field(default=(), repr=False)
    centers: np.ndarray | None = field(default=None, repr=False)
    neighborhoods: dict[tuple[int, int], Neighborhood] = field(default_factory=dict, repr=False)

    @property
    def num_vars(self) -> int:
        return self.num_z + self.num_c

    def c_var(self, j: int) -> int:
        return self.num_z + j

    def z_var(self, i: int, j: int) -> int:
        """Variable standing for z^i_j: j's own if j is in S_i, else its level-i center's."""
        assert self.centers is not None
        return self.z_index[(i, int(self.centers[i, j]))]

    def neighborhood(self, i: int, j: int) -> Neighborhood:
        assert self.centers is not None
        return self.neighborhoods[(i, int(self.centers[i, j]))]

    def var_name(self, v: int, ids: tuple[str, ...] | None = None) -> str:
        if v >= self.num_z:
            j = v - self.num_z
            return f"c[{ids[j] if ids else j}]"
        if self.z_key:
            i, p = self.z_key[v]
            return f"z[{i},{ids[p] if ids else p}]"
        return f"z[{v}]"

    def violations(self, x: np.ndarray, tol: float = 1e-9) -> list[Row]:
        return [row for row in self.rows if row.slack(x) < -tol]

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.objective @ x)


def build_neighborhoods(
    inst: LdmInstance,
) -> tuple[np.ndarray, dict[tuple[int, int], Neighborhood]]:
    """Level centers for every (i, j) and E/F/G/H around every level-i center.

    Sets hold level-i variable indices in the order z variables are numbered.
    """
    h = inst.hierarchy
    d = inst.sample.distances
    n = inst.sample.n
    centers = np.empty((h.t + 1, n), dtype=np.int64)
    hoods: dict[tuple[int, int], Neighborhood] = {}
    offset = 0
    for i, level in enumerate(h.levels):
        members = np.asarray(level, dtype=np.int64)
        in_level = set(level)
        for j in range(n):
            centers[i, j] = j if j in in_level else nearest_in_level(h, j, i)
        scale = 2.0**-i
        for pos, p in enumerate(level):
            row = d[p, members]
            var = np.arange(len(level)) + offset

            def within(
                radius: int, row: np.ndarray = row, var: np.ndarray = var
            ) -> tuple[int, ...]:
                return tuple(int(v) for v in var[row <= radius * scale])

            hoods[(i, p)] = Neighborhood(
                center=offset + pos,
                E=within(inst.e),
                F=within(inst.f),
                G=within(inst.g),
                H=within(inst.h),
            )
        offset += len(level)
    return centers, hoods


def _row(
    family: str,
    sense: Sense,
    terms: list[tuple[int, float]],
    rhs: float,
    i: int,
    j: int,
    k: int = -1,
) -> Row:
    merged: dict[int, float] = {}
    for v, a in terms:
        merged[v] = merged.get(v, 0.0) + a
    coeffs = tuple((v, a) for v, a in sorted(merged.items()) if a != 0.0)
    return Row(family=family, sense=sense, coeffs=coeffs, rhs=rhs, i=i, j=j, k=k)


def build_program(inst: LdmInstance) -> LdmProgram:
    """Materialize the relaxed program: boxed z variables, cost variables and
    rows (2)-(9), sorted by (family, i, j, k)."""
    sample = inst.sample
    h = inst.hierarchy
    n = sample.n
    t = h.t
    if n > 1 and inst.D > math.log2(n):
        logger.warning("D=%g exceeds log2(n)=%.3f: the instance is trivial", inst.D, math.log2(n))

    z_key = tuple((i, p) for i, level in enumerate(h.levels) for p in level)
    z_index = {key: v for v, key in enumerate(z_key)}
    num_z = len(z_key)
    centers, hoods = build_neighborhoods(inst)

    def zv(i: int, j: int) -> int:
        return z_index[(i, int(centers[i, j]))]

    def hood(i: int, j: int) -> Neighborhood:
        return hoods[(i, int(centers[i, j]))]

    def cv(j: int) -> int:
        return num_z + j

    rhs_f = inst.packing_rhs(inst.f)
    rhs_g = inst.packing_rhs(inst.g)
    rhs_h = inst.packing_rhs(inst.h)
    ratio = (2.0 * inst.f) ** -inst.Dprime
    delta = inst.delta

    rows: list[Row] = []
    for i in range(t):
        for p in h.levels[i]:
            rows.append(_row("2", "<=", [(zv(i, p), 1.0), (zv(i + 1, p), -1.0)], 0.0, i, p))
    for i in range(t + 1):
        for j in range(n):
            nb = hood(i, j)
            rows.append(_row("3", ">=", [(v, 1.0) for v in nb.E] + [(zv(t, j), -1.0)], 0.0, i, j))
            rows.append(_row("4", "<=", [(v, 1.0) for v in nb.F], rhs_f, i, j))
            rows.append(_row("5", "<=", [(v, 1.0) for v in nb.G], rhs_g, i, j))
            rows.append(_row("6", "<=", [(v, 1.0) for v in nb.H], rhs_h, i, j))
            rows.append(
                _row(
                    "8",
                    ">=",
                    [(zv(t, j), 1.0), (cv(j), 2.0**i)] + [(v, 1.0) for v in nb.F],
                    1.0,
                    i,
                    j,
                )
            )
    for j in range(n):
        rows.append(_row("7", ">=", [(zv(t, j), 1.0), (cv(j), 1.0 / delta)], 1.0, t, j))
        for i in range(t + 1):
            for k in range(i + 1, t + 1):
                terms = [(v, 1.0) for v in hood(i, j).F] + [(v, -ratio) for v in hood(k, j).F]
                rows.append(_row("9", ">=", terms, 0.0, i, j, k))

    rows.sort(key=lambda r: (FAMILIES.index(r.family), r.i, r.j, r.k))
    objective = np.zeros(num_z + n)
    objective[num_z:] = sample.weights
    prog = LdmProgram(
        rows=tuple(rows),
        num_z=num_z,
        num_c=n,
        objective=objective,
        instance=inst,
        z_index=z_index,
        z_key=z_key,
        centers=centers,
        neighborhoods=hoods,
    )
    logger.debug("program: %d z vars, %d c vars, %d rows", num_z, n, len(rows))
    return prog


def census(prog: LdmProgram) -> dict[str, int]:
    """Rows emitted per family."""
    counts = Counter(row.family for row in prog.rows)
    return {fam: counts.get(fam, 0) for fam in FAMILIES}


def expected_census(hierarchy: NetHierarchy, n: int) -> dict[str, int]:
    """Closed-form row counts: one row per (i, j) for (3)-(6) and (8), per
    (i, p in S_i), i < t, for (2), per j for (7) and per (i < k, j) for (9)."""
    t = hierarchy.t
    per_level = (t + 1) * n
    return {
        "2": sum(len(level) for level in hierarchy.levels[:-1]),
        "3": per_level,
        "4": per_level,
        "5": per_level,
        "6": per_level,
        "7": n,
        "8": per_level,
        "9": n * t * (t + 1) // 2,
    }


def _fmt(a: float) -> str:
    return repr(float(a))


def dump_lp(prog: LdmProgram) -> str:
    """Plain-text listing: objective, one row per line, then bounds."""
    ids = prog.instance.sample.ids if prog.instance is not None else None
    lines = ["minimize"]
    obj = [(v, a) for v, a in enumerate(prog.objective) if a != 0]
    lines.append("  " + (" + ".join(f"{_fmt(a)} {prog.var_name(v, ids)}" for v, a in obj) or "0"))
    lines.append("subject to")
    for n, row in enumerate(prog.rows):
        lhs = " + ".join(f"{_fmt(a)} {prog.var_name(v, ids)}" for v, a in row.coeffs) or "0"
        lines.append(f"  r{n}_f{row.family}: {lhs} {row.sense} {_fmt(row.rhs)}")
    lines.append("bounds")
    for v in range(prog.num_z):
        lines.append(f"  0 <= {prog.var_name(v, ids)} <= 1")
    for v in range(prog.num_z, prog.num_vars):
        lines.append(f"  {prog.var_name(v, ids)} >= 0")
    lines.append("end")
    return "\n".join(lines) + "\n"
