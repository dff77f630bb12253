from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .metric import MetricSample
from .models import HierarchyDump, HierarchyReport, HierarchyViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NetHierarchy:
    """Nested nets S_0 ⊆ ... ⊆ S_t over point indices of one sample.

    `levels[i]` is sorted ascending; `parents[i][p]` (i >= 1) is the nearest
    point of S_{i-1} to p.
    """

    levels: tuple[tuple[int, ...], ...]
    c: float
    distances: np.ndarray = field(repr=False)
    parents: tuple[dict[int, int], ...] = field(default=(), repr=False)

    @property
    def t(self) -> int:
        return len(self.levels) - 1

    @classmethod
    def from_levels(
        cls, levels: Sequence[Sequence[int]], distances: np.ndarray, c: float = 1.0
    ) -> NetHierarchy:
        lv = tuple(tuple(sorted(int(p) for p in level)) for level in levels)
        h = cls(levels=lv, c=c, distances=distances)
        parents: list[dict[int, int]] = [{}]
        for i in range(1, len(lv)):
            if not lv[i - 1]:
                parents.append({})
                continue
            parents.append({p: nearest_in_level(h, p, i - 1) for p in lv[i]})
        object.__setattr__(h, "parents", tuple(parents))
        return h

    def members(self, i: int) -> np.ndarray:
        return np.asarray(self.levels[i], dtype=np.int64)

    def dump(self, ids: Sequence[str]) -> HierarchyDump:
        return HierarchyDump(
            t=self.t, levels=[[ids[p] for p in level] for level in self.levels], c=self.c
        )


def depth_for(min_distance: float) -> int:
    """Smallest t >= 1 with 2^-t <= min_distance."""
    t = 1
    while 2.0**-t > min_distance:
        t += 1
    return t


def greedy_nets(distances: np.ndarray, members: Sequence[int], t: int) -> list[list[int]]:
    """Greedy nets over `members` (ascending): S_0 is the first member and S_i
    adds, in order, every member at distance >= 2^-i from all points already in S_i."""
    order = sorted(int(p) for p in members)
    if not order:
        return []
    levels = [[order[0]]]
    for i in range(1, t + 1):
        radius = 2.0**-i
        current = list(levels[-1])
        in_level = np.zeros(distances.shape[0], dtype=bool)
        in_level[current] = True
        for p in order:
            if in_level[p]:
                continue
            if np.all(distances[p, current] >= radius):
                current.append(p)
                in_level[p] = True
        levels.append(sorted(current))
    return levels


def build_hierarchy(sample: MetricSample, c: float = 1.0) -> NetHierarchy:
    if c < 1:
        raise InputError("covering parameter c must be >= 1")
    if sample.n == 0:
        raise InputError("empty sample")
    if sample.n == 1:
        return NetHierarchy.from_levels([[0]], sample.distances, c)
    delta = sample.min_distance()
    if delta <= 0:
        raise InputError("duplicates not collapsed")
    if abs(sample.diameter() - 1.0) > 1e-9:
        logger.warning(
            "hierarchy built on a sample with diameter %g (expected 1)", sample.diameter()
        )

    t = depth_for(delta)
    levels = greedy_nets(sample.distances, range(sample.n), t)
    h = NetHierarchy.from_levels(levels, sample.distances, c)
    logger.debug("hierarchy t=%d sizes=%s", t, [len(level) for level in levels])
    return h


def nearest_in_level(h: NetHierarchy, v: int, i: int) -> int:
    """Nearest point of S_i to v; ties go to the lowest index."""
    if not 0 <= i <= h.t:
        raise InputError(f"level {i} outside 0..{h.t}")
    members = h.members(i)
    return int(members[int(np.argmin(h.distances[v, members]))])


def validate_hierarchy(h: NetHierarchy, sample: MetricSample) -> HierarchyReport:
    """Check root, nesting, top level, packing and covering, in that order.

    Covering is checked as rho <= c*2^-i: with diameter 1 the single root point
    can sit at distance exactly 1 from another point.
    """
    ids = sample.ids
    d = sample.distances
    sizes = [len(level) for level in h.levels]

    def fail(clause: str, level: int, pair: list[int], detail: str = "") -> HierarchyReport:
        return HierarchyReport(
            ok=False,
            hierarchy=h.dump(ids),
            violation=HierarchyViolation(
                clause=clause, level=level, pair=[ids[p] for p in pair], detail=detail
            ),
            level_sizes=sizes,
        )

    for level in h.levels:
        for p in level:
            if not 0 <= p < sample.n:
                raise InputError(f"hierarchy references point {p} outside the sample")

    if not h.levels or len(h.levels[0]) != 1:
        return fail("root", 0, list(h.levels[0]) if h.levels else [], "S_0 must be one point")
    for i in range(h.t):
        missing = sorted(set(h.levels[i]) - set(h.levels[i + 1]))
        if missing:
            return fail("nested", i, [missing[0]], f"not in level {i + 1}")
    absent = sorted(set(range(sample.n)) - set(h.levels[-1]))
    if absent:
        return fail("top", h.t, [absent[0]], "missing from the top level")

    for i, level in enumerate(h.levels):
        m = np.asarray(level, dtype=np.int64)
        sub = d[np.ix_(m, m)]
        close = np.triu(sub < 2.0**-i, k=1)
        if close.any():
            a, b = np.argwhere(close)[0]
            return fail("packing", i, [int(m[a]), int(m[b])], f"distance {sub[a, b]:g} < 2^-{i}")

    for i in range(h.t):
        upper = np.asarray(h.levels[i], dtype=np.int64)
        radius = h.c * 2.0**-i
        for v in h.levels[i + 1]:
            gap = float(d[v, upper].min())
            if gap > radius:
                w = int(upper[int(np.argmin(d[v, upper]))])
                return fail("covering", i, [v, w], f"distance {gap:g} > {h.c:g}*2^-{i}")

    return HierarchyReport(ok=True, hierarchy=h.dump(ids), level_sizes=sizes)
