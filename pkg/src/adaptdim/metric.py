from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import InputError
from .models import TripleViolation, ValidationReport
from .utils.rng import STREAM_TRIANGLE, generator

logger = logging.getLogger(__name__)

TRIANGLE_TOLERANCE = 1e-9
DUPLICATE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class MetricSample:
    """A finite metric space: ids plus a full distance matrix.

    `coords` is kept when the sample came from vectors (Euclidean distance),
    `multiplicity` counts collapsed duplicates and `membership` maps every point
    of the sample this one was derived from to its representative here.
    """

    ids: tuple[str, ...]
    distances: np.ndarray = field(repr=False)
    coords: np.ndarray | None = field(default=None, repr=False)
    labels: np.ndarray | None = field(default=None, repr=False)
    multiplicity: np.ndarray | None = field(default=None, repr=False)
    scale_factor: float = 1.0
    membership: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.multiplicity is None:
            object.__setattr__(self, "multiplicity", np.ones(len(self.ids), dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def weights(self) -> np.ndarray:
        assert self.multiplicity is not None
        return self.multiplicity

    def diameter(self) -> float:
        if self.n < 2:
            return 0.0
        return float(self.distances.max())

    def min_distance(self) -> float:
        if self.n < 2:
            return 1.0
        off = self.distances[~np.eye(self.n, dtype=bool)]
        return float(off.min())

    def index_of(self, point_id: str) -> int:
        try:
            return self.ids.index(point_id)
        except ValueError as e:
            raise InputError(f"unknown point id: {point_id}") from e


def from_points(
    ids: Sequence[str], coords: np.ndarray, labels: np.ndarray | None = None
) -> MetricSample:
    x = np.asarray(coords, dtype=float)
    if x.ndim != 2 or x.shape[0] != len(ids):
        raise InputError("malformed coordinates")
    if x.shape[0] == 0:
        raise InputError("empty sample")
    if not np.all(np.isfinite(x)):
        raise InputError("coordinates must be finite")
    d = squareform(pdist(x, metric="euclidean")) if x.shape[0] > 1 else np.zeros((1, 1))
    return MetricSample(ids=tuple(ids), distances=d, coords=x, labels=_labels(labels, len(ids)))


def from_distances(
    ids: Sequence[str], matrix: np.ndarray, labels: np.ndarray | None = None
) -> MetricSample:
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] != len(ids):
        raise InputError("malformed distances", details={"shape": list(d.shape)})
    return MetricSample(ids=tuple(ids), distances=d, labels=_labels(labels, len(ids)))


def _labels(labels: np.ndarray | None, n: int) -> np.ndarray | None:
    if labels is None:
        return None
    y = np.asarray(labels, dtype=float)
    if y.shape != (n,):
        raise InputError("labels must align with points")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InputError("labels must be -1 or +1")
    return y.astype(np.int8)


def _check_structure(sample: MetricSample) -> np.ndarray:
    if sample.n == 0:
        raise InputError("empty sample")
    d = sample.distances
    if d.ndim != 2 or d.shape != (sample.n, sample.n):
        raise InputError("malformed distances")
    if not np.all(np.isfinite(d)):
        raise InputError("malformed distances", details="non-finite entry")
    if np.any(d < 0):
        raise InputError("malformed distances", details="negative entry")
    if np.any(np.diag(d) != 0):
        raise InputError("malformed distances", details="nonzero diagonal")
    if not np.array_equal(d, d.T):
        raise InputError("malformed distances", details="asymmetric")
    return d


def validate_metric(
    sample: MetricSample, *, seed: int = 0, full_check_max: int = 200
) -> ValidationReport:
    """Check the metric axioms; the triangle inequality exhaustively up to
    `full_check_max` points and on 10*n^2 random triples above that."""
    d = _check_structure(sample)
    n = sample.n
    tol = TRIANGLE_TOLERANCE * max(sample.diameter(), 0.0)

    if n <= full_check_max:
        for i in range(n):
            # excess[j, k] = d(i,j) - d(i,k) - d(k,j)
            excess = d[i][:, None] - d[i][None, :] - d
            hits = np.argwhere(excess > tol)
            if hits.size:
                j, k = (int(v) for v in hits[0])
                return _report(sample, n**3, True, tol, (i, j, k), float(excess[j, k]))
        return _report(sample, n**3, True, tol)

    rng = generator(seed, STREAM_TRIANGLE)
    total = 10 * n * n
    chunk = 1 << 16
    first: tuple[int, int, int] | None = None
    first_excess = 0.0
    done = 0
    while done < total:
        size = min(chunk, total - done)
        tri = rng.integers(0, n, size=(size, 3))
        i, j, k = tri[:, 0], tri[:, 1], tri[:, 2]
        excess = d[i, j] - d[i, k] - d[k, j]
        bad = np.flatnonzero(excess > tol)
        for b in bad:
            cand = (int(i[b]), int(j[b]), int(k[b]))
            if first is None or cand < first:
                first, first_excess = cand, float(excess[b])
        done += size
    return _report(sample, total, False, tol, first, first_excess)


def _report(
    sample: MetricSample,
    checked: int,
    exhaustive: bool,
    tol: float,
    triple: tuple[int, int, int] | None = None,
    excess: float = 0.0,
) -> ValidationReport:
    violation = None
    if triple is not None:
        i, j, k = triple
        d = sample.distances
        violation = TripleViolation(
            i=sample.ids[i],
            j=sample.ids[j],
            k=sample.ids[k],
            d_ij=float(d[i, j]),
            d_ik=float(d[i, k]),
            d_kj=float(d[k, j]),
            excess=excess,
        )
    return ValidationReport(
        ok=violation is None,
        n=sample.n,
        exhaustive=exhaustive,
        checked_triples=checked,
        tolerance=tol,
        violation=violation,
    )


def normalize(sample: MetricSample) -> MetricSample:
    """Collapse duplicates (first occurrence represents) and scale to diameter 1."""
    d = _check_structure(sample)
    n = sample.n
    tol = DUPLICATE_TOLERANCE * max(sample.diameter(), 1.0)
    representative = np.full(n, -1, dtype=np.int64)
    keep: list[int] = []
    for i in range(n):
        if representative[i] >= 0:
            continue
        representative[i] = len(keep)
        dup = np.flatnonzero((d[i] <= tol) & (representative < 0))
        representative[dup] = len(keep)
        keep.append(i)

    multiplicity = np.bincount(
        representative, weights=sample.weights, minlength=len(keep)
    ).astype(np.int64)
    if len(keep) < n:
        logger.debug("collapsed %d duplicate point(s)", n - len(keep))

    sub = d[np.ix_(keep, keep)]
    diam = float(sub.max()) if len(keep) > 1 else 0.0
    scale = diam if diam > 0 else 1.0
    coords = sample.coords[keep] / scale if sample.coords is not None else None
    # Compose with an earlier collapse so membership always points at the original sample.
    membership = representative if sample.membership is None else representative[sample.membership]
    return MetricSample(
        ids=tuple(sample.ids[i] for i in keep),
        distances=sub / scale,
        coords=coords,
        labels=None,
        multiplicity=multiplicity,
        scale_factor=sample.scale_factor * scale,
        membership=membership,
    )


def denormalize(sample: MetricSample) -> MetricSample:
    """Undo the scaling of `normalize` (duplicates stay collapsed)."""
    s = sample.scale_factor
    return replace(
        sample,
        distances=sample.distances * s,
        coords=sample.coords * s if sample.coords is not None else None,
        scale_factor=1.0,
    )


def sub_sample(sample: MetricSample, indices: Sequence[int]) -> MetricSample:
    idx = np.asarray(indices, dtype=np.int64)
    return MetricSample(
        ids=tuple(sample.ids[i] for i in idx),
        distances=sample.distances[np.ix_(idx, idx)],
        coords=sample.coords[idx] if sample.coords is not None else None,
        labels=sample.labels[idx] if sample.labels is not None else None,
        multiplicity=sample.weights[idx],
        scale_factor=sample.scale_factor,
    )


@dataclass(frozen=True)
class DdimEstimate:
    value: float
    center: int | None = None
    radius: float = 0.0
    packing_size: int = 1


def greedy_packing_size(distances: np.ndarray, ball: np.ndarray, separation: float) -> int:
    """Size of the greedy maximal subset of `ball` with pairwise distance > `separation`,
    scanning `ball` in order."""
    m = ball.size
    if m == 0:
        return 0
    alive = np.ones(m, dtype=bool)
    size = 0
    pos = 0
    while True:
        size += 1
        alive &= distances[ball[pos], ball] > separation
        nxt = np.flatnonzero(alive[pos + 1 :])
        if nxt.size == 0:
            return size
        pos += 1 + int(nxt[0])


def _radius_candidates(
    sample: MetricSample, center: int, grid: np.ndarray | None
) -> np.ndarray:
    if grid is not None:
        return grid
    row = sample.distances[center]
    base = np.unique(row[row > 0])
    return np.unique(np.concatenate([base, 2.0 * base]))


def estimate_ddim(
    sample: MetricSample, *, grid_threshold: int = 512, grid_size: int = 64
) -> DdimEstimate:
    """Packing-based doubling dimension estimate.

    For every center x and radius r the ball B(x, r) is scanned by distance
    from x (ties by index) and greedily packed with separation > r/2. A maximal
    such packing also covers the ball with r/2-balls, so its size bounds the
    doubling constant from above.
    """
    n = sample.n
    if n == 0:
        raise InputError("empty sample")
    if n == 1:
        return DdimEstimate(value=0.0, center=0, radius=0.0, packing_size=1)

    d = sample.distances
    grid = None
    if n > grid_threshold:
        off = d[~np.eye(n, dtype=bool)]
        positive = off[off > 0]
        lo = float(positive.min()) if positive.size else 1.0
        grid = np.geomspace(lo, 2.0 * float(off.max()), grid_size)

    best = DdimEstimate(value=0.0, center=0, radius=0.0, packing_size=1)
    for x in range(n):
        order = np.lexsort((np.arange(n), d[x]))
        dist_sorted = d[x][order]
        for r in _radius_candidates(sample, x, grid):
            m = int(np.searchsorted(dist_sorted, r, side="right"))
            if m <= best.packing_size:
                continue
            ball = order[:m]
            size = greedy_packing_size(d, ball, r / 2.0)
            if size > best.packing_size:
                best = DdimEstimate(
                    value=math.log2(size), center=x, radius=float(r), packing_size=size
                )
    return best


def covering_number_bound(ddim: float, diam: float, eps: float) -> float:
    """(2*diam/eps)^ddim, clamped to 1 once one ball of radius eps suffices."""
    if eps <= 0:
        raise InputError("eps must be positive")
    if ddim < 0 or diam < 0:
        raise InputError("ddim and diam must be non-negative")
    if eps >= 2.0 * diam:
        return 1.0
    return float((2.0 * diam / eps) ** ddim)


def exact_greedy_cover(sample: MetricSample, eps: float) -> list[int]:
    """Greedy eps-cover: scan ascending, open a center at every uncovered point."""
    if eps <= 0:
        raise InputError("eps must be positive")
    d = sample.distances
    covered = np.zeros(sample.n, dtype=bool)
    centers: list[int] = []
    for i in range(sample.n):
        if covered[i]:
            continue
        centers.append(i)
        covered |= d[i] <= eps
    return centers


def lipschitz_class_log_covering(L: float, ddim: float, eps: float) -> float:
    """log N(eps, F_L, sup-norm) <= (4L/eps)^ddim * log(8/eps) for L-Lipschitz
    [-1, 1]-valued functions on a diameter-1 space."""
    if eps <= 0 or L <= 0:
        raise InputError("L and eps must be positive")
    return float((4.0 * L / eps) ** ddim * math.log(8.0 / eps))
