from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .config import Settings
from .errors import InputError
from .hierarchy import build_hierarchy
from .metric import DdimEstimate, MetricSample, normalize
from .models import Anchor, BoundRow, ModelFile
from .pca import generic_rademacher_bound
from .pipeline import reduce_dimension

logger = logging.getLogger(__name__)


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise InputError("gamma must lie in (0, 1)")


def margin_loss(u: float, y: float, gamma: float) -> float:
    """min(max(0, 1 - y*u/gamma), 1)."""
    _check_gamma(gamma)
    return float(min(max(0.0, 1.0 - y * u / gamma), 1.0))


def margin_losses(u: np.ndarray, y: np.ndarray, gamma: float) -> np.ndarray:
    _check_gamma(gamma)
    return np.clip(1.0 - np.asarray(y, dtype=float) * np.asarray(u, dtype=float) / gamma, 0.0, 1.0)


def extend_predict(targets: np.ndarray, distances: np.ndarray, L: float) -> np.ndarray:
    """Midpoint of the L-Lipschitz upper and lower envelopes through (anchor, target),
    clamped to [-1, 1]. `distances` is queries x anchors."""
    t = np.asarray(targets, dtype=float)
    d = np.atleast_2d(np.asarray(distances, dtype=float))
    if d.shape[1] != t.size or t.size == 0:
        raise InputError("one distance per anchor is required")
    upper = (t[None, :] + L * d).min(axis=1)
    lower = (t[None, :] - L * d).max(axis=1)
    return np.clip(0.5 * (upper + lower), -1.0, 1.0)


def signs(values: np.ndarray) -> np.ndarray:
    """sgn with sgn(0) = +1."""
    return np.where(np.asarray(values) >= 0.0, 1, -1)


def lipschitz_regularize(targets: np.ndarray, distances: np.ndarray, L: float) -> np.ndarray:
    """Replace targets by the extension evaluated at the anchors themselves.

    The result satisfies |t_a - t_b| <= L*rho(a, b); targets that already do are
    returned unchanged.
    """
    return extend_predict(targets, distances, L)


def _K(L: float, n: int, D: float) -> float:
    return 34.0 * (4.0 * L) ** (D / 2.0) / math.sqrt(n) * (D - 1.0) / 2.0


def rademacher_bound_metric(L: float, n: int, D: float) -> float:
    """8*K^{2/(D+1)} + max(0, D*K*(K^{(D-1)/(D+1)} - 1)), evaluated at max(D, 2)."""
    if L <= 0 or n < 1 or D < 0:
        raise InputError("need L > 0, n >= 1, D >= 0")
    D = max(float(D), 2.0)
    K = _K(L, n, D)
    return 8.0 * K ** (2.0 / (D + 1.0)) + max(0.0, D * K * (K ** ((D - 1.0) / (D + 1.0)) - 1.0))


def rademacher_bound_perturbed(L: float, n: int, D: float, eta_normalized: float) -> float:
    if eta_normalized < 0:
        raise InputError("eta must be non-negative")
    return rademacher_bound_metric(L, n, D) + L * eta_normalized / n ** (1.0 / (D + 1.0))


def generalization_bound(
    sample_margin_loss: float,
    L: float,
    gamma: float,
    n: int,
    D: float,
    eta_normalized: float,
    delta: float,
) -> float:
    """loss + (2/gamma)*R + sqrt(log log2(max(e, 2L/gamma))/n) + 3*sqrt(log(4/delta)/(2n))."""
    _check_gamma(gamma)
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    R = rademacher_bound_perturbed(L, n, D, eta_normalized)
    scale_term = math.sqrt(math.log(math.log2(max(math.e, 2.0 * L / gamma))) / n)
    return (
        sample_margin_loss
        + (2.0 / gamma) * R
        + scale_term
        + 3.0 * math.sqrt(math.log(4.0 / delta) / (2.0 * n))
    )


@dataclass(frozen=True, eq=False)
class LipschitzClassifier:
    """Anchors with Lipschitz-consistent targets in normalized units.

    Query distances are given in the units of the training data and divided by
    `scale_factor` before the extension is evaluated.
    """

    anchor_ids: tuple[str, ...]
    targets: np.ndarray = field(repr=False)
    L: float
    gamma: float
    scale_factor: float
    anchor_coords: np.ndarray | None = field(default=None, repr=False)

    def values(self, distances: np.ndarray) -> np.ndarray:
        return extend_predict(self.targets, np.asarray(distances) / self.scale_factor, self.L)

    def predict(self, distances: np.ndarray) -> np.ndarray:
        return signs(self.values(distances))

    def distances_to(self, X: np.ndarray) -> np.ndarray:
        if self.anchor_coords is None:
            raise InputError("model has no anchor coordinates; query with a distance matrix")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.anchor_coords.shape[1]:
            raise InputError(f"expected {self.anchor_coords.shape[1]} coordinates per point")
        return cdist(X, self.anchor_coords)

    @classmethod
    def from_model(cls, model: ModelFile) -> LipschitzClassifier:
        coords = None
        if model.kind == "points":
            coords = np.array([a.coords for a in model.anchors], dtype=float)
        return cls(
            anchor_ids=tuple(a.id for a in model.anchors),
            targets=np.array([a.target for a in model.anchors], dtype=float),
            L=model.L,
            gamma=model.gamma,
            scale_factor=model.scale_factor,
            anchor_coords=coords,
        )


@dataclass(frozen=True, eq=False)
class ModelSelection:
    model: ModelFile
    classifier: LipschitzClassifier
    table: list[BoundRow] = field(default_factory=list)


def gamma_grid(size: int) -> list[float]:
    return [2.0**-q for q in range(1, size + 1)]


def model_select(
    sample: MetricSample, delta: float, settings: Settings | None = None
) -> ModelSelection:
    """Pick (D, gamma) minimizing the generalization bound.

    For every D in 1..ceil(log2 n'), where n' counts distinct points after
    duplicates collapse rather than raw input rows, the sample is reduced to
    S''_t, every point is moved to its nearest anchor, anchor targets are the
    mean label of the points moved onto them and are then made L-consistent.
    Ties keep the smaller D, then the larger gamma.
    """
    settings = settings or Settings()
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    if sample.labels is None:
        raise InputError("labels are required for training")
    n = sample.n
    if n < 4:
        raise InputError("sample too small for model selection")
    y = sample.labels.astype(float)
    L = settings.lipschitz_constant

    norm = normalize(sample)
    assert norm.membership is not None
    membership = norm.membership
    _, first_seen = np.unique(membership, return_index=True)
    h = build_hierarchy(norm)
    cache: dict[tuple[int, ...], DdimEstimate] = {}
    d_max = max(1, math.ceil(math.log2(norm.n))) if norm.n > 1 else 1

    table: list[BoundRow] = []
    best: tuple[float, BoundRow, np.ndarray, tuple[int, ...]] | None = None
    for D in range(1, d_max + 1):
        run = reduce_dimension(norm, D, settings, hierarchy=h, ddim_cache=cache)
        T = run.rounded.T
        assign = run.rounded.assignment()
        moved = norm.distances[np.arange(norm.n), assign]
        eta_total = float(norm.weights @ moved)
        eta_normalized = eta_total / n ** (D / (D + 1.0))

        pos = {p: a for a, p in enumerate(T)}
        anchor_of = np.array([pos[int(assign[membership[i]])] for i in range(n)], dtype=np.int64)
        sums = np.bincount(anchor_of, weights=y, minlength=len(T))
        counts = np.bincount(anchor_of, minlength=len(T))
        raw = np.divide(sums, counts, out=np.zeros(len(T)), where=counts > 0)
        T_idx = np.asarray(T, dtype=np.int64)
        targets = lipschitz_regularize(raw, norm.distances[np.ix_(T_idx, T_idx)], L)
        u = targets[anchor_of]

        row: BoundRow | None = None
        for gamma in gamma_grid(settings.gamma_grid_size):
            loss = float(margin_losses(u, y, gamma).mean())
            bound = generalization_bound(loss, L, gamma, n, D, eta_normalized, delta)
            if row is None or bound < row.bound:
                row = BoundRow(
                    D=D,
                    gamma=gamma,
                    eta_total=eta_total,
                    eta_normalized=eta_normalized,
                    sample_margin_loss=loss,
                    rademacher=rademacher_bound_perturbed(L, n, D, eta_normalized),
                    bound=bound,
                    anchors=len(T),
                )
        assert row is not None
        table.append(row)
        logger.debug("D=%d gamma=%g bound=%.6g anchors=%d", D, row.gamma, row.bound, len(T))
        if best is None or row.bound < best[0]:
            best = (row.bound, row, targets, T)

    assert best is not None
    _, row, targets, T = best
    coords = None
    if sample.coords is not None:
        coords = sample.coords[first_seen[np.asarray(T, dtype=np.int64)]]
    anchors = [
        Anchor(
            id=norm.ids[p],
            target=float(targets[a]),
            coords=[float(v) for v in coords[a]] if coords is not None else None,
        )
        for a, p in enumerate(T)
    ]
    model = ModelFile(
        kind="points" if coords is not None else "matrix",
        D=row.D,
        L=L,
        gamma=row.gamma,
        scale_factor=norm.scale_factor,
        eta_total=row.eta_total,
        eta_normalized=row.eta_normalized,
        delta=delta,
        bound=row.bound,
        anchors=anchors,
        table=table,
    )
    return ModelSelection(
        model=model, classifier=LipschitzClassifier.from_model(model), table=table
    )
