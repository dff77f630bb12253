from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .models import CutoffRow, CutoffSummary

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Singular spectrum of the (optionally centered, rescaled) data matrix.

    All-zero columns are dropped before the decomposition and re-inserted as
    zero rows of the basis, so padding the input with zero columns changes
    nothing but `N`.
    """

    n: int
    N: int
    singular_values: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)
    Vt: np.ndarray = field(repr=False)
    columns: np.ndarray = field(repr=False)
    scale: float = 1.0
    mean: np.ndarray | None = field(default=None, repr=False)

    @property
    def rank_limit(self) -> int:
        return int(self.singular_values.size)

    def prepare(self, X: np.ndarray) -> np.ndarray:
        """Apply the fitted centering and scaling, keeping only non-zero columns."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.N:
            raise InputError(f"expected {self.N} coordinates per point")
        if self.mean is not None:
            X = X - self.mean
        return X[:, self.columns] / self.scale

    def coordinates(self, X: np.ndarray, k: int) -> np.ndarray:
        """Coordinates of P_T(x) in the top-k basis."""
        return self.prepare(X) @ self.Vt[:k].T

    def basis(self, k: int) -> np.ndarray:
        """N x k orthonormal basis of the top-k subspace in ambient coordinates."""
        B = np.zeros((self.N, k))
        B[self.columns] = self.Vt[:k].T
        return B


def spectral_profile(X: np.ndarray, *, center: bool = False) -> SpectralProfile:
    """eta_k = (1/n) * sum_{j>k} s_j^2 for k = 0..r, r the number of singular values."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise InputError("empty sample")
    if not np.all(np.isfinite(X)):
        raise InputError("non-finite coordinates")
    n, N = X.shape
    mean = X.mean(axis=0) if center else None
    Y = X - mean if mean is not None else X
    norms = np.linalg.norm(Y, axis=1)
    scale = 1.0
    if norms.max() > 1.0 + 1e-12:
        scale = float(norms.max())
        logger.warning("rows exceed unit norm; scaling every row by 1/%.6g", scale)
    columns = np.flatnonzero(np.any(Y != 0.0, axis=0))
    if columns.size == 0:
        return SpectralProfile(
            n=n,
            N=N,
            singular_values=np.zeros(0),
            eta=np.zeros(1),
            Vt=np.zeros((0, 0)),
            columns=columns,
            scale=scale,
            mean=mean,
        )
    Z = Y[:, columns] / scale
    _, s, Vt = np.linalg.svd(Z, full_matrices=False)
    tail = np.concatenate([np.cumsum((s**2)[::-1])[::-1], [0.0]])
    return SpectralProfile(
        n=n,
        N=N,
        singular_values=s,
        eta=tail / n,
        Vt=Vt,
        columns=columns,
        scale=scale,
        mean=mean,
    )


def rademacher_bound_euclid(k: int, eta: float, n: int) -> float:
    """17*sqrt(k/n) + sqrt(eta/n)."""
    if n < 1 or k < 0 or eta < 0:
        raise InputError("need n >= 1, k >= 0, eta >= 0")
    return 17.0 * math.sqrt(k / n) + math.sqrt(eta / n)


def generic_rademacher_bound(empirical: float, rademacher: float, n: int, delta: float) -> float:
    """empirical + 2*R + 3*sqrt(log(2/delta)/(2n)) for a 1-Lipschitz loss in [0, 1]."""
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    return empirical + 2.0 * rademacher + 3.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def hinge_bound(k: int, eta: float, n: int, delta: float, empirical_hinge: float) -> float:
    """emp + 34*sqrt(k/n) + 2*sqrt(eta/n) + 3*sqrt(log(2/delta)/(2n))."""
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    if n < 1 or k < 0 or eta < 0:
        raise InputError("need n >= 1, k >= 0, eta >= 0")
    return (
        empirical_hinge
        + 34.0 * math.sqrt(k / n)
        + 2.0 * math.sqrt(eta / n)
        + 3.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * n))
    )


def vc_rademacher_bound(d: int, n: int) -> float:
    """sqrt(2 d log(e n / d) / n); the dimension-dependent reference rate."""
    if n < 1 or d < 0:
        raise InputError("need n >= 1 and d >= 0")
    if d == 0:
        return 0.0
    return math.sqrt(2.0 * d * max(0.0, math.log(math.e * n / d)) / n)


def hinge_losses(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - labels * scores)


def train_linear(
    Z: np.ndarray, labels: np.ndarray, *, epochs: int = 500
) -> tuple[np.ndarray, float]:
    """Projected subgradient descent on the mean hinge loss over ||w|| <= 1.

    Step 1/sqrt(t); returns the best iterate and its loss. Deterministic.
    """
    n, k = Z.shape
    w = np.zeros(k)
    best_w, best_loss = w.copy(), 1.0
    if k == 0:
        return best_w, best_loss
    for step in range(1, epochs + 1):
        margins = labels * (Z @ w)
        active = margins < 1.0
        grad = -(labels[active, None] * Z[active]).sum(axis=0) / n
        w = w - grad / math.sqrt(step)
        norm = float(np.linalg.norm(w))
        if norm > 1.0:
            w /= norm
        loss = float(hinge_losses(Z @ w, labels).mean())
        if loss < best_loss:
            best_w, best_loss = w.copy(), loss
    return best_w, best_loss


@dataclass(frozen=True, eq=False)
class LinearCutoffClassifier:
    """Sign of <w, u> on top-k coordinates u; `predict` lifts it to ambient points."""

    profile: SpectralProfile = field(repr=False)
    k: int
    w: np.ndarray = field(repr=False)

    def scores_low(self, U: np.ndarray) -> np.ndarray:
        return np.asarray(U, dtype=float) @ self.w

    def predict_low(self, U: np.ndarray) -> np.ndarray:
        return np.where(self.scores_low(U) >= 0.0, 1, -1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predict_low(self.profile.coordinates(X, self.k))


@dataclass(frozen=True, eq=False)
class CutoffReport:
    rows: list[CutoffRow]
    summary: CutoffSummary
    profile: SpectralProfile = field(repr=False)
    classifier: LinearCutoffClassifier | None = field(default=None, repr=False)


def select_cutoff(
    X: np.ndarray,
    labels: np.ndarray,
    delta: float,
    *,
    center: bool = False,
    epochs: int = 500,
) -> CutoffReport:
    """Tabulate the hinge-loss bound for k = 1..r and keep the smallest.

    Ties go to the smaller k. Constant labels give chosen_k = 0 (the constant
    classifier) with a warning.
    """
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    labels = np.asarray(labels, dtype=float)
    profile = spectral_profile(X, center=center)
    n = profile.n
    if labels.shape != (n,):
        raise InputError("one label per point is required")

    rows: list[CutoffRow] = []
    weights: dict[int, np.ndarray] = {}
    for k in range(1, profile.rank_limit + 1):
        Z = profile.coordinates(X, k)
        w, emp = train_linear(Z, labels, epochs=epochs)
        weights[k] = w
        eta = float(profile.eta[k])
        rows.append(
            CutoffRow(
                k=k,
                eta=eta,
                rademacher=rademacher_bound_euclid(k, eta, n),
                empirical_hinge=emp,
                hinge_bound=hinge_bound(k, eta, n, delta, emp),
                vc_reference=vc_rademacher_bound(k, n),
            )
        )

    warning = None
    chosen_k, chosen_bound = 0, None
    if np.unique(labels).size < 2:
        warning = "all labels are equal; the constant classifier is returned"
        logger.warning(warning)
    elif rows:
        best = min(rows, key=lambda r: (r.hinge_bound, r.k))
        chosen_k, chosen_bound = best.k, best.hinge_bound

    classifier = None
    if chosen_k:
        classifier = LinearCutoffClassifier(profile=profile, k=chosen_k, w=weights[chosen_k])
    summary = CutoffSummary(
        n=n,
        N=profile.N,
        delta=delta,
        centered=center,
        chosen_k=chosen_k,
        chosen_bound=chosen_bound,
        warning=warning,
    )
    logger.debug("cutoff: chosen k=%d bound=%s", chosen_k, chosen_bound)
    return CutoffReport(rows=rows, summary=summary, profile=profile, classifier=classifier)
