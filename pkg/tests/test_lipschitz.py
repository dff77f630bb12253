from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import two_clusters

from adaptdim.config import Settings
from adaptdim.errors import InputError
from adaptdim.lipschitz import (
    LipschitzClassifier,
    extend_predict,
    gamma_grid,
    generalization_bound,
    lipschitz_regularize,
    margin_loss,
    margin_losses,
    model_select,
    rademacher_bound_metric,
    rademacher_bound_perturbed,
    signs,
)
from adaptdim.metric import from_points


def test_margin_loss_examples() -> None:
    assert margin_loss(1.0, 1.0, 0.5) == 0.0
    assert margin_loss(-1.0, 1.0, 0.5) == 1.0
    assert margin_loss(0.25, 1.0, 0.5) == pytest.approx(0.5)
    assert margin_losses(np.array([1.0, 0.25]), np.array([1, 1]), 0.5).tolist() == [0.0, 0.5]
    with pytest.raises(InputError, match="gamma"):
        margin_loss(0.0, 1.0, 1.0)


def test_extension_between_two_anchors() -> None:
    targets = np.array([1.0, -1.0])
    queries = np.array([[1.0, 1.0], [0.0, 2.0], [10.0, 10.0], [0.5, 1.5]])
    assert extend_predict(targets, queries, 1.0).tolist() == [0.0, 1.0, 0.0, 0.5]


def test_extension_needs_one_distance_per_anchor() -> None:
    with pytest.raises(InputError):
        extend_predict(np.array([1.0, -1.0]), np.array([[1.0]]), 1.0)


def test_sign_of_zero_is_positive() -> None:
    assert signs(np.array([0.0, -0.1, 0.2])).tolist() == [1, -1, 1]


def test_consistent_targets_are_kept() -> None:
    d = np.array([[0.0, 1.0], [1.0, 0.0]])
    targets = np.array([0.3, -0.5])
    assert lipschitz_regularize(targets, d, 1.0).tolist() == [0.3, -0.5]


def test_inconsistent_targets_are_made_lipschitz() -> None:
    d = np.array([[0.0, 0.5], [0.5, 0.0]])
    out = lipschitz_regularize(np.array([1.0, -1.0]), d, 1.0)
    assert abs(out[0] - out[1]) <= 0.5 + 1e-12
    assert out[0] > 0 > out[1]


def test_rademacher_bound_examples() -> None:
    # K = 1 exactly
    assert rademacher_bound_metric(1.0, 4624, 2) == pytest.approx(8.0)
    assert rademacher_bound_metric(1.0, 10_000, 2) == pytest.approx(6.186, abs=1e-3)
    assert rademacher_bound_metric(1.0, 500, 1) == rademacher_bound_metric(1.0, 500, 2)


def test_rademacher_bound_decreases_with_n() -> None:
    values = [rademacher_bound_metric(1.0, n, 3) for n in (10, 100, 1000, 10_000)]
    assert values == sorted(values, reverse=True)


def test_perturbation_term_is_additive() -> None:
    base = rademacher_bound_metric(1.0, 100, 2)
    assert rademacher_bound_perturbed(1.0, 100, 2, 0.5) == pytest.approx(
        base + 0.5 / 100 ** (1 / 3)
    )
    with pytest.raises(InputError):
        rademacher_bound_perturbed(1.0, 100, 2, -1.0)


def test_generalization_bound_terms() -> None:
    n, delta, gamma = 400, 0.05, 0.5
    R = rademacher_bound_metric(1.0, n, 2)
    expected = (
        0.1
        + (2 / gamma) * R
        + math.sqrt(math.log(2.0) / n)
        + 3 * math.sqrt(math.log(4 / delta) / (2 * n))
    )
    assert generalization_bound(0.1, 1.0, gamma, n, 2, 0.0, delta) == pytest.approx(expected)
    with pytest.raises(InputError, match="delta"):
        generalization_bound(0.1, 1.0, gamma, n, 2, 0.0, 1.0)


def test_gamma_grid() -> None:
    assert gamma_grid(3) == [0.5, 0.25, 0.125]


def test_model_select_needs_four_labeled_points() -> None:
    small = two_clusters(0, 3)
    with pytest.raises(InputError, match="too small"):
        model_select(small, 0.05)
    unlabeled = from_points(list("abcd"), np.eye(4))
    with pytest.raises(InputError, match="labels"):
        model_select(unlabeled, 0.05)


def test_model_select_reproduces_separable_labels() -> None:
    sample = two_clusters(1, 16)
    selection = model_select(sample, 0.05, Settings(gamma_grid_size=4))
    model = selection.model
    assert model.kind == "points"
    assert [row.D for row in selection.table] == [1, 2, 3, 4]
    assert model.bound == min(row.bound for row in selection.table)
    assert model.gamma in gamma_grid(4)

    clf = selection.classifier
    assert clf.predict(clf.distances_to(sample.coords)).tolist() == sample.labels.tolist()


def test_model_select_ranges_over_distinct_points() -> None:
    base = two_clusters(1, 16)
    doubled = from_points(
        [f"{i}-{copy}" for copy in "ab" for i in base.ids],
        np.vstack([base.coords, base.coords]),
        np.concatenate([base.labels, base.labels]),
    )
    selection = model_select(doubled, 0.05, Settings(gamma_grid_size=2))
    # 32 rows but 16 distinct points: D stops at ceil(log2 16), not ceil(log2 32).
    assert [row.D for row in selection.table] == [1, 2, 3, 4]


def test_model_targets_are_lipschitz_in_normalized_units() -> None:
    sample = two_clusters(2, 20, noise=0.1)
    model = model_select(sample, 0.05, Settings(gamma_grid_size=3)).model
    idx = [sample.index_of(a.id) for a in model.anchors]
    targets = np.array([a.target for a in model.anchors])
    rho = sample.distances[np.ix_(idx, idx)] / model.scale_factor
    gaps = np.abs(targets[:, None] - targets[None, :])
    assert np.all(gaps <= model.L * rho + 1e-9)
    assert np.all(np.abs(targets) <= 1.0)


def test_classifier_rescales_query_distances() -> None:
    clf = LipschitzClassifier(
        anchor_ids=("a", "b"),
        targets=np.array([1.0, -1.0]),
        L=1.0,
        gamma=0.5,
        scale_factor=4.0,
    )
    assert clf.values(np.array([[2.0, 6.0]])).tolist() == [0.5]
    with pytest.raises(InputError, match="no anchor coordinates"):
        clf.distances_to(np.zeros((1, 2)))
