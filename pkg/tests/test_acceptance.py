"""End-to-end checks against exact references on small seeded instances."""

from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import random_points, segment, two_clusters

from adaptdim.config import Settings
from adaptdim.hierarchy import build_hierarchy, nearest_in_level, validate_hierarchy
from adaptdim.lipschitz import model_select, rademacher_bound_metric
from adaptdim.metric import estimate_ddim, normalize, sub_sample
from adaptdim.oracle import (
    brute_force_ldm,
    check_assignment,
    exact_ddim,
    feasibility_witness,
    mc_rademacher_lipschitz,
    mc_rademacher_linear,
    reference_lp,
)
from adaptdim.pca import rademacher_bound_euclid, select_cutoff, spectral_profile
from adaptdim.pipeline import reduce_dimension
from adaptdim.rounding import audit
from adaptdim.solver import minimize_cost

COST_FACTOR = 336
DIM_FACTOR = 4 * math.log2(252)


def _small_instances(count: int, sizes: range):
    for seed in range(count):
        n = sizes[seed % len(sizes)]
        yield normalize(random_points(100 + seed, n))


def test_rounded_cost_and_dimension_against_brute_force() -> None:
    for norm in _small_instances(50, range(5, 9)):
        run = reduce_dimension(norm, 1)
        best = brute_force_ldm(norm, 1)
        c_star = best.cost * norm.scale_factor
        assert run.rounded.mapping_cost <= COST_FACTOR * c_star + 1e-9

        T = run.rounded.T
        assert estimate_ddim(sub_sample(norm, T)).value <= DIM_FACTOR * 1 + 2
        assert audit(run.rounded, run.instance).ok
        assert run.fractional.overshoot <= 1.0 + run.fractional.beta + 1e-9


def test_lp_sandwich() -> None:
    for norm in _small_instances(8, range(4, 9)):
        run = reduce_dimension(norm, 1)
        best = brute_force_ldm(norm, 1)
        witness = feasibility_witness(run.program, best.T)
        assert check_assignment(run.program, witness) == []

        ref = reference_lp(run.program)
        assert ref.status == "optimal"
        assert ref.objective <= run.program.objective_value(witness) + 1e-7
        assert run.program.objective_value(witness) <= best.cost + 1e-9


def test_bisection_without_presolve_matches_the_reference() -> None:
    beta = 0.5
    for sample in (segment(2), segment(3), random_points(7, 3)):
        norm = normalize(sample)
        run = reduce_dimension(norm, 1)
        ref = reference_lp(run.program)
        frac = minimize_cost(run.program, beta, presolve=False)
        assert frac.objective <= (1 + 3 * beta) * ref.objective + 1e-9
        assert frac.overshoot <= 1 + beta + 1e-9


def test_linear_rademacher_bound_holds() -> None:
    rng = np.random.default_rng(2024)
    for seed in range(20):
        n = int(rng.integers(8, 65))
        N = int(rng.integers(2, 17))
        X = rng.standard_normal((n, N))
        X /= np.maximum(1.0, np.linalg.norm(X, axis=1, keepdims=True))
        profile = spectral_profile(X)
        mc = mc_rademacher_linear(X, draws=2000, seed=seed)
        for k in range(profile.rank_limit + 1):
            bound = rademacher_bound_euclid(k, float(profile.eta[k]), n)
            assert mc.mean <= bound + 3 * mc.stderr + 1e-12


@pytest.mark.slow
def test_lipschitz_rademacher_bound_holds() -> None:
    for seed in range(20):
        norm = normalize(random_points(300 + seed, 4 + seed % 7))
        ddim = exact_ddim(norm).value
        mc = mc_rademacher_lipschitz(norm, 1.0, draws=500, seed=seed)
        assert mc.mean <= rademacher_bound_metric(1.0, norm.n, ddim) + 3 * mc.stderr


def test_pca_residual_and_padding() -> None:
    rng = np.random.default_rng(7)
    for _ in range(100):
        n, N = int(rng.integers(3, 30)), int(rng.integers(1, 8))
        X = rng.standard_normal((n, N)) / (2.0 * math.sqrt(N))
        profile = spectral_profile(X)
        Z = X / profile.scale
        for k in range(profile.rank_limit + 1):
            B = profile.basis(k)
            residual = ((Z - Z @ B @ B.T) ** 2).sum() / n
            assert profile.eta[k] == pytest.approx(residual, abs=1e-10)

    for seed in range(5):
        sample = two_clusters(seed, 20, noise=0.05)
        X = sample.coords
        padded = np.hstack([X, np.zeros((X.shape[0], 3))])
        a = select_cutoff(X, sample.labels, 0.05, epochs=50)
        b = select_cutoff(padded, sample.labels, 0.05, epochs=50)
        assert a.summary.chosen_k == b.summary.chosen_k
        assert [r.model_dump() for r in a.rows] == [r.model_dump() for r in b.rows]


def test_extension_is_lipschitz_on_random_queries() -> None:
    sample = two_clusters(4, 24, noise=0.05)
    selection = model_select(sample, 0.05, Settings(gamma_grid_size=4))
    clf = selection.classifier
    rng = np.random.default_rng(11)
    A = rng.uniform(-0.5, 1.5, size=(10_000, 2))
    B = rng.uniform(-0.5, 1.5, size=(10_000, 2))
    fa = clf.values(clf.distances_to(A))
    fb = clf.values(clf.distances_to(B))
    rho = np.linalg.norm(A - B, axis=1) / clf.scale_factor
    assert np.all(np.abs(fa - fb) <= clf.L * rho + 1e-9)

    at_anchors = clf.values(clf.distances_to(clf.anchor_coords))
    assert at_anchors == pytest.approx(clf.targets, abs=1e-12)


def test_hierarchy_invariants_at_scale() -> None:
    rng = np.random.default_rng(8)
    for seed in range(100):
        n = int(rng.integers(2, 501))
        norm = normalize(random_points(500 + seed, n))
        h = build_hierarchy(norm)
        assert validate_hierarchy(h, norm).ok
        d = norm.distances
        for i in range(h.t + 1):
            gaps = d[:, h.members(i)].min(axis=1)
            assert np.all(gaps < 2.0 * 2.0**-i)
        v = int(rng.integers(0, norm.n))
        i = int(rng.integers(0, h.t + 1))
        assert d[v, nearest_in_level(h, v, i)] == d[v, h.members(i)].min()


def _zero_one_error(selection, sample) -> float:
    clf = selection.classifier
    pred = clf.predict(clf.distances_to(sample.coords))
    return float(np.mean(pred != sample.labels))


@pytest.mark.slow
def test_learning_sanity_on_two_clusters() -> None:
    settings = Settings(gamma_grid_size=4)
    for seed in range(10):
        bounds = []
        for n in (32, 64, 128):
            train = two_clusters(seed, n, noise=0.05)
            held_out = two_clusters(1000 + seed, n, noise=0.05)
            selection = model_select(train, 0.05, settings)
            model = selection.model
            bounds.append(model.bound)
            row = next(r for r in model.table if r.D == model.D)
            slack = model.bound - row.sample_margin_loss
            assert _zero_one_error(selection, held_out) <= (
                _zero_one_error(selection, train) + slack
            )
        assert bounds == sorted(bounds, reverse=True)


def test_model_selection_is_deterministic() -> None:
    sample = two_clusters(6, 20, noise=0.05)
    first = model_select(sample, 0.05, Settings(gamma_grid_size=3)).model
    second = model_select(sample, 0.05, Settings(gamma_grid_size=3)).model
    assert first.model_dump_json() == second.model_dump_json()
