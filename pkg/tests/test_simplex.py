from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import linprog

from adaptdim.errors import NumericError
from adaptdim.simplex import solve_lp

NONE = np.zeros((0, 2))
EMPTY = np.zeros(0)


def test_packing_lp() -> None:
    res = solve_lp(
        np.array([-1.0, -1.0]), np.array([[1.0, 2.0], [3.0, 1.0]]), np.array([4.0, 6.0]),
        NONE, EMPTY,
    )
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-2.8)
    assert res.x == pytest.approx([1.6, 1.2])


def test_covering_lp_needs_phase_one() -> None:
    res = solve_lp(
        np.array([1.0, 1.0]), NONE, EMPTY, np.array([[1.0, 2.0], [2.0, 1.0]]), np.array([2.0, 2.0])
    )
    assert res.status == "optimal"
    assert res.objective == pytest.approx(4 / 3)


def test_infeasible_lp() -> None:
    res = solve_lp(
        np.array([1.0]), np.array([[1.0]]), np.array([1.0]), np.array([[1.0]]), np.array([2.0])
    )
    assert res.status == "infeasible"


def test_unbounded_lp() -> None:
    res = solve_lp(np.array([-1.0, 0.0]), np.array([[1.0, -1.0]]), np.array([1.0]), NONE, EMPTY)
    assert res.status == "unbounded"


def test_upper_bounds() -> None:
    res = solve_lp(
        np.array([-1.0, 0.0]), NONE, EMPTY, NONE, EMPTY, upper=np.array([3.0, np.inf])
    )
    assert res.objective == pytest.approx(-3.0)


def test_pivot_cap_raises() -> None:
    with pytest.raises(NumericError, match="cycling guard"):
        solve_lp(
            np.array([-1.0, -1.0]), np.array([[1.0, 1.0]]), np.array([1.0]), NONE, EMPTY,
            max_pivots=0,
        )


def test_matches_highs_on_random_programs() -> None:
    rng = np.random.default_rng(42)
    for _ in range(10):
        nv = 6
        cost = -rng.random(nv) + 0.3
        A_le = rng.random((4, nv))
        b_le = 0.5 * A_le.sum(axis=1)
        A_ge = rng.random((3, nv))
        b_ge = 0.3 * A_ge.sum(axis=1)
        upper = np.ones(nv)

        ours = solve_lp(cost, A_le, b_le, A_ge, b_ge, upper)
        dantzig = solve_lp(cost, A_le, b_le, A_ge, b_ge, upper, rule="dantzig")
        ref = linprog(
            cost,
            A_ub=np.vstack([A_le, -A_ge]),
            b_ub=np.concatenate([b_le, -b_ge]),
            bounds=[(0.0, 1.0)] * nv,
            method="highs",
        )
        assert ref.status == 0
        assert ours.status == "optimal"
        assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
        assert dantzig.objective == pytest.approx(ref.fun, abs=1e-7)
