from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from adaptdim.hierarchy import build_hierarchy
from adaptdim.metric import MetricSample, from_points, normalize
from adaptdim.program import LdmInstance, LdmProgram, build_program

DATA = Path(__file__).resolve().parents[1] / "data"


def segment(n: int) -> MetricSample:
    xs = np.arange(n, dtype=float) / max(n - 1, 1)
    return from_points([f"p{k}" for k in range(n)], xs[:, None])


def random_points(seed: int, n: int, dim: int = 2) -> MetricSample:
    rng = np.random.default_rng(seed)
    return from_points([f"q{k}" for k in range(n)], rng.random((n, dim)))


def two_clusters(seed: int, n: int, *, noise: float = 0.0) -> MetricSample:
    """Gaussian blobs around (0, 0) and (1, 0) labeled -1 / +1, with label noise."""
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 2 == 0, -1.0, 1.0)
    centers = np.where(y[:, None] > 0, [[1.0, 0.0]], [[0.0, 0.0]])
    X = centers + 0.05 * rng.standard_normal((n, 2))
    flip = rng.random(n) < noise
    y = np.where(flip, -y, y)
    return from_points([f"s{k}" for k in range(n)], X, y)


def program_for(sample: MetricSample, D: float = 1) -> LdmProgram:
    norm = normalize(sample)
    return build_program(LdmInstance(sample=norm, hierarchy=build_hierarchy(norm), D=D))


@pytest.fixture
def seg8() -> MetricSample:
    return segment(8)


@pytest.fixture
def seg8_program(seg8: MetricSample) -> LdmProgram:
    return program_for(seg8, 1)


@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[[str, str], Path]:
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
