from __future__ import annotations

import pytest
from pydantic import ValidationError

from adaptdim.models import ModelFile, ReduceSweep, RunConfig

MODEL = {
    "kind": "points",
    "D": 1,
    "L": 1.0,
    "gamma": 0.5,
    "scale_factor": 2.0,
    "eta_total": 0.0,
    "eta_normalized": 0.0,
    "delta": 0.05,
    "bound": 3.0,
    "anchors": [{"id": "a", "target": 1.0, "coords": [0.0, 1.0]}],
}


def test_model_file_accepts_a_points_model() -> None:
    model = ModelFile.model_validate(MODEL)
    assert model.anchors[0].coords == [0.0, 1.0]


def test_points_model_needs_coordinates() -> None:
    bad = {**MODEL, "anchors": [{"id": "a", "target": 1.0}]}
    with pytest.raises(ValidationError):
        ModelFile.model_validate(bad)


def test_points_model_needs_one_dimension() -> None:
    anchors = [
        {"id": "a", "target": 1.0, "coords": [0.0]},
        {"id": "b", "target": -1.0, "coords": [0.0, 1.0]},
    ]
    with pytest.raises(ValidationError):
        ModelFile.model_validate({**MODEL, "anchors": anchors})


def test_matrix_model_without_coordinates() -> None:
    model = ModelFile.model_validate(
        {**MODEL, "kind": "matrix", "anchors": [{"id": "a", "target": 0.5}]}
    )
    assert model.anchors[0].coords is None


def test_model_file_rejects_unknown_fields() -> None:
    with pytest.raises(ValidationError):
        ModelFile.model_validate({**MODEL, "extra": 1})


def test_targets_stay_in_unit_interval() -> None:
    with pytest.raises(ValidationError):
        ModelFile.model_validate({**MODEL, "anchors": [{"id": "a", "target": 1.5, "coords": [0]}]})


def test_gamma_is_open_interval() -> None:
    with pytest.raises(ValidationError):
        ModelFile.model_validate({**MODEL, "gamma": 1.0})


def test_sweep_needs_a_run() -> None:
    with pytest.raises(ValidationError):
        ReduceSweep.model_validate({"runs": []})


def test_run_config_rejects_d_with_sweep() -> None:
    with pytest.raises(ValidationError):
        RunConfig(command="reduce", D=2, sweep=True)


def test_run_config_rejects_bad_delta() -> None:
    with pytest.raises(ValidationError):
        RunConfig(command="train", delta=0.0)
