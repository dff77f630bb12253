from __future__ import annotations

import pytest
from conftest import DATA

from adaptdim.config import ConfigError, Settings, load_settings


def test_defaults() -> None:
    s = load_settings()
    assert s == Settings()
    assert s.delta == 0.05
    assert s.beta is None


def test_table_file_and_flag_precedence() -> None:
    s = load_settings(config_path=DATA / "adaptdim.example.toml", seed=3)
    assert s.beta == 0.25
    assert s.trainer_epochs == 300
    assert s.seed == 3


def test_flat_file(tmp_path) -> None:
    path = tmp_path / "flat.toml"
    path.write_text("delta = 0.1\ngamma_grid_size = 4\n", encoding="utf-8")
    s = load_settings(config_path=path)
    assert s.delta == 0.1
    assert s.gamma_grid_size == 4


def test_none_flags_fall_through_to_the_file(tmp_path) -> None:
    path = tmp_path / "c.toml"
    path.write_text("beta = 0.5\n", encoding="utf-8")
    assert load_settings(config_path=path, beta=None).beta == 0.5


def test_unknown_key_is_rejected(tmp_path) -> None:
    path = tmp_path / "c.toml"
    path.write_text("colour = 'red'\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="Unknown key"):
        load_settings(config_path=path)


def test_missing_file(tmp_path) -> None:
    with pytest.raises(ConfigError, match="not found"):
        load_settings(config_path=tmp_path / "nope.toml")


def test_broken_toml(tmp_path) -> None:
    path = tmp_path / "c.toml"
    path.write_text("delta = \n", encoding="utf-8")
    with pytest.raises(ConfigError, match="Failed to parse"):
        load_settings(config_path=path)


@pytest.mark.parametrize(
    ("key", "value", "message"),
    [
        ("delta", 1.0, "delta"),
        ("beta", 0.75, "beta"),
        ("seed", -1, "seed"),
        ("lipschitz_constant", 0.0, "lipschitz_constant"),
        ("trainer_epochs", 0, "trainer_epochs"),
        ("mwu_max_iterations", 2.5, "must be a number"),
    ],
)
def test_range_checks(key: str, value: float, message: str) -> None:
    with pytest.raises(ConfigError, match=message):
        load_settings(**{key: value})
