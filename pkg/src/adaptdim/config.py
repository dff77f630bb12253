from __future__ import annotations

import dataclasses
import pathlib
import sys
from dataclasses import dataclass
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


@dataclass(frozen=True)
class Settings:
    delta: float = 0.05
    # None means the solver default min(1/4, 1/(t*log2 n)).
    beta: float | None = None
    seed: int = 0

    # metric-core
    triangle_full_check_max: int = 200
    ddim_grid_threshold: int = 512
    ddim_grid_size: int = 64

    # lp-solver
    mwu_max_iterations: int = 2_000_000
    bisection_max_steps: int = 40
    reference_max_variables: int = 200

    # learning
    trainer_epochs: int = 500
    gamma_grid_size: int = 10
    lipschitz_constant: float = 1.0


class ConfigError(RuntimeError):
    pass


_FIELDS = {f.name: f for f in dataclasses.fields(Settings)}


def _load_toml(path: pathlib.Path) -> dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except Exception as e:
        raise ConfigError(f"Failed to parse config TOML: {path}: {e}") from e
    # Allow either a flat file or an [adaptdim] table.
    section = data.get("adaptdim", data)
    if not isinstance(section, dict):
        raise ConfigError(f"Config section [adaptdim] must be a table: {path}")
    return section


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    default = _FIELDS[key].default
    try:
        if key == "beta" or isinstance(default, float):
            return float(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{key} must be a number, got {value!r}") from e
    return value


def load_settings(*, config_path: pathlib.Path | None = None, **explicit: Any) -> Settings:
    """Load settings using precedence:

    1) explicit keyword args (CLI flags)
    2) the TOML file passed with --config
    3) defaults

    Environment variables are never consulted, so a run is fully described by
    its flags and config file.
    """

    unknown = sorted(set(explicit) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"Unknown setting(s): {', '.join(unknown)}")

    file_cfg: dict[str, Any] = _load_toml(config_path) if config_path is not None else {}
    unknown = sorted(set(file_cfg) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"Unknown key(s) in {config_path}: {', '.join(unknown)}")

    def pick(key: str) -> Any:
        if explicit.get(key) is not None:
            return explicit[key]
        if file_cfg.get(key) not in (None, ""):
            return file_cfg[key]
        return _FIELDS[key].default

    values = {key: _coerce(key, pick(key)) for key in _FIELDS}

    if not 0.0 < values["delta"] < 1.0:
        raise ConfigError("delta must lie in (0, 1)")
    if values["beta"] is not None and not 0.0 < values["beta"] <= 0.5:
        raise ConfigError("beta must lie in (0, 1/2]")
    if values["seed"] < 0:
        raise ConfigError("seed must be non-negative")
    if values["lipschitz_constant"] <= 0:
        raise ConfigError("lipschitz_constant must be positive")
    for key in (
        "triangle_full_check_max",
        "ddim_grid_threshold",
        "ddim_grid_size",
        "mwu_max_iterations",
        "bisection_max_steps",
        "reference_max_variables",
        "trainer_epochs",
        "gamma_grid_size",
    ):
        if values[key] < 1:
            raise ConfigError(f"{key} must be at least 1")

    return Settings(**values)
