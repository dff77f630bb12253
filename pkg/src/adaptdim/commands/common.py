from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import typer
from pydantic import ValidationError

from ..config import ConfigError, Settings, load_settings
from ..errors import AdaptDimError, InputError
from ..ingest import read_sample
from ..metric import MetricSample, validate_metric
from ..models import RunConfig

logger = logging.getLogger(__name__)


def settings_or_exit(ctx: typer.Context, **overrides: Any) -> Settings:
    obj = ctx.obj or {}
    try:
        return load_settings(config_path=obj.get("config"), seed=obj.get("seed"), **overrides)
    except ConfigError as e:
        typer.echo(str(e), err=True)
        raise typer.Exit(code=2) from e


def log_run(**fields: Any) -> None:
    try:
        logger.debug("run: %s", RunConfig(**fields).model_dump_json())
    except ValueError as e:
        raise InputError(str(e)) from e


@contextmanager
def exit_on_error() -> Iterator[None]:
    """Map package errors to exit codes; anything else is unexpected (5)."""
    try:
        yield
    except typer.Exit:
        raise
    except InputError as e:
        typer.echo(f"Error: {e}", err=True)
        if e.details:
            typer.echo(f"  {e.details}", err=True)
        raise typer.Exit(code=e.exit_code) from e
    except AdaptDimError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=e.exit_code) from e
    except (ConfigError, ValidationError) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=2) from e
    except Exception as e:
        logger.debug("unexpected failure", exc_info=True)
        typer.echo(f"Unexpected error: {e}", err=True)
        raise typer.Exit(code=5) from e


def emit(text: str, out: Path | None) -> None:
    """Write an artifact to `out`, or to stdout."""
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        typer.echo(text, nl=False)
        return
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"Cannot write {out}: {e}") from e
    logger.info("wrote %s", out)


def load_valid_sample(
    path: Path,
    settings: Settings,
    *,
    labels: Path | None = None,
    fmt: str = "auto",
) -> MetricSample:
    """Read a sample and refuse it (exit 2) unless it is a metric."""
    sample = read_sample(path, fmt=fmt, labels_path=labels)  # type: ignore[arg-type]
    report = validate_metric(
        sample, seed=settings.seed, full_check_max=settings.triangle_full_check_max
    )
    if not report.ok:
        typer.echo(f"Error: {report.message}", err=True)
        raise typer.Exit(code=2)
    return sample
