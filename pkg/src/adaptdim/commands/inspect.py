from __future__ import annotations

from pathlib import Path

import typer

from ..hierarchy import build_hierarchy, validate_hierarchy
from ..ingest import read_sample
from ..metric import estimate_ddim, normalize, validate_metric
from ..models import DdimReport, DdimWitnessModel, InspectReport
from .common import emit, exit_on_error, load_valid_sample, log_run, settings_or_exit

FORMAT_HELP = "Input format: auto | points | matrix."


def validate(
    ctx: typer.Context,
    input: Path = typer.Option(..., "--input", "-i", help="Points or distance-matrix CSV."),
    labels: Path | None = typer.Option(None, "--labels", help="id,label CSV."),
    fmt: str = typer.Option("auto", "--format", help=FORMAT_HELP),
    ddim: bool = typer.Option(False, "--ddim", help="Also estimate the doubling dimension."),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write the report here."),
) -> None:
    """Check the metric axioms and report the first violating triple."""
    settings = settings_or_exit(ctx)
    with exit_on_error():
        log_run(command="validate", inputs=[input], seed=settings.seed, output=out)
        sample = read_sample(input, fmt=fmt, labels_path=labels)  # type: ignore[arg-type]
        report = validate_metric(
            sample, seed=settings.seed, full_check_max=settings.triangle_full_check_max
        )
        if not report.ok:
            emit(report.model_dump_json(indent=2), out)
            typer.echo(f"Error: {report.message}", err=True)
            raise typer.Exit(code=2)

        norm = normalize(sample)
        estimate = None
        if ddim:
            est = estimate_ddim(
                norm, grid_threshold=settings.ddim_grid_threshold, grid_size=settings.ddim_grid_size
            )
            estimate = DdimReport(
                value=est.value,
                witness=DdimWitnessModel(
                    center=norm.ids[est.center],
                    radius=est.radius * norm.scale_factor,
                    packing_size=est.packing_size,
                ),
            )
        result = InspectReport(
            validation=report,
            n_distinct=norm.n,
            diameter=norm.diameter() * norm.scale_factor,
            min_distance=norm.min_distance() * norm.scale_factor if norm.n > 1 else 0.0,
            ddim=estimate,
        )
        emit(result.model_dump_json(indent=2), out)


def hierarchy(
    ctx: typer.Context,
    input: Path = typer.Option(..., "--input", "-i", help="Points or distance-matrix CSV."),
    fmt: str = typer.Option("auto", "--format", help=FORMAT_HELP),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write the hierarchy here."),
) -> None:
    """Build and check the net hierarchy of the normalized sample."""
    settings = settings_or_exit(ctx)
    with exit_on_error():
        log_run(command="hierarchy", inputs=[input], seed=settings.seed, output=out)
        sample = load_valid_sample(input, settings, fmt=fmt)
        norm = normalize(sample)
        report = validate_hierarchy(build_hierarchy(norm), norm)
        emit(report.model_dump_json(indent=2), out)
        if not report.ok:
            typer.echo(f"Error: hierarchy check failed: {report.violation}", err=True)
            raise typer.Exit(code=3)
