from __future__ import annotations

import csv
import io
from pathlib import Path

import typer

from ..errors import InputError
from ..models import CutoffRow
from ..pca import select_cutoff
from .common import emit, exit_on_error, load_valid_sample, log_run, settings_or_exit

TABLE_COLUMNS = ("k", "eta", "rademacher", "hinge_bound", "empirical_hinge", "vc_reference")


def table_csv(rows: list[CutoffRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in rows:
        data = row.model_dump()
        w.writerow([data["k"]] + [repr(float(data[c])) for c in TABLE_COLUMNS[1:]])
    return buf.getvalue()


def pca_cutoff(
    ctx: typer.Context,
    input: Path = typer.Option(..., "--input", "-i", help="Labeled points CSV."),
    labels: Path | None = typer.Option(None, "--labels", help="id,label CSV."),
    delta: float | None = typer.Option(None, "--delta", help="Confidence parameter in (0, 1)."),
    center: bool = typer.Option(False, "--center", help="Subtract the column means first."),
    table: Path | None = typer.Option(None, "--table", help="Write the per-k CSV here."),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write the JSON summary here."),
) -> None:
    """Choose the PCA cutoff k minimizing the hinge-loss generalization bound."""
    settings = settings_or_exit(ctx, delta=delta)
    with exit_on_error():
        log_run(
            command="pca-cutoff",
            inputs=[input],
            delta=settings.delta,
            center=center,
            output=out,
            seed=settings.seed,
        )
        sample = load_valid_sample(input, settings, labels=labels, fmt="points")
        if sample.coords is None:
            raise InputError("pca-cutoff needs a points CSV")
        if sample.labels is None:
            raise InputError("pca-cutoff needs labels (a label column or --labels)")
        report = select_cutoff(
            sample.coords,
            sample.labels,
            settings.delta,
            center=center,
            epochs=settings.trainer_epochs,
        )
        emit(table_csv(report.rows), table)
        emit(report.summary.model_dump_json(indent=2), out)
