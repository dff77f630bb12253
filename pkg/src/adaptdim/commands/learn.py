from __future__ import annotations

import csv
import io
from pathlib import Path

import typer
from pydantic import ValidationError

from ..errors import InputError
from ..ingest import read_query_distances, read_sample
from ..lipschitz import LipschitzClassifier, model_select
from ..models import ModelFile
from .common import emit, exit_on_error, load_valid_sample, log_run, settings_or_exit
from .inspect import FORMAT_HELP


def train(
    ctx: typer.Context,
    input: Path = typer.Option(..., "--input", "-i", help="Labeled points or matrix CSV."),
    labels: Path | None = typer.Option(None, "--labels", help="id,label CSV."),
    fmt: str = typer.Option("auto", "--format", help=FORMAT_HELP),
    delta: float | None = typer.Option(None, "--delta", help="Confidence parameter in (0, 1)."),
    beta: float | None = typer.Option(None, "--beta", help="Solver precision in (0, 1/2]."),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write the model JSON here."),
) -> None:
    """Train a Lipschitz classifier, choosing D and gamma by the generalization bound."""
    settings = settings_or_exit(ctx, delta=delta, beta=beta)
    with exit_on_error():
        log_run(
            command="train",
            inputs=[input],
            delta=settings.delta,
            beta=settings.beta,
            output=out,
            seed=settings.seed,
        )
        sample = load_valid_sample(input, settings, labels=labels, fmt=fmt)
        selection = model_select(sample, settings.delta, settings)
        emit(selection.model.model_dump_json(indent=2), out)


def load_model(path: Path) -> ModelFile:
    try:
        return ModelFile.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}") from e
    except ValidationError as e:
        raise InputError(f"Invalid model file: {path}", details=str(e)) from e


def predict(
    ctx: typer.Context,
    model: Path = typer.Option(..., "--model", "-m", help="Model JSON written by train."),
    query: Path = typer.Option(
        ..., "--query", "-q", help="Points CSV or query-to-anchor distances."
    ),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write predictions here."),
) -> None:
    """Evaluate a trained classifier: id,value,sign per query point."""
    settings = settings_or_exit(ctx)
    with exit_on_error():
        log_run(command="predict", inputs=[model, query], output=out, seed=settings.seed)
        clf = LipschitzClassifier.from_model(load_model(model))
        if clf.anchor_coords is not None:
            points = read_sample(query, fmt="points")
            assert points.coords is not None
            ids = list(points.ids)
            distances = clf.distances_to(points.coords)
        else:
            ids, distances = read_query_distances(query, clf.anchor_ids)

        values = clf.values(distances)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "value", "sign"])
        for pid, v in zip(ids, values, strict=True):
            w.writerow([pid, repr(float(v)), 1 if v >= 0 else -1])
        emit(buf.getvalue(), out)
