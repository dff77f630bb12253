from __future__ import annotations

from pathlib import Path

import typer

from .commands.bounds import app as bounds_app
from .commands.cutoff import pca_cutoff
from .commands.inspect import hierarchy, validate
from .commands.learn import predict, train
from .commands.reduce import reduce
from .utils.logging import configure_logging

app = typer.Typer(add_completion=False, help="Adaptive metric dimensionality reduction.")

app.command("validate")(validate)
app.command("hierarchy")(hierarchy)
app.command("reduce")(reduce)
app.command("pca-cutoff")(pca_cutoff)
app.command("train")(train)
app.command("predict")(predict)
app.add_typer(bounds_app, name="bounds")


@app.callback()
def main(
    ctx: typer.Context,
    config: Path | None = typer.Option(None, "--config", help="TOML settings file."),
    seed: int | None = typer.Option(None, "--seed", help="Seed for every random stream."),
    debug: bool = typer.Option(False, "--debug", help="Debug logging on stderr."),
) -> None:
    configure_logging(debug=debug)
    ctx.obj = {"config": config, "seed": seed, "debug": debug}
