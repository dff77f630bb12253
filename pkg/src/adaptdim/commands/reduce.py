from __future__ import annotations

import math
from pathlib import Path

import typer

from ..errors import InputError
from ..hierarchy import build_hierarchy
from ..metric import DdimEstimate, normalize
from ..models import ReduceResult, ReduceSweep
from ..oracle import run_oracle
from ..pipeline import reduce_dimension
from ..program import dump_lp
from .common import emit, exit_on_error, load_valid_sample, log_run, settings_or_exit
from .inspect import FORMAT_HELP


def reduce(
    ctx: typer.Context,
    input: Path = typer.Option(..., "--input", "-i", help="Points or distance-matrix CSV."),
    fmt: str = typer.Option("auto", "--format", help=FORMAT_HELP),
    D: int | None = typer.Option(None, "--D", help="Target doubling dimension (>= 1)."),
    sweep: bool = typer.Option(False, "--sweep", help="Run D = 1..ceil(log2 n)."),
    beta: float | None = typer.Option(None, "--beta", help="Solver precision in (0, 1/2]."),
    stats: bool = typer.Option(False, "--stats", help="Include solver statistics."),
    oracle: bool = typer.Option(False, "--oracle", help="Compare with exact references."),
    dump: Path | None = typer.Option(None, "--dump-lp", help="Write the program as text."),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write the result here."),
) -> None:
    """Find a low-distortion subset of bounded doubling dimension."""
    settings = settings_or_exit(ctx, beta=beta)
    with exit_on_error():
        log_run(
            command="reduce",
            inputs=[input],
            beta=settings.beta,
            D=D,
            sweep=sweep,
            output=out,
            seed=settings.seed,
            stats=stats,
            oracle=oracle,
        )
        if (D is None) == (not sweep):
            raise InputError("Use exactly one of --D or --sweep")
        if D is not None and D < 1:
            raise InputError("--D must be at least 1")

        sample = load_valid_sample(input, settings, fmt=fmt)
        norm = normalize(sample)
        h = build_hierarchy(norm)
        if sweep:
            top = max(1, math.ceil(math.log2(norm.n))) if norm.n > 1 else 1
            dims = list(range(1, top + 1))
        else:
            dims = [D]

        cache: dict[tuple[int, ...], DdimEstimate] = {}
        runs: list[ReduceResult] = []
        for dim in dims:
            run = reduce_dimension(norm, dim, settings, hierarchy=h, ddim_cache=cache)
            result = run.result(stats=stats)
            if oracle:
                result.oracle = run_oracle(run, settings)
            if dump is not None and len(dims) == 1:
                emit(dump_lp(run.program), dump)
            runs.append(result)

        if sweep:
            emit(ReduceSweep(runs=runs).model_dump_json(indent=2), out)
        else:
            emit(runs[0].model_dump_json(indent=2), out)
