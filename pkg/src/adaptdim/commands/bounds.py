from __future__ import annotations

import typer

from ..lipschitz import generalization_bound, rademacher_bound_metric, rademacher_bound_perturbed
from ..metric import lipschitz_class_log_covering
from ..models import EuclidBoundReport, MetricBoundReport
from ..pca import hinge_bound, rademacher_bound_euclid, vc_rademacher_bound
from .common import emit, exit_on_error, settings_or_exit

app = typer.Typer(add_completion=False, help="Evaluate the closed-form bounds.")


@app.command("euclid")
def euclid(
    ctx: typer.Context,
    k: int = typer.Option(..., "--k", help="PCA cutoff."),
    eta: float = typer.Option(..., "--eta", help="Tail energy (1/n) sum_{j>k} s_j^2."),
    n: int = typer.Option(..., "--n", help="Sample size."),
    delta: float | None = typer.Option(None, "--delta"),
    hinge: float = typer.Option(0.0, "--hinge", help="Empirical hinge loss."),
) -> None:
    """Hinge-loss bound for linear classifiers after a rank-k projection."""
    settings = settings_or_exit(ctx, delta=delta)
    with exit_on_error():
        report = EuclidBoundReport(
            k=k,
            eta=eta,
            n=n,
            delta=settings.delta,
            empirical_hinge=hinge,
            rademacher=rademacher_bound_euclid(k, eta, n),
            hinge_bound=hinge_bound(k, eta, n, settings.delta, hinge),
            vc_reference=vc_rademacher_bound(k, n),
        )
        emit(report.model_dump_json(indent=2), None)


@app.command("metric")
def metric(
    ctx: typer.Context,
    D: float = typer.Option(..., "--D", help="Doubling dimension."),
    n: int = typer.Option(..., "--n", help="Sample size."),
    gamma: float = typer.Option(..., "--gamma", help="Margin in (0, 1)."),
    L: float | None = typer.Option(None, "--L", help="Lipschitz constant."),
    eta: float = typer.Option(0.0, "--eta", help="Normalized perturbation cost."),
    loss: float = typer.Option(0.0, "--loss", help="Sample margin loss."),
    delta: float | None = typer.Option(None, "--delta"),
) -> None:
    """Margin-loss bound for Lipschitz classifiers on a space of doubling dimension D."""
    settings = settings_or_exit(ctx, delta=delta, lipschitz_constant=L)
    with exit_on_error():
        lip = settings.lipschitz_constant
        report = MetricBoundReport(
            L=lip,
            n=n,
            D=D,
            eta_normalized=eta,
            gamma=gamma,
            delta=settings.delta,
            sample_margin_loss=loss,
            rademacher=rademacher_bound_metric(lip, n, D),
            rademacher_perturbed=rademacher_bound_perturbed(lip, n, D, eta),
            generalization_bound=generalization_bound(loss, lip, gamma, n, D, eta, settings.delta),
            log_covering_at_gamma=lipschitz_class_log_covering(lip, D, gamma),
        )
        emit(report.model_dump_json(indent=2), None)
