"""
Command line interface of morse-witten-lab.

Exit codes: 0 pass, 1 verification failure, 2 usage or configuration
error, 3 numerical failure.
"""

import asyncio
import sys
from typing import Any, Dict, List, Optional, Sequence

import click

from .config import get_settings
from .models.experiment import ExperimentConfig
from .services.orchestrator import ExperimentOrchestrator
from .utils.exceptions import MorseWittenError
from .utils.logging import setup_logging

EXIT_PASS = 0
EXIT_FAILED = 1


def _overrides(
    degrees: Optional[str],
    h_values: Optional[str],
    window: Optional[str],
    kappa: Sequence[str],
    scheme: Optional[str],
    seed: Optional[int],
) -> Dict[str, Any]:
    return {
        "degrees": degrees,
        "h_list": h_values,
        "window": window,
        "kappa": ",".join(kappa) if kappa else None,
        "scheme": scheme,
        "seed": seed,
    }


def _load(paths: Sequence[str], overrides: Dict[str, Any]) -> List[ExperimentConfig]:
    if not paths:
        raise click.UsageError("at least one --config is required")
    return [ExperimentConfig.from_file(path, overrides) for path in paths]


def experiment_options(func):
    """Options shared by the pipeline commands."""
    options = [
        click.option("--config", "configs", multiple=True, type=click.Path(), help="Experiment file (repeatable)"),
        click.option("--out", "out", type=click.Path(file_okay=False), help="Root of the result directories"),
        click.option("--degrees", help="Form degrees, e.g. 0,1"),
        click.option("--h", "h_values", help="h values, e.g. 0.3,0.2,0.1"),
        click.option("--window", help="Energy window a,b (inf allowed)"),
        click.option("--kappa", multiple=True, help="Pair override UPPER-LOWER=VALUE (repeatable)"),
        click.option("--scheme", type=click.Choice(["dec", "stencil"]), help="Discretisation scheme"),
        click.option("--seed", type=int, help="Random seed"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run_pipeline(command: str, configs, out, degrees, h_values, window, kappa, scheme, seed) -> int:
    overrides = _overrides(degrees, h_values, window, kappa, scheme, seed)
    try:
        experiments = _load(configs, overrides)
    except MorseWittenError as exc:
        click.echo(f"{exc.error_code}: {exc.message}", err=True)
        return exc.exit_code
    names = [e.name for e in experiments]
    if len(set(names)) != len(names):
        raise click.UsageError(f"experiment names must be distinct: {names}")
    orchestrator = ExperimentOrchestrator(get_settings(), out)
    batch = asyncio.run(orchestrator.run_many(command, experiments))
    for outcome in batch.outcomes:
        status = "ok" if outcome.success else f"exit {outcome.exit_code}"
        if command == "verify" and outcome.exit_code == EXIT_FAILED:
            status = "FAIL"
        elif command == "verify" and outcome.success:
            status = "PASS"
        click.echo(f"{outcome.name}: {status}  ({outcome.output_dir}, {outcome.execution_time:.1f}s)")
        if outcome.error:
            click.echo(f"  {outcome.error['error_code']}: {outcome.error['message']}", err=True)
    return batch.exit_code


@click.group()
@click.version_option(package_name="morse-witten-lab")
def main() -> None:
    """Morse-Barannikov complexes and small eigenvalues of Witten Laplacians."""
    setup_logging(get_settings().logging)


@main.command()
@experiment_options
def analyze(**kwargs) -> None:
    """Classify critical points and write predicted small eigenvalues."""
    sys.exit(_run_pipeline("analyze", **kwargs))


@main.command()
@experiment_options
def verify(**kwargs) -> None:
    """Sweep h, compare measured eigenvalues with predictions and fit Arrhenius lines."""
    sys.exit(_run_pipeline("verify", **kwargs))


@main.command()
@experiment_options
def persistence(**kwargs) -> None:
    """Persistence pairing and classification only."""
    sys.exit(_run_pipeline("persistence", **kwargs))


@main.command()
@click.option("--seed", type=int, default=0, show_default=True, help="Seed of the randomized suites")
@click.option("--inject-fault", is_flag=True, help="Corrupt one incidence sign; the boundary suite must fail")
def selftest(seed: int, inject_fault: bool) -> None:
    """Run the built-in Betti, boundary, oracle, supersymmetry and duality suites."""
    summary = ExperimentOrchestrator(get_settings()).selftest(seed=seed, inject_fault=inject_fault)
    click.echo(summary.render(), nl=False)
    sys.exit(EXIT_PASS if summary.passed else EXIT_FAILED)


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def report(directory: str) -> None:
    """Recompute every verdict of a finished run from its CSV tables."""
    try:
        check = ExperimentOrchestrator(get_settings()).report(directory)
    except MorseWittenError as exc:
        click.echo(f"{exc.error_code}: {exc.message}", err=True)
        sys.exit(exc.exit_code)
    click.echo(f"verdict: {'PASS' if check.report.passed else 'FAIL'}")
    for mismatch in check.mismatches:
        click.echo(f"  mismatch {mismatch}", err=True)
    sys.exit(EXIT_PASS if check.consistent and check.report.passed else EXIT_FAILED)


if __name__ == "__main__":
    main()
