"""Main CLI entry point."""

import logging

import click
from rich.console import Console
from rich.logging import RichHandler

from hebbnet import __version__
from hebbnet.cli.context import CliContext
from hebbnet.core.exceptions import HebbnetError

# Pass context to commands
pass_context = click.make_pass_decorator(CliContext)


def configure_logging(verbose: bool, console: Console | None = None) -> None:
    """Route the ``hebbnet`` logger through Rich; DEBUG when verbose."""
    logger = logging.getLogger("hebbnet")
    logger.handlers.clear()
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=verbose,
        rich_tracebacks=verbose,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    logger.propagate = False


@click.group()
@click.option(
    "-v", "--verbose",
    is_flag=True,
    help="Enable verbose output",
)
@click.version_option(version=__version__, prog_name="hebbnet")
@click.pass_context
def cli(ctx: click.Context, verbose: bool) -> None:
    """Hebbnet - backprop-free SoftHebb training and analysis.

    Train width-scaled SoftHebb networks layer by layer, fit a linear
    classifier on top, and inspect what the neurons learned.
    """
    configure_logging(verbose)
    ctx.obj = CliContext.create(verbose=verbose)


# Import and register commands
from hebbnet.cli.commands import (  # noqa: E402
    analyze,
    bench,
    config,
    evaluate,
    train,
)

cli.add_command(train.train)
cli.add_command(evaluate.eval_command)
cli.add_command(analyze.analyze)
cli.add_command(bench.bench)
cli.add_command(config.config)


def main() -> None:
    """Main entry point."""
    try:
        cli()
    except HebbnetError as e:
        console = Console(stderr=True)
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(e.exit_code) from e
    except KeyboardInterrupt:
        raise SystemExit(130) from None


if __name__ == "__main__":
    main()
