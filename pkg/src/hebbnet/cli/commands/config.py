"""Configuration command."""

import json
from pathlib import Path
from typing import Any

import click
from rich.syntax import Syntax
from rich.table import Table

from hebbnet.cli.context import CliContext
from hebbnet.core.exceptions import ConfigError, HebbnetError
from hebbnet.storage.config import (
    ConfigLoader,
    available_presets,
    dumps_config,
    read_config_file,
    set_dotted,
    write_config,
)

pass_context = click.make_pass_decorator(CliContext)


def parse_assignments(assignments: tuple[str, ...]) -> dict[str, Any]:
    """``key.path=value`` pairs; values are parsed as JSON when possible."""
    overrides: dict[str, Any] = {}
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"Expected key=value, got '{item}'")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        overrides = set_dotted(overrides, key.strip(), value)
    return overrides


@click.group()
def config() -> None:
    """Inspect presets and resolve run configs."""
    pass


@config.command("presets")
@pass_context
def list_presets(ctx: CliContext) -> None:
    """List shipped presets."""
    table = Table(title="Presets")
    table.add_column("Name", style="cyan")
    table.add_column("Dataset")
    table.add_column("Mode")
    table.add_column("First width", justify="right")

    for name in available_presets():
        try:
            data = ConfigLoader(preset=name).layered()
        except HebbnetError as e:
            ctx.renderer.print_warning(f"{name}: {e}")
            continue
        arch = data.get("architecture", {})
        table.add_row(
            name,
            str(data.get("dataset", {}).get("name", "cifar10")),
            str(arch.get("mode", "convolutional")),
            str(arch.get("first_width", 96)),
        )
    ctx.console.print(table)


@config.command("show")
@click.option("--preset", type=str, help="Shipped preset")
@click.option(
    "--config", "config_file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="TOML or JSON run config",
)
@click.option("--set", "assignments", multiple=True, help="Override, e.g. seed=3")
@pass_context
def show(
    ctx: CliContext,
    preset: str | None,
    config_file: Path | None,
    assignments: tuple[str, ...],
) -> None:
    """Print the fully resolved run config as TOML.

    Example: hebbnet config show --preset table-a2-cifar --set unsupervised.batch_size=20
    """
    try:
        resolved = ctx.load_config(preset, config_file, parse_assignments(assignments))
        ctx.console.print(Syntax(dumps_config(resolved), "toml", background_color="default"))
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e


@config.command("write")
@click.argument("path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--preset", type=str, help="Shipped preset")
@click.option(
    "--config", "config_file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="TOML or JSON run config",
)
@click.option("--set", "assignments", multiple=True, help="Override, e.g. seed=3")
@pass_context
def write(
    ctx: CliContext,
    path: Path,
    preset: str | None,
    config_file: Path | None,
    assignments: tuple[str, ...],
) -> None:
    """Resolve a config and write it as TOML to PATH."""
    try:
        if config_file is not None and config_file.resolve() == path.resolve():
            raise ConfigError("Refusing to overwrite the input config")
        resolved = ctx.load_config(preset, config_file, parse_assignments(assignments))
        write_config(resolved, path)
        ctx.renderer.print_success(f"Config written to {path}")
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e


@config.command("validate")
@click.argument("path", type=click.Path(dir_okay=False, path_type=Path))
@pass_context
def validate(ctx: CliContext, path: Path) -> None:
    """Check that a config file parses and validates."""
    try:
        read_config_file(path)
        ctx.load_config(None, path)
        ctx.renderer.print_success(f"{path} is valid")
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e
