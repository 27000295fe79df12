"""CLI context management."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from rich.console import Console

from hebbnet.core.exceptions import ConfigError, ExportError, ShapeError
from hebbnet.data.loaders import load_dataset
from hebbnet.data.models import Dataset, DatasetName, Split
from hebbnet.display.renderer import DisplayRenderer
from hebbnet.network.models import ArchitectureSpec
from hebbnet.storage.checkpoint import Checkpoint, load_checkpoint
from hebbnet.storage.config import ConfigLoader, RunConfig

logger = logging.getLogger(__name__)


@dataclass
class CliContext:
    """Context object passed to all CLI commands."""

    console: Console
    renderer: DisplayRenderer
    verbose: bool = False

    @classmethod
    def create(cls, verbose: bool = False, console: Console | None = None) -> "CliContext":
        """Create a new CLI context.

        Args:
            verbose: Enable verbose output
            console: Console to render to (a new one if omitted)

        Returns:
            Initialized CliContext
        """
        console = console or Console()
        return cls(console=console, renderer=DisplayRenderer(console), verbose=verbose)

    def load_config(
        self,
        preset: str | None,
        config_file: Path | None,
        overrides: dict[str, Any] | None = None,
    ) -> RunConfig:
        return ConfigLoader(preset=preset, config_file=config_file).load(overrides)

    def load_split(
        self,
        name: DatasetName | str,
        root: Path | None,
        split: Split | str,
        limit: int | None = None,
    ) -> Dataset:
        """Load one split, keeping only the first ``limit`` images."""
        dataset = load_dataset(name, root, split)
        if limit is not None and limit < len(dataset):
            dataset = dataset.head(limit)
        logger.info(f"Loaded {len(dataset)} {dataset.name}/{dataset.split} images")
        return dataset

    def load_checkpoint(self, path: Path) -> Checkpoint:
        return load_checkpoint(path)

    def checkpoint_dataset(self, checkpoint: Checkpoint) -> DatasetName:
        """Dataset the checkpoint was trained on, per its stored config."""
        name = checkpoint.config.get("dataset", {}).get("name", DatasetName.CIFAR10.value)
        return DatasetName(name)


def check_compatible(architecture: ArchitectureSpec, dataset: Dataset) -> None:
    """Reject datasets whose image shape differs from the network input.

    Raises:
        ShapeError: On a channel or resolution mismatch
    """
    if (
        dataset.channels != architecture.input_channels
        or dataset.resolution != architecture.input_resolution
    ):
        raise ShapeError(
            "dataset does not fit the network input",
            dataset=f"{dataset.channels}x{dataset.resolution}px",
            network=f"{architecture.input_channels}x{architecture.input_resolution}px",
        )


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    """Write a JSON artifact.

    Raises:
        ExportError: If the file cannot be written
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
    except OSError as e:
        raise ExportError(f"Cannot write file: {e.strerror}", path=path) from e
    return path


def parse_int_list(value: str | None) -> list[int]:
    """``"1,2,3"`` -> ``[1, 2, 3]``; empty for None."""
    if not value:
        return []
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"Expected a comma-separated list of integers, got '{value}'") from e
