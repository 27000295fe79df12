"""Run configuration: presets, TOML/JSON files and flag overrides."""

import json
import logging
import tomllib
from pathlib import Path
from typing import Any

import tomli_w
from pydantic import BaseModel, Field, ValidationError

from hebbnet.core.exceptions import ConfigError, ExportError
from hebbnet.data.loaders import resolve_data_dir
from hebbnet.data.models import DatasetName
from hebbnet.network.builder import build_architecture, build_fully_connected
from hebbnet.network.models import ArchitectureSpec, LayerOverrides, NetworkMode
from hebbnet.plasticity.bank import DEFAULT_R1_TOLERANCE
from hebbnet.training.models import SupervisedRunConfig, UnsupervisedRunConfig

logger = logging.getLogger(__name__)

PRESET_DIR = Path(__file__).parent / "presets"


class DatasetConfig(BaseModel):
    """Which dataset to load and how much of it."""

    name: DatasetName = Field(default=DatasetName.CIFAR10)
    root: Path | None = Field(default=None, description="Dataset root; $HEBBNET_DATA_DIR if unset")
    train_limit: int | None = Field(default=None, ge=1, description="Use the first N train images")
    test_limit: int | None = Field(default=None, ge=1, description="Use the first N test images")

    @property
    def data_dir(self) -> Path:
        return resolve_data_dir(self.root)


class ArchitectureConfig(BaseModel):
    """Width scaling and hyperparameter overrides for the builder."""

    mode: NetworkMode = Field(default=NetworkMode.CONVOLUTIONAL)
    first_width: int = Field(default=96, ge=1)
    width_factor: float = Field(default=4.0, ge=1)
    max_layers: int | None = Field(default=None, ge=1)
    common: LayerOverrides = Field(default_factory=LayerOverrides)
    layers: list[LayerOverrides] = Field(default_factory=list)

    def build(self, input_resolution: int, input_channels: int) -> ArchitectureSpec:
        """Resolve into an ArchitectureSpec for the given input size."""
        if self.mode is NetworkMode.FULLY_CONNECTED:
            own = self.layers[0] if self.layers else None
            return build_fully_connected(
                input_resolution, input_channels, self.first_width, self.common.merged(own)
            )
        return build_architecture(
            input_resolution,
            input_channels,
            self.first_width,
            self.width_factor,
            overrides=self.layers,
            common=self.common,
            max_layers=self.max_layers,
        )


class AnalysisDefaults(BaseModel):
    """Defaults for the analyze command."""

    r1_tolerance: float = Field(default=DEFAULT_R1_TOLERANCE, gt=0)
    rf_steps: int = Field(default=256, ge=1)
    rf_step_size: float = Field(default=0.05, gt=0)
    top_k: int = Field(default=9, ge=1)


class RunConfig(BaseModel):
    """Everything a training run needs."""

    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    architecture: ArchitectureConfig = Field(default_factory=ArchitectureConfig)
    unsupervised: UnsupervisedRunConfig = Field(default_factory=UnsupervisedRunConfig)
    supervised: SupervisedRunConfig = Field(default_factory=SupervisedRunConfig)
    analysis: AnalysisDefaults = Field(default_factory=AnalysisDefaults)
    seed: int = Field(default=0, description="Weight initialization and data order seed")
    output_dir: Path = Field(default=Path("runs/latest"))
    deterministic: bool = Field(default=False)
    threads: int = Field(default=1, ge=1)
    probe_layers: list[int] = Field(default_factory=list)
    untrained: bool = Field(default=False, description="Keep random weights (baseline)")

    def unsupervised_settings(self) -> UnsupervisedRunConfig:
        """Unsupervised settings with the run-level seed and threading applied."""
        return self.unsupervised.model_copy(
            update={
                "seed": self.seed,
                "threads": self.threads,
                "deterministic": self.deterministic,
            }
        )

    def supervised_settings(self) -> SupervisedRunConfig:
        return self.supervised.model_copy(update={"seed": self.seed})


def deep_merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    """Recursively merge ``update`` into a copy of ``base``; ``update`` wins."""
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def set_dotted(data: dict[str, Any], key: str, value: Any) -> dict[str, Any]:
    """Nested dict with ``a.b.c = value`` merged into ``data``."""
    node: Any = value
    for part in reversed(key.split(".")):
        node = {part: node}
    return deep_merge(data, node)


def available_presets() -> list[str]:
    return sorted(path.stem for path in PRESET_DIR.glob("*.toml"))


def read_config_file(path: Path) -> dict[str, Any]:
    """Parse a TOML or JSON file, chosen by suffix.

    Raises:
        ConfigError: If the file is missing, unparseable or of unknown type
    """
    suffix = path.suffix.lower()
    if suffix not in (".toml", ".json"):
        raise ConfigError(f"Unsupported config format '{suffix}' (use .toml or .json): {path}")
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e.strerror}") from e
    try:
        if suffix == ".toml":
            return tomllib.loads(raw.decode("utf-8"))
        data = json.loads(raw)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"Failed to parse config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config root must be a table/object: {path}")
    return data


class ConfigLoader:
    """Resolves a RunConfig from layered sources.

    Precedence, lowest first: built-in defaults, preset, config file,
    explicit overrides.
    """

    def __init__(self, preset: str | None = None, config_file: Path | None = None):
        """Initialize loader.

        Args:
            preset: Name of a shipped preset
            config_file: TOML or JSON run config
        """
        self.preset = preset
        self.config_file = config_file

    def preset_data(self) -> dict[str, Any]:
        if self.preset is None:
            return {}
        path = PRESET_DIR / f"{self.preset}.toml"
        if not path.exists():
            raise ConfigError(
                f"Unknown preset '{self.preset}'. Available: {', '.join(available_presets())}"
            )
        return read_config_file(path)

    def layered(self, overrides: dict[str, Any] | None = None) -> dict[str, Any]:
        """The merged raw mapping before validation."""
        data = self.preset_data()
        if self.config_file is not None:
            data = deep_merge(data, read_config_file(self.config_file))
        if overrides:
            data = deep_merge(data, overrides)
        return data

    def load(self, overrides: dict[str, Any] | None = None) -> RunConfig:
        """Validate the merged sources.

        Raises:
            ConfigError: On any parse or validation failure
        """
        data = self.layered(overrides)
        try:
            config = RunConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"Invalid run config: {e}") from e
        logger.debug(
            f"Resolved config (preset={self.preset}, file={self.config_file}): "
            f"dataset={config.dataset.name.value}, seed={config.seed}"
        )
        return config


def config_to_dict(config: RunConfig) -> dict[str, Any]:
    """JSON-compatible mapping with unset optionals dropped."""
    return config.model_dump(mode="json", exclude_none=True)


def write_config(config: RunConfig, path: Path) -> Path:
    """Write the resolved config as TOML.

    Raises:
        ExportError: If the file cannot be written
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            tomli_w.dump(config_to_dict(config), f)
    except OSError as e:
        raise ExportError(f"Cannot write config: {e.strerror}", path=path) from e
    return path


def dumps_config(config: RunConfig) -> str:
    return tomli_w.dumps(config_to_dict(config))
