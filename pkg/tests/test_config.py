"""Tests for run configuration loading."""

import json
from pathlib import Path

import pytest

from hebbnet.core.exceptions import ConfigError, ExportError
from hebbnet.data.models import DatasetName
from hebbnet.network.models import NetworkMode
from hebbnet.storage.config import (
    ConfigLoader,
    RunConfig,
    available_presets,
    deep_merge,
    dumps_config,
    read_config_file,
    set_dotted,
    write_config,
)


class TestMerging:
    """Test dict merging helpers."""

    def test_deep_merge(self):
        """Nested tables merge; scalars are replaced."""
        base = {"a": {"x": 1, "y": 2}, "b": 1}
        merged = deep_merge(base, {"a": {"y": 3}, "b": {"z": 0}})
        assert merged == {"a": {"x": 1, "y": 3}, "b": {"z": 0}}
        assert base == {"a": {"x": 1, "y": 2}, "b": 1}

    def test_set_dotted(self):
        data = set_dotted({"unsupervised": {"epochs": 1}}, "unsupervised.batch_size", 20)
        assert data == {"unsupervised": {"epochs": 1, "batch_size": 20}}


class TestPresets:
    """Test shipped presets."""

    def test_available(self):
        presets = available_presets()
        assert {"table-a2-mnist", "table-a2-cifar", "table-a2-stl10", "fc-mnist-2000"} <= set(
            presets
        )

    @pytest.mark.parametrize("name", available_presets())
    def test_every_preset_validates(self, name: str):
        assert isinstance(ConfigLoader(preset=name).load(), RunConfig)

    def test_cifar_preset_widths(self):
        """The CIFAR preset builds widths 96, 384 and 1536."""
        config = ConfigLoader(preset="table-a2-cifar").load()
        assert config.dataset.name is DatasetName.CIFAR10
        assert config.architecture.build(32, 3).widths == [96, 384, 1536]

    def test_fc_preset(self):
        config = ConfigLoader(preset="fc-mnist-2000").load()
        assert config.architecture.mode is NetworkMode.FULLY_CONNECTED
        arch = config.architecture.build(28, 1)
        assert arch.widths == [2000]

    def test_unknown_preset(self):
        """Unknown presets exit with code 2."""
        with pytest.raises(ConfigError) as exc:
            ConfigLoader(preset="nope").load()
        assert exc.value.exit_code == 2


class TestConfigFiles:
    """Test TOML/JSON files and precedence."""

    def test_toml_file(self, tmp_path: Path):
        path = tmp_path / "run.toml"
        path.write_text('seed = 7\n[dataset]\nname = "mnist"\n')
        config = ConfigLoader(config_file=path).load()
        assert config.seed == 7
        assert config.dataset.name is DatasetName.MNIST

    def test_precedence(self, tmp_path: Path):
        """Overrides beat the file, which beats the preset."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"seed": 3, "unsupervised": {"batch_size": 20}}))
        loader = ConfigLoader(preset="table-a2-mnist", config_file=path)
        config = loader.load({"seed": 9})
        assert config.seed == 9
        assert config.unsupervised.batch_size == 20
        assert config.dataset.name is DatasetName.MNIST

    def test_unsupported_suffix(self, tmp_path: Path):
        path = tmp_path / "run.yaml"
        path.write_text("seed: 1\n")
        with pytest.raises(ConfigError, match="Unsupported"):
            read_config_file(path)

    def test_parse_error(self, tmp_path: Path):
        path = tmp_path / "run.toml"
        path.write_text("seed = = 1\n")
        with pytest.raises(ConfigError):
            read_config_file(path)

    def test_non_object_root(self, tmp_path: Path):
        path = tmp_path / "run.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            read_config_file(path)

    def test_validation_error(self):
        """Schema violations become configuration errors."""
        with pytest.raises(ConfigError, match="Invalid run config"):
            ConfigLoader().load({"threads": 0})

    def test_run_settings_inherit_seed(self):
        config = ConfigLoader().load({"seed": 5, "threads": 2})
        assert config.unsupervised_settings().seed == 5
        assert config.unsupervised_settings().threads == 2
        assert config.supervised_settings().seed == 5


class TestWriteConfig:
    """Test writing resolved configs."""

    def test_round_trip(self, tmp_path: Path):
        """A written config loads back unchanged."""
        config = ConfigLoader(preset="table-a2-mnist").load({"seed": 11})
        path = write_config(config, tmp_path / "out" / "run.toml")
        assert ConfigLoader(config_file=path).load() == config

    def test_dumps(self):
        text = dumps_config(RunConfig())
        assert "[dataset]" in text
        assert 'name = "cifar10"' in text

    def test_unwritable_path(self, tmp_path: Path):
        """A write failure is an export error with exit code 5."""
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(ExportError) as exc:
            write_config(RunConfig(), blocker / "run.toml")
        assert exc.value.exit_code == 5
        assert exc.value.path == blocker / "run.toml"
