"""Tests for checkpoint save/load."""

import json
from pathlib import Path

import numpy as np
import pytest

from hebbnet.core.exceptions import CheckpointError
from hebbnet.data.models import Dataset, NormalizationStats
from hebbnet.network.layer import HebbianNetwork
from hebbnet.storage.checkpoint import (
    MANIFEST,
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    from_bytes,
    load_checkpoint,
    save_checkpoint,
    to_bytes,
)
from hebbnet.training.classifier import ClassifierHead


@pytest.fixture
def checkpoint(calibrated_network: HebbianNetwork) -> Checkpoint:
    """Calibrated network with a random head and normalization stats."""
    calibrated_network.layer(1).freeze()
    head = ClassifierHead.initialize(2, calibrated_network.architecture.feature_dim(), seed=4)
    return Checkpoint(
        network=calibrated_network,
        head=head,
        stats=NormalizationStats(mean=[0.5], std=[0.25]),
        config={"seed": 0, "unsupervised": {"epochs": 1}},
    )


class TestRoundTrip:
    """Test that saved checkpoints restore exactly."""

    def test_save_and_load(self, checkpoint: Checkpoint, tmp_path: Path):
        """Weights, statistics and head come back bit-exact."""
        path = save_checkpoint(checkpoint, tmp_path / "run")
        loaded = load_checkpoint(path)
        for original, restored in zip(checkpoint.network.layers, loaded.network.layers):
            np.testing.assert_array_equal(original.bank.weights, restored.bank.weights)
            np.testing.assert_array_equal(original.bn.running_mean, restored.bn.running_mean)
            np.testing.assert_array_equal(original.bn.running_var, restored.bn.running_var)
            assert original.bn.tracked_batches == restored.bn.tracked_batches
        assert loaded.head is not None and checkpoint.head is not None
        np.testing.assert_array_equal(loaded.head.weights, checkpoint.head.weights)
        assert loaded.head.weights.dtype == np.float64
        assert loaded.stats == checkpoint.stats
        assert loaded.config == checkpoint.config
        assert loaded.seed == checkpoint.seed
        assert loaded.network.layer(1).frozen
        assert not loaded.network.layer(2).frozen

    def test_loaded_network_computes_same_features(
        self, checkpoint: Checkpoint, normalized_dataset: Dataset, tmp_path: Path
    ):
        """A restored network reproduces the original features."""
        loaded = load_checkpoint(save_checkpoint(checkpoint, tmp_path / "run"))
        images = normalized_dataset.images[:4]
        np.testing.assert_array_equal(
            checkpoint.network.features(images), loaded.network.features(images)
        )

    def test_without_head(self, calibrated_network: HebbianNetwork):
        """The head is optional."""
        files = encode_checkpoint(Checkpoint(network=calibrated_network))
        assert "head.weights" not in files
        assert decode_checkpoint(files).head is None

    def test_bytes_are_deterministic(self, checkpoint: Checkpoint):
        """Equal checkpoints serialize to equal archives."""
        data = to_bytes(checkpoint)
        assert data == to_bytes(checkpoint)
        restored = from_bytes(data)
        np.testing.assert_array_equal(
            restored.network.layer(2).bank.weights, checkpoint.network.layer(2).bank.weights
        )


class TestVerification:
    """Test that damaged checkpoints are rejected."""

    def test_checksum_mismatch(self, checkpoint: Checkpoint):
        files = encode_checkpoint(checkpoint)
        damaged = bytearray(files["layer1.weights"])
        damaged[0] ^= 0xFF
        files["layer1.weights"] = bytes(damaged)
        with pytest.raises(CheckpointError, match="Checksum"):
            decode_checkpoint(files)

    def test_wrong_size(self, checkpoint: Checkpoint):
        files = encode_checkpoint(checkpoint)
        files["layer2.bn"] = files["layer2.bn"][:-4]
        with pytest.raises(CheckpointError):
            decode_checkpoint(files)

    def test_missing_blob(self, checkpoint: Checkpoint, tmp_path: Path):
        path = save_checkpoint(checkpoint, tmp_path / "run")
        (path / "head.bias").unlink()
        with pytest.raises(CheckpointError, match="missing"):
            load_checkpoint(path)

    def test_unsupported_version(self, checkpoint: Checkpoint):
        files = encode_checkpoint(checkpoint)
        manifest = json.loads(files[MANIFEST])
        manifest["format_version"] = 99
        files[MANIFEST] = json.dumps(manifest).encode()
        with pytest.raises(CheckpointError, match="version"):
            decode_checkpoint(files)

    def test_corrupt_manifest(self, checkpoint: Checkpoint):
        files = encode_checkpoint(checkpoint)
        files[MANIFEST] = b"{not json"
        with pytest.raises(CheckpointError):
            decode_checkpoint(files)

    def test_missing_directory(self, tmp_path: Path):
        """Exit code 5 for unreadable checkpoints."""
        with pytest.raises(CheckpointError) as exc:
            load_checkpoint(tmp_path / "nowhere")
        assert exc.value.exit_code == 5

    def test_corrupt_archive(self):
        with pytest.raises(CheckpointError):
            from_bytes(b"not a tar archive")
