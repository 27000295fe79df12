"""Pytest fixtures for Hebbnet tests."""

import gzip
import struct
from pathlib import Path

import numpy as np
import pytest

from hebbnet.core.utils import make_rng
from hebbnet.data.models import Dataset
from hebbnet.data.transforms import normalize
from hebbnet.network.builder import build_architecture
from hebbnet.network.layer import HebbianNetwork
from hebbnet.network.models import ArchitectureSpec, LayerOverrides
from hebbnet.tensor.models import PoolKind
from hebbnet.training.models import SupervisedRunConfig, UnsupervisedRunConfig
from hebbnet.training.unsupervised import calibrate_batchnorm


def make_dataset(
    count: int = 40,
    channels: int = 1,
    resolution: int = 16,
    num_classes: int = 2,
    seed: int = 0,
) -> Dataset:
    """Images in [0, 1] whose brightness pattern depends on the label."""
    rng = make_rng(seed)
    labels = np.arange(count) % num_classes
    images = rng.uniform(0.0, 0.5, size=(count, channels, resolution, resolution))
    half = resolution // 2
    images[labels == 0, :, :half, :] += 0.5
    images[labels == 1, :, half:, :] += 0.5
    return Dataset(
        images=images.astype(np.float32),
        labels=labels.astype(np.int64),
        num_classes=num_classes,
        name="toy",
        split="train",
    )


def write_idx_images(path: Path, images: np.ndarray, compress: bool = False) -> Path:
    count, rows, cols = images.shape
    raw = struct.pack(">IIII", 0x00000803, count, rows, cols) + images.astype(np.uint8).tobytes()
    path.write_bytes(gzip.compress(raw) if compress else raw)
    return path


def write_idx_labels(path: Path, labels: np.ndarray, compress: bool = False) -> Path:
    raw = struct.pack(">II", 0x00000801, len(labels)) + labels.astype(np.uint8).tobytes()
    path.write_bytes(gzip.compress(raw) if compress else raw)
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data."""
    return make_rng(1234)


@pytest.fixture
def toy_dataset() -> Dataset:
    """40 raw 16x16 single-channel images in two classes."""
    return make_dataset()


@pytest.fixture
def toy_test_dataset() -> Dataset:
    """20 raw held-out images drawn like toy_dataset."""
    return make_dataset(count=20, seed=1)


@pytest.fixture
def normalized_dataset(toy_dataset: Dataset) -> Dataset:
    """toy_dataset after standard-score normalization."""
    return normalize(toy_dataset)


@pytest.fixture
def two_layer_architecture() -> ArchitectureSpec:
    """16px input -> 8px -> 4px, widths 4 and 16."""
    return build_architecture(16, 1, first_width=4)


@pytest.fixture
def linear_architecture() -> ArchitectureSpec:
    """Two layers with average pooling, so the path to layer 2 is affine."""
    return build_architecture(16, 1, first_width=4, common=LayerOverrides(pool_kind=PoolKind.AVG))


@pytest.fixture
def calibrated_network(
    two_layer_architecture: ArchitectureSpec, normalized_dataset: Dataset
) -> HebbianNetwork:
    """Random-weight two-layer network with BatchNorm statistics."""
    network = HebbianNetwork.initialize(two_layer_architecture, seed=0)
    calibrate_batchnorm(network, normalized_dataset, batch_size=10)
    return network


@pytest.fixture
def quick_unsupervised() -> UnsupervisedRunConfig:
    """One short epoch of SoftHebb updates."""
    return UnsupervisedRunConfig(epochs=1, batch_size=10, log_every=1)


@pytest.fixture
def quick_supervised() -> SupervisedRunConfig:
    """A few classifier epochs without dropout."""
    return SupervisedRunConfig(epochs=3, batch_size=8, dropout=0.0, val_fraction=0.25)


@pytest.fixture
def mnist_root(tmp_path: Path) -> Path:
    """Synthetic MNIST-format IDX files: 30 train and 10 test images of 28x28."""
    root = tmp_path / "data"
    root.mkdir()
    rng = make_rng(7)
    for prefix, count, compress in (("train", 30, True), ("t10k", 10, False)):
        images = rng.integers(0, 256, size=(count, 28, 28))
        labels = np.arange(count) % 10
        write_idx_images(root / f"{prefix}-images-idx3-ubyte{'.gz' if compress else ''}",
                         images, compress)
        write_idx_labels(root / f"{prefix}-labels-idx1-ubyte{'.gz' if compress else ''}",
                         labels, compress)
    return root
