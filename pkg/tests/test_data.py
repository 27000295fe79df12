"""Tests for dataset readers and transforms."""

import struct
from pathlib import Path

import numpy as np
import pytest

from hebbnet.core.exceptions import ConfigError, DataError, StateError
from hebbnet.data.loaders import (
    CIFAR_RECORD,
    load_cifar10,
    load_dataset,
    load_mnist,
    load_stl10,
    parse_cifar_records,
    parse_idx_images,
    resolve_data_dir,
)
from hebbnet.data.models import Dataset, NormalizationStats, Split
from hebbnet.data.transforms import (
    augment,
    batches,
    compute_stats,
    hflip,
    normalize,
    num_batches,
    split_validation,
)
from tests.conftest import make_dataset, write_idx_images, write_idx_labels


class TestMnist:
    """Test the IDX reader."""

    def test_load_gzip_and_plain(self, mnist_root: Path):
        """Both compressed and plain files load, scaled to [0, 1]."""
        train = load_mnist(mnist_root, Split.TRAIN)
        test = load_mnist(mnist_root, "test")
        assert train.images.shape == (30, 1, 28, 28)
        assert test.images.shape == (10, 1, 28, 28)
        assert train.images.min() >= 0.0 and train.images.max() <= 1.0
        assert train.labels is not None and train.labels[:3].tolist() == [0, 1, 2]

    def test_pixel_scaling(self, tmp_path: Path):
        """Byte 255 maps to 1.0."""
        write_idx_images(tmp_path / "t10k-images-idx3-ubyte", np.full((1, 2, 2), 255))
        write_idx_labels(tmp_path / "t10k-labels-idx1-ubyte", np.array([3]))
        data = load_mnist(tmp_path, Split.TEST)
        np.testing.assert_array_equal(data.images, 1.0)

    def test_bad_magic(self):
        """A wrong magic number reports offset 0."""
        raw = struct.pack(">IIII", 0x1234, 1, 2, 2) + bytes(4)
        with pytest.raises(DataError) as exc:
            parse_idx_images(raw, Path("x"))
        assert exc.value.offset == 0
        assert exc.value.exit_code == 3

    def test_truncated_payload(self):
        """Payload shorter than the header implies is rejected."""
        raw = struct.pack(">IIII", 0x00000803, 2, 2, 2) + bytes(5)
        with pytest.raises(DataError):
            parse_idx_images(raw)

    def test_missing_files(self, tmp_path: Path):
        """Missing files are data errors."""
        with pytest.raises(DataError):
            load_mnist(tmp_path)

    def test_label_count_mismatch(self, tmp_path: Path):
        """Image and label counts must agree."""
        write_idx_images(tmp_path / "t10k-images-idx3-ubyte", np.zeros((2, 2, 2)))
        write_idx_labels(tmp_path / "t10k-labels-idx1-ubyte", np.array([1]))
        with pytest.raises(DataError):
            load_mnist(tmp_path, Split.TEST)


class TestCifarAndStl:
    """Test the CIFAR-10 and STL-10 binary readers."""

    def test_cifar_records(self):
        """Each record is a label byte followed by planar RGB."""
        records = bytearray()
        for label in (3, 7):
            records += bytes([label]) + bytes([label] * (CIFAR_RECORD - 1))
        pixels, labels = parse_cifar_records(bytes(records))
        assert pixels.shape == (2, 3, 32, 32)
        assert labels.tolist() == [3, 7]
        assert pixels[1].max() == 7

    def test_cifar_bad_length(self):
        """Lengths that are not a record multiple are rejected."""
        with pytest.raises(DataError):
            parse_cifar_records(bytes(CIFAR_RECORD + 5))

    def test_cifar_nested_directory(self, tmp_path: Path):
        """Batches are found under cifar-10-batches-bin."""
        nested = tmp_path / "cifar-10-batches-bin"
        nested.mkdir()
        (nested / "test_batch.bin").write_bytes(bytes([9]) + bytes(CIFAR_RECORD - 1))
        data = load_cifar10(tmp_path, Split.TEST)
        assert data.images.shape == (1, 3, 32, 32)
        assert data.labels is not None and data.labels.tolist() == [9]

    def test_cifar_round_trip(self, tmp_path: Path, rng: np.random.Generator):
        """Loaded pixels scale back to the exact bytes that were written."""
        pixels = rng.integers(0, 256, size=(3, 3, 32, 32), dtype=np.uint8)
        labels = np.array([0, 9, 4], dtype=np.uint8)
        raw = np.concatenate([labels[:, None], pixels.reshape(3, -1)], axis=1).tobytes()
        (tmp_path / "test_batch.bin").write_bytes(raw)
        data = load_cifar10(tmp_path, Split.TEST)
        restored = np.rint(data.images * 255).astype(np.uint8)
        np.testing.assert_array_equal(restored, pixels)
        assert data.labels is not None and data.labels.tolist() == [0, 9, 4]
        label_bytes = data.labels.astype(np.uint8)[:, None]
        rebuilt = np.concatenate([label_bytes, restored.reshape(3, -1)], axis=1)
        assert rebuilt.tobytes() == raw

    def test_stl_column_major(self, tmp_path: Path):
        """STL images are stored column-major; labels are 1-based."""
        raw = np.zeros((1, 3, 96, 96), dtype=np.uint8)
        raw[0, 0, 1, 0] = 255
        (tmp_path / "test_X.bin").write_bytes(raw.tobytes())
        (tmp_path / "test_y.bin").write_bytes(bytes([10]))
        data = load_stl10(tmp_path, Split.TEST)
        assert data.images[0, 0, 0, 1] == 1.0
        assert data.images[0, 0, 1, 0] == 0.0
        assert data.labels is not None and data.labels.tolist() == [9]


class TestLoadDataset:
    """Test dataset lookup."""

    def test_unknown_name(self, tmp_path: Path):
        """Unknown datasets are configuration errors."""
        with pytest.raises(ConfigError):
            load_dataset("imagenet", tmp_path)

    def test_missing_directory(self, tmp_path: Path):
        """A missing root is a data error."""
        with pytest.raises(DataError):
            load_dataset("mnist", tmp_path / "nope")

    def test_env_root(self, mnist_root: Path, monkeypatch: pytest.MonkeyPatch):
        """The root falls back to HEBBNET_DATA_DIR."""
        monkeypatch.setenv("HEBBNET_DATA_DIR", str(mnist_root))
        assert resolve_data_dir() == mnist_root
        assert len(load_dataset("mnist", split="test")) == 10


class TestDatasetModel:
    """Test the Dataset container."""

    def test_images_read_only(self, toy_dataset: Dataset):
        """Image arrays cannot be modified after construction."""
        with pytest.raises(ValueError):
            toy_dataset.images[0, 0, 0, 0] = 1.0

    def test_label_range(self):
        """Labels must lie within the class count."""
        with pytest.raises(DataError):
            Dataset(
                images=np.zeros((2, 1, 4, 4), dtype=np.float32),
                labels=np.array([0, 5]),
                num_classes=2,
                name="bad",
                split="train",
            )

    def test_head_and_counts(self, toy_dataset: Dataset):
        """head() keeps the first items."""
        head = toy_dataset.head(6)
        assert len(head) == 6
        assert head.class_counts().tolist() == [3, 3]


class TestTransforms:
    """Test normalization, batching, splitting and augmentation."""

    def test_normalize(self, toy_dataset: Dataset):
        """Normalized channels have zero mean and unit std."""
        data = normalize(toy_dataset)
        assert data.normalized
        assert float(data.images.mean()) == pytest.approx(0.0, abs=1e-5)
        assert float(data.images.std()) == pytest.approx(1.0, abs=1e-4)

    def test_normalize_with_given_stats(self, toy_dataset: Dataset):
        """Supplied stats are applied as-is."""
        stats = NormalizationStats(mean=[0.5], std=[0.25])
        data = normalize(toy_dataset, stats)
        np.testing.assert_allclose(data.images, (toy_dataset.images - 0.5) / 0.25, rtol=1e-5)

    def test_normalize_twice(self, toy_dataset: Dataset):
        """Normalizing twice is a state error."""
        with pytest.raises(StateError):
            normalize(normalize(toy_dataset))

    def test_stats_channel_mismatch(self, toy_dataset: Dataset):
        """Stats must have the dataset's channel count."""
        with pytest.raises(DataError):
            normalize(toy_dataset, NormalizationStats(mean=[0, 0, 0], std=[1, 1, 1]))

    def test_constant_channel_std_floor(self):
        """A constant channel gets a floored std, not zero."""
        constant = Dataset(
            images=np.full((3, 1, 4, 4), 0.5, dtype=np.float32),
            labels=None,
            num_classes=2,
            name="flat",
            split="train",
        )
        stats = compute_stats(constant)
        assert stats.std[0] > 0
        assert np.isfinite(normalize(constant).images).all()

    def test_batches_cover_dataset(self, toy_dataset: Dataset):
        """Every item appears once per epoch; the last batch may be partial."""
        seen = []
        sizes = []
        for images, labels in batches(toy_dataset, 16, seed=0):
            assert labels is not None
            seen.extend(labels.tolist())
            sizes.append(len(images))
        assert sizes == [16, 16, 8]
        assert num_batches(toy_dataset, 16) == 3
        assert sorted(seen) == sorted(toy_dataset.labels.tolist())

    def test_batches_seeded_per_epoch(self, toy_dataset: Dataset):
        """Order depends on seed and epoch only."""
        first = [b[0] for b in batches(toy_dataset, 40, seed=1, epoch=0)][0]
        again = [b[0] for b in batches(toy_dataset, 40, seed=1, epoch=0)][0]
        other = [b[0] for b in batches(toy_dataset, 40, seed=1, epoch=1)][0]
        np.testing.assert_array_equal(first, again)
        assert not np.array_equal(first, other)

    def test_batches_differ_across_seeds(self):
        """Two seeds give different permutations of a large dataset."""
        dataset = make_dataset(count=1000, resolution=2)
        first = next(batches(dataset, 1000, seed=0))[0]
        second = next(batches(dataset, 1000, seed=1))[0]
        assert not np.array_equal(first, second)
        np.testing.assert_array_equal(np.sort(first.ravel()), np.sort(second.ravel()))

    def test_invalid_batch_size(self, toy_dataset: Dataset):
        """Batch size must be positive."""
        with pytest.raises(ConfigError):
            next(batches(toy_dataset, 0, seed=0))

    def test_split_validation(self, toy_dataset: Dataset):
        """Held-out fraction and disjointness."""
        train, val = split_validation(toy_dataset, 0.25, seed=0)
        assert (len(train), len(val)) == (30, 10)
        with pytest.raises(ConfigError):
            split_validation(toy_dataset, 0.0, seed=0)

    def test_augment_identity(self, toy_dataset: Dataset, rng: np.random.Generator):
        """No flags, no change."""
        out = augment(toy_dataset.images, rng)
        np.testing.assert_array_equal(out, toy_dataset.images)

    def test_augment_crop_keeps_shape(self, toy_dataset: Dataset, rng: np.random.Generator):
        """Random crops keep the image size."""
        out = augment(toy_dataset.images, rng, hflip=True, crop_padding=4)
        assert out.shape == toy_dataset.images.shape

    def test_hflip(self):
        """Columns are reversed."""
        images = np.arange(4, dtype=np.float32).reshape(1, 1, 1, 4)
        np.testing.assert_array_equal(hflip(images).ravel(), [3, 2, 1, 0])
