"""Readers for MNIST IDX, CIFAR-10 binary and STL-10 binary files.

Pixels are scaled to [0, 1]; standard-score normalization is a separate
step (see :mod:`hebbnet.data.transforms`).
"""

import gzip
import logging
import os
import struct
from pathlib import Path

import numpy as np
import numpy.typing as npt

from hebbnet.core.exceptions import ConfigError, DataError
from hebbnet.data.models import Dataset, DatasetName, Split

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "HEBBNET_DATA_DIR"

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
GZIP_MAGIC = b"\x1f\x8b"

CIFAR_RECORD = 1 + 3 * 32 * 32
STL_IMAGE = 3 * 96 * 96

MNIST_FILES = {
    Split.TRAIN: ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    Split.TEST: ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}
CIFAR_FILES = {
    Split.TRAIN: tuple(f"data_batch_{i}.bin" for i in range(1, 6)),
    Split.TEST: ("test_batch.bin",),
}
STL_FILES = {
    Split.TRAIN: ("train_X.bin", "train_y.bin"),
    Split.TEST: ("test_X.bin", "test_y.bin"),
}


def resolve_data_dir(explicit: Path | str | None = None) -> Path:
    """Dataset root: explicit path, else ``$HEBBNET_DATA_DIR``, else ``./data``."""
    if explicit is not None:
        return Path(explicit).expanduser()
    env = os.environ.get(DATA_DIR_ENV)
    return Path(env).expanduser() if env else Path("data")


def read_blob(path: Path) -> bytes:
    """Read a file, transparently decompressing gzip by magic bytes.

    Raises:
        DataError: If the file is missing or not readable
    """
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise DataError(f"Cannot read dataset file: {e.strerror}", path=path) from e
    if raw[:2] == GZIP_MAGIC:
        try:
            return gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise DataError(f"Corrupt gzip stream: {e}", path=path) from e
    return raw


def _find(root: Path, name: str) -> Path:
    for candidate in (root / name, root / f"{name}.gz"):
        if candidate.exists():
            return candidate
    raise DataError(f"Missing dataset file {name}", path=root)


def parse_idx_images(raw: bytes, path: Path | None = None) -> npt.NDArray[np.uint8]:
    """Decode an IDX3 image file into ``(n, 1, rows, cols)`` uint8."""
    if len(raw) < 16:
        raise DataError("IDX image header truncated", path=path, offset=len(raw))
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise DataError(f"Bad IDX image magic 0x{magic:08x}", path=path, offset=0)
    expected = 16 + count * rows * cols
    if len(raw) != expected:
        raise DataError(
            f"IDX image payload is {len(raw)} bytes, header implies {expected}",
            path=path,
            offset=min(len(raw), expected),
        )
    return np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(count, 1, rows, cols)


def parse_idx_labels(raw: bytes, path: Path | None = None) -> npt.NDArray[np.uint8]:
    """Decode an IDX1 label file."""
    if len(raw) < 8:
        raise DataError("IDX label header truncated", path=path, offset=len(raw))
    magic, count = struct.unpack(">II", raw[:8])
    if magic != IDX_LABELS_MAGIC:
        raise DataError(f"Bad IDX label magic 0x{magic:08x}", path=path, offset=0)
    if len(raw) != 8 + count:
        raise DataError(
            f"IDX label payload is {len(raw)} bytes, header implies {8 + count}",
            path=path,
            offset=min(len(raw), 8 + count),
        )
    return np.frombuffer(raw, dtype=np.uint8, offset=8)


def _scale(pixels: npt.NDArray[np.uint8]) -> npt.NDArray[np.float32]:
    return pixels.astype(np.float32) / np.float32(255.0)


def load_mnist(root: Path, split: Split | str = Split.TRAIN) -> Dataset:
    """Load an MNIST split (plain or gzip IDX files) from ``root``.

    Raises:
        DataError: On missing files, bad magic numbers or inconsistent sizes
    """
    split = Split(split)
    image_name, label_name = MNIST_FILES[split]
    image_path = _find(root, image_name)
    label_path = _find(root, label_name)
    images = parse_idx_images(read_blob(image_path), image_path)
    labels = parse_idx_labels(read_blob(label_path), label_path)
    if len(labels) != len(images):
        raise DataError(f"{len(labels)} labels for {len(images)} images", path=label_path)
    logger.debug(f"Loaded MNIST {split.value}: {len(images)} images")
    return Dataset(
        images=_scale(images),
        labels=labels.astype(np.int64),
        num_classes=10,
        name=DatasetName.MNIST.value,
        split=split.value,
    )


def parse_cifar_records(raw: bytes, path: Path | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Split CIFAR-10 records into ``(n, 3, 32, 32)`` pixels and labels."""
    remainder = len(raw) % CIFAR_RECORD
    if remainder or not raw:
        raise DataError(
            f"CIFAR-10 file length {len(raw)} is not a multiple of {CIFAR_RECORD}",
            path=path,
            offset=len(raw) - remainder,
        )
    records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
    return records[:, 1:].reshape(-1, 3, 32, 32), records[:, 0]


def load_cifar10(root: Path, split: Split | str = Split.TRAIN) -> Dataset:
    """Load CIFAR-10 binary batches from ``root`` or ``root/cifar-10-batches-bin``."""
    split = Split(split)
    nested = root / "cifar-10-batches-bin"
    base = nested if nested.is_dir() else root
    pixels, labels = [], []
    for name in CIFAR_FILES[split]:
        path = _find(base, name)
        chunk_pixels, chunk_labels = parse_cifar_records(read_blob(path), path)
        if chunk_labels.max() > 9:
            raise DataError(f"CIFAR-10 label {chunk_labels.max()} out of range", path=path)
        pixels.append(chunk_pixels)
        labels.append(chunk_labels)
    images = np.concatenate(pixels)
    logger.debug(f"Loaded CIFAR-10 {split.value}: {len(images)} images")
    return Dataset(
        images=_scale(images),
        labels=np.concatenate(labels).astype(np.int64),
        num_classes=10,
        name=DatasetName.CIFAR10.value,
        split=split.value,
    )


def load_stl10(root: Path, split: Split | str = Split.TRAIN) -> Dataset:
    """Load the labeled STL-10 binary split.

    Images are stored channel-planar and column-major; labels are 1-based.
    """
    split = Split(split)
    nested = root / "stl10_binary"
    base = nested if nested.is_dir() else root
    image_name, label_name = STL_FILES[split]
    image_path = _find(base, image_name)
    label_path = _find(base, label_name)
    raw = read_blob(image_path)
    if len(raw) % STL_IMAGE or not raw:
        raise DataError(
            f"STL-10 file length {len(raw)} is not a multiple of {STL_IMAGE}",
            path=image_path,
            offset=len(raw) - len(raw) % STL_IMAGE,
        )
    images = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3, 96, 96).transpose(0, 1, 3, 2)
    labels = np.frombuffer(read_blob(label_path), dtype=np.uint8).astype(np.int64) - 1
    if len(labels) != len(images):
        raise DataError(f"{len(labels)} labels for {len(images)} images", path=label_path)
    return Dataset(
        images=_scale(np.ascontiguousarray(images)),
        labels=labels,
        num_classes=10,
        name=DatasetName.STL10.value,
        split=split.value,
    )


LOADERS = {
    DatasetName.MNIST: load_mnist,
    DatasetName.CIFAR10: load_cifar10,
    DatasetName.STL10: load_stl10,
}


def load_dataset(
    name: DatasetName | str, root: Path | str | None = None, split: Split | str = Split.TRAIN
) -> Dataset:
    """Load ``split`` of a named dataset from ``root`` (see :func:`resolve_data_dir`).

    Raises:
        ConfigError: For unknown dataset names
        DataError: For missing or malformed files
    """
    try:
        dataset_name = DatasetName(name)
    except ValueError as e:
        raise ConfigError(f"Unknown dataset: {name}") from e
    directory = resolve_data_dir(root)
    if not directory.is_dir():
        raise DataError("Dataset directory does not exist", path=directory)
    return LOADERS[dataset_name](directory, split)
