"""Normalization, augmentation, batching and splitting."""

import logging
from collections.abc import Iterator
from dataclasses import replace

import numpy as np
import numpy.typing as npt

from hebbnet.core.exceptions import ConfigError, DataError, StateError
from hebbnet.core.utils import make_rng
from hebbnet.data.models import Dataset, NormalizationStats
from hebbnet.tensor.models import Tensor

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-6
# Stream ids keep the generators of different consumers independent.
SHUFFLE_STREAM = 1
AUGMENT_STREAM = 2
SPLIT_STREAM = 3

Batch = tuple[Tensor, npt.NDArray[np.int64] | None]


def compute_stats(dataset: Dataset) -> NormalizationStats:
    """Per-channel mean and std (floored at ``STD_FLOOR``)."""
    mean = dataset.images.mean(axis=(0, 2, 3), dtype=np.float64)
    std = np.maximum(dataset.images.std(axis=(0, 2, 3), dtype=np.float64), STD_FLOOR)
    return NormalizationStats(mean=mean.tolist(), std=std.tolist())


def normalize(dataset: Dataset, stats: NormalizationStats | None = None) -> Dataset:
    """Standard-score normalize per channel.

    Statistics are computed from ``dataset`` unless supplied (e.g. the
    training split's stats applied to the test split).

    Raises:
        StateError: If the dataset is already normalized
        DataError: If the stats have the wrong channel count
    """
    if dataset.normalized:
        raise StateError(f"{dataset.name}/{dataset.split} is already normalized")
    stats = stats or compute_stats(dataset)
    if stats.channels != dataset.channels:
        raise DataError(
            f"Normalization stats have {stats.channels} channels, data has {dataset.channels}"
        )
    mean, std = stats.arrays()
    images = ((dataset.images - mean) / std).astype(np.float32)
    return replace(dataset, images=images, stats=stats, normalized=True)


def augment(
    images: Tensor,
    rng: np.random.Generator,
    hflip: bool = False,
    crop_padding: int = 0,
) -> Tensor:
    """Random horizontal flips (p = 0.5) and reflect-padded random crops.

    With both flags off the input is returned unchanged.
    """
    out = images
    if hflip:
        flip = rng.random(len(images)) < 0.5
        if flip.any():
            out = out.copy()
            out[flip] = out[flip][..., ::-1]
    if crop_padding > 0:
        n, _, h, w = out.shape
        p = crop_padding
        padded = np.pad(out, ((0, 0), (0, 0), (p, p), (p, p)), mode="reflect")
        dy = rng.integers(0, 2 * p + 1, size=n)
        dx = rng.integers(0, 2 * p + 1, size=n)
        out = np.stack([padded[i, :, dy[i] : dy[i] + h, dx[i] : dx[i] + w] for i in range(n)])
    return np.ascontiguousarray(out, dtype=np.float32)


def hflip(images: Tensor) -> Tensor:
    """Deterministic horizontal flip of every image."""
    return np.ascontiguousarray(images[..., ::-1])


def batches(
    dataset: Dataset,
    batch_size: int,
    seed: int,
    epoch: int = 0,
    shuffle: bool = True,
) -> Iterator[Batch]:
    """Yield ``(images, labels)`` mini-batches in a seeded order.

    Each epoch draws its own permutation; the final batch may be partial.

    Raises:
        ConfigError: If ``batch_size`` < 1
    """
    if batch_size < 1:
        raise ConfigError(f"batch_size must be at least 1, got {batch_size}")
    n = len(dataset)
    order = make_rng(seed, SHUFFLE_STREAM, epoch).permutation(n) if shuffle else np.arange(n)
    for b in range(num_batches(dataset, batch_size)):
        idx = order[b * batch_size : (b + 1) * batch_size]
        labels = dataset.labels[idx] if dataset.labels is not None else None
        yield np.ascontiguousarray(dataset.images[idx]), labels


def num_batches(dataset: Dataset, batch_size: int) -> int:
    """Mini-batches per epoch, counting a final partial batch."""
    return -(-len(dataset) // batch_size)


def split_validation(dataset: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded train/validation split holding out ``fraction`` of the items."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"validation fraction must lie in (0, 1), got {fraction}")
    order = make_rng(seed, SPLIT_STREAM).permutation(len(dataset))
    held = int(round(len(dataset) * fraction))
    logger.debug(f"Validation split: {len(dataset) - held} train / {held} held out")
    return dataset.take(np.sort(order[held:])), dataset.take(np.sort(order[:held]))
