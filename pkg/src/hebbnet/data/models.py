"""Dataset data models."""

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field

from hebbnet.core.exceptions import DataError
from hebbnet.tensor.models import Tensor


class DatasetName(str, Enum):
    """Supported image datasets."""

    MNIST = "mnist"
    CIFAR10 = "cifar10"
    STL10 = "stl10"


class Split(str, Enum):
    """Dataset split."""

    TRAIN = "train"
    TEST = "test"


class NormalizationStats(BaseModel):
    """Per-channel standard-score statistics of a training split."""

    mean: list[float] = Field(description="Per-channel mean")
    std: list[float] = Field(description="Per-channel standard deviation (eps floored)")

    @property
    def channels(self) -> int:
        return len(self.mean)

    def arrays(self) -> tuple[npt.NDArray[np.float32], npt.NDArray[np.float32]]:
        """Mean and std shaped ``(1, c, 1, 1)``."""
        shape = (1, self.channels, 1, 1)
        return (
            np.asarray(self.mean, dtype=np.float32).reshape(shape),
            np.asarray(self.std, dtype=np.float32).reshape(shape),
        )


@dataclass(frozen=True)
class Dataset:
    """Images ``(n, c, h, w)`` with optional labels.

    Image arrays are read-only after construction.
    """

    images: Tensor
    labels: npt.NDArray[np.int64] | None
    num_classes: int
    name: str
    split: str
    stats: NormalizationStats | None = None
    normalized: bool = False

    def __post_init__(self) -> None:
        if self.images.ndim != 4:
            raise DataError(f"images must be 4-D, got shape {self.images.shape}")
        if self.labels is not None:
            if len(self.labels) != len(self.images):
                raise DataError(
                    f"{len(self.labels)} labels for {len(self.images)} images in {self.name}"
                )
            if len(self.labels) and (
                self.labels.min() < 0 or self.labels.max() >= self.num_classes
            ):
                raise DataError(f"labels of {self.name} outside [0, {self.num_classes})")
        self.images.flags.writeable = False

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def shape(self) -> tuple[int, int, int]:
        """(channels, height, width) of one image."""
        _, c, h, w = self.images.shape
        return (int(c), int(h), int(w))

    @property
    def channels(self) -> int:
        return self.shape[0]

    @property
    def resolution(self) -> int:
        return self.shape[1]

    def take(self, indices: npt.ArrayLike) -> "Dataset":
        """Subset by index, keeping stats and the normalized flag."""
        idx = np.asarray(indices, dtype=np.int64)
        labels = self.labels[idx] if self.labels is not None else None
        return replace(self, images=np.ascontiguousarray(self.images[idx]), labels=labels)

    def head(self, count: int) -> "Dataset":
        """The first ``count`` items."""
        return self.take(np.arange(min(count, len(self))))

    def class_counts(self) -> npt.NDArray[np.int64]:
        if self.labels is None:
            return np.zeros(self.num_classes, dtype=np.int64)
        return np.bincount(self.labels, minlength=self.num_classes)
