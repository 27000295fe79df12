"""Tensor-core data models."""

from dataclasses import dataclass, field
from enum import Enum
from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from hebbnet.core.exceptions import ShapeError

# Dense (batch, channels, height, width) float32 array, row-major.
Tensor: TypeAlias = npt.NDArray[np.float32]


class Mode(str, Enum):
    """Forward mode for stateful stages."""

    TRAIN = "train"
    EVAL = "eval"


class PoolKind(str, Enum):
    """Pooling reduction."""

    MAX = "max"
    AVG = "avg"


def as_tensor(data: npt.ArrayLike, name: str = "input") -> Tensor:
    """Coerce to a contiguous float32 4-D tensor.

    Raises:
        ShapeError: If the array is not 4-D
    """
    array = np.ascontiguousarray(data, dtype=np.float32)
    if array.ndim != 4:
        raise ShapeError(f"{name} must be 4-D (n, c, h, w)", shape=array.shape)
    return array


@dataclass
class PatchMatrix:
    """Flattened convolution patches (im2col layout).

    ``rows`` has one row per (batch item, y, x) in raster order and
    ``c * k * k`` columns ordered channel-major, then kernel row, then
    kernel column, matching a ``(K, c, k, k)`` weight reshaped to ``(K, D)``.
    """

    rows: npt.NDArray[np.float32]
    batch: int
    out_height: int
    out_width: int
    kernel: int
    padding: int
    stride: int = 1

    @property
    def num_rows(self) -> int:
        return int(self.rows.shape[0])

    @property
    def width(self) -> int:
        """Number of values per patch (D)."""
        return int(self.rows.shape[1])

    def origin(self) -> npt.NDArray[np.int64]:
        """(batch, y, x) of every row, in row order."""
        n, y, x = np.meshgrid(
            np.arange(self.batch),
            np.arange(self.out_height),
            np.arange(self.out_width),
            indexing="ij",
        )
        return np.stack([n.ravel(), y.ravel(), x.ravel()], axis=1)

    def to_feature_map(self, values: npt.NDArray[np.float32]) -> Tensor:
        """Reassemble per-row values ``(rows, K)`` into a ``(n, K, h, w)`` tensor."""
        channels = values.shape[1]
        grid = values.reshape(self.batch, self.out_height, self.out_width, channels)
        return np.ascontiguousarray(grid.transpose(0, 3, 1, 2))


@dataclass
class BatchNormState:
    """Running statistics of a non-affine BatchNorm (gamma = 1, beta = 0)."""

    num_channels: int
    eps: float = 1e-5
    momentum: float = 0.1
    running_mean: npt.NDArray[np.float32] = field(default=None)  # type: ignore[assignment]
    running_var: npt.NDArray[np.float32] = field(default=None)  # type: ignore[assignment]
    tracked_batches: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.momentum < 1.0:
            raise ShapeError("BatchNorm momentum must lie in (0, 1)", momentum=self.momentum)
        if self.eps <= 0:
            raise ShapeError("BatchNorm eps must be positive", eps=self.eps)
        if self.running_mean is None:
            self.running_mean = np.zeros(self.num_channels, dtype=np.float32)
        if self.running_var is None:
            self.running_var = np.ones(self.num_channels, dtype=np.float32)

    @property
    def has_statistics(self) -> bool:
        """Whether running stats were accumulated or loaded."""
        return self.tracked_batches > 0

    def scale(self) -> npt.NDArray[np.float32]:
        """Per-channel eval-mode multiplier ``1 / sqrt(var + eps)``."""
        return (1.0 / np.sqrt(self.running_var + np.float32(self.eps))).astype(np.float32)

    def copy(self) -> "BatchNormState":
        return BatchNormState(
            num_channels=self.num_channels,
            eps=self.eps,
            momentum=self.momentum,
            running_mean=self.running_mean.copy(),
            running_var=self.running_var.copy(),
            tracked_batches=self.tracked_batches,
        )
