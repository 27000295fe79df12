"""Non-affine batch normalization with running statistics."""

import numpy as np

from hebbnet.core.exceptions import ShapeError, StateError
from hebbnet.tensor.models import BatchNormState, Mode, Tensor, as_tensor


def batch_norm(input: Tensor, state: BatchNormState, mode: Mode | str) -> Tensor:
    """Normalize each channel with gamma = 1 and beta = 0.

    Train mode normalizes with the current batch's per-channel mean and
    (biased) variance and folds them into the running statistics; the
    running variance uses the unbiased estimate. Eval mode uses the
    running statistics only.

    Args:
        input: Tensor of shape (n, c, h, w)
        state: Running statistics, mutated in train mode
        mode: ``train`` or ``eval``

    Returns:
        Normalized tensor

    Raises:
        ShapeError: On channel mismatch or fewer than 2 values per channel
        StateError: In eval mode when no statistics were ever accumulated
    """
    mode = Mode(mode)
    x = as_tensor(input)
    if x.shape[1] != state.num_channels:
        raise ShapeError(
            "BatchNorm channel mismatch", input=x.shape[1], expected=state.num_channels
        )

    if mode is Mode.EVAL:
        if not state.has_statistics:
            raise StateError("BatchNorm evaluated before any train-mode statistics")
        mean = state.running_mean.reshape(1, -1, 1, 1)
        return ((x - mean) * state.scale().reshape(1, -1, 1, 1)).astype(np.float32)

    count = x.shape[0] * x.shape[2] * x.shape[3]
    if count < 2:
        raise ShapeError("train-mode BatchNorm needs at least 2 values per channel", count=count)
    mean = x.mean(axis=(0, 2, 3), dtype=np.float64)
    var = x.var(axis=(0, 2, 3), dtype=np.float64)
    out = (x - mean.reshape(1, -1, 1, 1)) / np.sqrt(var.reshape(1, -1, 1, 1) + state.eps)

    m = state.momentum
    state.running_mean = ((1 - m) * state.running_mean + m * mean).astype(np.float32)
    unbiased = var * count / (count - 1)
    state.running_var = ((1 - m) * state.running_var + m * unbiased).astype(np.float32)
    state.tracked_batches += 1
    return out.astype(np.float32)
