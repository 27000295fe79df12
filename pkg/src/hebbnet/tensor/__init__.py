"""Dense tensor engine: patches, convolution, pooling, batch normalization."""

from hebbnet.tensor.batchnorm import batch_norm
from hebbnet.tensor.models import BatchNormState, Mode, PatchMatrix, PoolKind, Tensor, as_tensor
from hebbnet.tensor.ops import (
    conv_forward,
    conv_from_patches,
    default_pool_padding,
    extract_patches,
    fold_patches,
    pool,
    pool_backward,
    pool_output_size,
    same_padding,
)

__all__ = [
    "BatchNormState",
    "Mode",
    "PatchMatrix",
    "PoolKind",
    "Tensor",
    "as_tensor",
    "batch_norm",
    "conv_forward",
    "conv_from_patches",
    "default_pool_padding",
    "extract_patches",
    "fold_patches",
    "pool",
    "pool_backward",
    "pool_output_size",
    "same_padding",
]
