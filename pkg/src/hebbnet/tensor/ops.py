"""Patch extraction, convolution and pooling kernels.

Convolution is implemented im2col style: patches are materialized as a
dense ``(rows, D)`` matrix so that both the forward pass and plasticity are
single matrix products.
"""

from typing import Literal, Protocol

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view

from hebbnet.core.exceptions import ShapeError
from hebbnet.tensor.models import PatchMatrix, PoolKind, Tensor, as_tensor

POOL_KERNELS = (2, 3, 4)
POOL_STRIDE = 2


class KernelBank(Protocol):
    """Anything that holds convolution weights as a ``(K, D)`` matrix."""

    weights: npt.NDArray[np.float32]

    @property
    def geometry(self) -> tuple[int, int, int]:
        """(channels, kernel, kernel)."""
        ...


def _check_geometry(kernel: int, stride: int, padding: int) -> None:
    if kernel < 1 or stride < 1 or padding < 0:
        raise ShapeError(
            "invalid patch geometry", kernel=kernel, stride=stride, padding=padding
        )


def extract_patches(
    input: Tensor, kernel: int, stride: int = 1, padding: int = 0
) -> PatchMatrix:
    """Extract every ``kernel x kernel`` patch of a tensor into a matrix.

    Args:
        input: Tensor of shape (n, c, h, w)
        kernel: Square patch size
        stride: Step between patches
        padding: Zero padding added on every border

    Returns:
        PatchMatrix with rows in raster order per batch item

    Raises:
        ShapeError: On invalid geometry or when the padded input is smaller
            than the kernel
    """
    _check_geometry(kernel, stride, padding)
    x = as_tensor(input)
    n, c, h, w = x.shape
    if h + 2 * padding < kernel or w + 2 * padding < kernel:
        raise ShapeError(
            "padded input smaller than kernel",
            height=h,
            width=w,
            padding=padding,
            kernel=kernel,
        )
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
    out_h, out_w = windows.shape[2], windows.shape[3]
    rows = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * out_h * out_w, c * kernel * kernel)
    return PatchMatrix(
        rows=np.ascontiguousarray(rows, dtype=np.float32),
        batch=n,
        out_height=out_h,
        out_width=out_w,
        kernel=kernel,
        padding=padding,
        stride=stride,
    )


def fold_patches(
    rows: npt.NDArray[np.floating], input_shape: tuple[int, int, int, int], patches: PatchMatrix
) -> npt.NDArray[np.float64]:
    """Scatter-add patch rows back onto an input-shaped tensor (col2im).

    This is the adjoint of :func:`extract_patches`; overlapping patches sum.
    """
    n, c, h, w = input_shape
    k, s, p = patches.kernel, patches.stride, patches.padding
    ho, wo = patches.out_height, patches.out_width
    if rows.shape != (n * ho * wo, c * k * k):
        raise ShapeError("patch rows do not match geometry", rows=rows.shape, input=input_shape)
    cols = np.asarray(rows, dtype=np.float64).reshape(n, ho, wo, c, k, k)
    out = np.zeros((n, c, h + 2 * p, w + 2 * p), dtype=np.float64)
    for ky in range(k):
        for kx in range(k):
            out[:, :, ky : ky + s * ho : s, kx : kx + s * wo : s] += cols[..., ky, kx].transpose(
                0, 3, 1, 2
            )
    return out[:, :, p : p + h, p : p + w]


def same_padding(kernel: int) -> int:
    """Padding that keeps a stride-1 convolution output the input's size.

    Raises:
        ShapeError: For even kernels, which have no center
    """
    if kernel % 2 == 0:
        raise ShapeError("same padding needs an odd kernel", kernel=kernel)
    return (kernel - 1) // 2


def conv_from_patches(
    patches: PatchMatrix, weights: npt.NDArray[np.float32]
) -> tuple[npt.NDArray[np.float32], Tensor]:
    """Convolve pre-extracted patches with a ``(K, D)`` weight matrix.

    Returns:
        Tuple of (per-patch pre-activations ``(rows, K)``, feature map ``(n, K, h, w)``)
    """
    if weights.shape[1] != patches.width:
        raise ShapeError(
            "bank synapse count does not match patch width",
            synapses=weights.shape[1],
            patch_width=patches.width,
        )
    u = patches.rows @ weights.T
    return u, patches.to_feature_map(u)


def conv_forward(
    input: Tensor, bank: KernelBank, padding: int | Literal["same"] = "same"
) -> Tensor:
    """Stride-1 convolution of a tensor with a neuron bank.

    Args:
        input: Tensor of shape (n, c, h, w)
        bank: Weights ``(K, c*k*k)`` with geometry ``(c, k, k)``
        padding: Explicit padding, or ``"same"`` for ``(k - 1) / 2``

    Returns:
        Tensor of shape (n, K, h_out, w_out)
    """
    x = as_tensor(input)
    channels, kernel, _ = bank.geometry
    if x.shape[1] != channels:
        raise ShapeError("input channels do not match bank", input=x.shape[1], bank=channels)
    pad = same_padding(kernel) if padding == "same" else int(padding)
    patches = extract_patches(x, kernel, stride=1, padding=pad)
    _, out = conv_from_patches(patches, bank.weights)
    return out


def default_pool_padding(kernel: int) -> int:
    """Padding that makes a stride-2 pool exactly halve even inputs."""
    return {2: 0, 3: 1, 4: 1}.get(kernel, (kernel - 1) // 2)


def pool_output_size(size: int, kernel: int, stride: int = POOL_STRIDE, padding: int = 0) -> int:
    """Spatial output size of a pooling window."""
    return (size + 2 * padding - kernel) // stride + 1


def _check_pool(x: Tensor, kernel: int, stride: int, padding: int) -> None:
    if kernel not in POOL_KERNELS:
        raise ShapeError("pool kernel must be 2, 3 or 4", kernel=kernel)
    if stride != POOL_STRIDE:
        raise ShapeError("pool stride is fixed at 2", stride=stride)
    if padding < 0 or padding >= kernel:
        raise ShapeError(
            "pool window would lie entirely in padding", kernel=kernel, padding=padding
        )
    h, w = x.shape[2], x.shape[3]
    if h + 2 * padding < kernel or w + 2 * padding < kernel:
        raise ShapeError("padded input smaller than pool kernel", height=h, width=w, kernel=kernel)


def _pool_counts(h: int, w: int, kernel: int, stride: int, padding: int) -> npt.NDArray[np.float32]:
    ones = np.pad(np.ones((h, w), dtype=np.float32), padding)
    return sliding_window_view(ones, (kernel, kernel))[::stride, ::stride].sum(axis=(-2, -1))


def pool(
    input: Tensor,
    kind: PoolKind | str,
    kernel: int,
    stride: int = POOL_STRIDE,
    padding: int | None = None,
) -> Tensor:
    """Max or average pooling.

    Max pooling ignores padded cells; average pooling divides by the
    number of non-padded cells in each window.

    Args:
        input: Tensor of shape (n, c, h, w)
        kind: ``max`` or ``avg``
        kernel: Window size (2, 3 or 4)
        stride: Window step (fixed at 2)
        padding: Border padding; defaults to the exact-halving padding

    Returns:
        Pooled tensor
    """
    kind = PoolKind(kind)
    x = as_tensor(input)
    padding = default_pool_padding(kernel) if padding is None else padding
    _check_pool(x, kernel, stride, padding)
    pad = ((0, 0), (0, 0), (padding, padding), (padding, padding))
    if kind is PoolKind.MAX:
        padded = np.pad(x, pad, constant_values=-np.inf) if padding else x
        windows = sliding_window_view(padded, (kernel, kernel), axis=(2, 3))
        windows = windows[:, :, ::stride, ::stride]
        return np.ascontiguousarray(windows.max(axis=(-2, -1)), dtype=np.float32)

    padded = np.pad(x, pad) if padding else x
    windows = sliding_window_view(padded, (kernel, kernel), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]
    counts = _pool_counts(x.shape[2], x.shape[3], kernel, stride, padding)
    return np.ascontiguousarray(windows.sum(axis=(-2, -1)) / counts, dtype=np.float32)


def pool_backward(
    grad_output: npt.NDArray[np.floating],
    input: Tensor,
    kind: PoolKind | str,
    kernel: int,
    stride: int = POOL_STRIDE,
    padding: int | None = None,
) -> npt.NDArray[np.float64]:
    """Route a gradient through a pooling stage.

    Max pooling sends each window's gradient to its arg-max cell (first
    maximum on ties); average pooling spreads it uniformly over the
    window's non-padded cells.
    """
    kind = PoolKind(kind)
    x = as_tensor(input)
    padding = default_pool_padding(kernel) if padding is None else padding
    _check_pool(x, kernel, stride, padding)
    n, c, h, w = x.shape
    grad = np.asarray(grad_output, dtype=np.float64)
    ho, wo = grad.shape[2], grad.shape[3]
    out = np.zeros((n, c, h + 2 * padding, w + 2 * padding), dtype=np.float64)

    if kind is PoolKind.MAX:
        pad = ((0, 0), (0, 0), (padding, padding), (padding, padding))
        padded = np.pad(x, pad, constant_values=-np.inf) if padding else x
        windows = sliding_window_view(padded, (kernel, kernel), axis=(2, 3))
        windows = windows[:, :, ::stride, ::stride]
        flat = windows.reshape(n, c, ho, wo, kernel * kernel).argmax(axis=-1)
        rows = np.arange(ho)[:, None] * stride + flat // kernel
        cols = np.arange(wo)[None, :] * stride + flat % kernel
        nn, cc = np.meshgrid(np.arange(n), np.arange(c), indexing="ij")
        np.add.at(out, (nn[..., None, None], cc[..., None, None], rows, cols), grad)
    else:
        share = grad / _pool_counts(h, w, kernel, stride, padding)
        for ky in range(kernel):
            for kx in range(kernel):
                out[:, :, ky : ky + stride * ho : stride, kx : kx + stride * wo : stride] += share

    return out[:, :, padding : padding + h, padding : padding + w]
