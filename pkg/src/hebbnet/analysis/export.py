"""Artifact export: PPM image grids, CSV tables and metric plots."""

import csv
import logging
import math
from io import StringIO
from pathlib import Path

import numpy as np
import numpy.typing as npt

from hebbnet.analysis.models import PatchActivation, R1Report
from hebbnet.core.exceptions import ExportError, ShapeError
from hebbnet.training.models import MetricsRecord

logger = logging.getLogger(__name__)

SEPARATOR = 255


def default_grid(count: int) -> tuple[int, int]:
    """(rows, cols) for ``count`` tiles, a little wider than tall."""
    if count < 1:
        raise ShapeError("grid needs at least one image", count=count)
    cols = min(count, math.ceil(math.sqrt(1.5 * count)))
    return math.ceil(count / cols), cols


def _to_rgb(image: npt.NDArray[np.float64]) -> npt.NDArray[np.uint8]:
    """Min-max stretch one (c, h, w) image to (h, w, 3) bytes."""
    low, high = float(image.min()), float(image.max())
    if high > low:
        scaled = np.rint((image - low) / (high - low) * 255.0)
    else:
        scaled = np.zeros_like(image)
    pixels = scaled.astype(np.uint8).transpose(1, 2, 0)
    if pixels.shape[2] == 1:
        pixels = np.repeat(pixels, 3, axis=2)
    return pixels


def render_grid(
    images: npt.ArrayLike, grid: tuple[int, int] | None = None
) -> npt.NDArray[np.uint8]:
    """Tile images row-major into an RGB raster.

    Tiles are separated, and the whole grid framed, by 1-pixel white lines.
    Each tile is contrast-stretched on its own. Unused cells stay white.

    Args:
        images: ``(n, c, h, w)`` with c in {1, 3}, or ``(n, h, w)``
        grid: (rows, cols); chosen automatically when omitted

    Returns:
        ``(H, W, 3)`` uint8 array
    """
    stack = np.asarray(images, dtype=np.float64)
    if stack.ndim == 3:
        stack = stack[:, None]
    if stack.ndim != 4 or stack.shape[1] not in (1, 3):
        raise ShapeError("images must be (n, 1|3, h, w)", shape=stack.shape)
    n, _, h, w = stack.shape
    rows, cols = grid or default_grid(n)
    if rows * cols < n:
        raise ShapeError("grid too small for images", rows=rows, cols=cols, images=n)

    canvas = np.full((rows * (h + 1) + 1, cols * (w + 1) + 1, 3), SEPARATOR, dtype=np.uint8)
    for index in range(n):
        r, c = divmod(index, cols)
        y, x = 1 + r * (h + 1), 1 + c * (w + 1)
        canvas[y : y + h, x : x + w] = _to_rgb(stack[index])
    return canvas


def ppm_bytes(raster: npt.NDArray[np.uint8]) -> bytes:
    height, width, _ = raster.shape
    return f"P6\n{width} {height}\n255\n".encode("ascii") + raster.tobytes()


def export_image_grid(
    images: npt.ArrayLike, path: Path, grid: tuple[int, int] | None = None
) -> Path:
    """Write a tiled image grid as binary PPM.

    Raises:
        ExportError: If the file cannot be written
    """
    data = ppm_bytes(render_grid(images, grid))
    _write_bytes(path, data)
    logger.info(f"Wrote image grid to {path}")
    return path


def _write_bytes(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as e:
        raise ExportError(f"Cannot write file: {e.strerror}", path=path) from e


def _write_text(path: Path, text: str) -> None:
    _write_bytes(path, text.encode("utf-8"))


def features_to_csv(
    features: npt.ArrayLike, labels: npt.ArrayLike | None = None
) -> str:
    """One row per sample: optional label, then ``f0..f{D-1}``."""
    matrix = np.asarray(features, dtype=np.float64)
    if matrix.ndim != 2:
        raise ShapeError("features must be 2-D", shape=matrix.shape)
    output = StringIO()
    writer = csv.writer(output, lineterminator="\n")
    header = [f"f{i}" for i in range(matrix.shape[1])]
    if labels is not None:
        label_array = np.asarray(labels).ravel()
        if len(label_array) != len(matrix):
            raise ShapeError(
                "labels and features differ in length",
                labels=len(label_array),
                features=len(matrix),
            )
        writer.writerow(["label", *header])
        for label, row in zip(label_array, matrix, strict=True):
            writer.writerow([int(label), *(f"{v:.6g}" for v in row)])
    else:
        writer.writerow(header)
        for row in matrix:
            writer.writerow([f"{v:.6g}" for v in row])
    return output.getvalue()


def export_features(
    features: npt.ArrayLike, path: Path, labels: npt.ArrayLike | None = None
) -> Path:
    """Write a feature matrix for external projection tools."""
    _write_text(path, features_to_csv(features, labels))
    return path


def r1_to_csv(report: R1Report) -> str:
    output = StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(["layer", "neurons", "r1_fraction", "mean_radius", "tolerance"])
    for layer in report.layers:
        writer.writerow(
            [
                layer.layer,
                layer.neurons,
                f"{layer.r1_fraction:.6f}",
                f"{layer.mean_radius:.6f}",
                report.tolerance,
            ]
        )
    return output.getvalue()


def export_r1(report: R1Report, path: Path) -> Path:
    _write_text(path, r1_to_csv(report))
    return path


def patches_to_csv(patches: list[PatchActivation], layer: int, neuron: int) -> str:
    """Ranked patch table; boxes are inclusive input-pixel coordinates."""
    output = StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(
        ["layer", "neuron", "rank", "image_index", "y", "x", "y0", "x0", "y1", "x1", "activation"]
    )
    for rank, patch in enumerate(patches, start=1):
        box = patch.box
        writer.writerow(
            [
                layer,
                neuron,
                rank,
                patch.image_index,
                patch.y,
                patch.x,
                box.y0,
                box.x0,
                box.y1,
                box.x1,
                f"{patch.activation:.6g}",
            ]
        )
    return output.getvalue()


def export_patches(
    patches: list[PatchActivation], path: Path, layer: int, neuron: int
) -> Path:
    _write_text(path, patches_to_csv(patches, layer, neuron))
    return path


def crop_patches(
    images: npt.ArrayLike, patches: list[PatchActivation]
) -> npt.NDArray[np.float64]:
    """Cut each patch's box out of its image, zero-filling past the border."""
    stack = np.asarray(images, dtype=np.float64)
    if not patches:
        return np.empty((0, *stack.shape[1:2], 0, 0))
    first = patches[0].box
    _, c, h, w = stack.shape
    crops = np.zeros((len(patches), c, first.height, first.width))
    for i, patch in enumerate(patches):
        box = patch.box
        clipped = box.clipped(h, w)
        crops[
            i,
            :,
            clipped.y0 - box.y0 : clipped.y1 - box.y0 + 1,
            clipped.x0 - box.x0 : clipped.x1 - box.x0 + 1,
        ] = stack[patch.image_index, :, clipped.y0 : clipped.y1 + 1, clipped.x0 : clipped.x1 + 1]
    return crops


def plot_metrics(records: list[MetricsRecord], path: Path, dpi: int = 100) -> Path:
    """Plot radius/R1 curves per layer and classifier curves to a PNG.

    Raises:
        ExportError: If matplotlib is unavailable or the file cannot be written
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as e:
        raise ExportError("matplotlib is required for plots", path=path) from e

    hebbian = [r for r in records if r.layer > 0]
    supervised = [r for r in records if r.layer == 0]
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
    radius_ax, r1_ax, head_ax = axes

    for layer in sorted({r.layer for r in hebbian}):
        rows = [r for r in hebbian if r.layer == layer]
        steps = [r.step for r in rows]
        radius_ax.plot(steps, [r.mean_radius for r in rows], label=f"layer {layer}")
        r1_ax.plot(steps, [r.r1_fraction for r in rows], label=f"layer {layer}")
    radius_ax.axhline(1.0, color="gray", linestyle="--", linewidth=0.8)
    radius_ax.set_xlabel("update step")
    radius_ax.set_ylabel("mean radius")
    r1_ax.set_xlabel("update step")
    r1_ax.set_ylabel("R1 fraction")
    r1_ax.set_ylim(-0.02, 1.02)

    if supervised:
        epochs = [r.step for r in supervised]
        head_ax.plot(epochs, [r.loss for r in supervised], label="loss")
        head_ax.plot(epochs, [r.train_acc for r in supervised], label="train acc")
        if any(r.val_acc is not None for r in supervised):
            head_ax.plot(epochs, [r.val_acc for r in supervised], label="val acc")
    head_ax.set_xlabel("epoch")
    head_ax.set_title("linear head", fontsize=9)

    for ax in axes:
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=7)
        ax.grid(True, alpha=0.3)
    plt.tight_layout()

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="png", dpi=dpi, facecolor="white")
    except OSError as e:
        raise ExportError(f"Cannot write plot: {e.strerror}", path=path) from e
    finally:
        plt.close(fig)
    logger.info(f"Wrote metrics plot to {path}")
    return path
