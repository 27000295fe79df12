"""Top-activating input patches of a neuron."""

import logging
from dataclasses import dataclass

import numpy as np

from hebbnet.analysis.models import BoundingBox, PatchActivation
from hebbnet.core.exceptions import ConfigError, ShapeError
from hebbnet.data.models import Dataset
from hebbnet.network.layer import HebbianNetwork
from hebbnet.tensor.batchnorm import batch_norm
from hebbnet.tensor.models import Mode
from hebbnet.tensor.ops import conv_from_patches, extract_patches

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FieldGeometry:
    """Affine map from a map position to its input pixel span.

    Position ``y`` covers input rows ``scale*y + start`` to ``scale*y + end``.
    """

    scale: int = 1
    start: int = 0
    end: int = 0

    def then(self, kernel: int, stride: int, padding: int) -> "FieldGeometry":
        return FieldGeometry(
            scale=self.scale * stride,
            start=self.start - self.scale * padding,
            end=self.end + self.scale * (kernel - 1 - padding),
        )

    def box(self, y: int, x: int) -> BoundingBox:
        return BoundingBox(
            y0=self.scale * y + self.start,
            x0=self.scale * x + self.start,
            y1=self.scale * y + self.end,
            x1=self.scale * x + self.end,
        )


def field_geometry(network: HebbianNetwork, layer: int) -> FieldGeometry:
    """Geometry of ``layer``'s convolution map, composed through every lower layer."""
    target = network.layer(layer)
    geometry = FieldGeometry()
    for spec in network.architecture.layers[: layer - 1]:
        geometry = geometry.then(spec.conv_kernel, 1, spec.conv_padding)
        if spec.pool is not None:
            geometry = geometry.then(spec.pool.kernel, spec.pool.stride, spec.pool.resolved_padding)
    return geometry.then(target.spec.conv_kernel, 1, target.spec.conv_padding)


def top_activating_patches(
    network: HebbianNetwork,
    dataset: Dataset,
    layer: int,
    neuron: int,
    k: int = 9,
    batch_size: int = 256,
) -> list[PatchActivation]:
    """The ``k`` strongest responses of a neuron over every map position of the dataset.

    Responses are the neuron's convolution output in eval mode. Ties are
    broken by image index, then row, then column. Boxes are not clipped to
    the image; padding may push them past the border.

    Raises:
        ConfigError: If ``k`` < 1
        ShapeError: If the neuron index is out of range
    """
    if k < 1:
        raise ConfigError(f"k must be at least 1, got {k}")
    target = network.layer(layer)
    if not 0 <= neuron < target.bank.num_neurons:
        raise ShapeError("neuron index out of range", neuron=neuron, width=target.bank.num_neurons)
    geometry = field_geometry(network, layer)

    values: list[np.ndarray] = []
    coords: list[np.ndarray] = []
    for start in range(0, len(dataset), batch_size):
        images = dataset.images[start : start + batch_size]
        below = network.forward(images, upto=layer - 1) if layer > 1 else images
        normalized = batch_norm(below, target.bn, Mode.EVAL)
        patches = extract_patches(
            normalized, target.spec.conv_kernel, 1, target.spec.conv_padding
        )
        _, conv = conv_from_patches(patches, target.bank.weights[neuron : neuron + 1])
        response = conv[:, 0].astype(np.float64)
        n, h, w = response.shape
        idx, ys, xs = np.meshgrid(np.arange(n) + start, np.arange(h), np.arange(w), indexing="ij")
        flat = response.ravel()
        stacked = np.stack([idx.ravel(), ys.ravel(), xs.ravel()])
        # Keep at most k candidates per batch.
        if len(flat) > k:
            keep = np.lexsort((stacked[2], stacked[1], stacked[0], -flat))[:k]
            flat, stacked = flat[keep], stacked[:, keep]
        values.append(flat)
        coords.append(stacked)

    if not values:
        return []
    flat = np.concatenate(values)
    stacked = np.concatenate(coords, axis=1)
    order = np.lexsort((stacked[2], stacked[1], stacked[0], -flat))[:k]
    logger.debug(f"Mined {len(order)} patches for layer {layer} neuron {neuron}")
    return [
        PatchActivation(
            image_index=int(stacked[0, i]),
            y=int(stacked[1, i]),
            x=int(stacked[2, i]),
            box=geometry.box(int(stacked[1, i]), int(stacked[2, i])),
            activation=float(flat[i]),
        )
        for i in order
    ]
