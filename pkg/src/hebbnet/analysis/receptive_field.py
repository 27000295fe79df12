"""Receptive-field synthesis by projected gradient ascent.

The objective is a neuron's linear response: its convolution output at the
center of its layer's map. Activation functions are bypassed on the way
there, while eval-mode BatchNorm (an affine map) and pooling are traversed.
"""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from hebbnet.analysis.models import ReceptiveField
from hebbnet.core.exceptions import ShapeError
from hebbnet.core.utils import make_rng
from hebbnet.network.layer import HebbianNetwork, SoftHebbLayer
from hebbnet.tensor.batchnorm import batch_norm
from hebbnet.tensor.models import Mode, PatchMatrix, Tensor, as_tensor
from hebbnet.tensor.ops import conv_from_patches, extract_patches, fold_patches, pool, pool_backward

logger = logging.getLogger(__name__)

RF_STREAM = 11
DEFAULT_STEPS = 256
DEFAULT_STEP_SIZE = 0.05
CONVERGENCE_WINDOW = 10
CONVERGENCE_TOLERANCE = 1e-5


@dataclass
class _Stage:
    layer: SoftHebbLayer
    input_shape: tuple[int, int, int, int]
    patches: PatchMatrix
    conv: Tensor


def _check_target(network: HebbianNetwork, layer: int, neuron: int) -> SoftHebbLayer:
    target = network.layer(layer)
    if not 0 <= neuron < target.bank.num_neurons:
        raise ShapeError("neuron index out of range", neuron=neuron, width=target.bank.num_neurons)
    return target


def _linear_forward(
    network: HebbianNetwork, images: Tensor, layer: int
) -> tuple[list[_Stage], Tensor]:
    """Forward to layer ``layer``'s convolution map without activations."""
    x = as_tensor(images)
    stages = []
    for index in range(1, layer + 1):
        current = network.layer(index)
        normalized = batch_norm(x, current.bn, Mode.EVAL)
        patches = extract_patches(
            normalized, current.spec.conv_kernel, 1, current.spec.conv_padding
        )
        _, conv = conv_from_patches(patches, current.bank.weights)
        n, c, h, w = x.shape
        stages.append(_Stage(current, (n, c, h, w), patches, conv))
        if index == layer:
            return stages, conv
        pool_spec = current.spec.pool
        x = conv
        if pool_spec is not None:
            x = pool(
                conv, pool_spec.kind, pool_spec.kernel, pool_spec.stride, pool_spec.resolved_padding
            )
    raise ShapeError("layer must be at least 1", layer=layer)


def center_position(network: HebbianNetwork, layer: int) -> tuple[int, int]:
    """Center of the layer's convolution map."""
    target = network.layer(layer)
    size = network.architecture.input_resolution_of(layer)
    out = size + 2 * target.spec.conv_padding - target.spec.conv_kernel + 1
    return out // 2, out // 2


def linear_response(
    network: HebbianNetwork,
    images: Tensor,
    layer: int,
    neuron: int,
    position: tuple[int, int] | None = None,
) -> npt.NDArray[np.float64]:
    """The neuron's linear response for every image in the batch."""
    _check_target(network, layer, neuron)
    y, x = position or center_position(network, layer)
    _, conv = _linear_forward(network, images, layer)
    return conv[:, neuron, y, x].astype(np.float64)


def linear_response_gradient(
    network: HebbianNetwork,
    image: Tensor,
    layer: int,
    neuron: int,
    position: tuple[int, int] | None = None,
) -> tuple[float, npt.NDArray[np.float64]]:
    """Response of one image and its analytic gradient w.r.t. that image.

    Returns:
        Tuple of (response, gradient shaped like ``image``)
    """
    _check_target(network, layer, neuron)
    y, x = position or center_position(network, layer)
    stages, conv = _linear_forward(network, image, layer)
    value = float(conv[0, neuron, y, x])

    grad_map = np.zeros(conv.shape, dtype=np.float64)
    grad_map[0, neuron, y, x] = 1.0
    grad = grad_map
    for position_in_stack, stage in enumerate(reversed(stages)):
        if position_in_stack > 0:
            spec = stage.layer.spec.pool
            if spec is not None:
                grad = pool_backward(
                    grad, stage.conv, spec.kind, spec.kernel, spec.stride, spec.resolved_padding
                )
        rows = grad.transpose(0, 2, 3, 1).reshape(stage.patches.num_rows, -1)
        grad_patches = rows @ stage.layer.bank.weights.astype(np.float64)
        grad = fold_patches(grad_patches, stage.input_shape, stage.patches)
        grad = grad * stage.layer.bn.scale().astype(np.float64).reshape(1, -1, 1, 1)
    return value, grad


def receptive_field_pgd(
    network: HebbianNetwork,
    layer: int,
    neuron: int,
    steps: int = DEFAULT_STEPS,
    step_size: float = DEFAULT_STEP_SIZE,
    seed: int = 0,
) -> ReceptiveField:
    """Maximize a neuron's linear response over unit-norm inputs.

    Each step moves along the normalized gradient and projects back onto
    the unit sphere. The search stops early once the best response has
    improved by less than 1e-5 over 10 steps; otherwise the best image
    found is returned with ``converged=False``.

    Args:
        network: Network with BatchNorm statistics
        layer: 1-based layer
        neuron: Neuron index within the layer
        steps: Maximum ascent steps
        step_size: Step length along the normalized gradient
        seed: Seed of the random starting image

    Returns:
        ReceptiveField
    """
    _check_target(network, layer, neuron)
    arch = network.architecture
    shape = (1, arch.input_channels, arch.input_resolution, arch.input_resolution)
    position = center_position(network, layer)

    image = make_rng(seed, RF_STREAM, layer, neuron).normal(size=shape)
    image /= np.linalg.norm(image)
    best_image = image.copy()
    best, grad = linear_response_gradient(
        network, image.astype(np.float32), layer, neuron, position
    )
    history = [best]
    converged = False
    iterations = 0

    while iterations < steps:
        norm = np.linalg.norm(grad)
        if norm == 0:
            converged = True
            break
        iterations += 1
        image = image + step_size * grad / norm
        image /= np.linalg.norm(image)
        value, grad = linear_response_gradient(
            network, image.astype(np.float32), layer, neuron, position
        )
        if value > best:
            best = value
            best_image = image.copy()
        history.append(best)
        if (
            len(history) > CONVERGENCE_WINDOW
            and history[-1] - history[-1 - CONVERGENCE_WINDOW] < CONVERGENCE_TOLERANCE
        ):
            converged = True
            break

    logger.debug(
        f"RF layer {layer} neuron {neuron}: response {best:.5f} after {iterations} steps"
        + ("" if converged else " (not converged)")
    )
    return ReceptiveField(
        image=best_image[0] / np.linalg.norm(best_image),
        layer=layer,
        neuron=neuron,
        activation=best,
        iterations=iterations,
        converged=converged,
    )


def embedded_kernel(network: HebbianNetwork, neuron: int) -> npt.NDArray[np.float64]:
    """A layer-1 kernel placed at the center position of an input-sized image, unit norm."""
    first = network.layer(1)
    arch = network.architecture
    k = first.spec.conv_kernel
    cy, cx = center_position(network, 1)
    p = first.spec.conv_padding
    image = np.zeros((arch.input_channels, arch.input_resolution, arch.input_resolution))
    image[:, cy - p : cy - p + k, cx - p : cx - p + k] = first.bank.kernels()[neuron]
    return image / np.linalg.norm(image)


def cosine_similarity(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def response_percentile(
    network: HebbianNetwork,
    field: ReceptiveField,
    images: Tensor,
    batch_size: int = 256,
) -> float:
    """Percentile of the field's response among unit-normalized dataset images.

    Dataset images are scaled to unit L2 norm so they compete under the
    same constraint as the synthesized field.
    """
    responses = []
    for start in range(0, len(images), batch_size):
        batch = np.asarray(images[start : start + batch_size], dtype=np.float64)
        norms = np.linalg.norm(batch.reshape(len(batch), -1), axis=1).reshape(-1, 1, 1, 1)
        unit = (batch / np.maximum(norms, 1e-12)).astype(np.float32)
        responses.append(linear_response(network, unit, field.layer, field.neuron))
    values = np.concatenate(responses) if responses else np.empty(0)
    if len(values) == 0:
        return 100.0
    return float(100.0 * np.mean(values < field.activation))
