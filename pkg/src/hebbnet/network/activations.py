"""Forward activation functions.

Channel-wise functions operate along ``axis`` (the channel axis of an
``(n, c, h, w)`` tensor by default).
"""

import numpy as np
import numpy.typing as npt

from hebbnet.network.models import ActivationKind, ActivationSpec
from hebbnet.plasticity.rules import soft_competition

FloatArray = npt.NDArray[np.floating]


def relu(u: FloatArray) -> FloatArray:
    return np.maximum(u, 0)


def repu(u: FloatArray, power: float) -> FloatArray:
    """Rectified polynomial unit: ``u ** p`` for ``u > 0``, else 0."""
    positive = np.maximum(u, 0)
    if power == 1:
        return positive
    return np.power(positive, positive.dtype.type(power))


def triangle(u: FloatArray, power: float, axis: int = 1) -> FloatArray:
    """RePU of each channel minus the cross-channel mean at its position."""
    u = np.asarray(u)
    return repu(u - u.mean(axis=axis, keepdims=True), power)


def softmax_fwd(u: FloatArray, inverse_temperature: float, axis: int = 1) -> FloatArray:
    """Softmax across channels at every spatial position."""
    return soft_competition(u, inverse_temperature, axis=axis)


def apply_activation(x: FloatArray, spec: ActivationSpec, axis: int = 1) -> FloatArray:
    """Dispatch on ``spec.kind``."""
    if spec.kind is ActivationKind.REPU:
        return repu(x, spec.power)
    if spec.kind is ActivationKind.TRIANGLE:
        return triangle(x, spec.power, axis=axis)
    if spec.kind is ActivationKind.SOFTMAX:
        return softmax_fwd(x, spec.inverse_temperature, axis=axis)
    return relu(x)
