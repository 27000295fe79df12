"""Layer composition, activations and architecture construction."""

from hebbnet.network.activations import apply_activation, relu, repu, softmax_fwd, triangle
from hebbnet.network.builder import (
    LAYER_DEFAULTS,
    build_architecture,
    build_fully_connected,
    layer_defaults,
)
from hebbnet.network.layer import (
    HebbianNetwork,
    LayerOutput,
    SoftHebbLayer,
    forward_layer,
)
from hebbnet.network.models import (
    STOP_RESOLUTION,
    ActivationKind,
    ActivationSpec,
    ArchitectureSpec,
    LayerOverrides,
    LayerSpec,
    NetworkMode,
    PoolSpec,
)

__all__ = [
    "LAYER_DEFAULTS",
    "STOP_RESOLUTION",
    "ActivationKind",
    "ActivationSpec",
    "ArchitectureSpec",
    "HebbianNetwork",
    "LayerOutput",
    "LayerOverrides",
    "LayerSpec",
    "NetworkMode",
    "PoolSpec",
    "SoftHebbLayer",
    "apply_activation",
    "build_architecture",
    "build_fully_connected",
    "forward_layer",
    "layer_defaults",
    "relu",
    "repu",
    "softmax_fwd",
    "triangle",
]
