"""Declarative layer and architecture descriptions."""

from enum import Enum

from pydantic import BaseModel, Field, field_validator, model_validator

from hebbnet.plasticity.models import (
    Aggregation,
    InitFamily,
    InitSpec,
    LearningRateScheme,
    PlasticityConfig,
    PlasticityMode,
)
from hebbnet.tensor.models import PoolKind
from hebbnet.tensor.ops import POOL_KERNELS, POOL_STRIDE, default_pool_padding, pool_output_size

# Layers are added until the output resolution is at most this many pixels.
STOP_RESOLUTION = 6


class ActivationKind(str, Enum):
    """Forward nonlinearity applied after pooling."""

    REPU = "repu"
    TRIANGLE = "triangle"
    SOFTMAX = "softmax"
    RELU = "relu"


class NetworkMode(str, Enum):
    """Convolutional stack or a single fully connected layer."""

    CONVOLUTIONAL = "convolutional"
    FULLY_CONNECTED = "fully_connected"


class ActivationSpec(BaseModel):
    """Activation function and its parameters."""

    kind: ActivationKind = Field(default=ActivationKind.TRIANGLE)
    power: float = Field(default=1.0, gt=0, description="RePU / Triangle power p")
    inverse_temperature: float = Field(
        default=1.0, gt=0, allow_inf_nan=False, description="Forward softmax 1/tau"
    )


class PoolSpec(BaseModel):
    """Pooling stage; stride is fixed at 2."""

    kind: PoolKind = Field(default=PoolKind.MAX)
    kernel: int = Field(default=4, description="Window size (2, 3 or 4)")
    stride: int = Field(default=POOL_STRIDE)
    padding: int | None = Field(default=None, description="None selects the halving padding")

    @field_validator("kernel")
    @classmethod
    def _check_kernel(cls, value: int) -> int:
        if value not in POOL_KERNELS:
            raise ValueError(f"pool kernel must be one of {POOL_KERNELS}, got {value}")
        return value

    @field_validator("stride")
    @classmethod
    def _check_stride(cls, value: int) -> int:
        if value != POOL_STRIDE:
            raise ValueError(f"pool stride is fixed at {POOL_STRIDE}")
        return value

    @property
    def resolved_padding(self) -> int:
        return default_pool_padding(self.kernel) if self.padding is None else self.padding

    def output_size(self, size: int) -> int:
        return pool_output_size(size, self.kernel, self.stride, self.resolved_padding)


class LayerSpec(BaseModel):
    """One BN -> SoftHebb conv -> pool -> activation layer."""

    in_channels: int = Field(ge=1)
    out_channels: int = Field(ge=1, description="Layer width (number of neurons)")
    conv_kernel: int = Field(ge=1)
    conv_padding: int = Field(ge=0)
    pool: PoolSpec | None = Field(default_factory=PoolSpec)
    activation: ActivationSpec = Field(default_factory=ActivationSpec)
    plasticity: PlasticityConfig = Field(default_factory=PlasticityConfig)
    init: InitSpec = Field(default_factory=InitSpec)
    bn_eps: float = Field(default=1e-5, gt=0)
    bn_momentum: float = Field(default=0.1, gt=0, lt=1)

    @property
    def synapses(self) -> int:
        """Weights per neuron, D = c * k * k."""
        return self.in_channels * self.conv_kernel**2

    @property
    def geometry(self) -> tuple[int, int, int]:
        return (self.in_channels, self.conv_kernel, self.conv_kernel)

    def output_resolution(self, resolution: int) -> int:
        """Spatial size after this layer's convolution and pooling."""
        size = resolution + 2 * self.conv_padding - self.conv_kernel + 1
        return self.pool.output_size(size) if self.pool is not None else size


class ArchitectureSpec(BaseModel):
    """A width-scaled stack of SoftHebb layers."""

    input_resolution: int = Field(ge=1)
    input_channels: int = Field(ge=1)
    first_width: int = Field(ge=1)
    width_factor: float = Field(default=4.0, ge=1)
    mode: NetworkMode = Field(default=NetworkMode.CONVOLUTIONAL)
    layers: list[LayerSpec] = Field(min_length=1)
    notes: list[str] = Field(default_factory=list, description="Defaults filled in by the builder")

    @model_validator(mode="after")
    def _check_stack(self) -> "ArchitectureSpec":
        expected_in = self.input_channels
        for index, layer in enumerate(self.layers, start=1):
            if layer.in_channels != expected_in:
                raise ValueError(
                    f"layer {index} expects {layer.in_channels} channels, receives {expected_in}"
                )
            if index > 1 and layer.out_channels != scaled_width(
                self.layers[index - 2].out_channels, self.width_factor
            ):
                raise ValueError(f"layer {index} width breaks the width factor {self.width_factor}")
            if self.mode is NetworkMode.CONVOLUTIONAL and (
                layer.conv_kernel % 2 == 0 or layer.conv_padding != (layer.conv_kernel - 1) // 2
            ):
                raise ValueError(f"layer {index} convolution must be odd-sized and same-padded")
            expected_in = layer.out_channels

        trace = self.resolution_trace()
        if any(size < 1 for size in trace):
            raise ValueError(f"resolution collapses: {trace}")
        if self.mode is NetworkMode.CONVOLUTIONAL and any(
            size <= STOP_RESOLUTION for size in trace[:-1]
        ):
            raise ValueError(f"layers continue past the stop resolution: {trace}")
        return self

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def widths(self) -> list[int]:
        return [layer.out_channels for layer in self.layers]

    def resolution_trace(self) -> list[int]:
        """Output resolution after each layer."""
        sizes = []
        size = self.input_resolution
        for layer in self.layers:
            size = layer.output_resolution(size)
            sizes.append(size)
        return sizes

    def input_resolution_of(self, layer: int) -> int:
        """Input resolution of the 1-based ``layer``."""
        return ([self.input_resolution] + self.resolution_trace())[layer - 1]

    def feature_dim(self, layer: int | None = None) -> int:
        """Flattened output size of ``layer`` (default: last)."""
        index = self.depth if layer is None else layer
        size = self.resolution_trace()[index - 1]
        return self.layers[index - 1].out_channels * size * size


def scaled_width(previous: int, width_factor: float) -> int:
    """Width of the next layer: ``f_w * #F_(l-1)``."""
    return max(1, int(round(previous * width_factor)))


class LayerOverrides(BaseModel):
    """Optional per-layer hyperparameters; unset fields keep the defaults."""

    conv_kernel: int | None = Field(default=None, ge=1)
    base_lr: float | None = Field(default=None, gt=0)
    lr_power: float | None = Field(default=None, gt=0, le=1)
    inverse_temperature: float | None = Field(default=None, gt=0, allow_inf_nan=False)
    mode: PlasticityMode | None = None
    aggregation: Aggregation | None = None
    lr_scheme: LearningRateScheme | None = None
    sequential: bool | None = None
    pool_kind: PoolKind | None = None
    pool_kernel: int | None = None
    activation_kind: ActivationKind | None = None
    activation_power: float | None = Field(default=None, gt=0)
    activation_inverse_temperature: float | None = Field(default=None, gt=0)
    init_family: InitFamily | None = None
    init_radius: float | None = Field(default=None, gt=0)

    def merged(self, other: "LayerOverrides | None") -> "LayerOverrides":
        """Copy with every field set in ``other`` taking precedence."""
        if other is None:
            return self
        return self.model_copy(update=other.model_dump(exclude_none=True))
