"""Width-scaled architecture construction.

Per-layer defaults are the CIFAR-10 optima for the first three layers;
deeper layers reuse the third layer's settings.
"""

import logging
from collections.abc import Sequence

from pydantic import ValidationError

from hebbnet.core.exceptions import ConfigError
from hebbnet.network.models import (
    STOP_RESOLUTION,
    ActivationKind,
    ActivationSpec,
    ArchitectureSpec,
    LayerOverrides,
    LayerSpec,
    NetworkMode,
    PoolSpec,
    scaled_width,
)
from hebbnet.plasticity.models import (
    Aggregation,
    InitFamily,
    InitSpec,
    LearningRateScheme,
    PlasticityConfig,
    PlasticityMode,
)
from hebbnet.tensor.models import PoolKind

logger = logging.getLogger(__name__)

MIN_INPUT_RESOLUTION = 8
MAX_DEPTH = 12

LAYER_DEFAULTS: tuple[LayerOverrides, ...] = (
    LayerOverrides(
        conv_kernel=5,
        base_lr=0.08,
        lr_power=0.5,
        inverse_temperature=1.0,
        pool_kind=PoolKind.MAX,
        pool_kernel=4,
        activation_kind=ActivationKind.TRIANGLE,
        activation_power=0.7,
    ),
    LayerOverrides(
        conv_kernel=3,
        base_lr=0.005,
        lr_power=0.5,
        inverse_temperature=0.65,
        pool_kind=PoolKind.MAX,
        pool_kernel=4,
        activation_kind=ActivationKind.TRIANGLE,
        activation_power=1.4,
    ),
    LayerOverrides(
        conv_kernel=3,
        base_lr=0.01,
        lr_power=0.5,
        inverse_temperature=0.25,
        pool_kind=PoolKind.AVG,
        pool_kernel=2,
        activation_kind=ActivationKind.TRIANGLE,
        activation_power=1.0,
    ),
)


def layer_defaults(index: int) -> LayerOverrides:
    """Default hyperparameters of the 1-based layer ``index``."""
    return LAYER_DEFAULTS[min(index, len(LAYER_DEFAULTS)) - 1]


def _layer_spec(
    in_channels: int,
    out_channels: int,
    settings: LayerOverrides,
    padding: int | None = None,
    pooled: bool = True,
) -> LayerSpec:
    kernel = settings.conv_kernel or 3
    plasticity = PlasticityConfig(
        inverse_temperature=settings.inverse_temperature or 1.0,
        base_lr=settings.base_lr or 0.08,
        lr_power=settings.lr_power or 0.5,
        mode=settings.mode or PlasticityMode.SOFT_ANTI_HEBBIAN,
        aggregation=settings.aggregation or Aggregation.MEAN,
        lr_scheme=settings.lr_scheme or LearningRateScheme.ADAPTIVE,
        sequential=bool(settings.sequential),
    )
    activation = ActivationSpec(
        kind=settings.activation_kind or ActivationKind.TRIANGLE,
        power=settings.activation_power or 1.0,
        inverse_temperature=settings.activation_inverse_temperature or 1.0,
    )
    init = InitSpec(family=settings.init_family or InitFamily.NORMAL)
    if settings.init_radius is not None:
        init = init.model_copy(update={"target_radius": settings.init_radius})
    pool = (
        PoolSpec(kind=settings.pool_kind or PoolKind.MAX, kernel=settings.pool_kernel or 2)
        if pooled
        else None
    )
    return LayerSpec(
        in_channels=in_channels,
        out_channels=out_channels,
        conv_kernel=kernel,
        conv_padding=(kernel - 1) // 2 if padding is None else padding,
        pool=pool,
        activation=activation,
        plasticity=plasticity,
        init=init,
    )


def build_architecture(
    input_resolution: int,
    input_channels: int,
    first_width: int,
    width_factor: float = 4.0,
    overrides: Sequence[LayerOverrides | None] = (),
    common: LayerOverrides | None = None,
    max_layers: int | None = None,
) -> ArchitectureSpec:
    """Stack layers until the output resolution reaches the stop size.

    Each layer's settings are its defaults, then ``common``, then its own
    entry in ``overrides``.

    Args:
        input_resolution: Input height/width in pixels
        input_channels: Input channel count
        first_width: Neurons in layer 1
        width_factor: Width multiplier between consecutive layers
        overrides: Per-layer overrides, index 0 is layer 1
        common: Overrides applied to every layer
        max_layers: Stop early after this many layers

    Returns:
        Validated ArchitectureSpec

    Raises:
        ConfigError: On invalid sizes or when the resolution does not shrink
    """
    if input_resolution < MIN_INPUT_RESOLUTION:
        raise ConfigError(
            f"Input resolution must be at least {MIN_INPUT_RESOLUTION}, got {input_resolution}"
        )
    if first_width < 1 or width_factor < 1:
        raise ConfigError(
            f"Invalid widths: first_width={first_width}, width_factor={width_factor}"
        )
    if max_layers is not None and max_layers < 1:
        raise ConfigError(f"max_layers must be positive, got {max_layers}")

    layers: list[LayerSpec] = []
    notes: list[str] = []
    size = input_resolution
    channels = input_channels
    width = first_width

    try:
        while size > STOP_RESOLUTION:
            index = len(layers) + 1
            if index > MAX_DEPTH:
                raise ConfigError(
                    f"Resolution {input_resolution} not reducible to {STOP_RESOLUTION} "
                    f"within {MAX_DEPTH} layers"
                )
            own = overrides[index - 1] if index <= len(overrides) else None
            settings = layer_defaults(index).merged(common).merged(own)
            if index > len(LAYER_DEFAULTS):
                notes.append(f"layer {index} uses layer {len(LAYER_DEFAULTS)} defaults")

            layer = _layer_spec(channels, width, settings)
            next_size = layer.output_resolution(size)
            if next_size >= size:
                raise ConfigError(f"Layer {index} does not reduce resolution {size}")
            layers.append(layer)
            logger.debug(f"Layer {index}: {channels}->{width} channels, {size}px -> {next_size}px")

            size = next_size
            channels = width
            width = scaled_width(width, width_factor)
            if max_layers is not None and len(layers) >= max_layers:
                break

        return ArchitectureSpec(
            input_resolution=input_resolution,
            input_channels=input_channels,
            first_width=first_width,
            width_factor=width_factor,
            mode=NetworkMode.CONVOLUTIONAL,
            layers=layers,
            notes=notes,
        )
    except ValidationError as e:
        raise ConfigError(f"Invalid architecture: {e}") from e


def build_fully_connected(
    input_resolution: int,
    input_channels: int,
    width: int,
    overrides: LayerOverrides | None = None,
) -> ArchitectureSpec:
    """A single SoftHebb layer whose kernel covers the whole input.

    The layer has padding 0 and no pooling, so its output is ``width x 1 x 1``.
    """
    if width < 1:
        raise ConfigError(f"Width must be positive, got {width}")
    settings = layer_defaults(1).merged(overrides)
    try:
        layer = _layer_spec(
            input_channels,
            width,
            settings.model_copy(update={"conv_kernel": input_resolution}),
            padding=0,
            pooled=False,
        )
        return ArchitectureSpec(
            input_resolution=input_resolution,
            input_channels=input_channels,
            first_width=width,
            width_factor=1.0,
            mode=NetworkMode.FULLY_CONNECTED,
            layers=[layer],
        )
    except ValidationError as e:
        raise ConfigError(f"Invalid architecture: {e}") from e
