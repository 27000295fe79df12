"""SoftHebb layers and the layer stack."""

import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from hebbnet.core.exceptions import ShapeError, StateError
from hebbnet.network.activations import apply_activation
from hebbnet.network.models import ArchitectureSpec, LayerSpec
from hebbnet.plasticity.bank import NeuronBank, init_weights
from hebbnet.plasticity.engine import UpdateSummary, apply_batch_update
from hebbnet.tensor.batchnorm import batch_norm
from hebbnet.tensor.models import BatchNormState, Mode, PatchMatrix, Tensor, as_tensor
from hebbnet.tensor.ops import conv_from_patches, extract_patches, pool

logger = logging.getLogger(__name__)


@dataclass
class LayerOutput:
    """Everything a layer computes on the way to its output."""

    output: Tensor
    patches: PatchMatrix
    pre_activations: npt.NDArray[np.float32]
    conv: Tensor
    pooled: Tensor


@dataclass
class SoftHebbLayer:
    """A layer spec together with its weights and BatchNorm statistics."""

    spec: LayerSpec
    bank: NeuronBank
    bn: BatchNormState
    frozen: bool = False

    @classmethod
    def create(cls, spec: LayerSpec, seed: int, index: int = 1) -> "SoftHebbLayer":
        """Initialize a layer with weights drawn from its InitSpec.

        The weight stream is derived from ``seed`` and the layer index.
        """
        bank = init_weights(
            spec.out_channels,
            spec.synapses,
            spec.init,
            seed=seed,
            geometry=spec.geometry,
            stream=index,
        )
        bn = BatchNormState(spec.in_channels, eps=spec.bn_eps, momentum=spec.bn_momentum)
        return cls(spec=spec, bank=bank, bn=bn)

    def forward(self, input: Tensor, mode: Mode | str = Mode.EVAL) -> LayerOutput:
        """BN -> conv -> pool -> activation.

        Raises:
            ShapeError: If the input channels differ from the layer's
            StateError: In eval mode before BatchNorm has statistics
        """
        x = as_tensor(input)
        if x.shape[1] != self.spec.in_channels:
            raise ShapeError(
                "layer input channels mismatch", input=x.shape[1], expected=self.spec.in_channels
            )
        normalized = batch_norm(x, self.bn, mode)
        patches = extract_patches(normalized, self.spec.conv_kernel, 1, self.spec.conv_padding)
        u, conv = conv_from_patches(patches, self.bank.weights)
        pooled = conv
        if self.spec.pool is not None:
            pooled = pool(
                conv,
                self.spec.pool.kind,
                self.spec.pool.kernel,
                self.spec.pool.stride,
                self.spec.pool.resolved_padding,
            )
        output = apply_activation(pooled, self.spec.activation).astype(np.float32, copy=False)
        return LayerOutput(
            output=output, patches=patches, pre_activations=u, conv=conv, pooled=pooled
        )

    def __call__(self, input: Tensor, mode: Mode | str = Mode.EVAL) -> Tensor:
        return self.forward(input, mode).output

    def train_step(self, input: Tensor, progress: float = 0.0, threads: int = 1) -> UpdateSummary:
        """Forward in train mode and apply one plasticity update.

        Raises:
            StateError: If the layer is frozen
        """
        if self.frozen:
            raise StateError("cannot update a frozen layer")
        out = self.forward(input, Mode.TRAIN)
        return apply_batch_update(
            self.bank,
            out.patches,
            self.spec.plasticity,
            progress=progress,
            pre_activations=out.pre_activations,
            threads=threads,
        )

    def freeze(self) -> None:
        self.frozen = True


def forward_layer(input: Tensor, layer: SoftHebbLayer, mode: Mode | str = Mode.EVAL) -> LayerOutput:
    """Apply one layer; train mode also updates its BatchNorm statistics."""
    return layer.forward(input, mode)


@dataclass
class HebbianNetwork:
    """A stack of SoftHebb layers built from an ArchitectureSpec."""

    architecture: ArchitectureSpec
    layers: list[SoftHebbLayer]
    seed: int = 0
    notes: list[str] = field(default_factory=list)

    @classmethod
    def initialize(cls, architecture: ArchitectureSpec, seed: int) -> "HebbianNetwork":
        layers = [
            SoftHebbLayer.create(spec, seed, index)
            for index, spec in enumerate(architecture.layers, start=1)
        ]
        logger.debug(f"Initialized {len(layers)} layers with widths {architecture.widths}")
        return cls(architecture=architecture, layers=layers, seed=seed)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def layer(self, index: int) -> SoftHebbLayer:
        """1-based layer access.

        Raises:
            ShapeError: If ``index`` is out of range
        """
        if not 1 <= index <= self.depth:
            raise ShapeError("layer index out of range", layer=index, depth=self.depth)
        return self.layers[index - 1]

    def forward(
        self, input: Tensor, upto: int | None = None, mode: Mode | str = Mode.EVAL
    ) -> Tensor:
        """Output of layer ``upto`` (default: last)."""
        x = as_tensor(input)
        for layer in self.layers[: upto or self.depth]:
            x = layer(x, mode)
        return x

    def features(self, input: Tensor, upto: int | None = None) -> npt.NDArray[np.float32]:
        """Flattened eval-mode output of layer ``upto``: ``(n, feature_dim)``."""
        out = self.forward(input, upto, Mode.EVAL)
        return out.reshape(out.shape[0], -1)
