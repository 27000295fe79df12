"""Tests for architecture construction, activations and layer forward passes."""

import numpy as np
import pytest
from pydantic import ValidationError

from hebbnet.core.exceptions import ConfigError, ShapeError, StateError
from hebbnet.data.models import Dataset
from hebbnet.network.activations import apply_activation, relu, repu, softmax_fwd, triangle
from hebbnet.network.builder import build_architecture, build_fully_connected, layer_defaults
from hebbnet.network.layer import HebbianNetwork, SoftHebbLayer
from hebbnet.network.models import (
    ActivationKind,
    ActivationSpec,
    ArchitectureSpec,
    LayerOverrides,
    NetworkMode,
)
from hebbnet.plasticity.models import PlasticityMode
from hebbnet.tensor.models import Mode, PoolKind


class TestBuilder:
    """Test width-scaled architecture construction."""

    def test_cifar_widths(self):
        """96 first-layer neurons, factor 4, three layers at 32px."""
        arch = build_architecture(32, 3, first_width=96)
        assert arch.widths == [96, 384, 1536]
        assert arch.resolution_trace() == [16, 8, 4]
        assert arch.feature_dim() == 1536 * 4 * 4

    def test_mnist_depth(self):
        """28px input reaches the stop resolution after three layers."""
        arch = build_architecture(28, 1, first_width=96)
        assert arch.resolution_trace() == [14, 7, 3]

    def test_stl_reuses_layer_three_defaults(self):
        """96px needs a fourth layer, configured like the third."""
        arch = build_architecture(96, 3, first_width=96)
        assert arch.depth == 4
        assert arch.resolution_trace() == [48, 24, 12, 6]
        assert arch.widths[-1] == 6144
        assert arch.layers[3].plasticity.inverse_temperature == 0.25
        assert any("layer 4" in note for note in arch.notes)

    def test_max_layers(self):
        """Construction stops early when asked."""
        assert build_architecture(32, 3, first_width=8, max_layers=1).depth == 1

    def test_layer_defaults(self):
        """Per-layer defaults; deeper layers fall back to layer 3."""
        first = layer_defaults(1)
        assert (first.conv_kernel, first.base_lr, first.inverse_temperature) == (5, 0.08, 1.0)
        assert first.activation_power == 0.7
        assert layer_defaults(2).inverse_temperature == 0.65
        assert layer_defaults(3).pool_kind is PoolKind.AVG
        assert layer_defaults(7) == layer_defaults(3)

    def test_default_mode_is_soft_anti_hebbian(self):
        """Layers default to the soft anti-Hebbian rule."""
        arch = build_architecture(16, 1, first_width=4)
        modes = {layer.plasticity.mode for layer in arch.layers}
        assert modes == {PlasticityMode.SOFT_ANTI_HEBBIAN}

    def test_overrides_precedence(self):
        """Per-layer overrides beat common overrides, which beat defaults."""
        arch = build_architecture(
            32,
            3,
            first_width=8,
            common=LayerOverrides(inverse_temperature=0.5),
            overrides=[LayerOverrides(inverse_temperature=2.0)],
        )
        assert arch.layers[0].plasticity.inverse_temperature == 2.0
        assert arch.layers[1].plasticity.inverse_temperature == 0.5

    def test_resolution_too_small(self):
        """Inputs below 8px cannot be reduced meaningfully."""
        with pytest.raises(ConfigError):
            build_architecture(6, 1, first_width=4)

    def test_invalid_width_factor(self):
        """Width factor must be at least 1."""
        with pytest.raises(ConfigError):
            build_architecture(32, 3, first_width=4, width_factor=0.5)

    def test_fully_connected(self):
        """A single layer whose kernel spans the input."""
        arch = build_fully_connected(28, 1, 2000)
        assert arch.mode is NetworkMode.FULLY_CONNECTED
        layer = arch.layers[0]
        assert (layer.conv_kernel, layer.conv_padding, layer.pool) == (28, 0, None)
        assert arch.feature_dim() == 2000

    def test_spec_rejects_broken_width_chain(self):
        """Consecutive widths must follow the width factor."""
        arch = build_architecture(32, 3, first_width=8)
        layers = [arch.layers[0], arch.layers[1].model_copy(update={"out_channels": 7})]
        with pytest.raises(ValidationError):
            ArchitectureSpec(
                input_resolution=32, input_channels=3, first_width=8, layers=layers
            )


class TestActivations:
    """Test forward nonlinearities."""

    def test_repu(self):
        """u ** p for positive u, else 0."""
        np.testing.assert_allclose(repu(np.array([-1.0, 2.0]), 2.0), [0.0, 4.0])

    def test_repu_power_one_is_relu(self, rng: np.random.Generator):
        """RePU with p = 1 equals ReLU exactly."""
        u = rng.normal(size=50)
        np.testing.assert_array_equal(repu(u, 1.0), relu(u))

    def test_triangle(self):
        """Channels are centered on their mean before the RePU."""
        u = np.array([1.0, 2.0, 3.0]).reshape(1, 3, 1, 1)
        np.testing.assert_allclose(triangle(u, 1.0).ravel(), [0.0, 0.0, 1.0])

    def test_softmax_over_channels(self, rng: np.random.Generator):
        """The forward softmax normalizes across channels at each pixel."""
        out = softmax_fwd(rng.normal(size=(2, 4, 3, 3)), 1.0)
        np.testing.assert_allclose(out.sum(axis=1), 1.0)

    def test_equal_channels_softmax(self):
        """Equal inputs give 1/C."""
        out = softmax_fwd(np.zeros((1, 4, 1, 1)), 2.0)
        np.testing.assert_allclose(out, 0.25)

    def test_dispatch(self):
        """apply_activation dispatches on ActivationSpec.kind."""
        u = np.array([-1.0, 0.5]).reshape(1, 2, 1, 1)
        out = apply_activation(u, ActivationSpec(kind=ActivationKind.RELU))
        np.testing.assert_allclose(out.ravel(), [0.0, 0.5])


class TestLayers:
    """Test layer and network forward passes."""

    def test_forward_shapes(
        self, calibrated_network: HebbianNetwork, normalized_dataset: Dataset
    ):
        """Each layer halves the resolution and sets the width."""
        out = calibrated_network.layer(1).forward(normalized_dataset.images[:3])
        assert out.conv.shape == (3, 4, 16, 16)
        assert out.output.shape == (3, 4, 8, 8)
        assert calibrated_network.forward(normalized_dataset.images[:3]).shape == (3, 16, 4, 4)

    def test_features(self, calibrated_network: HebbianNetwork, normalized_dataset: Dataset):
        """Features are the flattened last-layer output."""
        features = calibrated_network.features(normalized_dataset.images[:5])
        assert features.shape == (5, calibrated_network.architecture.feature_dim())

    def test_eval_before_statistics(
        self, two_layer_architecture: ArchitectureSpec, normalized_dataset: Dataset
    ):
        """A fresh layer has no BatchNorm statistics to evaluate with."""
        layer = SoftHebbLayer.create(two_layer_architecture.layers[0], seed=0)
        with pytest.raises(StateError):
            layer(normalized_dataset.images[:2], Mode.EVAL)

    def test_train_step_updates_weights(
        self, two_layer_architecture: ArchitectureSpec, normalized_dataset: Dataset
    ):
        """A train step changes weights and BatchNorm statistics."""
        layer = SoftHebbLayer.create(two_layer_architecture.layers[0], seed=0)
        before = layer.bank.weights.copy()
        summary = layer.train_step(normalized_dataset.images[:10])
        assert summary.patches == 10 * 16 * 16
        assert layer.bn.tracked_batches == 1
        assert not np.array_equal(before, layer.bank.weights)

    def test_frozen_layer_rejects_updates(
        self, two_layer_architecture: ArchitectureSpec, normalized_dataset: Dataset
    ):
        """Frozen layers cannot be trained."""
        layer = SoftHebbLayer.create(two_layer_architecture.layers[0], seed=0)
        layer.freeze()
        with pytest.raises(StateError):
            layer.train_step(normalized_dataset.images[:10])

    def test_channel_mismatch(self, calibrated_network: HebbianNetwork):
        """Inputs with the wrong channel count are rejected."""
        with pytest.raises(ShapeError):
            calibrated_network.layer(1).forward(np.zeros((2, 3, 16, 16), dtype=np.float32))

    def test_layer_index(self, calibrated_network: HebbianNetwork):
        """Layers are addressed 1-based."""
        assert calibrated_network.layer(2) is calibrated_network.layers[1]
        with pytest.raises(ShapeError):
            calibrated_network.layer(0)
        with pytest.raises(ShapeError):
            calibrated_network.layer(3)

    def test_initialize_is_seeded(self, two_layer_architecture: ArchitectureSpec):
        """Equal seeds give equal weights."""
        a = HebbianNetwork.initialize(two_layer_architecture, seed=5)
        b = HebbianNetwork.initialize(two_layer_architecture, seed=5)
        c = HebbianNetwork.initialize(two_layer_architecture, seed=6)
        for la, lb in zip(a.layers, b.layers):
            np.testing.assert_array_equal(la.bank.weights, lb.bank.weights)
        assert not np.array_equal(a.layers[0].bank.weights, c.layers[0].bank.weights)
