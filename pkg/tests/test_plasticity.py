"""Tests for SoftHebb competition, learning rates and bank updates."""

import math

import numpy as np
import pytest

from hebbnet.core.exceptions import NumericError, ShapeError
from hebbnet.plasticity.bank import NeuronBank, init_weights
from hebbnet.plasticity.engine import apply_batch_update, postsynaptic
from hebbnet.plasticity.models import (
    Aggregation,
    InitFamily,
    InitSpec,
    LearningRateScheme,
    PlasticityConfig,
    PlasticityMode,
)
from hebbnet.plasticity.rules import (
    adaptive_lr,
    anti_hebbian_deltas,
    hard_competition,
    linear_decay_lr,
    neuron_learning_rates,
    soft_competition,
    softhebb_delta,
    winners,
)


class TestCompetition:
    """Test soft and hard winner-take-all."""

    def test_softmax_sums_to_one(self, rng: np.random.Generator):
        """Outputs are a distribution over neurons."""
        y = soft_competition(rng.normal(size=(5, 7)), inv_temp=2.0, axis=1)
        np.testing.assert_allclose(y.sum(axis=1), 1.0)
        assert (y > 0).all()

    def test_softmax_is_stable(self):
        """Large pre-activations do not overflow."""
        y = soft_competition(np.array([1000.0, 1001.0]), inv_temp=1.0)
        assert np.isfinite(y).all()
        assert y[1] == pytest.approx(math.e / (1 + math.e))

    def test_low_temperature_approaches_hard(self):
        """A large 1/tau makes the softmax one-hot."""
        u = np.array([0.1, 0.5, 0.3])
        np.testing.assert_allclose(soft_competition(u, 1e4), hard_competition(u), atol=1e-8)

    def test_ties_go_to_lowest_index(self):
        """argmax ties resolve to the first neuron."""
        assert int(winners(np.array([1.0, 3.0, 3.0]))) == 1
        np.testing.assert_array_equal(hard_competition(np.array([3.0, 3.0])), [1.0, 0.0])

    def test_softmax_shift_invariance(self, rng: np.random.Generator):
        """Adding a constant exact in float32 leaves the output bitwise unchanged."""
        u = (rng.integers(-400, 401, size=(6, 10)) / 8).astype(np.float32)
        y = soft_competition(u, 0.7, axis=1)
        shifted = soft_competition(u + np.float32(3.75), 0.7, axis=1)
        assert y.dtype == np.float32
        np.testing.assert_array_equal(y, shifted)

    def test_softmax_shift_in_float64(self, rng: np.random.Generator):
        """Arbitrary shifts only move the output by the rounding of u + c."""
        u = rng.uniform(-50.0, 50.0, size=(6, 10))
        np.testing.assert_allclose(
            soft_competition(u, 1.0), soft_competition(u + 3.7, 1.0), rtol=1e-12
        )

    def test_anti_hebbian_postsynaptic_signs(self, rng: np.random.Generator):
        """Only the winner keeps a positive output."""
        u = rng.normal(size=(6, 4))
        cfg = PlasticityConfig(mode=PlasticityMode.SOFT_ANTI_HEBBIAN)
        y = postsynaptic(u, cfg)
        win = u.argmax(axis=1)
        assert (y[np.arange(6), win] > 0).all()
        assert (np.delete(y.ravel(), win + 4 * np.arange(6)) < 0).all()

    def test_hard_wta_postsynaptic(self, rng: np.random.Generator):
        """Hard mode gives one-hot outputs."""
        u = rng.normal(size=(6, 4))
        y = postsynaptic(u, PlasticityConfig(mode=PlasticityMode.HARD_WTA))
        np.testing.assert_array_equal(y.sum(axis=1), 1.0)


class TestRules:
    """Test per-neuron update rules."""

    def test_softhebb_delta(self):
        """lr * y * (x - u * w)."""
        delta = softhebb_delta(np.array([1.0, 2.0]), 0.5, 0.25, np.array([2.0, 0.0]), 0.1)
        np.testing.assert_allclose(delta, [0.0, 0.05])

    def test_delta_vanishes_at_normalized_input(self, rng: np.random.Generator):
        """At w = x / |x| the update is zero up to float64 rounding."""
        for _ in range(5):
            x = 3.0 * rng.normal(size=7)
            w = x / np.linalg.norm(x)
            delta = softhebb_delta(x, None, 1.0, w, 1.0)
            assert np.abs(delta).max() <= 1e-12 * np.linalg.norm(x)

    def test_delta_computes_pre_activation(self, rng: np.random.Generator):
        """Passing u=None uses w . x."""
        x = rng.normal(size=4)
        w = rng.normal(size=4)
        np.testing.assert_allclose(
            softhebb_delta(x, None, 0.3, w, 0.1), softhebb_delta(x, float(w @ x), 0.3, w, 0.1)
        )

    def test_anti_hebbian_deltas(self, rng: np.random.Generator):
        """Winner gets the SoftHebb delta, every other neuron its negation."""
        x = rng.normal(size=5)
        w = rng.normal(size=(3, 5))
        u = w @ x
        y = soft_competition(u, 1.0)
        lrs = np.array([0.1, 0.2, 0.3])
        deltas = anti_hebbian_deltas(x, u, y, w, lrs)
        win = int(np.argmax(u))
        for k in range(3):
            expected = softhebb_delta(x, u[k], y[k], w[k], lrs[k])
            np.testing.assert_allclose(deltas[k], expected if k == win else -expected)

    def test_adaptive_lr_zero_on_unit_sphere(self):
        """Neurons with radius 1 stop learning."""
        assert adaptive_lr(1.0, 0.08, 0.5) == 0.0

    def test_adaptive_lr_values(self):
        """eta * |r - 1| ** q."""
        np.testing.assert_allclose(adaptive_lr([2.0, 0.75], 0.08, 0.5), [0.08, 0.04])

    def test_linear_decay(self):
        """Rate falls linearly and never goes negative."""
        assert linear_decay_lr(0.1, 0.5) == pytest.approx(0.05)
        assert linear_decay_lr(0.1, 1.5) == 0.0

    def test_learning_rate_schemes(self):
        """Each scheme derives rates from radius and/or progress."""
        radii = np.array([2.0, 1.0])
        adaptive = neuron_learning_rates(radii, PlasticityConfig(base_lr=0.08), progress=0.5)
        np.testing.assert_allclose(adaptive, [0.08, 0.0])
        decay = PlasticityConfig(base_lr=0.08, lr_scheme=LearningRateScheme.LINEAR_DECAY)
        np.testing.assert_allclose(neuron_learning_rates(radii, decay, 0.5), [0.04, 0.04])
        both = PlasticityConfig(base_lr=0.08, lr_scheme=LearningRateScheme.ADAPTIVE_DECAY)
        np.testing.assert_allclose(neuron_learning_rates(radii, both, 0.5), [0.04, 0.0])


class TestInitialization:
    """Test weight initialization."""

    def test_scale_formulas(self):
        """Normal sigma and uniform range give the target first-moment radius."""
        normal = InitSpec(family=InitFamily.NORMAL, target_radius=3.0)
        uniform = InitSpec(family=InitFamily.POSITIVE_UNIFORM, target_radius=3.0)
        assert normal.scale(75) == pytest.approx(3.0 * math.sqrt(math.pi / 150))
        assert uniform.scale(75) == pytest.approx(3.0 * math.sqrt(2 / 75))

    def test_uniform_range(self):
        """D=50, R=1 gives a uniform range of 0.2."""
        spec = InitSpec(family=InitFamily.POSITIVE_UNIFORM, target_radius=1.0)
        assert spec.scale(50) == pytest.approx(0.2)
        bank = init_weights(500, 50, spec, seed=0)
        assert bank.weights.max() <= np.float32(0.2)
        assert bank.weights.max() > 0.19

    @pytest.mark.parametrize("neurons,synapses", [(500, 100), (1000, 400)])
    def test_moment_radius_matches_target(self, neurons: int, synapses: int):
        """Normal init: sqrt(D) * mean|w| is within 2% of R."""
        spec = InitSpec(family=InitFamily.NORMAL, target_radius=3.0)
        bank = init_weights(neurons, synapses, spec, seed=0)
        assert bank.moment_radii().mean() == pytest.approx(3.0, rel=0.02)

    def test_uniform_signs(self):
        """Positive and negative uniform families keep their sign."""
        positive = init_weights(4, 9, InitSpec(family=InitFamily.POSITIVE_UNIFORM), seed=0)
        negative = init_weights(4, 9, InitSpec(family=InitFamily.NEGATIVE_UNIFORM), seed=0)
        assert (positive.weights >= 0).all()
        assert (negative.weights <= 0).all()

    def test_seeded(self):
        """Same seed and stream give identical weights; another stream differs."""
        spec = InitSpec()
        a = init_weights(4, 9, spec, seed=3, stream=1)
        b = init_weights(4, 9, spec, seed=3, stream=1)
        c = init_weights(4, 9, spec, seed=3, stream=2)
        np.testing.assert_array_equal(a.weights, b.weights)
        assert not np.array_equal(a.weights, c.weights)

    def test_empty_bank(self):
        """A bank needs at least one neuron."""
        with pytest.raises(ShapeError):
            init_weights(0, 9, InitSpec(), seed=0)


class TestNeuronBank:
    """Test the bank container."""

    def test_geometry_must_match(self):
        """c * k * k must equal the synapse count."""
        with pytest.raises(ShapeError):
            NeuronBank(weights=np.zeros((2, 10)), geometry=(1, 3, 3))

    def test_radii_cached(self):
        """Radii are the row norms and refresh after apply()."""
        bank = NeuronBank(weights=np.array([[3.0, 4.0]]), geometry=(2, 1, 1))
        assert bank.radii[0] == pytest.approx(5.0)
        bank.apply(np.array([[-3.0, -4.0]]) * 0.8)
        assert bank.radii[0] == pytest.approx(1.0)

    def test_r1_fraction(self):
        """Neurons within the tolerance of radius 1 count as R1."""
        bank = NeuronBank(
            weights=np.array([[1.0, 0.0], [0.0, 1.02], [2.0, 0.0]]), geometry=(2, 1, 1)
        )
        assert bank.r1_fraction(0.05) == pytest.approx(2 / 3)


class TestBatchUpdate:
    """Test applying plasticity to a bank."""

    def test_unit_norm_neurons_are_stationary(self):
        """Adaptive rates vanish on the unit sphere."""
        bank = NeuronBank(weights=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), geometry=(3, 1, 1))
        before = bank.weights.copy()
        apply_batch_update(bank, np.array([[0.3, 0.2, 0.9]]), PlasticityConfig())
        np.testing.assert_array_equal(bank.weights, before)

    def test_hard_wta_moves_only_winner(self):
        """Hard WTA updates the winner by lr * (x - u * w)."""
        w = np.array([[2.0, 0.0], [0.0, 3.0]])
        bank = NeuronBank(weights=w.copy(), geometry=(2, 1, 1))
        x = np.array([[1.0, 0.0]])
        cfg = PlasticityConfig(mode=PlasticityMode.HARD_WTA, base_lr=0.08, lr_power=0.5)
        apply_batch_update(bank, x, cfg)
        lr = 0.08 * 1.0**0.5
        np.testing.assert_allclose(bank.weights[0], w[0] + lr * (x[0] - 2.0 * w[0]), rtol=1e-6)
        np.testing.assert_array_equal(bank.weights[1], w[1])

    def test_sequential_single_patch_matches_batch(self, rng: np.random.Generator):
        """With one patch both application orders agree."""
        bank = init_weights(5, 6, InitSpec(), seed=0)
        other = bank.copy()
        row = rng.normal(size=(1, 6)).astype(np.float32)
        apply_batch_update(bank, row, PlasticityConfig())
        apply_batch_update(other, row, PlasticityConfig(sequential=True))
        np.testing.assert_allclose(bank.weights, other.weights, rtol=1e-6, atol=1e-7)

    def test_sum_is_batch_times_mean(self, rng: np.random.Generator):
        """Summed aggregation is N times the mean update."""
        rows = rng.normal(size=(4, 6)).astype(np.float32)
        mean_bank = init_weights(5, 6, InitSpec(), seed=0)
        sum_bank = mean_bank.copy()
        start = mean_bank.weights.astype(np.float64)
        apply_batch_update(mean_bank, rows, PlasticityConfig(aggregation=Aggregation.MEAN))
        apply_batch_update(sum_bank, rows, PlasticityConfig(aggregation=Aggregation.SUM))
        np.testing.assert_allclose(
            sum_bank.weights - start, 4 * (mean_bank.weights - start), rtol=1e-4, atol=1e-5
        )

    def test_threads_match_single_thread(self, rng: np.random.Generator):
        """Chunked accumulation agrees with the single-thread result."""
        rows = rng.normal(size=(64, 9)).astype(np.float32)
        single = init_weights(8, 9, InitSpec(), seed=1)
        threaded = single.copy()
        apply_batch_update(single, rows, PlasticityConfig())
        apply_batch_update(threaded, rows, PlasticityConfig(), threads=3)
        np.testing.assert_allclose(single.weights, threaded.weights, rtol=1e-5, atol=1e-6)

    def test_radius_converges_to_one(self, rng: np.random.Generator):
        """A neuron fed positive inputs settles on the unit sphere."""
        bank = NeuronBank(weights=np.full((1, 3), 1.5), geometry=(3, 1, 1))
        cfg = PlasticityConfig(base_lr=0.02)
        for _ in range(2000):
            apply_batch_update(bank, rng.uniform(size=(10, 3)).astype(np.float32), cfg)
        assert abs(float(bank.radii[0]) - 1.0) < 0.05

    def test_width_mismatch(self):
        """Patch width must equal the synapse count."""
        bank = init_weights(2, 4, InitSpec(), seed=0)
        with pytest.raises(ShapeError):
            apply_batch_update(bank, np.zeros((3, 5)), PlasticityConfig())

    def test_empty_batch(self):
        """No patches, no change."""
        bank = init_weights(2, 4, InitSpec(), seed=0)
        summary = apply_batch_update(bank, np.zeros((0, 4)), PlasticityConfig())
        assert summary.patches == 0

    def test_single_neuron_converges_to_normalized_input(self):
        """One neuron on a fixed patch shrinks monotonically onto x / |x|."""
        x = np.array([[0.0, 1.2, 1.6]], dtype=np.float32)
        bank = NeuronBank(weights=np.array([[0.5, 1.2, 1.6]]), geometry=(3, 1, 1))
        radii = [float(bank.radii[0])]
        for _ in range(2000):
            apply_batch_update(bank, x, PlasticityConfig())
            radii.append(float(bank.radii[0]))
        for before, after in zip(radii, radii[1:]):
            if before > 1.0 + 1e-3:
                assert after < before
        assert radii[-1] == pytest.approx(1.0, abs=1e-2)
        cosine = float(bank.weights[0] @ x[0]) / (radii[-1] * float(np.linalg.norm(x)))
        assert cosine > 0.999

    @pytest.mark.parametrize("mode", list(PlasticityMode))
    def test_orthogonal_inputs_split_between_neurons(self, mode: PlasticityMode):
        """Two neurons, two orthogonal inputs: each settles on its own unit input."""
        inputs = np.eye(2, dtype=np.float32)
        bank = NeuronBank(weights=np.array([[2.0, 0.5], [0.3, 1.8]]), geometry=(2, 1, 1))
        cfg = PlasticityConfig(inverse_temperature=1e3, mode=mode)
        for _ in range(3000):
            apply_batch_update(bank, inputs, cfg)
        assert np.isfinite(bank.weights).all()
        np.testing.assert_allclose(bank.radii, 1.0, atol=0.05)
        cosines = bank.weights / bank.radii[:, None]
        assert cosines[0, 0] > 0.99
        assert cosines[1, 1] > 0.99

    def test_anti_hebbian_reinforces_winner(self):
        """The winner turns toward the input and the loser turns away from it."""
        x = np.array([[1.0, 0.0]], dtype=np.float32)
        start = np.array([[1.5, 0.5], [0.5, 1.5]])
        anti = NeuronBank(weights=start.copy(), geometry=(2, 1, 1))
        soft = NeuronBank(weights=start.copy(), geometry=(2, 1, 1))
        apply_batch_update(anti, x, PlasticityConfig(mode=PlasticityMode.SOFT_ANTI_HEBBIAN))
        apply_batch_update(soft, x, PlasticityConfig(mode=PlasticityMode.SOFT_HEBBIAN))

        def alignment(w: np.ndarray) -> float:
            return float(w[0] / np.linalg.norm(w))

        assert alignment(anti.weights[0]) > alignment(start[0])
        assert alignment(anti.weights[1]) < alignment(start[1])
        assert alignment(soft.weights[1]) > alignment(start[1])
        np.testing.assert_array_equal(anti.weights[0], soft.weights[0])

    def test_single_neuron_anti_hebbian_is_soft(self, rng: np.random.Generator):
        """With K=1 the only neuron always wins, so both soft modes agree."""
        rows = rng.normal(size=(8, 5)).astype(np.float32)
        anti = init_weights(1, 5, InitSpec(), seed=2)
        soft = anti.copy()
        for _ in range(3):
            apply_batch_update(anti, rows, PlasticityConfig(mode=PlasticityMode.SOFT_ANTI_HEBBIAN))
            apply_batch_update(soft, rows, PlasticityConfig(mode=PlasticityMode.SOFT_HEBBIAN))
        np.testing.assert_array_equal(anti.weights, soft.weights)

    def test_non_finite_patch_raises(self):
        """NaN inputs are rejected before the weights change."""
        bank = init_weights(2, 2, InitSpec(), seed=0)
        before = bank.weights.copy()
        with pytest.raises(NumericError) as exc:
            apply_batch_update(bank, np.array([[np.nan, 1.0]]), PlasticityConfig())
        assert exc.value.exit_code == 4
        np.testing.assert_array_equal(bank.weights, before)

    def test_runaway_winner_raises(self):
        """A winner projecting below -1 on its input grows until the update overflows."""
        bank = NeuronBank(weights=np.array([[-2.0, 0.0], [-3.0, 0.0]]), geometry=(2, 1, 1))
        cfg = PlasticityConfig(inverse_temperature=1e3)
        with pytest.raises(NumericError):
            for _ in range(500):
                apply_batch_update(bank, np.eye(2, dtype=np.float32), cfg)
        assert np.isfinite(bank.weights).all()
