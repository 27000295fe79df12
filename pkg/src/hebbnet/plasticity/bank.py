"""Neuron banks: per-layer weight matrices with cached radii."""

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from hebbnet.core.exceptions import ConfigError, ShapeError
from hebbnet.core.utils import make_rng
from hebbnet.plasticity.models import InitFamily, InitSpec

# |r - 1| at or below this counts as converged to the unit sphere.
DEFAULT_R1_TOLERANCE = 0.05


@dataclass
class NeuronBank:
    """K neurons x D synapses, with per-neuron Euclidean norms cached.

    ``geometry`` is the (channels, kernel, kernel) shape each weight row
    unfolds to, with ``D = channels * kernel * kernel``.
    """

    weights: npt.NDArray[np.float32]
    geometry: tuple[int, int, int]
    radii: npt.NDArray[np.float32] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float32)
        if self.weights.ndim != 2:
            raise ShapeError("bank weights must be a K x D matrix", shape=self.weights.shape)
        c, k1, k2 = self.geometry
        if c * k1 * k2 != self.weights.shape[1]:
            raise ShapeError(
                "bank geometry does not match synapse count",
                geometry=self.geometry,
                synapses=self.weights.shape[1],
            )
        self.geometry = (int(c), int(k1), int(k2))
        self.refresh_radii()

    @property
    def num_neurons(self) -> int:
        return int(self.weights.shape[0])

    @property
    def synapses(self) -> int:
        return int(self.weights.shape[1])

    @property
    def kernel(self) -> int:
        return self.geometry[1]

    def refresh_radii(self) -> None:
        """Recompute the cached row norms."""
        self.radii = np.linalg.norm(self.weights, axis=1).astype(np.float32)

    def apply(self, delta: npt.NDArray[np.floating]) -> None:
        """Add a weight delta in place and refresh the radius cache."""
        self.weights += delta.astype(np.float32, copy=False)
        self.refresh_radii()

    def kernels(self) -> npt.NDArray[np.float32]:
        """Weights reshaped to (K, channels, kernel, kernel)."""
        return self.weights.reshape(self.num_neurons, *self.geometry)

    def moment_radii(self) -> npt.NDArray[np.float64]:
        """Per-row ``sqrt(D) * mean(|w|)``, the first-moment radius estimate."""
        return np.sqrt(self.synapses) * np.abs(self.weights).mean(axis=1, dtype=np.float64)

    def r1_fraction(self, tolerance: float = DEFAULT_R1_TOLERANCE) -> float:
        """Fraction of neurons whose radius lies within ``tolerance`` of 1."""
        return float(np.mean(np.abs(self.radii.astype(np.float64) - 1.0) <= tolerance))

    def copy(self) -> "NeuronBank":
        return NeuronBank(weights=self.weights.copy(), geometry=self.geometry)


def init_weights(
    num_neurons: int,
    synapses: int,
    spec: InitSpec,
    seed: int,
    geometry: tuple[int, int, int] | None = None,
    stream: int | None = None,
) -> NeuronBank:
    """Draw a bank whose rows have first-moment radius ``spec.target_radius``.

    The distribution parameter follows ``R = sqrt(D) * E|w|``: a normal
    family gets ``sigma = R * sqrt(pi / 2D)``, the uniform families get
    ``range = R * sqrt(2 / D)`` on ``[0, range]`` or ``[-range, 0]``.

    Args:
        num_neurons: K
        synapses: D
        spec: Family and target radius
        seed: RNG seed
        geometry: (channels, kernel, kernel); defaults to (D, 1, 1)
        stream: Optional stream id (e.g. layer index) mixed into the seed

    Returns:
        Initialized NeuronBank
    """
    if num_neurons < 1 or synapses < 1:
        raise ShapeError("bank needs at least one neuron and synapse", K=num_neurons, D=synapses)
    if spec.target_radius <= 0:
        raise ConfigError(f"Initial radius must be positive, got {spec.target_radius}")

    rng = make_rng(seed) if stream is None else make_rng(seed, stream)
    scale = spec.scale(synapses)
    shape = (num_neurons, synapses)
    if spec.family is InitFamily.NORMAL:
        weights = rng.normal(0.0, scale, size=shape)
    elif spec.family is InitFamily.POSITIVE_UNIFORM:
        weights = rng.uniform(0.0, scale, size=shape)
    else:
        weights = -rng.uniform(0.0, scale, size=shape)

    return NeuronBank(weights=weights.astype(np.float32), geometry=geometry or (synapses, 1, 1))
