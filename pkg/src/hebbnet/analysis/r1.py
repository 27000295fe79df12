"""R1-feature counting."""

import numpy as np

from hebbnet.analysis.models import LayerR1, R1Report
from hebbnet.core.exceptions import ConfigError
from hebbnet.network.layer import HebbianNetwork
from hebbnet.plasticity.bank import DEFAULT_R1_TOLERANCE


def count_r1(network: HebbianNetwork, tolerance: float = DEFAULT_R1_TOLERANCE) -> R1Report:
    """Fraction of neurons per layer whose weight norm is within ``tolerance`` of 1."""
    if tolerance <= 0:
        raise ConfigError(f"R1 tolerance must be positive, got {tolerance}")
    report = R1Report(tolerance=tolerance)
    for index, layer in enumerate(network.layers, start=1):
        radii = layer.bank.radii.astype(np.float64)
        report.layers.append(
            LayerR1(
                layer=index,
                neurons=layer.bank.num_neurons,
                r1_fraction=layer.bank.r1_fraction(tolerance),
                mean_radius=float(radii.mean()),
                radii=radii.tolist(),
            )
        )
    return report
