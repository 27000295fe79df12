"""SoftHebb plasticity: initialization, competition, local updates."""

from hebbnet.plasticity.bank import DEFAULT_R1_TOLERANCE, NeuronBank, init_weights
from hebbnet.plasticity.engine import UpdateSummary, apply_batch_update, postsynaptic
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
)

__all__ = [
    "DEFAULT_R1_TOLERANCE",
    "Aggregation",
    "InitFamily",
    "InitSpec",
    "LearningRateScheme",
    "NeuronBank",
    "PlasticityConfig",
    "PlasticityMode",
    "UpdateSummary",
    "adaptive_lr",
    "anti_hebbian_deltas",
    "apply_batch_update",
    "hard_competition",
    "init_weights",
    "linear_decay_lr",
    "neuron_learning_rates",
    "postsynaptic",
    "soft_competition",
    "softhebb_delta",
]
