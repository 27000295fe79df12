"""Plasticity configuration models."""

import math
from enum import Enum

from pydantic import BaseModel, Field


class PlasticityMode(str, Enum):
    """Competition and update regime."""

    SOFT_HEBBIAN = "soft_hebbian"
    SOFT_ANTI_HEBBIAN = "soft_anti_hebbian"
    HARD_WTA = "hard_wta"


class Aggregation(str, Enum):
    """Reduction of per-patch deltas within a mini-batch."""

    MEAN = "mean"
    SUM = "sum"
    MAX_NORM = "max_norm"


class LearningRateScheme(str, Enum):
    """How the per-neuron learning rate is derived."""

    ADAPTIVE = "adaptive"
    LINEAR_DECAY = "linear_decay"
    ADAPTIVE_DECAY = "adaptive_decay"


class InitFamily(str, Enum):
    """Distribution family of the initial weights."""

    NORMAL = "normal"
    POSITIVE_UNIFORM = "positive_uniform"
    NEGATIVE_UNIFORM = "negative_uniform"


class InitSpec(BaseModel):
    """Weight initialization: distribution family and expected row norm R."""

    family: InitFamily = Field(default=InitFamily.NORMAL, description="Distribution family")
    target_radius: float = Field(default=3.0, gt=0, description="Expected weight-row norm R")

    def scale(self, synapses: int) -> float:
        """Distribution parameter giving expected row norm R for D synapses.

        Normal: sigma = R * sqrt(pi / 2D). Uniform: range = R * sqrt(2 / D).
        """
        if self.family is InitFamily.NORMAL:
            return self.target_radius * math.sqrt(math.pi / (2 * synapses))
        return self.target_radius * math.sqrt(2 / synapses)


class PlasticityConfig(BaseModel):
    """Hyperparameters of the SoftHebb update for one layer."""

    inverse_temperature: float = Field(
        default=1.0, gt=0, allow_inf_nan=False, description="1/tau of the soft competition"
    )
    base_lr: float = Field(default=0.08, gt=0, allow_inf_nan=False, description="Base rate eta")
    lr_power: float = Field(default=0.5, gt=0, le=1, description="Adaptive-rate power q")
    mode: PlasticityMode = Field(default=PlasticityMode.SOFT_ANTI_HEBBIAN)
    aggregation: Aggregation = Field(default=Aggregation.MEAN)
    lr_scheme: LearningRateScheme = Field(default=LearningRateScheme.ADAPTIVE)
    sequential: bool = Field(
        default=False, description="Apply updates patch by patch instead of per batch"
    )

    @property
    def temperature(self) -> float:
        return 1.0 / self.inverse_temperature

    @property
    def base(self) -> float:
        """Softmax base b = e^(1/tau)."""
        return math.exp(self.inverse_temperature)
