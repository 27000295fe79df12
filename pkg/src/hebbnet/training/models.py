"""Training configuration and report models."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, field_validator

DEFAULT_MILESTONES = (0.20, 0.35, 0.50, 0.60, 0.70, 0.80, 0.90)


class LayerOrder(str, Enum):
    """How layers are scheduled during unsupervised training."""

    SEQUENTIAL = "sequential"
    SIMULTANEOUS = "simultaneous"


class OptimizerKind(str, Enum):
    """Classifier head optimizer."""

    ADAM = "adam"
    SGD = "sgd"


class UnsupervisedRunConfig(BaseModel):
    """Greedy layer-wise SoftHebb training settings."""

    epochs: int = Field(default=1, ge=0, description="Presentations of the training set")
    batch_size: int = Field(default=10, ge=1)
    max_iterations: int | None = Field(
        default=None, ge=1, description="Cap on update steps per layer"
    )
    order: LayerOrder = Field(default=LayerOrder.SEQUENTIAL)
    seed: int = Field(default=0)
    threads: int = Field(default=1, ge=1)
    deterministic: bool = Field(default=False, description="Force ordered single-thread updates")
    log_every: int = Field(default=50, ge=1, description="Metrics record interval in steps")

    @property
    def effective_threads(self) -> int:
        return 1 if self.deterministic else self.threads


class SupervisedRunConfig(BaseModel):
    """Linear classifier head training settings."""

    epochs: int = Field(default=50, ge=1)
    batch_size: int = Field(default=64, ge=1)
    lr: float = Field(default=1e-3, gt=0, description="Initial learning rate")
    milestones: list[float] = Field(
        default_factory=lambda: list(DEFAULT_MILESTONES),
        description="Progress fractions at which the learning rate halves",
    )
    optimizer: OptimizerKind = Field(default=OptimizerKind.ADAM)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    eps: float = Field(default=1e-8, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1, description="SGD momentum")
    dropout: float = Field(default=0.5, ge=0, lt=1)
    val_fraction: float = Field(default=0.2, ge=0, lt=1, description="0 disables validation")
    hflip: bool = Field(default=False, description="Random horizontal flips")
    crop_padding: int = Field(default=0, ge=0, description="Random-crop reflect padding")
    seed: int = Field(default=0)

    @field_validator("milestones")
    @classmethod
    def _check_milestones(cls, value: list[float]) -> list[float]:
        if any(not 0.0 < m < 1.0 for m in value):
            raise ValueError("milestones must lie in (0, 1)")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("milestones must be strictly increasing")
        return value

    @property
    def augmented(self) -> bool:
        return self.hflip or self.crop_padding > 0


class MetricsRecord(BaseModel):
    """One row of the metrics stream.

    ``layer`` is 0 for classifier-head records.
    """

    step: int
    layer: int
    mean_radius: float | None = None
    r1_fraction: float | None = None
    lr: float | None = None
    loss: float | None = None
    train_acc: float | None = None
    val_acc: float | None = None


class LayerTrainingReport(BaseModel):
    """Outcome of training one layer."""

    layer: int
    steps: int
    mean_radius: float
    r1_fraction: float


class UnsupervisedReport(BaseModel):
    """Outcome of a greedy unsupervised run."""

    layers: list[LayerTrainingReport] = Field(default_factory=list)

    @property
    def total_steps(self) -> int:
        return sum(layer.steps for layer in self.layers)


class EpochReport(BaseModel):
    """Classifier statistics for one epoch."""

    epoch: int
    lr: float
    loss: float
    train_accuracy: float
    val_accuracy: float | None = None


class ClassifierReport(BaseModel):
    """Per-epoch classifier training history."""

    epochs: list[EpochReport] = Field(default_factory=list)

    @property
    def final(self) -> EpochReport | None:
        return self.epochs[-1] if self.epochs else None


class EvaluationResult(BaseModel):
    """Top-1 accuracy over a split."""

    accuracy: float = Field(ge=0, le=1)
    per_class: list[float] = Field(description="Accuracy per class; 0 for absent classes")
    count: int = Field(ge=0)


class BenchVariant(str, Enum):
    """Single-layer variants compared at matched settings."""

    SOFT_ANTI_HEBBIAN = "soft_anti_hebbian"
    SOFT_HEBBIAN = "soft_hebbian"
    HARD_WTA = "hard_wta"
    RANDOM = "random"


DEFAULT_BENCH_VARIANTS = (
    BenchVariant.SOFT_ANTI_HEBBIAN,
    BenchVariant.HARD_WTA,
    BenchVariant.RANDOM,
)


class VariantResult(BaseModel):
    """Accuracy and R1 fraction of one variant over several seeds."""

    variant: BenchVariant
    seeds: list[int] = Field(default_factory=list)
    accuracies: list[float] = Field(default_factory=list)
    r1_fractions: list[float] = Field(default_factory=list)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies)) if self.accuracies else 0.0

    @property
    def std_accuracy(self) -> float:
        """Sample standard deviation; 0 for a single seed."""
        if len(self.accuracies) < 2:
            return 0.0
        return float(np.std(self.accuracies, ddof=1))

    @property
    def mean_r1(self) -> float:
        return float(np.mean(self.r1_fractions)) if self.r1_fractions else 0.0
