"""Greedy unsupervised training, the linear head and evaluation."""

from hebbnet.training.classifier import (
    Adam,
    ClassifierHead,
    Gradients,
    MomentumSGD,
    classifier_backward,
    classifier_forward,
    cross_entropy,
    extract_features,
    train_classifier,
    train_classifier_on_images,
)
from hebbnet.training.evaluation import evaluate, evaluate_features, probe_layers
from hebbnet.training.metrics import METRICS_FIELDS, MetricsWriter, read_metrics
from hebbnet.training.models import (
    DEFAULT_BENCH_VARIANTS,
    DEFAULT_MILESTONES,
    BenchVariant,
    ClassifierReport,
    EpochReport,
    EvaluationResult,
    LayerOrder,
    MetricsRecord,
    OptimizerKind,
    SupervisedRunConfig,
    UnsupervisedReport,
    UnsupervisedRunConfig,
    VariantResult,
)
from hebbnet.training.pipeline import (
    ExperimentResult,
    run_benchmark,
    run_experiment,
    with_plasticity_mode,
)
from hebbnet.training.schedule import lr_schedule
from hebbnet.training.unsupervised import calibrate_batchnorm, planned_steps, train_unsupervised

__all__ = [
    "DEFAULT_BENCH_VARIANTS",
    "DEFAULT_MILESTONES",
    "METRICS_FIELDS",
    "Adam",
    "BenchVariant",
    "ClassifierHead",
    "ClassifierReport",
    "EpochReport",
    "EvaluationResult",
    "ExperimentResult",
    "Gradients",
    "LayerOrder",
    "MetricsRecord",
    "MetricsWriter",
    "MomentumSGD",
    "OptimizerKind",
    "SupervisedRunConfig",
    "UnsupervisedReport",
    "UnsupervisedRunConfig",
    "VariantResult",
    "calibrate_batchnorm",
    "classifier_backward",
    "classifier_forward",
    "cross_entropy",
    "evaluate",
    "evaluate_features",
    "extract_features",
    "lr_schedule",
    "planned_steps",
    "probe_layers",
    "read_metrics",
    "run_benchmark",
    "run_experiment",
    "train_classifier",
    "train_classifier_on_images",
    "train_unsupervised",
    "with_plasticity_mode",
]
