"""End-to-end experiment: unsupervised training, linear head, evaluation."""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from hebbnet.core.exceptions import ConfigError
from hebbnet.data.models import Dataset, NormalizationStats
from hebbnet.data.transforms import normalize, split_validation
from hebbnet.network.layer import HebbianNetwork
from hebbnet.network.models import ArchitectureSpec
from hebbnet.plasticity.models import PlasticityMode
from hebbnet.training.classifier import ClassifierHead, train_classifier_on_images
from hebbnet.training.evaluation import evaluate, probe_layers
from hebbnet.training.models import (
    DEFAULT_BENCH_VARIANTS,
    BenchVariant,
    ClassifierReport,
    EpochReport,
    EvaluationResult,
    MetricsRecord,
    SupervisedRunConfig,
    UnsupervisedReport,
    UnsupervisedRunConfig,
    VariantResult,
)
from hebbnet.training.unsupervised import calibrate_batchnorm, planned_steps, train_unsupervised

logger = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    """Everything a training run produces."""

    network: HebbianNetwork
    head: ClassifierHead
    stats: NormalizationStats
    unsupervised: UnsupervisedReport
    classifier: ClassifierReport
    test: EvaluationResult
    probes: dict[int, EvaluationResult] = field(default_factory=dict)

    def r1_fractions(self) -> list[float]:
        return [layer.bank.r1_fraction() for layer in self.network.layers]


def run_experiment(
    architecture: ArchitectureSpec,
    train: Dataset,
    test: Dataset,
    unsupervised: UnsupervisedRunConfig,
    supervised: SupervisedRunConfig,
    seed: int,
    probes: Sequence[int] = (),
    untrained: bool = False,
    on_record: Callable[[MetricsRecord], None] | None = None,
) -> ExperimentResult:
    """Train an extractor and a linear head, then evaluate on ``test``.

    The training split's normalization statistics are applied to the test
    split. With ``untrained`` the random initial weights are kept and only
    BatchNorm statistics are calibrated.

    Args:
        architecture: Network to build
        train: Raw (unnormalized) training split
        test: Raw test split
        unsupervised: SoftHebb run settings
        supervised: Classifier run settings
        seed: Weight initialization seed
        probes: Extra depths to fit linear probes at
        untrained: Skip plasticity (random-weight baseline)
        on_record: Receives every metrics record

    Returns:
        ExperimentResult
    """
    train_set = normalize(train)
    assert train_set.stats is not None
    test_set = normalize(test, train_set.stats)

    network = HebbianNetwork.initialize(architecture, seed)
    if untrained:
        calibrate_batchnorm(
            network,
            train_set,
            unsupervised.batch_size,
            unsupervised.seed,
            max_batches=planned_steps(len(train_set), unsupervised) or None,
        )
        for layer in network.layers:
            layer.freeze()
        report = UnsupervisedReport()
        logger.info("Kept random weights; BatchNorm calibrated")
    else:
        report = train_unsupervised(network, train_set, unsupervised, on_record)

    fit_set, val_set = train_set, None
    if supervised.val_fraction > 0:
        fit_set, val_set = split_validation(train_set, supervised.val_fraction, supervised.seed)

    def on_epoch(epoch: EpochReport) -> None:
        if on_record is not None:
            on_record(
                MetricsRecord(
                    step=epoch.epoch,
                    layer=0,
                    lr=epoch.lr,
                    loss=epoch.loss,
                    train_acc=epoch.train_accuracy,
                    val_acc=epoch.val_accuracy,
                )
            )

    head, classifier_report = train_classifier_on_images(
        network, fit_set, supervised, validation=val_set, on_epoch=on_epoch
    )
    result = evaluate(network, head, test_set)
    logger.info(f"Test accuracy {result.accuracy:.4f}")

    probe_results = {}
    if probes:
        probe_results = probe_layers(network, fit_set, test_set, probes, supervised, val_set)

    return ExperimentResult(
        network=network,
        head=head,
        stats=train_set.stats,
        unsupervised=report,
        classifier=classifier_report,
        test=result,
        probes=probe_results,
    )


def with_plasticity_mode(architecture: ArchitectureSpec, mode: PlasticityMode) -> ArchitectureSpec:
    """Copy of ``architecture`` with every layer switched to ``mode``."""
    layers = [
        layer.model_copy(
            update={"plasticity": layer.plasticity.model_copy(update={"mode": mode})}
        )
        for layer in architecture.layers
    ]
    return architecture.model_copy(update={"layers": layers})


def run_benchmark(
    architecture: ArchitectureSpec,
    train: Dataset,
    test: Dataset,
    unsupervised: UnsupervisedRunConfig,
    supervised: SupervisedRunConfig,
    seeds: Sequence[int],
    variants: Sequence[BenchVariant] = DEFAULT_BENCH_VARIANTS,
    on_result: Callable[[BenchVariant, int, ExperimentResult], None] | None = None,
) -> list[VariantResult]:
    """Run every variant at matched settings for each seed.

    Each seed drives weight initialization, data order and the classifier
    alike, so variants see identical data streams.
    """
    if not seeds:
        raise ConfigError("benchmark needs at least one seed")
    results = {variant: VariantResult(variant=variant) for variant in variants}
    for seed in seeds:
        for variant in variants:
            untrained = variant is BenchVariant.RANDOM
            arch = architecture
            if not untrained:
                arch = with_plasticity_mode(architecture, PlasticityMode(variant.value))
            logger.info(f"Benchmark {variant.value}, seed {seed}")
            result = run_experiment(
                arch,
                train,
                test,
                unsupervised.model_copy(update={"seed": seed}),
                supervised.model_copy(update={"seed": seed}),
                seed=seed,
                untrained=untrained,
            )
            summary = results[variant]
            summary.seeds.append(seed)
            summary.accuracies.append(result.test.accuracy)
            summary.r1_fractions.append(float(np.mean(result.r1_fractions())))
            if on_result is not None:
                on_result(variant, seed, result)
    return list(results.values())
