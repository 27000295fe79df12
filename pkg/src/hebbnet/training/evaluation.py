"""Accuracy evaluation and per-layer linear probes."""

import logging
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from hebbnet.core.exceptions import DataError
from hebbnet.data.models import Dataset
from hebbnet.network.layer import HebbianNetwork
from hebbnet.training.classifier import (
    ClassifierHead,
    classifier_forward,
    extract_features,
    train_classifier_on_images,
)
from hebbnet.training.models import EvaluationResult, SupervisedRunConfig

logger = logging.getLogger(__name__)


def evaluate_features(
    features: npt.NDArray[np.floating],
    labels: npt.ArrayLike,
    head: ClassifierHead,
) -> EvaluationResult:
    """Top-1 and per-class accuracy of ``head`` on precomputed features."""
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        return EvaluationResult(accuracy=0.0, per_class=[0.0] * head.num_classes, count=0)
    predictions = classifier_forward(features, head).argmax(axis=1)
    correct = predictions == labels
    totals = np.bincount(labels, minlength=head.num_classes)
    hits = np.bincount(labels[correct], minlength=head.num_classes)
    per_class = np.divide(hits, totals, out=np.zeros(head.num_classes), where=totals > 0)
    return EvaluationResult(
        accuracy=float(correct.mean()), per_class=per_class.tolist(), count=len(labels)
    )


def evaluate(
    network: HebbianNetwork,
    head: ClassifierHead,
    dataset: Dataset,
    upto: int | None = None,
) -> EvaluationResult:
    """Accuracy over a full split, BatchNorm and dropout in eval mode.

    Raises:
        DataError: If the dataset has no labels
    """
    if dataset.labels is None:
        raise DataError(f"{dataset.name}/{dataset.split} has no labels to evaluate against")
    return evaluate_features(extract_features(network, dataset, upto), dataset.labels, head)


def probe_layers(
    network: HebbianNetwork,
    train: Dataset,
    test: Dataset,
    layers: Sequence[int],
    cfg: SupervisedRunConfig,
    validation: Dataset | None = None,
) -> dict[int, EvaluationResult]:
    """Train and evaluate one linear probe per requested depth."""
    results = {}
    for layer in layers:
        network.layer(layer)
        head, _ = train_classifier_on_images(network, train, cfg, upto=layer, validation=validation)
        results[layer] = evaluate(network, head, test, upto=layer)
        logger.info(f"Probe at layer {layer}: accuracy {results[layer].accuracy:.4f}")
    return results
