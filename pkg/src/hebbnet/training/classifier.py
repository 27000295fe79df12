"""Linear softmax classifier head with analytic cross-entropy gradients."""

import logging
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
import numpy.typing as npt

from hebbnet.core.exceptions import NumericError, ShapeError
from hebbnet.core.utils import make_rng
from hebbnet.data.models import Dataset
from hebbnet.data.transforms import AUGMENT_STREAM, augment
from hebbnet.network.layer import HebbianNetwork
from hebbnet.tensor.models import Mode
from hebbnet.training.models import (
    ClassifierReport,
    EpochReport,
    OptimizerKind,
    SupervisedRunConfig,
)
from hebbnet.training.schedule import lr_schedule

logger = logging.getLogger(__name__)

Float64Array = npt.NDArray[np.float64]
LabelArray = npt.NDArray[np.int64]

CLASSIFIER_STREAM = 7
FEATURE_BATCH = 256


@dataclass
class ClassifierHead:
    """Weights ``(classes, features)`` and bias ``(classes,)`` in float64."""

    weights: Float64Array
    bias: Float64Array
    dropout: float = 0.5

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ShapeError(
                "classifier head shapes do not agree",
                weights=self.weights.shape,
                bias=self.bias.shape,
            )

    @classmethod
    def zeros(cls, num_classes: int, feature_dim: int, dropout: float = 0.5) -> "ClassifierHead":
        return cls(np.zeros((num_classes, feature_dim)), np.zeros(num_classes), dropout)

    @classmethod
    def initialize(
        cls, num_classes: int, feature_dim: int, seed: int, dropout: float = 0.5
    ) -> "ClassifierHead":
        """Uniform init in ``+-1/sqrt(features)``."""
        rng = make_rng(seed, CLASSIFIER_STREAM)
        bound = 1.0 / np.sqrt(feature_dim)
        weights = rng.uniform(-bound, bound, size=(num_classes, feature_dim))
        bias = rng.uniform(-bound, bound, size=num_classes)
        return cls(weights, bias, dropout)

    @property
    def num_classes(self) -> int:
        return int(self.weights.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.weights.shape[1])

    def copy(self) -> "ClassifierHead":
        return ClassifierHead(self.weights.copy(), self.bias.copy(), self.dropout)


@dataclass
class Gradients:
    weights: Float64Array
    bias: Float64Array


def log_softmax(logits: Float64Array) -> Float64Array:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def dropout_features(
    features: Float64Array, rate: float, rng: np.random.Generator
) -> Float64Array:
    """Inverted dropout: zero with probability ``rate``, scale survivors by ``1/(1-rate)``."""
    if rate <= 0:
        return features
    keep = rng.random(features.shape) >= rate
    return features * keep / (1.0 - rate)


def _check_features(features: npt.ArrayLike, head: ClassifierHead) -> Float64Array:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != head.feature_dim:
        raise ShapeError(
            "feature dimension does not match head", features=x.shape, expected=head.feature_dim
        )
    return x


def classifier_forward(
    features: npt.ArrayLike,
    head: ClassifierHead,
    mode: Mode | str = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> Float64Array:
    """Class log-probabilities of ``W x + b``.

    Train mode applies inverted dropout to the features first.
    """
    x = _check_features(features, head)
    if Mode(mode) is Mode.TRAIN and head.dropout > 0:
        x = dropout_features(x, head.dropout, rng or make_rng(0, CLASSIFIER_STREAM))
    return log_softmax(x @ head.weights.T + head.bias)


def cross_entropy(log_probs: Float64Array, labels: npt.ArrayLike) -> float:
    """Mean negative log-likelihood of the true labels."""
    labels = np.asarray(labels, dtype=np.int64)
    return float(-log_probs[np.arange(len(labels)), labels].mean())


def classifier_backward(
    features: npt.ArrayLike,
    labels: npt.ArrayLike,
    head: ClassifierHead,
    log_probs: Float64Array | None = None,
) -> Gradients:
    """Gradient of the mean cross-entropy w.r.t. the head parameters.

    ``grad W = (softmax(logits) - onehot)^T x / batch``. Pass the
    ``log_probs`` of a train-mode forward together with the dropped-out
    features it saw to differentiate that exact pass.
    """
    x = _check_features(features, head)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= head.num_classes:
        raise ShapeError("labels out of range", classes=head.num_classes)
    if log_probs is None:
        log_probs = log_softmax(x @ head.weights.T + head.bias)
    delta = np.exp(log_probs)
    delta[np.arange(len(labels)), labels] -= 1.0
    delta /= len(labels)
    return Gradients(weights=delta.T @ x, bias=delta.sum(axis=0))


class Optimizer(Protocol):
    """Updates a head in place from its gradients."""

    def step(self, head: ClassifierHead, grads: Gradients, lr: float) -> None: ...


@dataclass
class Adam:
    """Adaptive-moment optimizer."""

    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    moments: dict[str, tuple[Float64Array, Float64Array]] = field(default_factory=dict)

    def step(self, head: ClassifierHead, grads: Gradients, lr: float) -> None:
        self.t += 1
        for name in ("weights", "bias"):
            grad = getattr(grads, name)
            m, v = self.moments.get(name, (np.zeros_like(grad), np.zeros_like(grad)))
            m = self.beta1 * m + (1 - self.beta1) * grad
            v = self.beta2 * v + (1 - self.beta2) * grad**2
            self.moments[name] = (m, v)
            m_hat = m / (1 - self.beta1**self.t)
            v_hat = v / (1 - self.beta2**self.t)
            param = getattr(head, name)
            param -= lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class MomentumSGD:
    """Stochastic gradient descent with heavy-ball momentum."""

    momentum: float = 0.9
    velocity: dict[str, Float64Array] = field(default_factory=dict)

    def step(self, head: ClassifierHead, grads: Gradients, lr: float) -> None:
        for name in ("weights", "bias"):
            grad = getattr(grads, name)
            v = self.momentum * self.velocity.get(name, np.zeros_like(grad)) + grad
            self.velocity[name] = v
            param = getattr(head, name)
            param -= lr * v


def make_optimizer(cfg: SupervisedRunConfig) -> Optimizer:
    if cfg.optimizer is OptimizerKind.SGD:
        return MomentumSGD(momentum=cfg.momentum)
    return Adam(beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)


def accuracy(log_probs: Float64Array, labels: npt.ArrayLike) -> float:
    return float(np.mean(log_probs.argmax(axis=1) == np.asarray(labels)))


BatchStream = Callable[[int], Iterator[tuple[npt.NDArray[np.floating], LabelArray]]]


def fit_head(
    head: ClassifierHead,
    stream: BatchStream,
    cfg: SupervisedRunConfig,
    validation: tuple[npt.NDArray[np.floating], LabelArray] | None = None,
    on_epoch: Callable[[EpochReport], None] | None = None,
) -> ClassifierReport:
    """Optimize ``head`` over ``cfg.epochs`` epochs of mini-batches.

    Args:
        head: Head to train in place
        stream: ``epoch -> iterator of (features, labels)``
        cfg: Supervised run settings
        validation: Held-out features and labels
        on_epoch: Called with each epoch's report

    Returns:
        ClassifierReport

    Raises:
        NumericError: If the loss or the parameters become non-finite
    """
    optimizer = make_optimizer(cfg)
    rng = make_rng(cfg.seed, CLASSIFIER_STREAM, 1)
    report = ClassifierReport()
    for epoch in range(cfg.epochs):
        lr = lr_schedule(epoch / cfg.epochs, cfg.lr, cfg.milestones)
        loss_sum = 0.0
        correct = 0.0
        seen = 0
        for step, (features, labels) in enumerate(stream(epoch)):
            x = _check_features(features, head)
            if head.dropout > 0:
                x = dropout_features(x, head.dropout, rng)
            log_probs = log_softmax(x @ head.weights.T + head.bias)
            loss = cross_entropy(log_probs, labels)
            if not np.isfinite(loss):
                raise NumericError("classifier loss diverged", layer=0, step=step)
            optimizer.step(head, classifier_backward(x, labels, head, log_probs), lr)
            loss_sum += loss * len(labels)
            correct += accuracy(log_probs, labels) * len(labels)
            seen += len(labels)
        if not (np.isfinite(head.weights).all() and np.isfinite(head.bias).all()):
            raise NumericError("classifier parameters became non-finite", layer=0, step=epoch)

        val_accuracy = None
        if validation is not None and len(validation[1]):
            val_accuracy = accuracy(classifier_forward(validation[0], head), validation[1])
        epoch_report = EpochReport(
            epoch=epoch + 1,
            lr=lr,
            loss=loss_sum / max(seen, 1),
            train_accuracy=correct / max(seen, 1),
            val_accuracy=val_accuracy,
        )
        report.epochs.append(epoch_report)
        logger.debug(
            f"Epoch {epoch + 1}/{cfg.epochs}: loss {epoch_report.loss:.4f}, "
            f"train {epoch_report.train_accuracy:.4f}, lr {lr:.2e}"
        )
        if on_epoch is not None:
            on_epoch(epoch_report)
    return report


def train_classifier(
    features: npt.NDArray[np.floating],
    labels: npt.ArrayLike,
    num_classes: int,
    cfg: SupervisedRunConfig,
    validation: tuple[npt.NDArray[np.floating], LabelArray] | None = None,
    on_epoch: Callable[[EpochReport], None] | None = None,
) -> tuple[ClassifierHead, ClassifierReport]:
    """Train a head on fixed features.

    Deterministic for a given ``cfg.seed``.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if len(features) != len(labels):
        raise ShapeError(
            "features and labels differ in length", features=len(features), labels=len(labels)
        )
    head = ClassifierHead.initialize(num_classes, features.shape[1], cfg.seed, cfg.dropout)

    def stream(epoch: int) -> Iterator[tuple[npt.NDArray[np.floating], LabelArray]]:
        order = make_rng(cfg.seed, CLASSIFIER_STREAM, 2, epoch).permutation(len(labels))
        for start in range(0, len(order), cfg.batch_size):
            idx = np.sort(order[start : start + cfg.batch_size])
            yield features[idx], labels[idx]

    report = fit_head(head, stream, cfg, validation, on_epoch)
    return head, report


def train_classifier_on_images(
    network: HebbianNetwork,
    dataset: Dataset,
    cfg: SupervisedRunConfig,
    upto: int | None = None,
    validation: Dataset | None = None,
    on_epoch: Callable[[EpochReport], None] | None = None,
) -> tuple[ClassifierHead, ClassifierReport]:
    """Train a head on a frozen extractor's features.

    Without augmentation the features are extracted once; with it every
    batch is augmented and passed through the extractor again.
    """
    if dataset.labels is None:
        raise ShapeError("classifier training needs labels")
    val = None
    if validation is not None and validation.labels is not None:
        val = (extract_features(network, validation, upto), validation.labels)
    if not cfg.augmented:
        features = extract_features(network, dataset, upto)
        return train_classifier(features, dataset.labels, dataset.num_classes, cfg, val, on_epoch)

    labels = dataset.labels
    head = ClassifierHead.initialize(
        dataset.num_classes, network.architecture.feature_dim(upto), cfg.seed, cfg.dropout
    )

    def stream(epoch: int) -> Iterator[tuple[npt.NDArray[np.floating], LabelArray]]:
        rng = make_rng(cfg.seed, AUGMENT_STREAM, epoch)
        order = make_rng(cfg.seed, CLASSIFIER_STREAM, 2, epoch).permutation(len(labels))
        for start in range(0, len(order), cfg.batch_size):
            idx = np.sort(order[start : start + cfg.batch_size])
            images = augment(dataset.images[idx], rng, cfg.hflip, cfg.crop_padding)
            yield network.features(images, upto), labels[idx]

    return head, fit_head(head, stream, cfg, val, on_epoch)


def extract_features(
    network: HebbianNetwork,
    dataset: Dataset,
    upto: int | None = None,
    batch_size: int = FEATURE_BATCH,
    cache_path: Path | None = None,
) -> npt.NDArray[np.float32]:
    """Flattened eval-mode features of every image, in dataset order.

    With ``cache_path`` the features are written to a ``.npy`` memmap
    instead of being held in memory.
    """
    dim = network.architecture.feature_dim(upto)
    shape = (len(dataset), dim)
    if cache_path is not None:
        out: npt.NDArray[np.float32] = np.lib.format.open_memmap(
            cache_path, mode="w+", dtype=np.float32, shape=shape
        )
    else:
        out = np.empty(shape, dtype=np.float32)
    for start in range(0, len(dataset), batch_size):
        out[start : start + batch_size] = network.features(
            dataset.images[start : start + batch_size], upto
        )
    if isinstance(out, np.memmap):
        out.flush()
    logger.debug(f"Extracted {shape[0]} x {shape[1]} features from layer {upto or network.depth}")
    return out
