"""Greedy layer-wise SoftHebb training."""

import logging
from collections.abc import Callable

from hebbnet.core.exceptions import NumericError
from hebbnet.data.models import Dataset
from hebbnet.data.transforms import batches
from hebbnet.network.layer import HebbianNetwork, SoftHebbLayer
from hebbnet.plasticity.engine import UpdateSummary, apply_batch_update
from hebbnet.tensor.batchnorm import batch_norm
from hebbnet.tensor.models import Mode
from hebbnet.training.models import (
    LayerOrder,
    LayerTrainingReport,
    MetricsRecord,
    UnsupervisedReport,
    UnsupervisedRunConfig,
)

logger = logging.getLogger(__name__)

StepCallback = Callable[[MetricsRecord], None]


def planned_steps(dataset_size: int, cfg: UnsupervisedRunConfig) -> int:
    """Update steps per layer: epochs x batches, capped by ``max_iterations``."""
    steps = cfg.epochs * -(-dataset_size // cfg.batch_size)
    if cfg.max_iterations is not None:
        steps = min(steps, cfg.max_iterations)
    return steps


def _record(step: int, index: int, layer: SoftHebbLayer, summary: UpdateSummary) -> MetricsRecord:
    return MetricsRecord(
        step=step,
        layer=index,
        mean_radius=float(layer.bank.radii.mean()),
        r1_fraction=layer.bank.r1_fraction(),
        lr=summary.mean_lr,
    )


def _with_location(error: NumericError, index: int, step: int) -> NumericError:
    return NumericError(f"{error} during unsupervised training", index, step)


def train_unsupervised(
    network: HebbianNetwork,
    dataset: Dataset,
    cfg: UnsupervisedRunConfig,
    on_step: StepCallback | None = None,
) -> UnsupervisedReport:
    """Train every unfrozen layer with SoftHebb plasticity.

    Sequential order trains one layer at a time on the eval-mode outputs
    of the already frozen layers below it. Simultaneous order updates all
    layers on every mini-batch, each on the train-mode output of the
    layer below. Every trained layer is frozen afterwards.

    Args:
        network: Network, updated in place
        dataset: Normalized training data (labels unused)
        cfg: Run settings
        on_step: Receives a MetricsRecord every ``cfg.log_every`` steps
            and after each layer's final step

    Returns:
        UnsupervisedReport

    Raises:
        NumericError: If weights become non-finite (carries layer and step)
    """
    report = UnsupervisedReport()
    if len(dataset) == 0 or cfg.epochs == 0:
        logger.info("Empty dataset or zero epochs: skipping unsupervised training")
        return report

    total = planned_steps(len(dataset), cfg)
    logger.info(
        f"Unsupervised training: {network.depth} layers, {total} steps per layer, "
        f"{cfg.order.value} order"
    )
    if cfg.order is LayerOrder.SIMULTANEOUS:
        return _train_simultaneous(network, dataset, cfg, total, on_step)

    global_step = 0
    for index, layer in enumerate(network.layers, start=1):
        if layer.frozen:
            logger.debug(f"Layer {index} is frozen, skipping")
            continue
        steps = 0
        for epoch in range(cfg.epochs):
            for images, _ in batches(dataset, cfg.batch_size, cfg.seed, epoch):
                if steps >= total:
                    break
                x = network.forward(images, upto=index - 1, mode=Mode.EVAL)
                try:
                    summary = layer.train_step(x, steps / total, cfg.effective_threads)
                except NumericError as e:
                    raise _with_location(e, index, steps + 1) from e
                steps += 1
                global_step += 1
                if on_step is not None and (steps % cfg.log_every == 0 or steps == total):
                    on_step(_record(global_step, index, layer, summary))
        layer.freeze()
        report.layers.append(_layer_report(index, layer, steps))
        logger.info(
            f"Layer {index} trained for {steps} steps, "
            f"R1 fraction {report.layers[-1].r1_fraction:.3f}"
        )
    return report


def _train_simultaneous(
    network: HebbianNetwork,
    dataset: Dataset,
    cfg: UnsupervisedRunConfig,
    total: int,
    on_step: StepCallback | None,
) -> UnsupervisedReport:
    active = [(i, layer) for i, layer in enumerate(network.layers, start=1) if not layer.frozen]
    step = 0
    for epoch in range(cfg.epochs):
        for images, _ in batches(dataset, cfg.batch_size, cfg.seed, epoch):
            if step >= total:
                break
            step += 1
            x = images
            for index, layer in enumerate(network.layers, start=1):
                if layer.frozen:
                    x = layer(x, Mode.EVAL)
                    continue
                out = layer.forward(x, Mode.TRAIN)
                try:
                    summary = apply_batch_update(
                        layer.bank,
                        out.patches,
                        layer.spec.plasticity,
                        progress=(step - 1) / total,
                        pre_activations=out.pre_activations,
                        threads=cfg.effective_threads,
                    )
                except NumericError as e:
                    raise _with_location(e, index, step) from e
                if on_step is not None and (step % cfg.log_every == 0 or step == total):
                    on_step(_record(step, index, layer, summary))
                x = out.output
    report = UnsupervisedReport()
    for index, layer in active:
        layer.freeze()
        report.layers.append(_layer_report(index, layer, step))
    return report


def _layer_report(index: int, layer: SoftHebbLayer, steps: int) -> LayerTrainingReport:
    return LayerTrainingReport(
        layer=index,
        steps=steps,
        mean_radius=float(layer.bank.radii.mean()),
        r1_fraction=layer.bank.r1_fraction(),
    )


def calibrate_batchnorm(
    network: HebbianNetwork,
    dataset: Dataset,
    batch_size: int = 10,
    seed: int = 0,
    max_batches: int | None = None,
) -> None:
    """Accumulate train-mode BatchNorm statistics without plasticity.

    Layers are calibrated bottom-up so each sees eval-mode inputs from the
    calibrated layers below. Used for untrained (random-weight) networks.
    """
    for index, layer in enumerate(network.layers, start=1):
        for count, (images, _) in enumerate(batches(dataset, batch_size, seed)):
            if max_batches is not None and count >= max_batches:
                break
            x = network.forward(images, upto=index - 1, mode=Mode.EVAL)
            batch_norm(x, layer.bn, Mode.TRAIN)
        logger.debug(f"Calibrated BatchNorm of layer {index}")
