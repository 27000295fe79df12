"""Train command."""

from pathlib import Path
from typing import Any

import click

from hebbnet.cli.context import CliContext, check_compatible, parse_int_list, write_json
from hebbnet.core.exceptions import HebbnetError
from hebbnet.core.utils import content_hash, utc_now
from hebbnet.data.models import DatasetName, Split
from hebbnet.network.models import LayerOverrides, NetworkMode
from hebbnet.plasticity.models import PlasticityMode
from hebbnet.storage.checkpoint import Checkpoint, save_checkpoint
from hebbnet.storage.config import RunConfig, config_to_dict, set_dotted, write_config
from hebbnet.training.metrics import MetricsWriter
from hebbnet.training.models import MetricsRecord
from hebbnet.training.pipeline import ExperimentResult, run_experiment
from hebbnet.training.unsupervised import planned_steps

pass_context = click.make_pass_decorator(CliContext)

MODE_ALIASES = {
    "soft": PlasticityMode.SOFT_HEBBIAN,
    "soft_anti": PlasticityMode.SOFT_ANTI_HEBBIAN,
    "hard": PlasticityMode.HARD_WTA,
    **{mode.value: mode for mode in PlasticityMode},
}


def build_overrides(**flags: Any) -> dict[str, Any]:
    """Nested config overrides from CLI flags; unset flags are skipped."""
    paths = {
        "dataset": "dataset.name",
        "data_dir": "dataset.root",
        "train_limit": "dataset.train_limit",
        "test_limit": "dataset.test_limit",
        "output": "output_dir",
        "seed": "seed",
        "max_layers": "architecture.max_layers",
        "first_width": "architecture.first_width",
        "width_factor": "architecture.width_factor",
        "mode": "architecture.common.mode",
        "hebb_epochs": "unsupervised.epochs",
        "hebb_batch_size": "unsupervised.batch_size",
        "max_iterations": "unsupervised.max_iterations",
        "epochs": "supervised.epochs",
        "threads": "threads",
    }
    overrides: dict[str, Any] = {}
    for name, value in flags.items():
        if value is None or name not in paths:
            continue
        if isinstance(value, Path):
            value = str(value)
        if name == "mode":
            value = MODE_ALIASES[value].value
        overrides = set_dotted(overrides, paths[name], value)
    if flags.get("fully_connected"):
        overrides = set_dotted(overrides, "architecture.mode", NetworkMode.FULLY_CONNECTED.value)
    if flags.get("deterministic"):
        overrides = set_dotted(overrides, "deterministic", True)
    if flags.get("untrained"):
        overrides = set_dotted(overrides, "untrained", True)
    if flags.get("probe_layers"):
        overrides = set_dotted(overrides, "probe_layers", parse_int_list(flags["probe_layers"]))
    return overrides


def with_first_layer(config: RunConfig, overrides: LayerOverrides) -> RunConfig:
    """Merge ``overrides`` into layer 1's entry, keeping deeper entries."""
    arch = config.architecture
    layers = list(arch.layers) or [LayerOverrides()]
    layers[0] = layers[0].merged(overrides)
    return config.model_copy(
        update={"architecture": arch.model_copy(update={"layers": layers})}
    )


def run_manifest(config: RunConfig, result: ExperimentResult) -> dict[str, Any]:
    payload = config_to_dict(config)
    return {
        "config": payload,
        "config_hash": content_hash(payload),
        "seed": config.seed,
        "widths": result.network.architecture.widths,
        "resolutions": result.network.architecture.resolution_trace(),
        "notes": result.network.architecture.notes,
        "created_at": utc_now().isoformat(),
    }


def run_results(result: ExperimentResult) -> dict[str, Any]:
    final = result.classifier.final
    return {
        "test_accuracy": result.test.accuracy,
        "per_class_accuracy": result.test.per_class,
        "test_count": result.test.count,
        "train_accuracy": final.train_accuracy if final else None,
        "val_accuracy": final.val_accuracy if final else None,
        "r1_fractions": result.r1_fractions(),
        "unsupervised": result.unsupervised.model_dump(mode="json"),
        "probes": {str(depth): probe.accuracy for depth, probe in sorted(result.probes.items())},
    }


def dataset_choice() -> click.Choice:
    return click.Choice([name.value for name in DatasetName])


@click.command()
@click.option("--preset", type=str, help="Shipped preset, e.g. table-a2-cifar")
@click.option(
    "--config", "config_file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="TOML or JSON run config",
)
@click.option("--dataset", type=dataset_choice(), help="Dataset name")
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path),
              help="Dataset root (default: $HEBBNET_DATA_DIR)")
@click.option("--output", "-o", type=click.Path(file_okay=False, path_type=Path),
              help="Run output directory")
@click.option("--seed", type=int, help="Run seed")
@click.option("--layers", "max_layers", type=int, help="Stop after this many layers")
@click.option("--mode", type=click.Choice(sorted(MODE_ALIASES)), help="Plasticity mode")
@click.option("--first-width", type=int, help="Neurons in layer 1")
@click.option("--width-factor", type=float, help="Width multiplier per layer")
@click.option("--inv-temp", type=float, help="Layer-1 inverse temperature 1/tau")
@click.option("--fully-connected", is_flag=True, help="Single fully connected layer")
@click.option("--hebb-epochs", type=int, help="Unsupervised epochs")
@click.option("--hebb-batch-size", type=int, help="Unsupervised mini-batch size")
@click.option("--max-iterations", type=int, help="Cap on update steps per layer")
@click.option("--epochs", type=int, help="Classifier epochs")
@click.option("--train-limit", type=int, help="Use the first N training images")
@click.option("--test-limit", type=int, help="Use the first N test images")
@click.option("--probe-layers", type=str, help="Comma-separated depths for linear probes")
@click.option("--untrained", is_flag=True, help="Keep random weights (baseline)")
@click.option("--threads", type=int, help="Worker threads for plasticity updates")
@click.option("--deterministic", is_flag=True, help="Ordered single-thread updates")
@pass_context
def train(
    ctx: CliContext,
    preset: str | None,
    config_file: Path | None,
    inv_temp: float | None,
    **flags: Any,
) -> None:
    """Train a SoftHebb network and its linear classifier.

    Writes config.toml, manifest.json, metrics.csv, results.json and a
    checkpoint directory into the output directory.

    Examples:
        hebbnet train --preset table-a2-cifar
        hebbnet train --dataset cifar10 --layers 1 --mode soft_anti
    """
    try:
        config = ctx.load_config(preset, config_file, build_overrides(**flags))
        if inv_temp is not None:
            config = with_first_layer(config, LayerOverrides(inverse_temperature=inv_temp))
        _train(ctx, config)
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e


def _train(ctx: CliContext, config: RunConfig) -> None:
    dataset = config.dataset
    train_set = ctx.load_split(dataset.name, dataset.root, Split.TRAIN, dataset.train_limit)
    test_set = ctx.load_split(dataset.name, dataset.root, Split.TEST, dataset.test_limit)
    architecture = config.architecture.build(train_set.resolution, train_set.channels)
    check_compatible(architecture, test_set)
    ctx.renderer.render_architecture(architecture)

    output = config.output_dir
    write_config(config, output / "config.toml")
    unsupervised = config.unsupervised_settings()
    supervised = config.supervised_settings()

    with MetricsWriter(output / "metrics.csv") as metrics, ctx.renderer.progress() as progress:
        hebbian_total = 0 if config.untrained else (
            planned_steps(len(train_set), unsupervised) * architecture.depth
        )
        hebbian = progress.add_task("SoftHebb updates", total=hebbian_total or None)
        head = progress.add_task("Classifier epochs", total=supervised.epochs)

        def on_record(record: MetricsRecord) -> None:
            metrics.write(record)
            if record.layer > 0:
                progress.update(hebbian, completed=record.step)
            else:
                progress.update(head, completed=record.step)

        result = run_experiment(
            architecture,
            train_set,
            test_set,
            unsupervised,
            supervised,
            seed=config.seed,
            probes=config.probe_layers,
            untrained=config.untrained,
            on_record=on_record,
        )

    checkpoint = Checkpoint(
        network=result.network,
        head=result.head,
        stats=result.stats,
        config=config_to_dict(config),
    )
    save_checkpoint(checkpoint, output / "checkpoint")
    write_json(output / "manifest.json", run_manifest(config, result))
    write_json(output / "results.json", run_results(result))

    ctx.renderer.render_unsupervised_report(result.unsupervised)
    ctx.renderer.render_classifier_report(result.classifier)
    if result.probes:
        ctx.renderer.render_probes(result.probes)
    ctx.renderer.render_evaluation(result.test)
    ctx.renderer.print_success(f"Run written to {output}")
