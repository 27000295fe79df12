"""Analysis commands: R1 counts, receptive fields, patches, features, plots."""

import csv
from io import StringIO
from pathlib import Path
from typing import Any

import click
import numpy as np

from hebbnet.analysis.export import (
    crop_patches,
    export_features,
    export_image_grid,
    export_patches,
    export_r1,
    plot_metrics,
)
from hebbnet.analysis.patches import top_activating_patches
from hebbnet.analysis.r1 import count_r1
from hebbnet.analysis.receptive_field import (
    cosine_similarity,
    embedded_kernel,
    receptive_field_pgd,
)
from hebbnet.cli.context import CliContext, check_compatible, parse_int_list
from hebbnet.core.exceptions import ConfigError, ExportError, HebbnetError
from hebbnet.data.models import Dataset, DatasetName, Split
from hebbnet.data.transforms import normalize
from hebbnet.storage.checkpoint import Checkpoint
from hebbnet.storage.config import AnalysisDefaults
from hebbnet.training.classifier import extract_features
from hebbnet.training.metrics import read_metrics

pass_context = click.make_pass_decorator(CliContext)

ANALYSIS_DEFAULTS = AnalysisDefaults()


def checkpoint_option(f: Any) -> Any:
    return click.option(
        "--checkpoint", "-c", "checkpoint_dir",
        type=click.Path(file_okay=False, path_type=Path),
        required=True,
        help="Checkpoint directory",
    )(f)


def output_option(f: Any) -> Any:
    return click.option(
        "--output", "-o",
        type=click.Path(file_okay=False, path_type=Path),
        help="Artifact directory (default: analysis/ next to the checkpoint)",
    )(f)


def dataset_options(f: Any) -> Any:
    f = click.option("--limit", type=int, help="Use the first N images")(f)
    f = click.option(
        "--split",
        type=click.Choice([split.value for split in Split]),
        default=Split.TEST.value,
        show_default=True,
    )(f)
    f = click.option(
        "--data-dir", type=click.Path(file_okay=False, path_type=Path), help="Dataset root"
    )(f)
    return click.option(
        "--dataset",
        type=click.Choice([name.value for name in DatasetName]),
        help="Dataset (default: the one the checkpoint was trained on)",
    )(f)


def _output_dir(checkpoint_dir: Path, output: Path | None) -> Path:
    return output or checkpoint_dir.parent / "analysis"


def _analysis_defaults(checkpoint: Checkpoint) -> AnalysisDefaults:
    stored = checkpoint.config.get("analysis")
    return AnalysisDefaults.model_validate(stored) if stored else ANALYSIS_DEFAULTS


def _load_images(
    ctx: CliContext,
    checkpoint: Checkpoint,
    dataset: str | None,
    data_dir: Path | None,
    split: str,
    limit: int | None,
) -> tuple[Dataset, Dataset]:
    """Raw and normalized split, checked against the network input."""
    name = DatasetName(dataset) if dataset else ctx.checkpoint_dataset(checkpoint)
    root = data_dir or checkpoint.config.get("dataset", {}).get("root")
    raw = ctx.load_split(name, Path(root) if root else None, split, limit)
    check_compatible(checkpoint.network.architecture, raw)
    return raw, normalize(raw, checkpoint.stats)


def _neurons(value: str, width: int) -> list[int]:
    if value == "all":
        return list(range(width))
    neurons = parse_int_list(value)
    if not neurons:
        raise ConfigError("No neurons selected")
    return neurons


@click.group()
def analyze() -> None:
    """Inspect a trained checkpoint."""
    pass


@analyze.command("r1")
@checkpoint_option
@output_option
@click.option("--tolerance", type=float, help="Max |radius - 1| counted as R1")
@pass_context
def r1(ctx: CliContext, checkpoint_dir: Path, output: Path | None, tolerance: float | None) -> None:
    """Count neurons whose weight vector lies on the unit sphere."""
    try:
        checkpoint = ctx.load_checkpoint(checkpoint_dir)
        tol = tolerance or _analysis_defaults(checkpoint).r1_tolerance
        report = count_r1(checkpoint.network, tol)
        ctx.renderer.render_r1_report(report)
        path = export_r1(report, _output_dir(checkpoint_dir, output) / "r1.csv")
        ctx.renderer.print_success(f"Wrote {path}")
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e


@analyze.command("rf")
@checkpoint_option
@output_option
@click.option("--layer", type=int, default=1, show_default=True, help="1-based layer")
@click.option("--neurons", default="all", show_default=True, help="'all' or comma-separated")
@click.option("--steps", type=int, help="Max gradient-ascent steps")
@click.option("--step-size", type=float, help="Step length")
@click.option("--seed", type=int, default=0, show_default=True, help="Start-image seed")
@pass_context
def rf(
    ctx: CliContext,
    checkpoint_dir: Path,
    output: Path | None,
    layer: int,
    neurons: str,
    steps: int | None,
    step_size: float | None,
    seed: int,
) -> None:
    """Synthesize receptive fields by projected gradient ascent.

    Writes one PPM grid of all selected neurons and a CSV summary.

    Example: hebbnet analyze rf -c runs/latest/checkpoint --layer 1 --neurons all
    """
    try:
        checkpoint = ctx.load_checkpoint(checkpoint_dir)
        network = checkpoint.network
        defaults = _analysis_defaults(checkpoint)
        selected = _neurons(neurons, network.layer(layer).bank.num_neurons)

        fields = []
        with ctx.renderer.progress() as progress:
            task = progress.add_task(f"Layer {layer} receptive fields", total=len(selected))
            for neuron in selected:
                fields.append(
                    receptive_field_pgd(
                        network,
                        layer,
                        neuron,
                        steps=steps or defaults.rf_steps,
                        step_size=step_size or defaults.rf_step_size,
                        seed=seed,
                    )
                )
                progress.advance(task)

        directory = _output_dir(checkpoint_dir, output)
        grid = export_image_grid(
            np.stack([field.image for field in fields]), directory / f"rf-layer{layer}.ppm"
        )
        buffer = StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["layer", "neuron", "activation", "iterations", "converged", "kernel_cos"])
        for field in fields:
            cosine = ""
            if layer == 1:
                kernel = embedded_kernel(network, field.neuron)
                cosine = f"{cosine_similarity(field.image, kernel):.6f}"
            writer.writerow(
                [
                    layer,
                    field.neuron,
                    f"{field.activation:.6g}",
                    field.iterations,
                    int(field.converged),
                    cosine,
                ]
            )
        summary = directory / f"rf-layer{layer}.csv"
        try:
            summary.write_text(buffer.getvalue(), encoding="utf-8")
        except OSError as e:
            raise ExportError(f"Cannot write file: {e.strerror}", path=summary) from e

        unconverged = sum(not field.converged for field in fields)
        if unconverged:
            ctx.renderer.print_warning(f"{unconverged} of {len(fields)} fields did not converge")
        ctx.renderer.print_success(f"Wrote {grid} and {summary}")
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e


@analyze.command("patches")
@checkpoint_option
@output_option
@dataset_options
@click.option("--layer", type=int, default=1, show_default=True, help="1-based layer")
@click.option("--neurons", default="0", show_default=True, help="'all' or comma-separated")
@click.option("--k", "top_k", type=int, help="Patches per neuron")
@pass_context
def patches(
    ctx: CliContext,
    checkpoint_dir: Path,
    output: Path | None,
    dataset: str | None,
    data_dir: Path | None,
    split: str,
    limit: int | None,
    layer: int,
    neurons: str,
    top_k: int | None,
) -> None:
    """Find the dataset patches that activate neurons most strongly.

    Writes a CSV of image indices and input-space boxes per neuron and a
    PPM grid of the cropped patches.
    """
    try:
        checkpoint = ctx.load_checkpoint(checkpoint_dir)
        network = checkpoint.network
        k = top_k or _analysis_defaults(checkpoint).top_k
        raw, data = _load_images(ctx, checkpoint, dataset, data_dir, split, limit)
        directory = _output_dir(checkpoint_dir, output)

        for neuron in _neurons(neurons, network.layer(layer).bank.num_neurons):
            found = top_activating_patches(network, data, layer, neuron, k)
            ctx.renderer.render_patches(found, layer, neuron)
            stem = directory / f"patches-layer{layer}-neuron{neuron}"
            export_patches(found, stem.with_suffix(".csv"), layer, neuron)
            if found:
                export_image_grid(crop_patches(raw.images, found), stem.with_suffix(".ppm"))
        ctx.renderer.print_success(f"Wrote patch tables to {directory}")
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e


@analyze.command("export-features")
@checkpoint_option
@output_option
@dataset_options
@click.option("--layer", type=int, help="Depth to extract (default: last)")
@pass_context
def export_features_command(
    ctx: CliContext,
    checkpoint_dir: Path,
    output: Path | None,
    dataset: str | None,
    data_dir: Path | None,
    split: str,
    limit: int | None,
    layer: int | None,
) -> None:
    """Export per-image feature vectors as CSV for external projection."""
    try:
        checkpoint = ctx.load_checkpoint(checkpoint_dir)
        network = checkpoint.network
        depth = layer or network.depth
        network.layer(depth)
        _, data = _load_images(ctx, checkpoint, dataset, data_dir, split, limit)
        features = extract_features(network, data, depth)
        path = export_features(
            features,
            _output_dir(checkpoint_dir, output) / f"features-layer{depth}-{split}.csv",
            data.labels,
        )
        ctx.renderer.print_success(
            f"Wrote {features.shape[0]} x {features.shape[1]} features to {path}"
        )
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e


@analyze.command("plot-metrics")
@click.argument("metrics_csv", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--output", "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    help="PNG path (default: next to the CSV)",
)
@pass_context
def plot_metrics_command(ctx: CliContext, metrics_csv: Path, output: Path | None) -> None:
    """Plot mean radius, R1 fraction and classifier curves from metrics.csv."""
    try:
        records = read_metrics(metrics_csv)
        if not records:
            ctx.renderer.print_warning(f"{metrics_csv} has no records")
            return
        path = plot_metrics(records, output or metrics_csv.with_suffix(".png"))
        ctx.renderer.print_success(f"Wrote {path}")
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e
