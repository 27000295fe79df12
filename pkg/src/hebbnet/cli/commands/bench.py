"""Benchmark command: single-layer variants at matched settings."""

import csv
from io import StringIO
from pathlib import Path
from typing import Any

import click

from hebbnet.cli.commands.train import build_overrides, with_first_layer
from hebbnet.cli.context import CliContext, check_compatible, parse_int_list, write_json
from hebbnet.core.exceptions import ExportError, HebbnetError
from hebbnet.core.utils import content_hash
from hebbnet.data.models import DatasetName, Split
from hebbnet.network.models import LayerOverrides
from hebbnet.storage.config import config_to_dict
from hebbnet.training.models import DEFAULT_BENCH_VARIANTS, BenchVariant, VariantResult
from hebbnet.training.pipeline import run_benchmark

pass_context = click.make_pass_decorator(CliContext)


def benchmark_csv(results: list[VariantResult]) -> str:
    """One row per variant: mean/std accuracy, R1 fraction and per-seed accuracies."""
    output = StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(
        ["variant", "seeds", "mean_accuracy", "std_accuracy", "mean_r1_fraction", "accuracies"]
    )
    for result in results:
        writer.writerow(
            [
                result.variant.value,
                len(result.seeds),
                f"{result.mean_accuracy:.4f}",
                f"{result.std_accuracy:.4f}",
                f"{result.mean_r1:.4f}",
                " ".join(f"{a:.4f}" for a in result.accuracies),
            ]
        )
    return output.getvalue()


@click.command()
@click.option("--preset", type=str, help="Shipped preset")
@click.option(
    "--config", "config_file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="TOML or JSON run config",
)
@click.option(
    "--dataset",
    type=click.Choice([name.value for name in DatasetName]),
    help="Dataset (default: cifar10)",
)
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), help="Dataset root")
@click.option("--output", "-o", type=click.Path(file_okay=False, path_type=Path),
              help="Directory for bench.csv (default: <output_dir>/bench)")
@click.option("--seeds", "seed_count", type=int, default=3, show_default=True,
              help="Seeds 0..N-1")
@click.option("--seed-list", type=str, help="Explicit comma-separated seeds")
@click.option(
    "--variant", "variants",
    type=click.Choice([variant.value for variant in BenchVariant]),
    multiple=True,
    help="Variants to run (default: soft_anti_hebbian, hard_wta, random)",
)
@click.option("--first-width", type=int, help="Neurons in the single layer")
@click.option("--inv-temp", type=float, help="Inverse temperature 1/tau")
@click.option("--max-iterations", type=int, help="Cap on update steps")
@click.option("--epochs", type=int, help="Classifier epochs")
@click.option("--train-limit", type=int, help="Use the first N training images")
@click.option("--test-limit", type=int, help="Use the first N test images")
@click.option("--threads", type=int, help="Worker threads for plasticity updates")
@pass_context
def bench(
    ctx: CliContext,
    preset: str | None,
    config_file: Path | None,
    output: Path | None,
    seed_count: int,
    seed_list: str | None,
    variants: tuple[str, ...],
    inv_temp: float | None,
    **flags: Any,
) -> None:
    """Compare soft anti-Hebbian, hard-WTA and random single-layer networks.

    Prints a mean ± std accuracy table and writes it as CSV.

    Examples:
        hebbnet bench --seeds 3
        hebbnet bench --seeds 1 --train-limit 2000 --epochs 5
    """
    try:
        overrides = build_overrides(max_layers=1, **flags)
        config = ctx.load_config(preset, config_file, overrides)
        if inv_temp is not None:
            config = with_first_layer(config, LayerOverrides(inverse_temperature=inv_temp))
        seeds = parse_int_list(seed_list) or list(range(seed_count))
        chosen = [BenchVariant(v) for v in variants] or list(DEFAULT_BENCH_VARIANTS)

        dataset = config.dataset
        train_set = ctx.load_split(dataset.name, dataset.root, Split.TRAIN, dataset.train_limit)
        test_set = ctx.load_split(dataset.name, dataset.root, Split.TEST, dataset.test_limit)
        architecture = config.architecture.build(train_set.resolution, train_set.channels)
        check_compatible(architecture, test_set)

        with ctx.renderer.progress() as progress:
            task = progress.add_task("Benchmark runs", total=len(seeds) * len(chosen))
            results = run_benchmark(
                architecture,
                train_set,
                test_set,
                config.unsupervised_settings(),
                config.supervised_settings(),
                seeds=seeds,
                variants=chosen,
                on_result=lambda *_: progress.advance(task),
            )

        table = benchmark_csv(results)
        directory = output or config.output_dir / "bench"
        path = directory / "bench.csv"
        try:
            directory.mkdir(parents=True, exist_ok=True)
            path.write_text(table, encoding="utf-8")
        except OSError as e:
            raise ExportError(f"Cannot write file: {e.strerror}", path=path) from e
        write_json(
            directory / "manifest.json",
            {
                "config": config_to_dict(config),
                "config_hash": content_hash(config_to_dict(config)),
                "seeds": seeds,
                "variants": [v.value for v in chosen],
            },
        )

        ctx.renderer.render_benchmark(results)
        ctx.console.print(table, end="", markup=False, highlight=False)
        ctx.renderer.print_success(f"Wrote {path}")
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e
