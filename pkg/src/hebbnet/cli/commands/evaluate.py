"""Eval command."""

from pathlib import Path

import click

from hebbnet.cli.context import CliContext, check_compatible, write_json
from hebbnet.core.exceptions import HebbnetError, StateError
from hebbnet.data.models import DatasetName, Split
from hebbnet.data.transforms import normalize
from hebbnet.display.formatters import format_accuracy
from hebbnet.training.evaluation import evaluate

pass_context = click.make_pass_decorator(CliContext)


@click.command("eval")
@click.option(
    "--checkpoint", "-c", "checkpoint_dir",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
    help="Checkpoint directory",
)
@click.option(
    "--split",
    type=click.Choice([split.value for split in Split]),
    default=Split.TEST.value,
    show_default=True,
    help="Dataset split to evaluate",
)
@click.option(
    "--dataset",
    type=click.Choice([name.value for name in DatasetName]),
    help="Dataset (default: the one the checkpoint was trained on)",
)
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), help="Dataset root")
@click.option("--limit", type=int, help="Evaluate the first N images only")
@click.option(
    "--output", "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Results JSON (default: eval-<split>.json next to the checkpoint)",
)
@pass_context
def eval_command(
    ctx: CliContext,
    checkpoint_dir: Path,
    split: str,
    dataset: str | None,
    data_dir: Path | None,
    limit: int | None,
    output: Path | None,
) -> None:
    """Evaluate a checkpoint's classifier on a dataset split.

    Prints top-1 accuracy with four decimals.

    Examples:
        hebbnet eval -c runs/latest/checkpoint
        hebbnet eval -c runs/latest/checkpoint --split train --limit 5000
    """
    try:
        checkpoint = ctx.load_checkpoint(checkpoint_dir)
        if checkpoint.head is None:
            raise StateError(f"Checkpoint {checkpoint_dir} has no classifier head")
        name = DatasetName(dataset) if dataset else ctx.checkpoint_dataset(checkpoint)
        root = data_dir or checkpoint.config.get("dataset", {}).get("root")
        data = ctx.load_split(name, Path(root) if root else None, split, limit)
        architecture = checkpoint.network.architecture
        check_compatible(architecture, data)
        data = normalize(data, checkpoint.stats)

        result = evaluate(checkpoint.network, checkpoint.head, data)
        path = output or checkpoint_dir.parent / f"eval-{split}.json"
        write_json(
            path,
            {
                "checkpoint": str(checkpoint_dir),
                "dataset": name.value,
                "split": split,
                "count": result.count,
                "accuracy": result.accuracy,
                "per_class_accuracy": result.per_class,
            },
        )
        ctx.console.print(f"accuracy {format_accuracy(result.accuracy)}")
        if ctx.verbose:
            ctx.renderer.render_evaluation(result)
    except HebbnetError as e:
        ctx.renderer.print_error(str(e))
        raise SystemExit(e.exit_code) from e
