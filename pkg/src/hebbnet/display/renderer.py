"""Rich-based display renderer."""

from collections.abc import Sequence

from rich.console import Console
from rich.panel import Panel
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    TextColumn,
    TimeElapsedColumn,
)
from rich.table import Table

from hebbnet.analysis.models import PatchActivation, R1Report
from hebbnet.display.formatters import (
    format_accuracy,
    format_mean_std,
    format_optional,
    format_r1,
    format_radius,
    format_resolutions,
    format_widths,
)
from hebbnet.network.models import ArchitectureSpec
from hebbnet.training.models import (
    ClassifierReport,
    EvaluationResult,
    UnsupervisedReport,
    VariantResult,
)


class DisplayRenderer:
    """Renders run summaries and analysis results to the terminal using Rich."""

    def __init__(self, console: Console | None = None):
        """Initialize renderer.

        Args:
            console: Rich console (creates one if not provided)
        """
        self.console = console or Console()

    def progress(self) -> Progress:
        """A progress display for update steps and epochs."""
        return Progress(
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        )

    def render_architecture(self, architecture: ArchitectureSpec) -> None:
        """Render the layer stack.

        Args:
            architecture: Resolved architecture
        """
        header = Panel(
            f"[bold]{architecture.mode.value.replace('_', ' ').upper()} NETWORK[/bold]\n"
            f"{architecture.input_channels}×{architecture.input_resolution}px input, "
            f"widths {format_widths(architecture.widths)}\n"
            f"resolution {format_resolutions(architecture.resolution_trace())}",
            style="blue",
        )
        self.console.print(header)

        table = Table(title="Layers")
        table.add_column("#", justify="right", style="cyan")
        table.add_column("Width", justify="right")
        table.add_column("Kernel", justify="center")
        table.add_column("Pool", justify="center")
        table.add_column("Activation")
        table.add_column("Mode")
        table.add_column("1/τ", justify="right")
        table.add_column("η", justify="right")

        for index, layer in enumerate(architecture.layers, start=1):
            pool = "-"
            if layer.pool is not None:
                pool = f"{layer.pool.kind.value} {layer.pool.kernel}/{layer.pool.stride}"
            table.add_row(
                str(index),
                str(layer.out_channels),
                f"{layer.conv_kernel}×{layer.conv_kernel}",
                pool,
                f"{layer.activation.kind.value} p={layer.activation.power:g}",
                layer.plasticity.mode.value,
                f"{layer.plasticity.inverse_temperature:g}",
                f"{layer.plasticity.base_lr:g}",
            )
        self.console.print(table)
        for note in architecture.notes:
            self.print_warning(note)

    def render_unsupervised_report(self, report: UnsupervisedReport) -> None:
        if not report.layers:
            self.console.print("[dim]No plasticity updates (random weights)[/dim]")
            return
        table = Table(title=f"Unsupervised Training ({report.total_steps} steps)")
        table.add_column("Layer", justify="right", style="cyan")
        table.add_column("Steps", justify="right")
        table.add_column("Mean radius", justify="right")
        table.add_column("R1 fraction", justify="right")
        for layer in report.layers:
            table.add_row(
                str(layer.layer),
                str(layer.steps),
                format_radius(layer.mean_radius),
                format_r1(layer.r1_fraction),
            )
        self.console.print(table)

    def render_classifier_report(self, report: ClassifierReport) -> None:
        final = report.final
        if final is None:
            return
        self.console.print(
            f"Classifier: {len(report.epochs)} epochs, loss {final.loss:.4f}, "
            f"train {format_accuracy(final.train_accuracy)}, "
            f"val {format_optional(final.val_accuracy)}"
        )

    def render_evaluation(self, result: EvaluationResult, title: str = "Test accuracy") -> None:
        """Render top-1 accuracy and the per-class breakdown."""
        self.console.print(f"[bold]{title}:[/bold] {format_accuracy(result.accuracy)}")
        table = Table(show_header=True, box=None)
        table.add_column("Class", style="dim", justify="right")
        table.add_column("Accuracy", justify="right")
        for label, value in enumerate(result.per_class):
            table.add_row(str(label), format_accuracy(value))
        self.console.print(table)

    def render_probes(self, probes: dict[int, EvaluationResult]) -> None:
        table = Table(title="Linear Probes")
        table.add_column("Depth", justify="right", style="cyan")
        table.add_column("Accuracy", justify="right")
        for depth in sorted(probes):
            table.add_row(str(depth), format_accuracy(probes[depth].accuracy))
        self.console.print(table)

    def render_r1_report(self, report: R1Report) -> None:
        table = Table(title=f"R1 Features (tolerance {report.tolerance:g})")
        table.add_column("Layer", justify="right", style="cyan")
        table.add_column("Neurons", justify="right")
        table.add_column("R1 fraction", justify="right")
        table.add_column("Mean radius", justify="right")
        for layer in report.layers:
            table.add_row(
                str(layer.layer),
                str(layer.neurons),
                format_r1(layer.r1_fraction),
                format_radius(layer.mean_radius),
            )
        self.console.print(table)

    def render_patches(
        self, patches: Sequence[PatchActivation], layer: int, neuron: int
    ) -> None:
        table = Table(title=f"Top patches, layer {layer} neuron {neuron}")
        table.add_column("Rank", justify="right", style="cyan")
        table.add_column("Image", justify="right")
        table.add_column("Position", justify="center")
        table.add_column("Box (y0,x0)-(y1,x1)", justify="center")
        table.add_column("Activation", justify="right")
        for rank, patch in enumerate(patches, start=1):
            box = patch.box
            table.add_row(
                str(rank),
                str(patch.image_index),
                f"({patch.y}, {patch.x})",
                f"({box.y0},{box.x0})-({box.y1},{box.x1})",
                f"{patch.activation:.4f}",
            )
        self.console.print(table)

    def render_benchmark(self, results: Sequence[VariantResult]) -> None:
        """Render mean ± std accuracy and R1 fraction per variant."""
        table = Table(title="Single-layer Benchmark")
        table.add_column("Variant", style="cyan")
        table.add_column("Seeds", justify="right")
        table.add_column("Accuracy", justify="right")
        table.add_column("R1 fraction", justify="right")
        best = max((r.mean_accuracy for r in results), default=None)
        for result in results:
            accuracy = format_mean_std(result.mean_accuracy, result.std_accuracy)
            if best is not None and result.mean_accuracy == best:
                accuracy = f"[bold green]{accuracy}[/bold green]"
            table.add_row(
                result.variant.value,
                str(len(result.seeds)),
                accuracy,
                format_r1(result.mean_r1),
            )
        self.console.print(table)

    def print_success(self, message: str) -> None:
        """Print success message."""
        self.console.print(f"[green]✓[/green] {message}")

    def print_warning(self, message: str) -> None:
        """Print warning message."""
        self.console.print(f"[yellow]⚠[/yellow] {message}")

    def print_error(self, message: str) -> None:
        """Print error message."""
        self.console.print(f"[red]✗[/red] {message}")
