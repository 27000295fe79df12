"""Formatting utilities for display."""

from collections.abc import Sequence


def format_accuracy(accuracy: float) -> str:
    """Top-1 accuracy as a 4-decimal fraction, e.g. ``0.7110``."""
    return f"{accuracy:.4f}"


def format_mean_std(mean: float, std: float) -> str:
    """Accuracy fractions as ``71.10 ± 0.06%``."""
    return f"{100.0 * mean:.2f} ± {100.0 * std:.2f}%"


def get_r1_color(fraction: float) -> str:
    """Rich color for an R1 fraction.

    Mixed populations are the healthy regime; all-converged or
    none-converged layers are flagged.

    Args:
        fraction: Share of neurons on the unit sphere

    Returns:
        Rich color name
    """
    if fraction >= 0.95:
        return "yellow"
    elif fraction <= 0.05:
        return "orange1"
    else:
        return "green"


def format_r1(fraction: float) -> str:
    color = get_r1_color(fraction)
    return f"[{color}]{fraction:.3f}[/{color}]"


def format_radius(radius: float) -> str:
    return f"{radius:.3f}"


def format_widths(widths: Sequence[int]) -> str:
    return " → ".join(str(width) for width in widths)


def format_resolutions(resolutions: Sequence[int]) -> str:
    return " → ".join(f"{size}px" for size in resolutions)


def format_optional(value: float | None, spec: str = ".4f") -> str:
    return "-" if value is None else format(value, spec)
