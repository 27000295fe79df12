"""Classifier learning-rate schedule."""

from collections.abc import Sequence

from hebbnet.core.exceptions import ConfigError
from hebbnet.training.models import DEFAULT_MILESTONES


def lr_schedule(
    progress: float, initial_lr: float, milestones: Sequence[float] = DEFAULT_MILESTONES
) -> float:
    """Halve ``initial_lr`` once for every milestone at or below ``progress``.

    Args:
        progress: Fraction of training epochs completed, in [0, 1]
        initial_lr: Rate before the first milestone
        milestones: Increasing fractions in (0, 1)

    Returns:
        Learning rate ``initial_lr * 2 ** -m``
    """
    if not 0.0 <= progress <= 1.0:
        raise ConfigError(f"progress must lie in [0, 1], got {progress}")
    passed = sum(1 for milestone in milestones if milestone <= progress)
    return initial_lr * 2.0**-passed
