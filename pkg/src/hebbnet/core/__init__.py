"""Core utilities and exceptions."""

from hebbnet.core.exceptions import (
    CheckpointError,
    ConfigError,
    DataError,
    ExportError,
    HebbnetError,
    NumericError,
    ShapeError,
    StateError,
)

__all__ = [
    "HebbnetError",
    "ConfigError",
    "ShapeError",
    "StateError",
    "DataError",
    "NumericError",
    "CheckpointError",
    "ExportError",
]
