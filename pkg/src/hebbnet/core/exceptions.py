"""Custom exception hierarchy for Hebbnet.

Every error carries an ``exit_code`` so the CLI can classify failures:
config (2), data (3), numeric (4), io (5).
"""


class HebbnetError(Exception):
    """Base exception for all Hebbnet errors."""

    exit_code = 1


class ConfigError(HebbnetError):
    """Configuration or hyperparameter errors."""

    exit_code = 2


class ShapeError(ConfigError):
    """Tensor shapes or geometry that do not fit together."""

    def __init__(self, message: str, **dimensions: object):
        self.dimensions = dimensions
        if dimensions:
            report = ", ".join(f"{key}={value}" for key, value in dimensions.items())
            message = f"{message} ({report})"
        super().__init__(message)


class StateError(HebbnetError):
    """Operation not valid in the object's current state."""

    exit_code = 2


class DataError(HebbnetError):
    """Dataset files missing, malformed or inconsistent."""

    exit_code = 3

    def __init__(self, message: str, path: object | None = None, offset: int | None = None):
        self.path = path
        self.offset = offset
        if path is not None:
            message += f" [{path}"
            message += f" @ byte {offset}]" if offset is not None else "]"
        super().__init__(message)


class NumericError(HebbnetError):
    """Non-finite values appeared during training."""

    exit_code = 4

    def __init__(self, message: str, layer: int | None = None, step: int | None = None):
        self.layer = layer
        self.step = step
        if layer is not None:
            message += f" (layer {layer}"
            message += f", step {step})" if step is not None else ")"
        super().__init__(message)


class CheckpointError(HebbnetError):
    """Checkpoint read/write, version or checksum errors."""

    exit_code = 5


class ExportError(HebbnetError):
    """Artifact export failures."""

    exit_code = 5

    def __init__(self, message: str, path: object | None = None):
        self.path = path
        if path is not None:
            message = f"{message}: {path}"
        super().__init__(message)
