"""Run configuration and checkpoint storage."""

from hebbnet.storage.checkpoint import (
    FORMAT_VERSION,
    Checkpoint,
    CheckpointManifest,
    decode_checkpoint,
    encode_checkpoint,
    from_bytes,
    load_checkpoint,
    save_checkpoint,
    to_bytes,
)
from hebbnet.storage.config import (
    AnalysisDefaults,
    ArchitectureConfig,
    ConfigLoader,
    DatasetConfig,
    RunConfig,
    available_presets,
    dumps_config,
    write_config,
)

__all__ = [
    "FORMAT_VERSION",
    "AnalysisDefaults",
    "ArchitectureConfig",
    "Checkpoint",
    "CheckpointManifest",
    "ConfigLoader",
    "DatasetConfig",
    "RunConfig",
    "available_presets",
    "decode_checkpoint",
    "dumps_config",
    "encode_checkpoint",
    "from_bytes",
    "load_checkpoint",
    "save_checkpoint",
    "to_bytes",
    "write_config",
]
