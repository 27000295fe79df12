"""Checkpoint directories: a JSON manifest plus raw little-endian blobs.

Layout::

    manifest.json
    layer1.weights   K x D float32, row-major
    layer1.bn        2 x C float32 (running mean, running variance)
    ...
    head.weights     classes x features float64 (optional)
    head.bias        classes float64 (optional)

Every blob is listed in the manifest with its shape, dtype and SHA-256.
"""

import io
import json
import logging
import tarfile
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, ValidationError

from hebbnet import __version__
from hebbnet.core.exceptions import CheckpointError, HebbnetError
from hebbnet.core.utils import bytes_hash, content_hash
from hebbnet.data.models import NormalizationStats
from hebbnet.network.layer import HebbianNetwork, SoftHebbLayer
from hebbnet.network.models import ArchitectureSpec
from hebbnet.plasticity.bank import NeuronBank
from hebbnet.tensor.models import BatchNormState
from hebbnet.training.classifier import ClassifierHead

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST = "manifest.json"
WEIGHT_DTYPE = "<f4"
HEAD_DTYPE = "<f8"


class BlobEntry(BaseModel):
    """One raw array file."""

    file: str
    shape: list[int]
    dtype: str
    sha256: str


class LayerEntry(BaseModel):
    weights: BlobEntry
    bn: BlobEntry
    tracked_batches: int = Field(ge=0)
    frozen: bool = False


class HeadEntry(BaseModel):
    weights: BlobEntry
    bias: BlobEntry
    dropout: float = Field(ge=0, lt=1)


class CheckpointManifest(BaseModel):
    """Contents of ``manifest.json``."""

    format_version: int
    hebbnet_version: str = __version__
    architecture: ArchitectureSpec
    seed: int
    config: dict[str, Any] = Field(default_factory=dict)
    config_hash: str = ""
    normalization: NormalizationStats | None = None
    notes: list[str] = Field(default_factory=list)
    layers: list[LayerEntry]
    head: HeadEntry | None = None


@dataclass
class Checkpoint:
    """A trained extractor with everything needed to reuse it."""

    network: HebbianNetwork
    head: ClassifierHead | None = None
    stats: NormalizationStats | None = None
    config: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.network.seed


def _blob(name: str, array: npt.NDArray[Any], dtype: str) -> tuple[BlobEntry, bytes]:
    data = np.ascontiguousarray(array, dtype=np.dtype(dtype)).tobytes()
    entry = BlobEntry(file=name, shape=list(array.shape), dtype=dtype, sha256=bytes_hash(data))
    return entry, data


def encode_checkpoint(checkpoint: Checkpoint) -> dict[str, bytes]:
    """All checkpoint files by name, manifest included."""
    network = checkpoint.network
    files: dict[str, bytes] = {}
    layers = []
    for index, layer in enumerate(network.layers, start=1):
        weights, weight_bytes = _blob(f"layer{index}.weights", layer.bank.weights, WEIGHT_DTYPE)
        stats = np.stack([layer.bn.running_mean, layer.bn.running_var])
        bn, bn_bytes = _blob(f"layer{index}.bn", stats, WEIGHT_DTYPE)
        files[weights.file] = weight_bytes
        files[bn.file] = bn_bytes
        layers.append(
            LayerEntry(
                weights=weights,
                bn=bn,
                tracked_batches=layer.bn.tracked_batches,
                frozen=layer.frozen,
            )
        )

    head = None
    if checkpoint.head is not None:
        head_weights, weight_bytes = _blob("head.weights", checkpoint.head.weights, HEAD_DTYPE)
        head_bias, bias_bytes = _blob("head.bias", checkpoint.head.bias, HEAD_DTYPE)
        files[head_weights.file] = weight_bytes
        files[head_bias.file] = bias_bytes
        head = HeadEntry(weights=head_weights, bias=head_bias, dropout=checkpoint.head.dropout)

    manifest = CheckpointManifest(
        format_version=FORMAT_VERSION,
        architecture=network.architecture,
        seed=network.seed,
        config=checkpoint.config,
        config_hash=content_hash(checkpoint.config) if checkpoint.config else "",
        normalization=checkpoint.stats,
        notes=checkpoint.notes or network.notes or network.architecture.notes,
        layers=layers,
        head=head,
    )
    files[MANIFEST] = (
        json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
    ).encode("utf-8")
    return files


def _read_blob(files: Mapping[str, bytes], entry: BlobEntry) -> npt.NDArray[Any]:
    if entry.file not in files:
        raise CheckpointError(f"Checkpoint blob missing: {entry.file}")
    data = files[entry.file]
    dtype = np.dtype(entry.dtype)
    expected = int(np.prod(entry.shape)) * dtype.itemsize
    if len(data) != expected:
        raise CheckpointError(
            f"Blob {entry.file} has {len(data)} bytes, expected {expected} for shape {entry.shape}"
        )
    if bytes_hash(data) != entry.sha256:
        raise CheckpointError(f"Checksum mismatch in {entry.file}")
    return np.frombuffer(data, dtype=dtype).reshape(entry.shape)


def parse_manifest(raw: bytes) -> CheckpointManifest:
    try:
        payload = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CheckpointError(f"Corrupt manifest: {e}") from e
    version = payload.get("format_version") if isinstance(payload, dict) else None
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"Unsupported checkpoint format version {version} (expected {FORMAT_VERSION})"
        )
    try:
        return CheckpointManifest.model_validate(payload)
    except ValidationError as e:
        raise CheckpointError(f"Invalid manifest: {e}") from e


def decode_checkpoint(files: Mapping[str, bytes]) -> Checkpoint:
    """Rebuild a checkpoint from its files.

    Every blob is verified before any object is constructed.

    Raises:
        CheckpointError: On a missing file, version, size or checksum mismatch
    """
    if MANIFEST not in files:
        raise CheckpointError(f"Checkpoint has no {MANIFEST}")
    manifest = parse_manifest(files[MANIFEST])
    specs = manifest.architecture.layers
    if len(manifest.layers) != len(specs):
        raise CheckpointError(
            f"Manifest lists {len(manifest.layers)} layers, architecture has {len(specs)}"
        )

    arrays = []
    for index, (entry, spec) in enumerate(zip(manifest.layers, specs, strict=True), start=1):
        weights = _read_blob(files, entry.weights)
        stats = _read_blob(files, entry.bn)
        if weights.shape != (spec.out_channels, spec.synapses):
            raise CheckpointError(
                f"Layer {index} weights {weights.shape} do not match "
                f"({spec.out_channels}, {spec.synapses})"
            )
        if stats.shape != (2, spec.in_channels):
            raise CheckpointError(f"Layer {index} BatchNorm stats have shape {stats.shape}")
        arrays.append((weights, stats))
    head_arrays = None
    if manifest.head is not None:
        head_arrays = (
            _read_blob(files, manifest.head.weights),
            _read_blob(files, manifest.head.bias),
        )

    try:
        layers = []
        for entry, spec, (weights, stats) in zip(manifest.layers, specs, arrays, strict=True):
            bn = BatchNormState(
                num_channels=spec.in_channels,
                eps=spec.bn_eps,
                momentum=spec.bn_momentum,
                running_mean=stats[0].astype(np.float32),
                running_var=stats[1].astype(np.float32),
                tracked_batches=entry.tracked_batches,
            )
            bank = NeuronBank(weights=weights.astype(np.float32), geometry=spec.geometry)
            layers.append(SoftHebbLayer(spec=spec, bank=bank, bn=bn, frozen=entry.frozen))
        head = None
        if head_arrays is not None and manifest.head is not None:
            head = ClassifierHead(
                head_arrays[0].astype(np.float64),
                head_arrays[1].astype(np.float64),
                manifest.head.dropout,
            )
    except HebbnetError as e:
        raise CheckpointError(f"Inconsistent checkpoint: {e}") from e

    network = HebbianNetwork(
        architecture=manifest.architecture,
        layers=layers,
        seed=manifest.seed,
        notes=list(manifest.notes),
    )
    return Checkpoint(
        network=network,
        head=head,
        stats=manifest.normalization,
        config=manifest.config,
        notes=list(manifest.notes),
    )


def save_checkpoint(checkpoint: Checkpoint, path: Path) -> Path:
    """Write a checkpoint directory.

    Raises:
        CheckpointError: If the directory cannot be written
    """
    files = encode_checkpoint(checkpoint)
    try:
        path.mkdir(parents=True, exist_ok=True)
        for name, data in files.items():
            (path / name).write_bytes(data)
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint {path}: {e.strerror}") from e
    logger.info(f"Saved checkpoint with {checkpoint.network.depth} layers to {path}")
    return path


def load_checkpoint(path: Path) -> Checkpoint:
    """Read a checkpoint directory written by :func:`save_checkpoint`.

    Raises:
        CheckpointError: If files are missing or fail verification
    """
    manifest_path = path / MANIFEST
    try:
        raw = manifest_path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e.strerror}") from e
    manifest = parse_manifest(raw)
    names = [name for layer in manifest.layers for name in (layer.weights.file, layer.bn.file)]
    if manifest.head is not None:
        names += [manifest.head.weights.file, manifest.head.bias.file]

    files = {MANIFEST: raw}
    for name in names:
        try:
            files[name] = (path / name).read_bytes()
        except FileNotFoundError:
            continue
        except OSError as e:
            raise CheckpointError(f"Cannot read {name}: {e.strerror}") from e
    checkpoint = decode_checkpoint(files)
    logger.debug(f"Loaded checkpoint from {path} (seed {checkpoint.seed})")
    return checkpoint


def to_bytes(checkpoint: Checkpoint) -> bytes:
    """The checkpoint directory as an uncompressed tar archive.

    Members are sorted and carry zero timestamps, so equal checkpoints give
    equal bytes.
    """
    buffer = io.BytesIO()
    with tarfile.open(fileobj=buffer, mode="w", format=tarfile.USTAR_FORMAT) as archive:
        for name, data in sorted(encode_checkpoint(checkpoint).items()):
            info = tarfile.TarInfo(name)
            info.size = len(data)
            info.mtime = 0
            info.mode = 0o644
            archive.addfile(info, io.BytesIO(data))
    return buffer.getvalue()


def from_bytes(data: bytes) -> Checkpoint:
    """Inverse of :func:`to_bytes`.

    Raises:
        CheckpointError: If the archive is unreadable or fails verification
    """
    files: dict[str, bytes] = {}
    try:
        with tarfile.open(fileobj=io.BytesIO(data), mode="r:") as archive:
            for member in archive.getmembers():
                if not member.isfile():
                    continue
                handle = archive.extractfile(member)
                if handle is not None:
                    files[member.name] = handle.read()
    except tarfile.TarError as e:
        raise CheckpointError(f"Corrupt checkpoint archive: {e}") from e
    return decode_checkpoint(files)
