"""Common utilities."""

import hashlib
import json
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import Any, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def make_rng(seed: int, *streams: int) -> np.random.Generator:
    """Create a seeded generator, optionally keyed by extra stream ids.

    Args:
        seed: Base seed
        *streams: Extra integers (epoch, layer, ...) that select an
            independent stream derived from the same seed

    Returns:
        numpy Generator
    """
    return np.random.default_rng([seed, *streams])


def chunk_ranges(total: int, chunks: int) -> list[tuple[int, int]]:
    """Split ``range(total)`` into at most ``chunks`` contiguous slices.

    The split depends only on ``total`` and ``chunks``.
    """
    chunks = max(1, min(chunks, total)) if total else 1
    bounds = np.linspace(0, total, chunks + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Map ``fn`` over items, possibly in a thread pool; results keep input order.

    numpy releases the GIL inside matrix products, so threads give real
    parallelism for the patch kernels.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def content_hash(payload: Any) -> str:
    """SHA-256 of the canonical JSON form of ``payload``."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def bytes_hash(data: bytes) -> str:
    """SHA-256 hex digest of raw bytes."""
    return hashlib.sha256(data).hexdigest()


def utc_now() -> datetime:
    """Get current UTC time as timezone-aware datetime."""
    return datetime.now(timezone.utc)
