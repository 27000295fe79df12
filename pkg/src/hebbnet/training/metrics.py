"""Metrics stream persisted as CSV."""

import csv
from pathlib import Path
from types import TracebackType
from typing import Any, TextIO

from hebbnet.core.exceptions import ExportError
from hebbnet.training.models import MetricsRecord

METRICS_FIELDS = [
    "step",
    "layer",
    "mean_radius",
    "r1_fraction",
    "lr",
    "loss",
    "train_acc",
    "val_acc",
]


def _cell(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.8g}"


def metrics_row(record: MetricsRecord) -> list[str]:
    return [_cell(getattr(record, name)) for name in METRICS_FIELDS]


class MetricsWriter:
    """Append MetricsRecords to a CSV file as they are produced.

    Usable as a context manager; the header is written on open.
    """

    def __init__(self, path: Path):
        self.path = path
        self._handle: TextIO | None = None
        self._writer: Any = None
        self.records: list[MetricsRecord] = []

    def open(self) -> "MetricsWriter":
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = open(self.path, "w", encoding="utf-8", newline="")
        except OSError as e:
            raise ExportError(f"Cannot write metrics: {e.strerror}", path=self.path) from e
        self._writer = csv.writer(self._handle, lineterminator="\n")
        self._writer.writerow(METRICS_FIELDS)
        return self

    def write(self, record: MetricsRecord) -> None:
        if self._writer is None or self._handle is None:
            self.open()
        assert self._writer is not None and self._handle is not None
        self._writer.writerow(metrics_row(record))
        self._handle.flush()
        self.records.append(record)

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
            self._writer = None

    def __enter__(self) -> "MetricsWriter":
        return self.open()

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()


def read_metrics(path: Path) -> list[MetricsRecord]:
    """Parse a metrics CSV written by :class:`MetricsWriter`.

    Raises:
        ExportError: If the file is missing or its header is wrong
    """
    try:
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != METRICS_FIELDS:
                raise ExportError("Unexpected metrics header", path=path)
            return [
                MetricsRecord(**{key: value for key, value in row.items() if value != ""})
                for row in reader
            ]
    except OSError as e:
        raise ExportError(f"Cannot read metrics: {e.strerror}", path=path) from e
