"""Dataset ingestion, normalization and batching."""

from hebbnet.data.loaders import (
    DATA_DIR_ENV,
    load_cifar10,
    load_dataset,
    load_mnist,
    load_stl10,
    parse_cifar_records,
    parse_idx_images,
    parse_idx_labels,
    resolve_data_dir,
)
from hebbnet.data.models import Dataset, DatasetName, NormalizationStats, Split
from hebbnet.data.transforms import (
    AUGMENT_STREAM,
    augment,
    batches,
    compute_stats,
    hflip,
    normalize,
    num_batches,
    split_validation,
)

__all__ = [
    "AUGMENT_STREAM",
    "DATA_DIR_ENV",
    "Dataset",
    "DatasetName",
    "NormalizationStats",
    "Split",
    "augment",
    "batches",
    "compute_stats",
    "hflip",
    "load_cifar10",
    "load_dataset",
    "load_mnist",
    "load_stl10",
    "normalize",
    "num_batches",
    "parse_cifar_records",
    "parse_idx_images",
    "parse_idx_labels",
    "resolve_data_dir",
    "split_validation",
]
