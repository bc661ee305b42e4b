from .domain import Dataset, DatasetSplit, dataset_stats
from .exceptions import LibSVMParseError
from .parser import (
    BINARY_LABELS,
    COVTYPE_LABELS,
    dataset_name,
    labels_for,
    load_dataset,
    load_dataset_pair,
    parse_libsvm,
    serialize_libsvm,
)
from .synthetic import make_synthetic_classification

__all__ = [
    "BINARY_LABELS",
    "COVTYPE_LABELS",
    "Dataset",
    "DatasetSplit",
    "LibSVMParseError",
    "dataset_name",
    "dataset_stats",
    "labels_for",
    "load_dataset",
    "load_dataset_pair",
    "make_synthetic_classification",
    "parse_libsvm",
    "serialize_libsvm",
]
