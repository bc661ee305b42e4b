import gzip
from collections.abc import Iterable, Iterator, Mapping
from logging import getLogger
from pathlib import Path
from typing import BinaryIO, Final, TextIO

import numpy as np
import scipy.sparse as sp

from app.core import DatasetError

from .domain import Dataset, DatasetSplit
from .exceptions import LibSVMParseError

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)

BINARY_LABELS: Final[Mapping[float, float]] = {-1.0: 0.0, 0.0: 0.0, 1.0: 1.0}

COVTYPE_LABELS: Final[Mapping[float, float]] = {1.0: 0.0, 2.0: 1.0}


# =============================================================================
# HELPERS
# =============================================================================


def labels_for(name: str) -> Mapping[float, float]:
    """Return the label mapping used for a dataset file name."""
    return COVTYPE_LABELS if "covtype" in name.lower() else BINARY_LABELS


def _parse_label(
    token: str,
    label_map: Mapping[float, float],
    line_number: int,
) -> float:
    try:
        raw = float(token)
    except ValueError:
        raise LibSVMParseError(
            line_number,
            'invalid label "%s".' % token,
        ) from None
    if raw not in label_map:
        raise LibSVMParseError(
            line_number,
            'label "%s" is not one of %s.'
            % (token, sorted(label_map)),
        )
    return label_map[raw]


def _parse_feature(
    token: str,
    previous: int,
    expected_d: int | None,
    line_number: int,
) -> tuple[int, float]:
    index_text, sep, value_text = token.partition(":")
    try:
        if not sep:
            raise ValueError
        index = int(index_text)
        value = float(value_text)
    except ValueError:
        raise LibSVMParseError(
            line_number,
            'malformed feature "%s".' % token,
        ) from None
    if index < 1:
        raise LibSVMParseError(line_number, "feature indices start at 1.")
    if index <= previous:
        raise LibSVMParseError(
            line_number,
            "feature indices must be strictly increasing.",
        )
    if expected_d is not None and index > expected_d:
        raise LibSVMParseError(
            line_number,
            "feature index %d exceeds the dimension %d." % (index, expected_d),
        )
    return index, value


# =============================================================================
# PARSING AND SERIALIZATION
# =============================================================================


def parse_libsvm(
    stream: Iterable[str],
    expected_d: int | None = None,
    name: str = "dataset",
    split: DatasetSplit = DatasetSplit.TRAIN,
    label_map: Mapping[float, float] | None = None,
) -> Dataset:
    """Parse LIBSVM text lines ``label idx:val idx:val ...``.

    Blank lines and ``#`` comments are skipped; row ``k`` of the result is
    the ``k``-th data line. Labels are mapped through ``label_map``
    (``-1 → 0``, ``0 → 0``, ``+1 → 1`` by default) and feature indices are
    stored zero-based.

    :param stream: The lines to parse.
    :param expected_d: The dimension; the largest index seen when omitted.
    :param name: The dataset name.
    :param split: Whether these are training or test rows.
    :param label_map: The raw-to-binary label mapping.

    :return: The parsed dataset.

    :raise LibSVMParseError: On a malformed token, a non-increasing or out
        of range index or an unknown label.
    :raise DatasetError: If there are no data lines.
    """
    label_map = BINARY_LABELS if label_map is None else label_map
    indptr: list[int] = [0]
    indices: list[int] = []
    data: list[float] = []
    labels: list[float] = []
    max_index = 0
    for line_number, line in enumerate(stream, start=1):
        tokens = line.split("#", 1)[0].split()
        if not tokens:
            continue
        labels.append(_parse_label(tokens[0], label_map, line_number))
        previous = 0
        for token in tokens[1:]:
            previous, value = _parse_feature(
                token,
                previous,
                expected_d,
                line_number,
            )
            indices.append(previous - 1)
            data.append(value)
        max_index = max(max_index, previous)
        indptr.append(len(indices))

    if not labels:
        raise DatasetError(message='Dataset "%s" has no data lines.' % name)
    d = expected_d if expected_d is not None else max_index
    features = sp.csr_matrix(
        (
            np.asarray(data, dtype=np.float64),
            np.asarray(indices, dtype=np.int32),
            np.asarray(indptr, dtype=np.int64),
        ),
        shape=(len(labels), d),
    )
    _LOGGER.debug(
        'Parsed %d rows, %d features and %d entries for "%s".',
        len(labels),
        d,
        len(data),
        name,
    )
    return Dataset(features, np.asarray(labels), name, split)


def serialize_libsvm(
    dataset: Dataset,
    stream: TextIO,
    label_map: Mapping[float, float] | None = None,
) -> None:
    """Write a dataset as LIBSVM text that parses back to the same matrix.

    Labels are written through the inverse of ``label_map`` (``0 → -1``,
    ``1 → +1`` by default) and values with their shortest exact repr.
    """
    inverse = {0.0: "-1", 1.0: "+1"}
    if label_map is not None:
        inverse = {_v: "%g" % _k for _k, _v in label_map.items()}
    features = dataset.features
    for row in range(dataset.n):
        start, end = features.indptr[row], features.indptr[row + 1]
        entries = " ".join(
            "%d:%r" % (_j + 1, float(_v))
            for _j, _v in zip(
                features.indices[start:end],
                features.data[start:end],
                strict=True,
            )
        )
        label = inverse[float(dataset.labels[row])]
        stream.write("%s %s\n" % (label, entries) if entries else label + "\n")


# =============================================================================
# FILES
# =============================================================================


def _open_binary(path: Path) -> BinaryIO:
    if path.suffix == ".gz":
        return gzip.open(path, "rb")  # type: ignore
    return path.open("rb")


def _decoded_lines(stream: Iterable[bytes]) -> Iterator[str]:
    """Decode the lines of a file, naming the first undecodable one."""
    for line_number, raw in enumerate(stream, start=1):
        try:
            yield raw.decode("utf-8")
        except UnicodeDecodeError as exp:
            raise LibSVMParseError(
                line_number,
                "byte 0x%02x at column %d is not valid UTF-8."
                % (raw[exp.start], exp.start + 1),
            ) from exp


def dataset_name(path: Path) -> str:
    """Return a dataset name from a file name, e.g. ``a9a`` for ``a9a.t``."""
    name = path.name
    for suffix in (".gz", ".t", ".txt", ".libsvm", ".svm"):
        name = name.removesuffix(suffix)
    return name


def load_dataset(
    path: str | Path,
    expected_d: int | None = None,
    split: DatasetSplit = DatasetSplit.TRAIN,
) -> Dataset:
    """Read a LIBSVM file, decompressing it when it ends in ``.gz``.

    :raise DatasetError: If the file cannot be read or parsed.
    """
    path = Path(path)
    name = dataset_name(path)
    try:
        with _open_binary(path) as stream:
            dataset = parse_libsvm(
                _decoded_lines(stream),
                expected_d=expected_d,
                name=name,
                split=split,
                label_map=labels_for(path.name),
            )
    except (OSError, EOFError) as exp:
        raise DatasetError(
            message='Could not read dataset "%s": %s' % (path, exp),
        ) from exp
    _LOGGER.info("Loaded %r from %s.", dataset, path)
    return dataset


def load_dataset_pair(
    train_path: str | Path,
    test_path: str | Path | None = None,
) -> tuple[Dataset, Dataset | None]:
    """Read a training file and an optional test file.

    Both results share the larger of the two dimensions, since test rows can
    reference features that never occur in training.
    """
    train = load_dataset(train_path)
    if test_path is None:
        return train, None
    test = load_dataset(test_path, split=DatasetSplit.TEST)
    d = max(train.d, test.d)
    return train.with_dimension(d), test.with_dimension(d)
