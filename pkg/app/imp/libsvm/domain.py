from enum import Enum

import numpy as np
import scipy.sparse as sp

from app.core import DatasetError, DatasetStats

# =============================================================================
# ENUMS
# =============================================================================


class DatasetSplit(Enum):
    TRAIN = "train"
    TEST = "test"


# =============================================================================
# DATASET
# =============================================================================


class Dataset:
    """An immutable binary classification dataset.

    ``features`` is an ``n × d`` CSR matrix whose row ``k`` comes from the
    ``k``-th data line of the source; ``labels`` holds 0 or 1 per row.
    """

    def __init__(
        self,
        features: sp.csr_matrix,
        labels: np.ndarray,
        name: str,
        split: DatasetSplit = DatasetSplit.TRAIN,
    ):
        """
        :raise DatasetError: If the dataset is empty, the shapes disagree or
            a label is not 0 or 1.
        """
        features = sp.csr_matrix(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
        n, d = features.shape
        if n == 0 or d == 0:
            raise DatasetError(message='Dataset "%s" is empty.' % name)
        if labels.shape != (n,):
            raise DatasetError(
                message='Dataset "%s" has %d rows but %d labels.'
                % (name, n, labels.size),
            )
        if not np.all((labels == 0.0) | (labels == 1.0)):
            raise DatasetError(
                message='Dataset "%s" has labels outside {0, 1}.' % name,
            )
        features.sort_indices()
        features.data.flags.writeable = False
        labels.flags.writeable = False
        self._features: sp.csr_matrix = features
        self._labels: np.ndarray = labels
        self._name: str = name
        self._split: DatasetSplit = split

    def __repr__(self) -> str:
        return "Dataset(name=%s, split=%s, n=%d, d=%d)" % (
            self._name,
            self._split.value,
            self.n,
            self.d,
        )

    @property
    def features(self) -> sp.csr_matrix:
        return self._features

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def name(self) -> str:
        return self._name

    @property
    def split(self) -> DatasetSplit:
        return self._split

    @property
    def n(self) -> int:
        return int(self._features.shape[0])

    @property
    def d(self) -> int:
        return int(self._features.shape[1])

    def with_dimension(self, d: int) -> "Dataset":
        """Return a copy padded with empty trailing feature columns.

        :raise DatasetError: If ``d`` is smaller than the current dimension.
        """
        if d < self.d:
            raise DatasetError(
                message="Cannot shrink %r to dimension %d." % (self, d),
            )
        if d == self.d:
            return self
        features = sp.csr_matrix(
            (
                self._features.data.copy(),
                self._features.indices.copy(),
                self._features.indptr.copy(),
            ),
            shape=(self.n, d),
        )
        return Dataset(features, self._labels.copy(), self._name, self._split)


def dataset_stats(dataset: Dataset) -> DatasetStats:
    """Return the exact size statistics of a dataset.

    ``label_balance`` is the fraction of rows labelled 1.
    """
    return DatasetStats(
        n=dataset.n,
        d=dataset.d,
        nnz=int(dataset.features.nnz),
        label_balance=float(np.mean(dataset.labels)),
    )
