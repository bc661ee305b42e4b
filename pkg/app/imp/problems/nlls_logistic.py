import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from app.core import (
    ContractViolationError,
    FiniteSumProblem,
    SymmetricOperator,
    check_point,
)
from app.core.operator import DENSE_DIMENSION_LIMIT

from ..libsvm import Dataset

# =============================================================================
# CONSTANTS
# =============================================================================

DEFAULT_REG: float = 0.5


# =============================================================================
# PROBLEM
# =============================================================================


class NllsLogisticProblem(FiniteSumProblem):
    """Nonlinear least squares with a sigmoid link.

    ``f_i(x) = (y_i − φ(⟨a_i, x⟩))² + reg·‖x‖²`` with ``φ(z) = 1/(1+e^{−z})``
    and ``reg = 1/2``. The regularizer sits inside every ``f_i`` so that the
    mean over any subset is an unbiased estimate of the full objective.
    """

    def __init__(
        self,
        features: sp.spmatrix,
        labels: np.ndarray,
        reg: float = DEFAULT_REG,
    ):
        features = sp.csr_matrix(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
        if labels.shape != (features.shape[0],):
            raise ContractViolationError(
                message="The labels must match the rows of the features.",
            )
        if reg < 0.0:
            raise ContractViolationError(message='"reg" cannot be negative.')
        self._features: sp.csr_matrix = features
        self._labels: np.ndarray = labels
        self._reg: float = float(reg)

    @classmethod
    def from_dataset(
        cls,
        dataset: Dataset,
        reg: float = DEFAULT_REG,
    ) -> "NllsLogisticProblem":
        return cls(dataset.features, dataset.labels, reg=reg)

    @property
    def n(self) -> int:
        return int(self._features.shape[0])

    @property
    def d(self) -> int:
        return int(self._features.shape[1])

    @property
    def reg(self) -> float:
        return self._reg

    # -------------------------------------------------------------------------
    # Link derivatives
    # -------------------------------------------------------------------------

    def _rows(self, indices: np.ndarray) -> tuple[sp.csr_matrix, np.ndarray]:
        return self._features[indices], self._labels[indices]

    def _residual_terms(
        self,
        x: np.ndarray,
        indices: np.ndarray,
    ) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray]:
        """Return the rows, ``2(φ − y)φ′`` and the curvature weights
        ``2φ′² + 2(φ − y)φ″`` of the given samples."""
        rows, labels = self._rows(indices)
        phi = expit(rows @ x)
        dphi = phi * (1.0 - phi)
        ddphi = dphi * (1.0 - 2.0 * phi)
        slope = 2.0 * (phi - labels) * dphi
        weights = 2.0 * dphi * dphi + 2.0 * (phi - labels) * ddphi
        return rows, slope, weights

    # -------------------------------------------------------------------------
    # Batched oracles
    # -------------------------------------------------------------------------

    def batch_values(self, x: np.ndarray, indices: np.ndarray) -> np.ndarray:
        rows, labels = self._rows(indices)
        residuals = labels - expit(rows @ x)
        return residuals * residuals + self._reg * float(x @ x)

    def batch_grads(self, x: np.ndarray, indices: np.ndarray) -> np.ndarray:
        rows, slope, _ = self._residual_terms(x, indices)
        return (
            rows.multiply(slope[:, None]).toarray()
            + 2.0 * self._reg * x[None, :]
        )

    def batch_hvps(
        self,
        x: np.ndarray,
        v: np.ndarray,
        indices: np.ndarray,
    ) -> np.ndarray:
        rows, _, weights = self._residual_terms(x, indices)
        scale = weights * (rows @ v)
        return (
            rows.multiply(scale[:, None]).toarray()
            + 2.0 * self._reg * v[None, :]
        )

    def mean_grad(self, x: np.ndarray, indices: np.ndarray) -> np.ndarray:
        rows, slope, _ = self._residual_terms(x, indices)
        return rows.T @ slope / len(indices) + 2.0 * self._reg * x

    def hessian_operator(
        self,
        x: np.ndarray,
        indices: np.ndarray,
    ) -> SymmetricOperator:
        """Return ``B = (1/|S|) Σ w_i a_i a_iᵀ + 2·reg·I``.

        The weights ``w_i`` are computed once here. For ``d`` within the
        dense limit the matrix is also assembled so that its norm is exact.
        """
        rows, _, weights = self._residual_terms(x, indices)
        m = len(indices)
        shift = 2.0 * self._reg
        rows_t = rows.T.tocsr()

        def matvec(v: np.ndarray) -> np.ndarray:
            return rows_t @ (weights * (rows @ v)) / m + shift * v

        dense = None
        if self.d <= DENSE_DIMENSION_LIMIT:
            weighted = rows.multiply(weights[:, None]).tocsr()
            dense = np.asarray((rows_t @ weighted).toarray()) / m
            dense = 0.5 * (dense + dense.T) + shift * np.eye(self.d)
        return SymmetricOperator(matvec=matvec, d=self.d, dense=dense)

    def per_sample_hess_norms(
        self,
        x: np.ndarray,
        indices: np.ndarray,
    ) -> np.ndarray:
        """Return ``‖∇²f_i(x)‖`` exactly from the rank-one structure.

        ``∇²f_i = w_i a_i a_iᵀ + 2·reg·I`` has the eigenvalue
        ``w_i‖a_i‖² + 2·reg`` along ``a_i`` and ``2·reg`` elsewhere.
        """
        rows, _, weights = self._residual_terms(x, indices)
        row_norms_sq = np.asarray(rows.multiply(rows).sum(axis=1)).ravel()
        shift = 2.0 * self._reg
        along = np.abs(weights * row_norms_sq + shift)
        if self.d == 1:
            return along
        return np.maximum(along, shift)

    # -------------------------------------------------------------------------
    # Metrics
    # -------------------------------------------------------------------------

    @staticmethod
    def misclassification_error(
        x: np.ndarray,
        features: sp.spmatrix,
        labels: np.ndarray,
    ) -> float:
        """Return the 0/1 error of predicting 1 when ``φ(⟨a, x⟩) ≥ 1/2``."""
        x = check_point(x, features.shape[1])
        predictions = (expit(features @ x) >= 0.5).astype(np.float64)
        return float(np.mean(predictions != np.asarray(labels)))
