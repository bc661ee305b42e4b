from collections.abc import Sequence

import numpy as np

from app.core import (
    ContractViolationError,
    FiniteSumProblem,
    SymmetricOperator,
)
from app.core.operator import DENSE_DIMENSION_LIMIT


class QuadraticProblem(FiniteSumProblem):
    """``f_i(x) = ½‖x − c_i‖²``, minimized at the centroid of the centers."""

    def __init__(self, centers: np.ndarray):
        self._centers: np.ndarray = centers

    @property
    def centers(self) -> np.ndarray:
        return self._centers

    @property
    def n(self) -> int:
        return int(self._centers.shape[0])

    @property
    def d(self) -> int:
        return int(self._centers.shape[1])

    def batch_values(self, x: np.ndarray, indices: np.ndarray) -> np.ndarray:
        diff = x[None, :] - self._centers[indices]
        return 0.5 * np.sum(diff * diff, axis=1)

    def batch_grads(self, x: np.ndarray, indices: np.ndarray) -> np.ndarray:
        return x[None, :] - self._centers[indices]

    def batch_hvps(
        self,
        x: np.ndarray,
        v: np.ndarray,
        indices: np.ndarray,
    ) -> np.ndarray:
        return np.tile(v, (len(indices), 1))

    def mean_grad(self, x: np.ndarray, indices: np.ndarray) -> np.ndarray:
        return x - self._centers[indices].mean(axis=0)

    def hessian_operator(
        self,
        x: np.ndarray,
        indices: np.ndarray,
    ) -> SymmetricOperator:
        dense = np.eye(self.d) if self.d <= DENSE_DIMENSION_LIMIT else None
        return SymmetricOperator(matvec=np.copy, d=self.d, dense=dense)

    def per_sample_hess_norms(
        self,
        x: np.ndarray,
        indices: np.ndarray,
    ) -> np.ndarray:
        return np.ones(len(indices))


def make_quadratic_problem(
    centers: Sequence[Sequence[float]] | np.ndarray,
) -> QuadraticProblem:
    """Build the quadratic finite sum with the given centers.

    :raise ContractViolationError: If there are no centers or they do not
        share one dimension.
    """
    if len(centers) == 0:
        raise ContractViolationError(message="At least one center is needed.")
    try:
        array = np.asarray(centers, dtype=np.float64)
    except ValueError:
        raise ContractViolationError(
            message="All centers must share the same dimension.",
        ) from None
    if array.ndim != 2 or array.shape[1] == 0:
        raise ContractViolationError(
            message="All centers must share the same positive dimension.",
        )
    return QuadraticProblem(array)
