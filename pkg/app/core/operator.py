from collections.abc import Callable
from logging import getLogger

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .exceptions import ContractViolationError

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)

DENSE_DIMENSION_LIMIT: int = 512

POWER_ITERATION_STEPS: int = 20


# =============================================================================
# OPERATOR
# =============================================================================


class SymmetricOperator(LinearOperator):
    """A symmetric ``d × d`` operator that counts its applications.

    Wraps either a Hessian-vector-product callable or a dense symmetric
    matrix. Every call of :meth:`matvec` (including those made by
    :meth:`norm_estimate`) increments :attr:`apply_count`, which the inner
    solvers report as the ``gamma`` of an iteration.
    """

    def __init__(
        self,
        matvec: Callable[[np.ndarray], np.ndarray],
        d: int,
        dense: np.ndarray | None = None,
    ):
        super().__init__(dtype=np.float64, shape=(d, d))
        self._fn: Callable[[np.ndarray], np.ndarray] = matvec
        self._dense: np.ndarray | None = dense
        self.apply_count: int = 0

    @classmethod
    def from_dense(cls, matrix: np.ndarray) -> "SymmetricOperator":
        """Wrap a dense symmetric matrix.

        :raise ContractViolationError: If the matrix is not square or not
            symmetric to ``1e-10`` relative.
        """
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ContractViolationError(
                message="A symmetric operator needs a square matrix.",
            )
        scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-10 * scale):
            raise ContractViolationError(
                message="The matrix is not symmetric.",
            )
        return cls(matvec=matrix.dot, d=matrix.shape[0], dense=matrix)

    @property
    def d(self) -> int:
        return int(self.shape[0])

    @property
    def dense(self) -> np.ndarray | None:
        """The dense matrix backing this operator, when there is one."""
        return self._dense

    def _matvec(self, x: np.ndarray) -> np.ndarray:
        self.apply_count += 1
        return np.asarray(self._fn(np.ravel(x)), dtype=np.float64)

    def _rmatvec(self, x: np.ndarray) -> np.ndarray:
        return self._matvec(x)

    def to_dense(self) -> np.ndarray:
        """Materialize the operator column by column.

        Only allowed for ``d`` up to ``DENSE_DIMENSION_LIMIT``. Applications
        made here are not counted.
        """
        if self._dense is not None:
            return self._dense
        if self.d > DENSE_DIMENSION_LIMIT:
            raise ContractViolationError(
                message="Dense materialization is limited to d <= %d."
                % DENSE_DIMENSION_LIMIT,
            )
        eye = np.eye(self.d)
        columns = [np.asarray(self._fn(eye[:, j])) for j in range(self.d)]
        return np.column_stack(columns)

    def norm_estimate(
        self,
        rng: np.random.Generator | None = None,
        steps: int = POWER_ITERATION_STEPS,
    ) -> float:
        """Return an estimate of the spectral norm ``‖B‖``.

        Exact on the dense path. Otherwise it is ``‖Bv‖`` for the unit
        vector ``v`` reached after ``steps`` power iterations, whose
        applications are counted. That value never exceeds ``‖B‖``, so it is
        an estimate from below and not a bound; callers needing a bound
        scale it up.
        """
        if self._dense is not None:
            return float(np.linalg.norm(self._dense, ord=2))
        rng = rng or np.random.default_rng(0)
        v = rng.standard_normal(self.d)
        v /= np.linalg.norm(v)
        estimate = 0.0
        for _ in range(steps):
            w = self.matvec(v)
            w_norm = float(np.linalg.norm(w))
            if w_norm == 0.0:
                return 0.0
            estimate = w_norm
            v = w / w_norm
        _LOGGER.debug("Power iteration norm estimate %.6g.", estimate)
        return estimate
