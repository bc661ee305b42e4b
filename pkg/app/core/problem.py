from abc import ABCMeta, abstractmethod
from functools import partial
from typing import NamedTuple

import numpy as np

from .exceptions import ContractViolationError
from .operator import DENSE_DIMENSION_LIMIT, SymmetricOperator

# =============================================================================
# CONSTANTS
# =============================================================================

PER_SAMPLE_POWER_STEPS: int = 10


# =============================================================================
# TYPES
# =============================================================================


class OracleBounds(NamedTuple):
    """Domain-restricted estimates of the per-sample bounds at a point."""

    kappa_f: float
    kappa_grad: float
    kappa_hess: float


# =============================================================================
# HELPERS
# =============================================================================


def check_point(x: np.ndarray, d: int, name: str = "x") -> np.ndarray:
    """Return ``x`` as a float vector of dimension ``d``.

    :raise ContractViolationError: If ``x`` is not a vector of dimension ``d``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != d:
        raise ContractViolationError(
            message='"%s" must be a vector of dimension %d, got shape %s.'
            % (name, d, x.shape),
        )
    return x


def check_indices(indices: np.ndarray, n: int) -> np.ndarray:
    """Return ``indices`` as a sorted integer array within ``[0, n)``."""
    indices = np.asarray(indices, dtype=np.intp)
    if indices.ndim != 1 or indices.size == 0:
        raise ContractViolationError(
            message="An index collection must be a non-empty vector.",
        )
    if np.any(np.diff(indices) <= 0):
        indices = np.unique(indices)
    if indices[0] < 0 or indices[-1] >= n:
        raise ContractViolationError(
            message="Sample indices must lie in [0, %d)." % n,
        )
    return indices


# =============================================================================
# PROBLEM CONTRACT
# =============================================================================


class FiniteSumProblem(metaclass=ABCMeta):
    """The objective ``f(x) = (1/n) Σ_i f_i(x)`` over ``n`` samples.

    Implementations provide batched oracles over an ascending index
    collection; the per-sample oracles and the full-data means are derived
    from them so that a subsample equal to ``[0, n)`` and the full data share
    the same reduction path. All oracles are deterministic in ``(i, x)`` and
    read-only, so they may be evaluated concurrently.
    """

    @property
    @abstractmethod
    def n(self) -> int:
        """The number of samples."""
        ...

    @property
    @abstractmethod
    def d(self) -> int:
        """The dimension of the decision variable."""
        ...

    @abstractmethod
    def batch_values(self, x: np.ndarray, indices: np.ndarray) -> np.ndarray:
        """Return the vector of ``f_i(x)`` for the given indices."""
        ...

    @abstractmethod
    def batch_grads(self, x: np.ndarray, indices: np.ndarray) -> np.ndarray:
        """Return the ``m × d`` matrix whose rows are ``∇f_i(x)``."""
        ...

    @abstractmethod
    def batch_hvps(
        self,
        x: np.ndarray,
        v: np.ndarray,
        indices: np.ndarray,
    ) -> np.ndarray:
        """Return the ``m × d`` matrix whose rows are ``∇²f_i(x)·v``."""
        ...

    @abstractmethod
    def mean_grad(self, x: np.ndarray, indices: np.ndarray) -> np.ndarray:
        """Return ``(1/|S|) Σ_{i∈S} ∇f_i(x)``."""
        ...

    @abstractmethod
    def hessian_operator(
        self,
        x: np.ndarray,
        indices: np.ndarray,
    ) -> SymmetricOperator:
        """Return ``B = (1/|S|) Σ_{i∈S} ∇²f_i(x)`` as a counting operator."""
        ...

    def mean_value(self, x: np.ndarray, indices: np.ndarray) -> float:
        """Return ``(1/|S|) Σ_{i∈S} f_i(x)``."""
        return float(np.mean(self.batch_values(x, indices)))

    def per_sample_hess_norms(
        self,
        x: np.ndarray,
        indices: np.ndarray,
    ) -> np.ndarray:
        """Return estimates of ``‖∇²f_i(x)‖`` for the given indices.

        Each norm comes from a short power iteration on the products of one
        sample, so no Hessian is materialized. Problems with a closed form
        override this.
        """
        rng = np.random.default_rng(0)
        norms = [
            SymmetricOperator(
                matvec=partial(self.hvp_i, int(_i), x),
                d=self.d,
            ).norm_estimate(rng=rng, steps=PER_SAMPLE_POWER_STEPS)
            for _i in indices
        ]
        return np.asarray(norms, dtype=np.float64)

    # -------------------------------------------------------------------------
    # Per-sample oracles
    # -------------------------------------------------------------------------

    def value_i(self, i: int, x: np.ndarray) -> float:
        return float(self.batch_values(x, np.array([i]))[0])

    def grad_i(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.batch_grads(x, np.array([i]))[0]

    def hvp_i(self, i: int, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.batch_hvps(x, v, np.array([i]))[0]

    def hess_i(self, i: int, x: np.ndarray) -> np.ndarray:
        """Return the dense ``∇²f_i(x)``, available for ``d <= 512``.

        :raise ContractViolationError: If ``d`` exceeds the dense limit.
        """
        if self.d > DENSE_DIMENSION_LIMIT:
            raise ContractViolationError(
                message="Dense Hessians are limited to d <= %d."
                % DENSE_DIMENSION_LIMIT,
            )
        eye = np.eye(self.d)
        return np.column_stack(
            [self.hvp_i(i, x, eye[:, j]) for j in range(self.d)],
        )

    @property
    def all_indices(self) -> np.ndarray:
        return np.arange(self.n)


# =============================================================================
# FULL-DATA OPERATIONS
# =============================================================================


def full_value(problem: FiniteSumProblem, x: np.ndarray) -> float:
    """Return ``f(x)``, the mean of the per-sample values."""
    x = check_point(x, problem.d)
    return problem.mean_value(x, problem.all_indices)


def full_grad(problem: FiniteSumProblem, x: np.ndarray) -> np.ndarray:
    """Return ``∇f(x)``, the mean of the per-sample gradients."""
    x = check_point(x, problem.d)
    return problem.mean_grad(x, problem.all_indices)


def full_hvp(
    problem: FiniteSumProblem,
    x: np.ndarray,
    v: np.ndarray,
) -> np.ndarray:
    """Return ``∇²f(x)·v``, the mean of the per-sample products."""
    x = check_point(x, problem.d)
    v = check_point(v, problem.d, name="v")
    return problem.hessian_operator(x, problem.all_indices).matvec(v)


def oracle_bounds(
    problem: FiniteSumProblem,
    x: np.ndarray,
    safety: float = 2.0,
) -> OracleBounds:
    """Estimate ``κ_f``, ``κ_∇f`` and ``κ_H`` at ``x``.

    Each is the maximum over samples of the corresponding per-sample
    magnitude at ``x`` times ``safety``. The bounds hold on a neighbourhood
    of ``x`` only, not globally.
    """
    x = check_point(x, problem.d)
    indices = problem.all_indices
    kappa_f = float(np.max(np.abs(problem.batch_values(x, indices))))
    kappa_grad = float(
        np.max(np.linalg.norm(problem.batch_grads(x, indices), axis=1)),
    )
    kappa_hess = float(np.max(problem.per_sample_hess_norms(x, indices)))
    return OracleBounds(
        kappa_f=safety * kappa_f,
        kappa_grad=safety * kappa_grad,
        kappa_hess=safety * kappa_hess,
    )
