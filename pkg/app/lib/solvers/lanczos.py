from logging import getLogger
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from app.core import ContractViolationError, SymmetricOperator

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)

BREAKDOWN_TOLERANCE: float = 1e-12


# =============================================================================
# TYPES
# =============================================================================


class LanczosResult(NamedTuple):
    """The smallest Ritz pair found and the applications of ``B`` spent."""

    lambda_min_est: float
    direction: np.ndarray
    hvp_count: int
    converged: bool


# =============================================================================
# SOLVER
# =============================================================================


def _smallest_ritz_pair(
    alphas: list[float],
    betas: list[float],
) -> tuple[float, np.ndarray]:
    if len(alphas) == 1:
        return alphas[0], np.ones(1)
    values, vectors = eigh_tridiagonal(
        np.asarray(alphas),
        np.asarray(betas[: len(alphas) - 1]),
        select="i",
        select_range=(0, 0),
    )
    return float(values[0]), vectors[:, 0]


def lanczos_min_eig(
    b_op: SymmetricOperator,
    d: int | None = None,
    tol: float = 1e-6,
    max_iter: int | None = None,
    rng: np.random.Generator | None = None,
) -> LanczosResult:
    """Estimate the smallest eigenpair of a symmetric operator.

    Lanczos with full reorthogonalization from a random unit start. It stops
    once the residual ``‖B v − λ v‖`` of the smallest Ritz pair, read off the
    tridiagonal matrix, is within ``tol``, on an invariant subspace, or after
    ``max_iter`` steps. The estimate is within ``tol`` of an eigenvalue of
    ``B``; that it is the smallest one holds with probability one over the
    random start.

    :param b_op: The operator.
    :param d: The dimension; defaults to the operator's.
    :param tol: The residual tolerance.
    :param max_iter: The step cap, at most ``d`` (the default).
    :param rng: The generator of the start vector.

    :return: The estimate, a unit direction, the applications spent and
        whether the residual test was met.

    :raise ContractViolationError: If ``d`` disagrees with the operator.
    """
    d = b_op.d if d is None else d
    if d != b_op.d:
        raise ContractViolationError(
            message="The dimension %d does not match the operator." % d,
        )
    max_iter = d if max_iter is None else min(max_iter, d)
    rng = rng or np.random.default_rng(0)
    before = b_op.apply_count

    q = rng.standard_normal(d)
    q /= np.linalg.norm(q)
    basis = np.zeros((d, max_iter))
    alphas: list[float] = []
    betas: list[float] = []
    beta = 0.0
    q_prev = np.zeros(d)
    theta, y = 0.0, np.ones(1)
    converged = False
    for k in range(max_iter):
        basis[:, k] = q
        w = b_op.matvec(q)
        alpha = float(q @ w)
        alphas.append(alpha)
        w = w - alpha * q - beta * q_prev
        # Full reorthogonalization, applied twice.
        for _ in range(2):
            w -= basis[:, : k + 1] @ (basis[:, : k + 1].T @ w)
        beta = float(np.linalg.norm(w))
        betas.append(beta)

        theta, y = _smallest_ritz_pair(alphas, betas)
        residual = abs(beta * y[-1])
        if residual <= tol or beta <= BREAKDOWN_TOLERANCE:
            converged = True
            break
        q_prev, q = q, w / beta

    steps = len(alphas)
    direction = basis[:, :steps] @ y
    direction /= np.linalg.norm(direction)
    if not converged:
        # A full Krylov basis of R^d makes the Ritz pair exact.
        converged = steps == d
        if not converged:
            _LOGGER.debug("Lanczos stopped after %d steps.", steps)
    return LanczosResult(
        lambda_min_est=theta,
        direction=direction,
        hvp_count=b_op.apply_count - before,
        converged=converged,
    )
