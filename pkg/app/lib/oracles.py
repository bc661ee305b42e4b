"""Brute-force and finite-difference reference oracles.

Each oracle relies on plain vector arithmetic only, never on the solvers or
models it is used to check.
"""

import math
from collections.abc import Callable, Sequence
from typing import NamedTuple

import numpy as np

from app.core import ContractViolationError, OracleReport, SymmetricOperator

from .checkers import ensure_in_range

# =============================================================================
# CONSTANTS
# =============================================================================

DEFAULT_GRID: int = 100_000

MIN_GRID: int = 10_000

DENSE_EIG_LIMIT: int = 512


# =============================================================================
# TYPES
# =============================================================================


class LineSearchResult(NamedTuple):
    """The grid-best multiple ``α`` of ``−g`` and the decrease it gives."""

    alpha: float
    decrease: float
    grid_step: float


# =============================================================================
# ONE-DIMENSIONAL BRUTE FORCE
# =============================================================================


def _check_grid(grid: int) -> None:
    if grid < MIN_GRID:
        raise ContractViolationError(
            message="A brute-force grid needs at least %d points." % MIN_GRID,
        )


def _best_on_grid(
    alphas: np.ndarray,
    decreases: np.ndarray,
) -> LineSearchResult:
    best = int(np.argmax(decreases))
    step = float(alphas[1] - alphas[0]) if alphas.size > 1 else 0.0
    return LineSearchResult(
        alpha=float(alphas[best]),
        decrease=float(decreases[best]),
        grid_step=step,
    )


def brute_force_tr_1d(
    g: np.ndarray,
    b_op: SymmetricOperator,
    radius: float,
    grid: int = DEFAULT_GRID,
) -> LineSearchResult:
    """Maximize ``m(0) − m(−α g)`` over a grid of ``α ∈ [0, Δ/‖g‖]``."""
    _check_grid(grid)
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        return LineSearchResult(alpha=0.0, decrease=0.0, grid_step=0.0)
    gg = g_norm**2
    gbg = float(g @ b_op.matvec(g))
    alphas = np.linspace(0.0, radius / g_norm, grid)
    return _best_on_grid(alphas, alphas * gg - 0.5 * alphas**2 * gbg)


def brute_force_cubic_1d(
    g: np.ndarray,
    b_op: SymmetricOperator,
    sigma: float,
    grid: int = DEFAULT_GRID,
    b_norm: float | None = None,
) -> LineSearchResult:
    """Maximize ``p(0) − p(−α g)`` over a grid of step lengths.

    The grid spans step norms up to ``(11/4)·max{‖B‖/σ, sqrt(‖g‖/σ)}``,
    the largest norm a cubic Cauchy step can have.
    """
    _check_grid(grid)
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        return LineSearchResult(alpha=0.0, decrease=0.0, grid_step=0.0)
    if b_norm is None:
        b_norm = float(np.linalg.norm(b_op.to_dense(), ord=2))
    gg = g_norm**2
    gbg = float(g @ b_op.matvec(g))
    longest = 2.75 * max(b_norm / sigma, math.sqrt(g_norm / sigma))
    alphas = np.linspace(0.0, longest / g_norm, grid)
    decreases = (
        alphas * gg
        - 0.5 * alphas**2 * gbg
        - sigma / 3.0 * alphas**3 * g_norm**3
    )
    return _best_on_grid(alphas, decreases)


# =============================================================================
# FINITE DIFFERENCES
# =============================================================================


def central_difference(
    fn: Callable[[np.ndarray], float],
    x: np.ndarray,
    step: float,
) -> np.ndarray:
    """Return the central-difference gradient of ``fn`` at ``x``."""
    x = np.asarray(x, dtype=np.float64)
    half = step / 2.0
    eye = np.eye(x.size)
    return np.array(
        [(fn(x + half * e) - fn(x - half * e)) / step for e in eye],
    )


def finite_diff_check(
    fn: Callable[[np.ndarray], float],
    grad_fn: Callable[[np.ndarray], np.ndarray],
    points: Sequence[np.ndarray],
    step: float = 1e-6,
    tolerance: float = 1e-5,
) -> OracleReport:
    """Compare an analytic gradient with central differences at points.

    The reference is the stacked finite-difference gradients, the candidate
    the stacked analytic ones.

    :raise ContractViolationError: If ``step`` is outside ``[1e-8, 1e-4]``
        or no point is given.
    """
    ensure_in_range(
        step,
        1e-8,
        1e-4,
        '"step" must lie in [1e-8, 1e-4].',
        low_inclusive=True,
    )
    if not points:
        raise ContractViolationError(message="At least one point is needed.")
    reference = np.stack([central_difference(fn, _x, step) for _x in points])
    candidate = np.stack([np.asarray(grad_fn(_x)) for _x in points])
    return OracleReport.compare(reference, candidate, tolerance)


def finite_diff_hessian_check(
    grad_fn: Callable[[np.ndarray], np.ndarray],
    hvp_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x: np.ndarray,
    step: float = 1e-6,
    tolerance: float = 1e-4,
) -> OracleReport:
    """Compare ``hvp_fn(x, e_j)`` with differences of ``grad_fn`` column by
    column."""
    x = np.asarray(x, dtype=np.float64)
    half = step / 2.0
    eye = np.eye(x.size)
    reference = np.column_stack(
        [(grad_fn(x + half * e) - grad_fn(x - half * e)) / step for e in eye],
    )
    candidate = np.column_stack([hvp_fn(x, e) for e in eye])
    return OracleReport.compare(reference, candidate, tolerance)


# =============================================================================
# DENSE EIGENSOLVER
# =============================================================================


def dense_min_eig(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Return the smallest eigenpair of a dense symmetric matrix.

    :raise ContractViolationError: If the matrix is larger than
        ``512 × 512`` or not symmetric.
    """
    op = SymmetricOperator.from_dense(matrix)
    if op.d > DENSE_EIG_LIMIT:
        raise ContractViolationError(
            message="Dense eigensolves are limited to d <= %d."
            % DENSE_EIG_LIMIT,
        )
    values, vectors = np.linalg.eigh(op.dense)
    return float(values[0]), vectors[:, 0]
