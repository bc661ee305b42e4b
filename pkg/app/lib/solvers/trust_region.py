import math
from logging import getLogger

import numpy as np

from app.core import (
    ContractViolationError,
    SolutionKind,
    SubproblemSolution,
    SymmetricOperator,
)

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)


# =============================================================================
# HELPERS
# =============================================================================


def boundary_root(z: np.ndarray, p: np.ndarray, radius: float) -> float:
    """Return the ``τ ≥ 0`` with ``‖z + τ p‖ = radius``.

    Requires ``‖z‖ ≤ radius`` and ``p ≠ 0``.
    """
    a = float(p @ p)
    b = 2.0 * float(z @ p)
    c = float(z @ z) - radius**2
    if c >= 0.0:
        return 0.0
    root = math.sqrt(b * b - 4.0 * a * c)
    # Citardauq form when b > 0 avoids cancellation.
    if b > 0.0:
        return -2.0 * c / (b + root)
    return (-b + root) / (2.0 * a)


def _zero_step(d: int, kind: SolutionKind) -> SubproblemSolution:
    return SubproblemSolution(
        s=np.zeros(d),
        hvp_count=0,
        kind=kind,
        predicted_decrease=0.0,
        boundary_hit=False,
        residual_norm=0.0,
        converged=True,
        theta=None,
    )


def _check_radius(radius: float) -> None:
    if not radius > 0.0:
        raise ContractViolationError(
            message="The trust-region radius must be positive.",
        )


# =============================================================================
# SOLVERS
# =============================================================================


def cauchy_point_tr(
    g: np.ndarray,
    b_op: SymmetricOperator,
    radius: float,
) -> SubproblemSolution:
    """Return the model minimizer along ``−g`` within the trust region.

    ``s = −τ (Δ/‖g‖) g`` with ``τ = 1`` when ``⟨g, B g⟩ ≤ 0`` and
    ``τ = min(‖g‖³/(Δ⟨g, B g⟩), 1)`` otherwise. Uses one application of
    ``B``.

    :raise ContractViolationError: If ``radius`` is not positive.
    """
    _check_radius(radius)
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        return _zero_step(b_op.d, SolutionKind.CAUCHY_TR)
    before = b_op.apply_count
    gbg = float(g @ b_op.matvec(g))
    tau = 1.0 if gbg <= 0.0 else min(g_norm**3 / (radius * gbg), 1.0)
    scale = tau * radius / g_norm
    s = -scale * g
    return SubproblemSolution(
        s=s,
        hvp_count=b_op.apply_count - before,
        kind=SolutionKind.CAUCHY_TR,
        predicted_decrease=scale * g_norm**2 - 0.5 * scale**2 * gbg,
        boundary_hit=tau == 1.0,
        residual_norm=None,
        converged=True,
        theta=None,
    )


def steihaug_cg(
    g: np.ndarray,
    b_op: SymmetricOperator,
    radius: float,
    tol: float | None = None,
    max_iter: int | None = None,
) -> SubproblemSolution:
    """Approximately minimize the quadratic model in the trust region.

    Truncated conjugate gradients from ``s = 0``: stops at the boundary
    when a direction of non-positive curvature is met or an iterate would
    leave the region, and in the interior once the model gradient
    ``‖g + B s‖`` drops below ``tol``. The first iterate is the Cauchy
    point and the model decreases monotonically afterwards.

    :param g: The gradient estimate.
    :param b_op: The Hessian estimate.
    :param radius: The radius ``Δ``.
    :param tol: The residual tolerance. Defaults to
        ``min(0.5, sqrt(‖g‖))·‖g‖``.
    :param max_iter: The iteration cap. Defaults to ``2d``.

    :return: The step, with ``hvp_count`` equal to the CG iterations and
        ``converged`` cleared when ``max_iter`` was hit.

    :raise ContractViolationError: If ``radius`` or ``tol`` is not positive.
    """
    _check_radius(radius)
    d = b_op.d
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        return _zero_step(d, SolutionKind.STEIHAUG)
    tol = min(0.5, math.sqrt(g_norm)) * g_norm if tol is None else tol
    if not tol > 0.0:
        raise ContractViolationError(message='"tol" must be positive.')
    max_iter = 2 * d if max_iter is None else max_iter

    before = b_op.apply_count
    z = np.zeros(d)
    bz = np.zeros(d)
    r = g.astype(np.float64, copy=True)
    p = -r
    rr = float(r @ r)

    def solution(
        s: np.ndarray,
        bs: np.ndarray,
        boundary: bool,
        converged: bool = True,
    ) -> SubproblemSolution:
        return SubproblemSolution(
            s=s,
            hvp_count=b_op.apply_count - before,
            kind=SolutionKind.STEIHAUG,
            predicted_decrease=-float(g @ s) - 0.5 * float(s @ bs),
            boundary_hit=boundary,
            residual_norm=float(np.linalg.norm(g + bs)),
            converged=converged,
            theta=None,
        )

    for _ in range(max_iter):
        bp = b_op.matvec(p)
        curvature = float(p @ bp)
        if curvature <= 0.0:
            tau = boundary_root(z, p, radius)
            return solution(z + tau * p, bz + tau * bp, boundary=True)
        alpha = rr / curvature
        z_next = z + alpha * p
        if float(np.linalg.norm(z_next)) >= radius:
            tau = boundary_root(z, p, radius)
            return solution(z + tau * p, bz + tau * bp, boundary=True)
        z = z_next
        bz = bz + alpha * bp
        r = r + alpha * bp
        rr_next = float(r @ r)
        if math.sqrt(rr_next) < tol:
            return solution(z, bz, boundary=False)
        p = -r + (rr_next / rr) * p
        rr = rr_next

    _LOGGER.debug("Steihaug-CG stopped at the cap of %d iterations.", max_iter)
    return solution(z, bz, boundary=False, converged=False)


def negative_curvature_step(
    v: np.ndarray,
    radius: float,
    g: np.ndarray,
) -> np.ndarray:
    """Return ``±Δ v`` oriented so that ``⟨g, s⟩ ≤ 0``.

    Ties (``⟨g, v⟩ = 0``) resolve to ``+Δ v``.

    :raise ContractViolationError: If ``v`` is not a unit vector or the
        radius is not positive.
    """
    _check_radius(radius)
    if not math.isclose(float(np.linalg.norm(v)), 1.0, rel_tol=1e-8):
        raise ContractViolationError(message='"v" must be a unit vector.')
    sign = -1.0 if float(g @ v) > 0.0 else 1.0
    return sign * radius * v
