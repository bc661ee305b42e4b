import math
from logging import getLogger
from typing import NamedTuple

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

ARMIJO_C: float = 1e-4

MAX_BACKTRACKS: int = 30

RAY_TOLERANCE: float = 1e-8

CURVATURE_TOLERANCE: float = 1e-10


# =============================================================================
# TYPES
# =============================================================================


class ArcConditions(NamedTuple):
    """The residuals of the stationarity conditions of a cubic step.

    ``eq10_residual`` is the ray stationarity residual
    ``|⟨g,s⟩ + ⟨s,Bs⟩ + σ‖s‖³|``, ``ineq10b_value`` is the curvature along the
    step ``⟨s,Bs⟩ + σ‖s‖³`` and ``grad_norm_ratio`` is ``‖∇p(s)‖/‖g‖``.
    """

    eq10_residual: float
    ineq10b_value: float
    grad_norm_ratio: float
    theta_ok: bool
    scale: float

    @property
    def conditions_met(self) -> bool:
        return (
            self.eq10_residual <= RAY_TOLERANCE * self.scale
            and self.ineq10b_value >= -CURVATURE_TOLERANCE
            and self.theta_ok
        )


# =============================================================================
# HELPERS
# =============================================================================


def _check_sigma(sigma: float) -> None:
    if not sigma > 0.0:
        raise ContractViolationError(message="The penalty must be positive.")


def _cubic_value(
    g: np.ndarray,
    b_op: SymmetricOperator,
    sigma: float,
    s: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Return ``p(s) − p(0)`` and ``B s``."""
    bs = b_op.matvec(s)
    s_norm = float(np.linalg.norm(s))
    return float(g @ s) + 0.5 * float(s @ bs) + sigma / 3.0 * s_norm**3, bs


def _cubic_grad(
    g: np.ndarray,
    bs: np.ndarray,
    sigma: float,
    s: np.ndarray,
) -> np.ndarray:
    """Return ``∇p(s) = g + B s + σ‖s‖ s``."""
    return g + bs + sigma * float(np.linalg.norm(s)) * s


def ray_minimizer(
    g: np.ndarray,
    b_op: SymmetricOperator,
    sigma: float,
    u: np.ndarray,
) -> np.ndarray:
    """Return the minimizer of ``p`` on the ray ``{t u : t ≥ 0}``.

    ``u`` is flipped first when it is an ascent direction. At the returned
    ``t u`` the equality ``⟨g,s⟩ + ⟨s,Bs⟩ + σ‖s‖³ = 0`` holds and
    ``⟨s,Bs⟩ + σ‖s‖³ = −⟨g,s⟩ ≥ 0``.
    """
    u_norm = float(np.linalg.norm(u))
    if u_norm == 0.0:
        return np.zeros_like(u)
    a = float(g @ u)
    if a > 0.0:
        u, a = -u, -a
    b = float(u @ b_op.matvec(u))
    c = sigma * u_norm**3
    # Positive root of c t² + b t + a = 0; written to avoid cancellation.
    root = math.sqrt(max(b * b - 4.0 * c * a, 0.0))
    t = (-b + root) / (2.0 * c) if b <= 0.0 else -2.0 * a / (b + root)
    return t * u


# =============================================================================
# CONDITIONS
# =============================================================================


def check_arc_conditions(
    g: np.ndarray,
    b_op: SymmetricOperator,
    sigma: float,
    s: np.ndarray,
    kappa_theta: float,
) -> ArcConditions:
    """Measure how well ``s`` satisfies the cubic stationarity conditions.

    ``theta_ok`` holds when ``‖∇p(s)‖ ≤ κ_θ·min(1, ‖s‖)·‖g‖``. The
    ``scale`` of the equality residual is the largest magnitude among its
    three terms (at least 1). With ``g = 0`` the ratio is 0 if ``∇p(s)``
    vanishes and infinite otherwise.

    :raise ContractViolationError: If ``sigma`` is not positive.
    """
    _check_sigma(sigma)
    bs = b_op.matvec(s)
    s_norm = float(np.linalg.norm(s))
    gs = float(g @ s)
    sbs = float(s @ bs)
    cubic = sigma * s_norm**3
    grad_norm = float(np.linalg.norm(_cubic_grad(g, bs, sigma, s)))
    g_norm = float(np.linalg.norm(g))
    if g_norm > 0.0:
        ratio = grad_norm / g_norm
    else:
        ratio = 0.0 if grad_norm == 0.0 else math.inf
    return ArcConditions(
        eq10_residual=abs(gs + sbs + cubic),
        ineq10b_value=sbs + cubic,
        grad_norm_ratio=ratio,
        theta_ok=ratio <= kappa_theta * min(1.0, s_norm),
        scale=max(1.0, abs(gs), abs(sbs), cubic),
    )


# =============================================================================
# SOLVERS
# =============================================================================


def cauchy_step_arc(
    g: np.ndarray,
    b_op: SymmetricOperator,
    b_norm: float,
    sigma: float,
) -> SubproblemSolution:
    """Return ``s = −α g`` with ``α = 2/(‖B‖ + sqrt(‖B‖² + 4σ‖g‖))``.

    The decrease of the cubic model is at least
    ``(‖g‖/10)·min{‖g‖/‖B‖, sqrt(‖g‖/σ)}`` when ``b_norm`` is not smaller
    than the true ``‖B‖``. Uses one application of ``B``.

    :raise ContractViolationError: If ``sigma`` is not positive.
    """
    _check_sigma(sigma)
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        return SubproblemSolution(
            s=np.zeros(b_op.d),
            hvp_count=0,
            kind=SolutionKind.CAUCHY_ARC,
            predicted_decrease=0.0,
            boundary_hit=False,
            residual_norm=0.0,
            converged=True,
            theta=None,
        )
    before = b_op.apply_count
    alpha = 2.0 / (b_norm + math.sqrt(b_norm**2 + 4.0 * sigma * g_norm))
    gbg = float(g @ b_op.matvec(g))
    decrease = (
        alpha * g_norm**2
        - 0.5 * alpha**2 * gbg
        - sigma / 3.0 * alpha**3 * g_norm**3
    )
    return SubproblemSolution(
        s=-alpha * g,
        hvp_count=b_op.apply_count - before,
        kind=SolutionKind.CAUCHY_ARC,
        predicted_decrease=decrease,
        boundary_hit=False,
        residual_norm=None,
        converged=True,
        theta=None,
    )


def refine_arc(
    g: np.ndarray,
    b_op: SymmetricOperator,
    sigma: float,
    start: np.ndarray,
    kappa_theta: float,
    max_iter: int = 100,
    kind: SolutionKind = SolutionKind.REFINED_ARC,
    history: list[float] | None = None,
) -> SubproblemSolution:
    """Refine a cubic step until it passes :func:`check_arc_conditions`.

    The start is first moved to the minimizer of ``p`` along its ray, which
    enforces the equality and the curvature inequality. While the gradient
    condition fails, a Barzilai-Borwein gradient step on ``p`` safeguarded
    by Armijo backtracking is taken and again moved to its ray minimizer
    when that lowers ``p``. Every accepted move decreases ``p``.

    When the conditions cannot be certified within ``max_iter`` iterations
    the ``start`` step is returned with ``converged`` cleared.

    :param history: When given, receives ``p(s) − p(0)`` of every iterate.

    :return: The step. ``theta`` holds ``‖∇p(s)‖/‖g‖`` of the returned step
        and ``hvp_count`` every application of ``B`` spent here.
    """
    _check_sigma(sigma)
    before = b_op.apply_count
    start = np.asarray(start, dtype=np.float64)

    def solution(
        s: np.ndarray,
        conditions: ArcConditions,
        converged: bool,
    ) -> SubproblemSolution:
        value, _ = _cubic_value(g, b_op, sigma, s)
        return SubproblemSolution(
            s=s,
            hvp_count=b_op.apply_count - before,
            kind=kind,
            predicted_decrease=-value,
            boundary_hit=False,
            residual_norm=conditions.eq10_residual,
            converged=converged,
            theta=conditions.grad_norm_ratio,
        )

    conditions = check_arc_conditions(g, b_op, sigma, start, kappa_theta)
    if conditions.conditions_met or not np.any(g):
        return solution(start, conditions, conditions.conditions_met)

    s = ray_minimizer(g, b_op, sigma, start)
    if not np.any(s):
        s = ray_minimizer(g, b_op, sigma, -g)
    value, bs = _cubic_value(g, b_op, sigma, s)
    grad = _cubic_grad(g, bs, sigma, s)
    prev_s: np.ndarray | None = None
    prev_grad: np.ndarray | None = None
    for _ in range(max_iter):
        if history is not None:
            history.append(value)
        conditions = check_arc_conditions(g, b_op, sigma, s, kappa_theta)
        if conditions.conditions_met:
            return solution(s, conditions, True)

        s_norm = float(np.linalg.norm(s))
        curvature = float(np.linalg.norm(bs)) / s_norm
        step = 1.0 / (curvature + 2.0 * sigma * s_norm)
        if prev_s is not None and prev_grad is not None:
            ds, dy = s - prev_s, grad - prev_grad
            curvature = float(ds @ dy)
            if curvature > 0.0:
                step = float(ds @ ds) / curvature
        grad_sq = float(grad @ grad)
        for _ in range(MAX_BACKTRACKS):
            trial = s - step * grad
            trial_value, trial_bs = _cubic_value(g, b_op, sigma, trial)
            if trial_value <= value - ARMIJO_C * step * grad_sq:
                break
            step *= 0.5
        else:
            break

        on_ray = ray_minimizer(g, b_op, sigma, trial)
        ray_value, ray_bs = _cubic_value(g, b_op, sigma, on_ray)
        if ray_value <= trial_value:
            trial, trial_value, trial_bs = on_ray, ray_value, ray_bs
        prev_s, prev_grad = s, grad
        s, value, bs = trial, trial_value, trial_bs
        grad = _cubic_grad(g, bs, sigma, s)

    _LOGGER.debug("Cubic refinement could not certify the step.")
    conditions = check_arc_conditions(g, b_op, sigma, start, kappa_theta)
    return solution(start, conditions, False)


def negative_curvature_step_arc(
    v: np.ndarray,
    g: np.ndarray,
    b_op: SymmetricOperator,
    sigma: float,
    kappa_theta: float,
    max_iter: int = 100,
) -> SubproblemSolution:
    """Return a cubic step along the unit direction ``v``.

    ``v`` is oriented so that ``⟨g, v⟩ ≤ 0`` (``+v`` on ties) and scaled to
    the minimizer of ``p`` along it, then handed to :func:`refine_arc`. A
    step that cannot be certified stays on the ray.
    """
    _check_sigma(sigma)
    sign = -1.0 if float(g @ v) > 0.0 else 1.0
    before = b_op.apply_count
    on_ray = ray_minimizer(g, b_op, sigma, sign * np.asarray(v, dtype=float))
    solution = refine_arc(
        g,
        b_op,
        sigma,
        on_ray,
        kappa_theta,
        max_iter=max_iter,
        kind=SolutionKind.NEG_CURV,
    )
    return SubproblemSolution(
        s=solution.s,
        hvp_count=b_op.apply_count - before,
        kind=SolutionKind.NEG_CURV,
        predicted_decrease=solution.predicted_decrease,
        boundary_hit=False,
        residual_norm=solution.residual_norm,
        converged=solution.converged,
        theta=solution.theta,
    )
