"""Oracle tolerances and constants consistent with the convergence analysis.

The analysis fixes the oracle tolerances as fractions of the remaining gap
to the optimality targets, e.g. ``ε_g = c·(1 − η)·(ε_∇f − ε_g)``. Each such
fixed point solves to ``ε = c(1 − η)T/(1 + c(1 − η))`` for a target ``T``.
"""

from typing import NamedTuple

from app.core import Algorithm, InexactnessBudget

from .checkers import ensure_greater_than, ensure_probability

# =============================================================================
# CONSTANTS
# =============================================================================

STR_GRADIENT_FRACTION: float = 1.0 / 16.0

STR_HESSIAN_FRACTION: float = 1.0 / 10.0

SARC_GRADIENT_FRACTION: float = 1.0 / 220.0

SARC_HESSIAN_FRACTION: float = 1.0 / 36.0


# =============================================================================
# TYPES
# =============================================================================


class Tolerances(NamedTuple):
    eps_g: float
    eps_b: float
    eps_h: float


# =============================================================================
# OPERATIONS
# =============================================================================


def _fixed_point(fraction: float, eta: float, target: float) -> float:
    factor = fraction * (1.0 - eta)
    return factor * target / (1.0 + factor)


def derived_tolerances(
    algorithm: Algorithm,
    eta: float,
    eps_grad_target: float,
    eps_hess_target: float,
) -> Tolerances:
    """Return the oracle tolerances the analysis prescribes.

    For trust region: ``ε_g = (1−η)/16·(ε_∇f − ε_g)`` and
    ``ε_h = ε_B = (1−η)/10·(ε_H − ε_B)``. For cubic regularization:
    ``ε_g = (1−η)/220·(ε_∇f − ε_g)`` and ``ε_B = ε_h = (1−η)/36·(ε_H − ε_B)``.

    :raise ContractViolationError: If ``eta`` is outside ``(0, 1)`` or a
        target is not positive.
    """
    ensure_probability(eta, message='"eta" must lie in (0, 1).')
    ensure_greater_than(eps_grad_target, 0.0, '"eps_grad_target" must be > 0.')
    ensure_greater_than(eps_hess_target, 0.0, '"eps_hess_target" must be > 0.')
    if algorithm is Algorithm.STR:
        grad_fraction, hess_fraction = (
            STR_GRADIENT_FRACTION,
            STR_HESSIAN_FRACTION,
        )
    else:
        grad_fraction, hess_fraction = (
            SARC_GRADIENT_FRACTION,
            SARC_HESSIAN_FRACTION,
        )
    eps_g = _fixed_point(grad_fraction, eta, eps_grad_target)
    eps_b = _fixed_point(hess_fraction, eta, eps_hess_target)
    return Tolerances(eps_g=eps_g, eps_b=eps_b, eps_h=eps_b)


def budget_with_derived_tolerances(
    algorithm: Algorithm,
    eta: float,
    budget: InexactnessBudget,
) -> InexactnessBudget:
    """Return ``budget`` with its oracle tolerances replaced by
    :func:`derived_tolerances`."""
    tolerances = derived_tolerances(
        algorithm,
        eta,
        budget.eps_grad_target,
        budget.eps_hess_target,
    )
    return InexactnessBudget(
        eps_grad_target=budget.eps_grad_target,
        eps_hess_target=budget.eps_hess_target,
        eps_g=tolerances.eps_g,
        eps_b=tolerances.eps_b,
        eps_h=tolerances.eps_h,
        v0=budget.v0,
        delta=budget.delta,
    )


def kappa_s(
    eps_b: float,
    eps_g: float,
    lip_hess: float,
    lip_grad: float,
    sigma: float,
    theta: float,
    kappa_theta: float,
    zeta1: float = 0.0,
    zeta2: float = 0.0,
) -> float:
    """Return the constant ``κ_s`` with ``‖g(x_{k+1})‖ ≤ κ_s‖s_k‖²``.

    ``κ_s = min{(2ε_B + L_H + σ + 2κ_θ ε_g + κ_θ L_∇f)/(1 − θ),
    (L_H + σ + κ_θ L_∇f)/(1 − θ − ζ₁ − ζ₂)}``, where ``θ`` is the measured
    gradient ratio of the step. A branch whose denominator is not positive
    is skipped; infinity is returned when both are.
    """
    candidates = []
    if theta < 1.0:
        candidates.append(
            (
                2.0 * eps_b
                + lip_hess
                + sigma
                + 2.0 * kappa_theta * eps_g
                + kappa_theta * lip_grad
            )
            / (1.0 - theta),
        )
    denominator = 1.0 - theta - zeta1 - zeta2
    if denominator > 0.0:
        candidates.append(
            (lip_hess + sigma + kappa_theta * lip_grad) / denominator,
        )
    return min(candidates) if candidates else float("inf")
