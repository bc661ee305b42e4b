"""The subsampled quadratic and cubic models and their acceptance ratios."""

import math

import numpy as np

from app.core import (
    Algorithm,
    ContractViolationError,
    RatioReport,
    SarcCorrection,
    SymmetricOperator,
    check_point,
)

# =============================================================================
# CONSTANTS
# =============================================================================

DEGENERACY_FLOOR: float = 1e-14


# =============================================================================
# MODEL STATE
# =============================================================================


class ModelState:
    """One iteration's approximations around ``x_k``.

    Holds ``h(x_k)``, the gradient estimate ``g``, the Hessian estimate
    ``B`` and either the radius ``Δ_k`` (STR) or the penalty ``σ_k``
    (SARC). Treated as immutable once built.
    """

    def __init__(
        self,
        h_at_x: float,
        g: np.ndarray,
        b_op: SymmetricOperator,
        radius_or_sigma: float,
        algorithm: Algorithm,
        eps_h: float = 0.0,
        sarc_correction: SarcCorrection = SarcCorrection.SIGMA,
    ):
        self.g: np.ndarray = check_point(g, b_op.d, name="g")
        if not radius_or_sigma > 0.0:
            raise ContractViolationError(
                message="The radius or penalty must be positive.",
            )
        if eps_h < 0.0:
            raise ContractViolationError(message='"eps_h" cannot be negative.')
        self.h_at_x: float = float(h_at_x)
        self.b_op: SymmetricOperator = b_op
        self.radius_or_sigma: float = float(radius_or_sigma)
        self.algorithm: Algorithm = algorithm
        self.eps_h: float = float(eps_h)
        self.sarc_correction: SarcCorrection = sarc_correction

    @property
    def d(self) -> int:
        return self.b_op.d

    @property
    def sigma(self) -> float:
        if self.algorithm is not Algorithm.SARC:
            raise ContractViolationError(message="Not a cubic model.")
        return self.radius_or_sigma

    @property
    def radius(self) -> float:
        if self.algorithm is not Algorithm.STR:
            raise ContractViolationError(message="Not a trust-region model.")
        return self.radius_or_sigma

    def quad_form(self, s: np.ndarray) -> float:
        """Return ``⟨s, B s⟩``."""
        return float(s @ self.b_op.matvec(s))


# =============================================================================
# MODEL EVALUATION
# =============================================================================


def eval_m(model: ModelState, s: np.ndarray) -> float:
    """Return ``m(s) = h + ⟨g, s⟩ + ½⟨s, B s⟩``."""
    s = check_point(s, model.d, name="s")
    return model.h_at_x + float(model.g @ s) + 0.5 * model.quad_form(s)


def eval_p(model: ModelState, s: np.ndarray) -> float:
    """Return ``p(s) = m(s) + (σ/3)‖s‖³``."""
    s = check_point(s, model.d, name="s")
    return eval_m(model, s) + model.sigma / 3.0 * float(np.linalg.norm(s)) ** 3


def model_decrease(model: ModelState, s: np.ndarray) -> float:
    """Return ``m(0) − m(s)`` or ``p(0) − p(s)`` depending on the model."""
    s = check_point(s, model.d, name="s")
    decrease = -float(model.g @ s) - 0.5 * model.quad_form(s)
    if model.algorithm is Algorithm.SARC:
        decrease -= model.sigma / 3.0 * float(np.linalg.norm(s)) ** 3
    return decrease


# =============================================================================
# ACCEPTANCE RATIOS
# =============================================================================


def correction_term(model: ModelState, s: np.ndarray) -> float:
    """Return the numerator of the ``ρ̃ − ρ̂`` safety correction.

    ``2ε_h‖s‖²`` for trust-region models. For cubic models either
    ``2ε_h/σ²`` or, with :attr:`SarcCorrection.STEP`, ``2ε_h‖s‖²``.
    """
    if (
        model.algorithm is Algorithm.SARC
        and model.sarc_correction is SarcCorrection.SIGMA
    ):
        return 2.0 * model.eps_h / model.sigma**2
    return 2.0 * model.eps_h * float(s @ s)


def _ratio(
    model: ModelState,
    h_x: float,
    h_xs: float,
    s: np.ndarray,
) -> RatioReport:
    decrease = model_decrease(model, s)
    actual = h_x - h_xs
    if decrease <= DEGENERACY_FLOOR * max(1.0, abs(h_x)):
        return RatioReport(
            model_decrease=decrease,
            actual_decrease=actual,
            rho_tilde=-math.inf,
            rho_hat=-math.inf,
            degenerate=True,
        )
    rho_tilde = actual / decrease
    return RatioReport(
        model_decrease=decrease,
        actual_decrease=actual,
        rho_tilde=rho_tilde,
        rho_hat=rho_tilde - correction_term(model, s) / decrease,
        degenerate=False,
    )


def ratio_str(
    model: ModelState,
    h_x: float,
    h_xs: float,
    s: np.ndarray,
) -> RatioReport:
    """Return ``ρ̃`` and ``ρ̂ = ρ̃ − 2ε_h‖s‖²/(m(0) − m(s))`` of a TR step.

    A step whose model decrease is at most ``1e-14·max(1, |h_x|)`` is
    reported as degenerate with both ratios set to ``-inf``.

    :raise ContractViolationError: If the model is not a trust-region one.
    """
    if model.algorithm is not Algorithm.STR:
        raise ContractViolationError(message="ratio_str needs an STR model.")
    return _ratio(model, h_x, h_xs, s)


def ratio_sarc(
    model: ModelState,
    h_x: float,
    h_xs: float,
    s: np.ndarray,
) -> RatioReport:
    """Return ``ρ̃`` and ``ρ̂`` of a cubic step, see :func:`correction_term`.

    :raise ContractViolationError: If the model is not a cubic one.
    """
    if model.algorithm is not Algorithm.SARC:
        raise ContractViolationError(message="ratio_sarc needs a SARC model.")
    return _ratio(model, h_x, h_xs, s)


def one_minus_rho_hat(
    model: ModelState,
    h_xs: float,
    s: np.ndarray,
) -> float:
    """Return ``1 − ρ̂`` from the model mismatch at the trial point.

    ``1 − ρ̂ = (h(x+s) − m(s) + c)/(m(0) − m(s))`` where ``c`` is the
    correction numerator and ``m`` is replaced by ``p`` for cubic models.
    Agrees with ``1 − ratio.rho_hat`` whenever ``h_x`` equals the model's
    ``h_at_x``.
    """
    decrease = model_decrease(model, s)
    model_at_s = model.h_at_x - decrease
    return (h_xs - model_at_s + correction_term(model, s)) / decrease
