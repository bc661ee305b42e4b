from collections.abc import Mapping
from enum import Enum
from typing import Any, Final

from .exceptions import ContractViolationError
from .mixins import InitFromMapping, ToMapping

# =============================================================================
# CONSTANTS
# =============================================================================

DEFAULT_ETA: Final[float] = 0.1

DEFAULT_R1: Final[float] = 0.5

DEFAULT_R2: Final[float] = 2.0

DEFAULT_DELTA0: Final[float] = 8.0

DEFAULT_DELTA_MAX: Final[float] = 1e3

DEFAULT_SIGMA0: Final[float] = 1.0

DEFAULT_SIGMA_MIN: Final[float] = 1e-4

DEFAULT_FRACTION: Final[float] = 0.05

DEFAULT_KAPPA_THETA: Final[float] = 0.5


# =============================================================================
# ENUMS
# =============================================================================


class Algorithm(Enum):
    """The outer loop: trust region or adaptive cubic regularization."""

    STR = "str"
    SARC = "sarc"


class Variant(Enum):
    """Which of the function, gradient and Hessian are subsampled."""

    FULL = "full"
    SH = "sh"
    SHG = "shg"
    SHGF = "shgf"

    @property
    def subsamples_hessian(self) -> bool:
        return self is not Variant.FULL

    @property
    def subsamples_gradient(self) -> bool:
        return self in (Variant.SHG, Variant.SHGF)

    @property
    def subsamples_function(self) -> bool:
        return self is Variant.SHGF


class SizeRule(Enum):
    """How the sample-set sizes are chosen."""

    FRACTION = "fraction"
    THEOREM = "theorem"
    BERNSTEIN = "bernstein"


class SarcCorrection(Enum):
    """The safety correction subtracted from the cubic acceptance ratio."""

    SIGMA = "sigma"
    STEP = "step"


def to_enum(enum_klass: type[Enum], value: Any) -> Any:  # noqa: ANN401
    """Return the member of ``enum_klass`` with the given value.

    Strings are matched case-insensitively.

    :raise ContractViolationError: If ``value`` names no member.
    """
    if isinstance(value, enum_klass):
        return value
    try:
        return enum_klass(str(value).lower())
    except ValueError:
        choices = ", ".join(_m.value for _m in enum_klass)
        raise ContractViolationError(
            message='"%s" is not one of: %s.' % (value, choices),
        ) from None


# =============================================================================
# INEXACTNESS BUDGET
# =============================================================================


class InexactnessBudget(ToMapping):
    """Tolerances of the inexact oracles and of the optimality target.

    ``eps_g``, ``eps_b`` and ``eps_h`` bound the gradient, Hessian and
    function errors; ``eps_grad_target`` and ``eps_hess_target`` define the
    approximate second-order optimality sought. The targets must exceed the
    matching oracle tolerances.
    """

    def __init__(
        self,
        eps_grad_target: float,
        eps_hess_target: float,
        eps_g: float = 0.0,
        eps_b: float = 0.0,
        eps_h: float = 0.0,
        v0: float = 1.0,
        delta: float = 0.1,
    ):
        self.eps_grad_target: float = float(eps_grad_target)
        self.eps_hess_target: float = float(eps_hess_target)
        self.eps_g: float = float(eps_g)
        self.eps_b: float = float(eps_b)
        self.eps_h: float = float(eps_h)
        self.v0: float = float(v0)
        self.delta: float = float(delta)
        self._check_invariants()

    @property
    def grad_threshold(self) -> float:
        """``ε_∇f + ε_g``, the small-gradient threshold."""
        return self.eps_grad_target + self.eps_g

    @property
    def curvature_threshold(self) -> float:
        """``ε_H − ε_B``, the tolerated negative curvature of ``B``."""
        return self.eps_hess_target - self.eps_b

    def to_mapping(self) -> Mapping[str, Any]:
        return {
            "eps_grad_target": self.eps_grad_target,
            "eps_hess_target": self.eps_hess_target,
            "eps_g": self.eps_g,
            "eps_b": self.eps_b,
            "eps_h": self.eps_h,
            "v0": self.v0,
            "delta": self.delta,
        }

    def _check_invariants(self) -> None:
        if min(self.eps_g, self.eps_b, self.eps_h) < 0.0:
            raise ContractViolationError(
                message="The oracle tolerances must be non-negative.",
            )
        if not self.eps_grad_target > self.eps_g:
            raise ContractViolationError(
                message="eps_grad_target must be greater than eps_g.",
            )
        if not self.eps_hess_target > self.eps_b:
            raise ContractViolationError(
                message="eps_hess_target must be greater than eps_b.",
            )
        if not 0.0 < self.v0 <= 1.0:
            raise ContractViolationError(message="v0 must lie in (0, 1].")
        if not 0.0 < self.delta < 1.0:
            raise ContractViolationError(message="delta must lie in (0, 1).")


# =============================================================================
# VARIANT CONFIG
# =============================================================================


class VariantConfig(InitFromMapping, ToMapping):
    """Everything an optimizer run needs besides the problem and ``x0``."""

    def __init__(
        self,
        algorithm: Algorithm | str,
        variant: Variant | str,
        budget: InexactnessBudget,
        eta: float = DEFAULT_ETA,
        r1: float = DEFAULT_R1,
        r2: float = DEFAULT_R2,
        delta0: float = DEFAULT_DELTA0,
        delta_max: float = DEFAULT_DELTA_MAX,
        sigma0: float = DEFAULT_SIGMA0,
        sigma_min: float = DEFAULT_SIGMA_MIN,
        max_iters: int = 1000,
        seed: int = 0,
        size_rule: SizeRule | str = SizeRule.FRACTION,
        fraction: float = DEFAULT_FRACTION,
        sarc_correction: SarcCorrection | str = SarcCorrection.SIGMA,
        kappa_theta: float = DEFAULT_KAPPA_THETA,
        max_props: int | None = None,
        steihaug_max_iter: int | None = None,
        refine_max_iter: int = 100,
        lanczos_tol: float = 1e-6,
    ):
        self.algorithm: Algorithm = to_enum(Algorithm, algorithm)
        self.variant: Variant = to_enum(Variant, variant)
        self.budget: InexactnessBudget = budget
        self.eta: float = float(eta)
        self.r1: float = float(r1)
        self.r2: float = float(r2)
        self.delta0: float = float(delta0)
        self.delta_max: float = float(delta_max)
        self.sigma0: float = float(sigma0)
        self.sigma_min: float = float(sigma_min)
        self.max_iters: int = int(max_iters)
        self.seed: int = int(seed)
        self.size_rule: SizeRule = to_enum(SizeRule, size_rule)
        self.fraction: float = float(fraction)
        self.sarc_correction: SarcCorrection = to_enum(
            SarcCorrection,
            sarc_correction,
        )
        self.kappa_theta: float = float(kappa_theta)
        self.max_props: int | None = (
            None if max_props is None else int(max_props)
        )
        self.steihaug_max_iter: int | None = steihaug_max_iter
        self.refine_max_iter: int = int(refine_max_iter)
        self.lanczos_tol: float = float(lanczos_tol)
        self._check_invariants()

    @property
    def radius_or_penalty0(self) -> float:
        """``Δ₀`` for STR runs, ``σ₀`` for SARC runs."""
        if self.algorithm is Algorithm.STR:
            return self.delta0
        return self.sigma0

    @classmethod
    def of_mapping(cls, mapping: Mapping[str, Any]) -> "VariantConfig":
        """Build a config from a flat mapping.

        The budget entries (``eps_*``, ``v0`` and ``delta``) are read from
        the same flat mapping; unknown keys are ignored.
        """
        budget_keys = (
            "eps_grad_target",
            "eps_hess_target",
            "eps_g",
            "eps_b",
            "eps_h",
            "v0",
            "delta",
        )
        budget = InexactnessBudget(
            **{_k: mapping[_k] for _k in budget_keys if _k in mapping},
        )
        config_keys = (
            "algorithm",
            "variant",
            "eta",
            "r1",
            "r2",
            "delta0",
            "delta_max",
            "sigma0",
            "sigma_min",
            "max_iters",
            "seed",
            "size_rule",
            "fraction",
            "sarc_correction",
            "kappa_theta",
            "max_props",
            "steihaug_max_iter",
            "refine_max_iter",
            "lanczos_tol",
        )
        return cls(
            budget=budget,
            **{_k: mapping[_k] for _k in config_keys if _k in mapping},
        )

    def to_mapping(self) -> Mapping[str, Any]:
        return {
            "algorithm": self.algorithm.value,
            "variant": self.variant.value,
            "eta": self.eta,
            "r1": self.r1,
            "r2": self.r2,
            "delta0": self.delta0,
            "delta_max": self.delta_max,
            "sigma0": self.sigma0,
            "sigma_min": self.sigma_min,
            "max_iters": self.max_iters,
            "seed": self.seed,
            "size_rule": self.size_rule.value,
            "fraction": self.fraction,
            "sarc_correction": self.sarc_correction.value,
            "kappa_theta": self.kappa_theta,
            "max_props": self.max_props,
            **self.budget.to_mapping(),
        }

    def _check_invariants(self) -> None:
        if not 0.0 < self.eta < 1.0:
            raise ContractViolationError(message="eta must lie in (0, 1).")
        if not (0.0 < self.r1 < 1.0 <= self.r2):
            raise ContractViolationError(
                message="The factors must satisfy r2 >= 1 > r1 > 0.",
            )
        if not 0.0 < self.delta0 <= self.delta_max:
            raise ContractViolationError(
                message="The radii must satisfy 0 < delta0 <= delta_max.",
            )
        if not 0.0 < self.sigma_min <= self.sigma0:
            raise ContractViolationError(
                message="The penalties must satisfy 0 < sigma_min <= sigma0.",
            )
        if not 0.0 < self.fraction <= 1.0:
            raise ContractViolationError(
                message="The sample fraction must lie in (0, 1].",
            )
        if not 0.0 < self.kappa_theta < 1.0:
            raise ContractViolationError(
                message="kappa_theta must lie in (0, 1).",
            )
        if self.max_iters < 1:
            raise ContractViolationError(message="max_iters must be >= 1.")
