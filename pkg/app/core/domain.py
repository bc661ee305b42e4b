from abc import ABCMeta
from collections.abc import Mapping, Sequence
from enum import Enum
from functools import cache
from typing import Any, TypeVar

import numpy as np
from typing_inspect import is_optional_type

from .mixins import ToMapping

# =============================================================================
# TYPES
# =============================================================================


_ADO = TypeVar("_ADO", bound="AbstractDomainObject")


# =============================================================================
# HELPERS
# =============================================================================


@cache
def _get_available_annotations(do_klass: type[_ADO]) -> Mapping[str, Any]:
    """Extract all annotations available on a domain object class.

    This includes all annotations defined on the class's ancestors.

    :param do_klass: A class inheriting from ``AbstractDomainObject``.

    :return: A mapping of the extracted annotations.
    """
    return {
        field_name: field_type
        for klass in reversed(do_klass.mro())
        if "__annotations__" in vars(klass)
        for field_name, field_type in vars(klass)["__annotations__"].items()
    }


@cache
def _get_required_fields_names(do_klass: type[_ADO]) -> Sequence[str]:
    """Return the names of the fields not typed as optional on a class.

    :param do_klass: A class inheriting from ``AbstractDomainObject``.

    :return: A sequence of the required field names of a domain object class.
    """
    available_annotations: Mapping[str, Any] = _get_available_annotations(
        do_klass=do_klass,
    )
    return tuple(
        field_name
        for field_name, field_type in available_annotations.items()
        if not is_optional_type(field_type)
    )


# =============================================================================
# BASE DOMAIN OBJECT
# =============================================================================


class AbstractDomainObject(metaclass=ABCMeta):  # noqa: B024
    """The base class for the records exchanged between the app's layers."""

    def __init__(self, **kwargs: Any):  # noqa: ANN401
        """
        Initialize a domain object and set the object's fields using the
        provided kwargs. Fields without annotations are ignored. Fields whose
        annotation is not optional must be provided.

        :param kwargs: fields and their values to set on the created object.

        :raise ValueError: if a required field isn't provided in the kwargs.
        """
        required_fields: Sequence[str] = self.__class__.get_required_fields()
        missing = set(required_fields).difference(set(kwargs.keys()))
        if missing:
            err_msg: str = "The following values are required: %s" % ", ".join(
                sorted(missing),
            )
            raise ValueError(err_msg)

        for valid_field in _get_available_annotations(self.__class__):
            setattr(self, valid_field, kwargs.get(valid_field))

    @classmethod
    def get_required_fields(cls) -> Sequence[str]:
        """Return a sequence of the required fields for this class.

        :return: a sequence of the required fields for this class.
        """
        return _get_required_fields_names(cls)


# =============================================================================
# ENUMS
# =============================================================================


class SolutionKind(Enum):
    """How a subproblem step was produced."""

    CAUCHY_TR = "cauchy_tr"
    STEIHAUG = "steihaug"
    CAUCHY_ARC = "cauchy_arc"
    REFINED_ARC = "refined_arc"
    NEG_CURV = "neg_curv"


class TerminationReason(Enum):
    """Why an optimizer run stopped."""

    GRAD_AND_CURVATURE = "grad_and_curvature"
    MAX_ITERS = "max_iters"
    STALLED = "stalled"
    BUDGET = "budget"


# =============================================================================
# RECORDS
# =============================================================================


class SampleSets(AbstractDomainObject):
    """The index collections used by one iteration.

    Every collection is sorted ascending and free of duplicates. When
    ``coupled`` is set, ``s_h`` holds the same indices as ``s_g``.
    """

    s_h: np.ndarray
    s_g: np.ndarray
    s_b: np.ndarray
    coupled: bool

    @property
    def sizes(self) -> tuple[int, int, int]:
        """Return ``(|S_h|, |S_g|, |S_B|)``."""
        return len(self.s_h), len(self.s_g), len(self.s_b)

    def couple(self) -> "SampleSets":
        """Return a copy of these sets where the function set is ``s_g``."""
        return SampleSets(
            s_h=self.s_g.copy(),
            s_g=self.s_g,
            s_b=self.s_b,
            coupled=True,
        )


class RatioReport(AbstractDomainObject):
    """Actual versus predicted decrease of one trial step."""

    model_decrease: float
    actual_decrease: float
    rho_tilde: float
    rho_hat: float
    degenerate: bool


class SubproblemSolution(AbstractDomainObject):
    """The step returned by an inner solver and its diagnostics.

    ``hvp_count`` is the number of B-operator applications spent, the
    ``gamma`` of the propagation count.
    """

    s: np.ndarray
    hvp_count: int
    kind: SolutionKind
    predicted_decrease: float
    boundary_hit: bool
    residual_norm: float | None
    # ``False`` when an iteration cap was hit or, for the cubic refinement,
    # when the stationarity conditions could not be certified.
    converged: bool
    theta: float | None


class IterationRecord(AbstractDomainObject, ToMapping):
    """Per-iteration telemetry of an optimizer run."""

    iteration: int
    cum_props: int
    props: int
    train_loss: float
    test_error: float | None
    rho_tilde: float
    rho_hat: float
    accepted: bool
    delta_or_sigma: float
    step_norm: float
    gamma: int
    size_h: int
    size_g: int
    size_b: int
    coupled: bool
    grad_norm: float
    theta: float | None
    kind: str | None
    wall_ms: float | None

    def to_mapping(self) -> Mapping[str, Any]:
        return {
            "iter": self.iteration,
            "cum_props": self.cum_props,
            "train_loss": self.train_loss,
            "test_error": self.test_error,
            "rho_tilde": self.rho_tilde,
            "rho_hat": self.rho_hat,
            "accepted": self.accepted,
            "delta_or_sigma": self.delta_or_sigma,
            "step_norm": self.step_norm,
            "gamma": self.gamma,
            "size_h": self.size_h,
            "size_g": self.size_g,
            "size_b": self.size_b,
            "coupled": self.coupled,
            "grad_norm": self.grad_norm,
            "theta": self.theta,
            "kind": self.kind,
            "props": self.props,
            "wall_ms": self.wall_ms,
        }


class RunTrace(AbstractDomainObject):
    """The ordered iteration records of one run and how it ended."""

    records: list[IterationRecord]
    x_final: np.ndarray
    termination: TerminationReason | None

    @property
    def last(self) -> IterationRecord:
        return self.records[-1]

    @property
    def total_props(self) -> int:
        return self.records[-1].cum_props if self.records else 0


class OracleReport(AbstractDomainObject):
    """The comparison of a candidate value against a reference oracle."""

    reference: Any
    candidate: Any
    abs_gap: float
    rel_gap: float
    tolerance: float
    passed: bool

    @classmethod
    def compare(
        cls,
        reference: Any,  # noqa: ANN401
        candidate: Any,  # noqa: ANN401
        tolerance: float,
        floor: float = 1e-12,
    ) -> "OracleReport":
        """Build a report from the gap between two values or arrays.

        The relative gap is measured against ``max(‖reference‖, floor)`` and
        the report passes when it is within ``tolerance``.
        """
        ref = np.asarray(reference, dtype=float)
        cand = np.asarray(candidate, dtype=float)
        abs_gap = float(np.linalg.norm(np.ravel(ref - cand)))
        rel_gap = abs_gap / max(float(np.linalg.norm(np.ravel(ref))), floor)
        return cls(
            reference=reference,
            candidate=candidate,
            abs_gap=abs_gap,
            rel_gap=rel_gap,
            tolerance=tolerance,
            passed=rel_gap <= tolerance,
        )


class DatasetStats(AbstractDomainObject, ToMapping):
    """Exact size statistics of a dataset."""

    n: int
    d: int
    nnz: int
    label_balance: float

    def to_mapping(self) -> Mapping[str, Any]:
        return {
            "n": self.n,
            "d": self.d,
            "nnz": self.nnz,
            "label_balance": self.label_balance,
        }
