from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .domain import RunTrace


class SNBenchException(Exception):  # noqa: N818
    """Base exception for most explicit exceptions raised by this app."""

    def __init__(self, message: str | None = None, *args):
        """Initialize an ``SNBenchException`` with the given parameters.

        :param message: An optional error message.
        :param args: args to pass to forward to the base exception.
        """
        self._message: str | None = message
        super().__init__(self._message, *args)

    @property
    def message(self) -> str | None:
        """
        Return the error message passed to this exception at initialization
        or ``None`` if one was not given.

        :return: The error message passed to this exception at initialization
            or None if one wasn't given.
        """
        return self._message


class ContractViolationError(SNBenchException, ValueError):
    """
    An exception indicating that a precondition of an operation was not met.
    Examples include dimension mismatches, probabilities outside of their
    valid range or sample sizes larger than the population.
    """


class DatasetError(SNBenchException):
    """
    An exception indicating that a dataset could not be read or is otherwise
    unusable.
    """


class OptimizerError(SNBenchException):
    """
    An exception indicating that an optimizer run was aborted. The iterations
    completed before the failure are available through :attr:`trace` so that
    callers can still persist them.
    """

    def __init__(
        self,
        message: str | None = None,
        trace: "RunTrace | None" = None,
        *args,
    ):
        super().__init__(message, *args)
        self._trace: RunTrace | None = trace

    @property
    def trace(self) -> "RunTrace | None":
        """Return the partial trace of the aborted run, if any."""
        return self._trace


class ExperimentError(SNBenchException):
    """
    An exception indicating that an experiment specification or its outputs
    are invalid, e.g. plot data requested over runs of different datasets.
    """
