"""Propagation-count bookkeeping.

One per-sample function evaluation costs one propagation, a per-sample
gradient two and a per-sample Hessian-vector product two. An iteration
therefore costs ``|S_h| + 2|S_g| + 2γ|S_B|`` where ``γ`` is the number of
applications of the Hessian estimate made by the inner solvers.
"""

from logging import getLogger

from app.core import ContractViolationError

from .sampling import SampleSizes

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)


# =============================================================================
# OPERATIONS
# =============================================================================


def props_for_iteration(sizes: SampleSizes, gamma: int) -> int:
    """Return ``|S_h| + 2|S_g| + 2γ|S_B|``.

    :raise ContractViolationError: If a count is negative.
    """
    if min(sizes.h, sizes.g, sizes.b, gamma) < 0:
        raise ContractViolationError(
            message="Propagation counts cannot be negative.",
        )
    return sizes.h + 2 * sizes.g + 2 * gamma * sizes.b


class PropCounter:
    """The running propagation count of one optimizer run."""

    def __init__(self, budget: int | None = None):
        """
        :param budget: An optional cap on the cumulative count.
        """
        if budget is not None and budget < 0:
            raise ContractViolationError(
                message="The propagation budget cannot be negative.",
            )
        self._budget: int | None = budget
        self._total: int = 0

    @property
    def total(self) -> int:
        return self._total

    def would_exceed(self, sizes: SampleSizes, gamma: int) -> bool:
        """Return ``True`` if charging an iteration would pass the budget."""
        if self._budget is None:
            return False
        return self._total + props_for_iteration(sizes, gamma) > self._budget

    def charge(self, sizes: SampleSizes, gamma: int) -> int:
        """Add an iteration's count to the total and return the count."""
        props = props_for_iteration(sizes, gamma)
        self._total += props
        _LOGGER.debug(
            "Charged %d propagations (gamma=%d), total %d.",
            props,
            gamma,
            self._total,
        )
        return props
