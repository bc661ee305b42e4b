import math
from collections.abc import Sized
from typing import SupportsFloat, TypeVar

from app.core import ContractViolationError

# =============================================================================
# TYPES
# =============================================================================


_S = TypeVar("_S", bound=Sized)

_T = TypeVar("_T")


# =============================================================================
# CHECKERS
# =============================================================================


def ensure_greater_than(
    value: SupportsFloat,
    base_value: SupportsFloat,
    message: str = '"value" must be greater than "base_value".',
) -> float:
    """Check that the given value is strictly greater than a base value.

    :param value: The value to check.
    :param base_value: The exclusive lower bound.
    :param message: An optional error message.

    :return: ``value`` as a float if it is greater than ``base_value``.

    :raise ContractViolationError: If ``value`` is less than or equal to
        ``base_value`` or is not a number.
    """
    _value = float(value)
    if math.isnan(_value) or not _value > float(base_value):
        raise ContractViolationError(message=message)
    return _value


def ensure_in_range(
    value: SupportsFloat,
    low: SupportsFloat,
    high: SupportsFloat,
    message: str = '"value" is out of range.',
    *,
    low_inclusive: bool = False,
    high_inclusive: bool = True,
) -> float:
    """Check that a value lies within an interval.

    By default the interval is ``(low, high]``.

    :param value: The value to check.
    :param low: The lower end of the interval.
    :param high: The upper end of the interval.
    :param message: An optional error message.
    :param low_inclusive: Whether ``low`` itself is allowed.
    :param high_inclusive: Whether ``high`` itself is allowed.

    :return: ``value`` as a float.

    :raise ContractViolationError: If ``value`` lies outside the interval.
    """
    _value, _low, _high = float(value), float(low), float(high)
    above = _value >= _low if low_inclusive else _value > _low
    below = _value <= _high if high_inclusive else _value < _high
    if not (above and below):
        raise ContractViolationError(message=message)
    return _value


def ensure_probability(
    value: SupportsFloat,
    message: str = '"value" must be a probability in (0, 1).',
) -> float:
    """Check that a value is a probability strictly between 0 and 1."""
    return ensure_in_range(value, 0.0, 1.0, message, high_inclusive=False)


def ensure_not_none(
    value: _T | None,
    message: str = '"value" cannot be None.',
) -> _T:
    """Check that a given value is not ``None``.

    :param value: The value to check.
    :param message: An optional error message.

    :return: The given value if the value isn't ``None``.

    :raise ContractViolationError: If the given value is ``None``.
    """
    if value is None:
        raise ContractViolationError(message=message)
    return value


def ensure_not_none_nor_empty(
    value: _S,
    message: str = '"value" cannot be None or empty.',
) -> _S:
    """Check that a sized value is neither ``None`` nor empty.

    :param value: The value to check.
    :param message: An optional error message.

    :return: The given value if it isn't ``None`` or empty.

    :raise ContractViolationError: If the given value is ``None`` or empty.
    """
    if len(ensure_not_none(value, message=message)) == 0:
        raise ContractViolationError(message=message)
    return value
