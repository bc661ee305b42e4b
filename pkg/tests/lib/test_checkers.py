from typing import TYPE_CHECKING, SupportsFloat

import pytest

from app.core import ContractViolationError
from app.lib import (
    ensure_greater_than,
    ensure_in_range,
    ensure_not_none,
    ensure_not_none_nor_empty,
    ensure_probability,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence


def test_ensure_greater_than_return_value_on_valid_input() -> None:
    """
    Assert ``ensure_greater_than`` returns the input value as a float if the
    given ``value`` is greater than the given ``base_value``.
    """

    assert ensure_greater_than(1, 0) == 1.0
    assert ensure_greater_than(-0.0, -1.0) == 0.0
    assert ensure_greater_than(1e-300, 0.0) == 1e-300
    assert isinstance(ensure_greater_than(3, 2), float)


def test_ensure_greater_than_fails_on_invalid_input() -> None:
    """
    Assert ``ensure_greater_than`` raises ``ContractViolationError`` when
    the given ``value`` is not greater than the given ``base_value`` or is
    not a number.
    """

    inputs: Iterable[tuple[SupportsFloat, SupportsFloat]] = (
        (0, 1),
        (0, 0),
        (-1.0, -0.0),
        (float("nan"), 0.0),
    )
    for value, base_value in inputs:
        message = "%s must be greater than %s" % (value, base_value)
        with pytest.raises(ContractViolationError) as exp_info:
            ensure_greater_than(value, base_value, message=message)

        assert exp_info.value.message == message


def test_ensure_in_range_endpoints() -> None:
    """
    Assert ``ensure_in_range`` honours the inclusiveness of each endpoint,
    ``(low, high]`` by default.
    """
    assert ensure_in_range(1.0, 0.0, 1.0) == 1.0
    assert ensure_in_range(0.0, 0.0, 1.0, low_inclusive=True) == 0.0

    with pytest.raises(ContractViolationError, match="out of range"):
        ensure_in_range(0.0, 0.0, 1.0)
    with pytest.raises(ContractViolationError, match="Invalid"):
        ensure_in_range(1.0, 0.0, 1.0, "Invalid.", high_inclusive=False)


def test_ensure_probability() -> None:
    """
    Assert ``ensure_probability`` accepts values strictly between 0 and 1
    only.
    """
    assert ensure_probability(0.1) == 0.1

    for value in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(ContractViolationError, match="probability"):
            ensure_probability(value)


def test_ensure_not_none_returns_input_value_if_valid() -> None:
    """
    Assert ``ensure_not_none`` returns the input value if the input is not
    ``None``.
    """
    value1: Sequence[int] = [1, 2, 3]
    value2: int = 0
    value3: bool = False

    assert ensure_not_none(value1) is value1
    assert ensure_not_none(value2) == value2
    assert ensure_not_none(value3) == value3


def test_ensure_not_none_fails_on_invalid_input() -> None:
    """
    Assert that ``ensure_not_none`` raises ``ContractViolationError`` when
    given a ``None`` value as input.
    """
    with pytest.raises(ValueError, match="cannot be None") as exp_info1:
        ensure_not_none(None)
    with pytest.raises(ValueError, match="Invalid") as exp_info2:
        ensure_not_none(None, message="Invalid.")

    assert exp_info1.value.args[0] == '"value" cannot be None.'
    assert exp_info2.value.args[0] == "Invalid."


def test_ensure_not_none_nor_empty() -> None:
    """
    Assert that ``ensure_not_none_nor_empty`` returns non-empty values and
    rejects ``None`` and empty ones.
    """
    assert ensure_not_none_nor_empty("a9a") == "a9a"

    with pytest.raises(ValueError, match="cannot be None or emp"):
        ensure_not_none_nor_empty(None)  # type: ignore
    with pytest.raises(ValueError, match="Invalid"):
        ensure_not_none_nor_empty((), message="Invalid.")
