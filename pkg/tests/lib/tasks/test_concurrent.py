from concurrent.futures import Executor, ThreadPoolExecutor, wait
from typing import TYPE_CHECKING

import numpy as np
import pytest

from app.core import ContractViolationError, Task
from app.lib import (
    ConcurrentExecutor,
    ConcurrentExecutorDisposedError,
    completed_successfully,
)
from tests import TestCase

if TYPE_CHECKING:
    from collections.abc import Sequence


# =============================================================================
# HELPERS
# =============================================================================


class _SeededDraw(Task[int, float]):
    """
    A task that draws one number from a generator seeded with its own seed
    plus the shared input, the way each grid point owns its generator.
    """

    def __init__(self, seed: int):
        self._seed: int = seed

    def execute(self, an_input: int) -> float:
        return float(np.random.default_rng(self._seed + an_input).random())


class _FailingRun(Task[int, float]):
    """A task that always fails like an aborted optimizer run."""

    def execute(self, an_input: int) -> float:
        raise ContractViolationError(message="Run %d failed." % an_input)


# =============================================================================
# TEST CASES
# =============================================================================


class TestConcurrentExecutor(TestCase):
    """Tests for the ``ConcurrentExecutor`` class."""

    def setUp(self) -> None:
        super().setUp()
        self._tasks: Sequence[_SeededDraw] = tuple(
            _SeededDraw(_s) for _s in range(8)
        )
        self._instance: ConcurrentExecutor[int, float] = ConcurrentExecutor(
            *self._tasks,
            max_workers=4,
        )

    def tearDown(self) -> None:
        super().tearDown()
        self._instance.dispose()

    def test_dispose_method_idempotency(self) -> None:
        """
        Assert that the ``dispose`` method can be called multiple times
        without failing.
        """
        for _ in range(3):
            self._instance.dispose()

        assert self._instance.is_disposed

    def test_dispose_shuts_down_a_supplied_executor(self) -> None:
        """
        Assert that disposing shuts down an executor given at construction.
        """
        executor_service: Executor = ThreadPoolExecutor()
        instance: ConcurrentExecutor[int, float] = ConcurrentExecutor(
            _SeededDraw(0),
            executor=executor_service,
        )
        instance.dispose()

        assert instance.is_disposed
        with pytest.raises(RuntimeError):
            executor_service.submit(_SeededDraw(1).execute, 1)

    def test_futures_follow_the_task_order(self) -> None:
        """
        Assert that the futures are returned in task order and that the
        results do not depend on the pool size.
        """
        futures = self._instance.execute(100)
        wait(futures)
        with ConcurrentExecutor(*self._tasks, max_workers=1) as serial:
            expected = [_f.result() for _f in serial(100)]

        assert [_f.result() for _f in futures] == expected

    def test_failures_are_kept_in_their_futures(self) -> None:
        """
        Assert that a failing task does not prevent the others from
        completing and that its error is available from its future.
        """
        with ConcurrentExecutor(
            _SeededDraw(0),
            _FailingRun(),
            _SeededDraw(1),
        ) as executor:
            futures = executor(7)
            wait(futures)

        assert [completed_successfully(_f) for _f in futures] == [
            True,
            False,
            True,
        ]
        assert isinstance(futures[1].exception(), ContractViolationError)
        assert futures[1].exception().message == "Run 7 failed."

    def test_max_workers_must_be_positive(self) -> None:
        """Assert that a pool of no workers is rejected."""
        with pytest.raises(ContractViolationError, match="max_workers"):
            ConcurrentExecutor(_SeededDraw(0), max_workers=0)

    def test_tasks_return_value(self) -> None:
        """
        Assert that the ``tasks`` property returns the tasks given to the
        instance during initialization.
        """
        assert tuple(self._tasks) == tuple(self._instance.tasks)

    def test_using_a_disposed_executor_raises_expected_errors(self) -> None:
        """
        Assert that using a disposed concurrent executor instance results in
        ``ConcurrentExecutorDisposedError`` being raised.
        """
        self._instance.dispose()
        with pytest.raises(ConcurrentExecutorDisposedError):
            self._instance.execute(10)
        with pytest.raises(ConcurrentExecutorDisposedError):
            self._instance.__enter__()
