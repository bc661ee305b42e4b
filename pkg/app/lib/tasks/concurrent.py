from collections.abc import Sequence
from concurrent.futures import Executor, Future, ThreadPoolExecutor
from logging import getLogger
from typing import Any, Generic, TypeVar

from app.core import Disposable, SNBenchException, Task

# =============================================================================
# TYPES
# =============================================================================


_IN = TypeVar("_IN")

_RT = TypeVar("_RT")


# =============================================================================
# CONSTANTS
# =============================================================================


_LOGGER = getLogger(__name__)


# =============================================================================
# HELPERS
# =============================================================================


def completed_successfully(future: Future[Any]) -> bool:
    """Return ``True`` if a future finished without being cancelled or
    raising.

    :param future: The future to inspect.

    :return: ``True`` if the future completed successfully.
    """
    return bool(
        future.done()
        and not future.cancelled()
        and future.exception() is None,
    )


class ConcurrentExecutorDisposedError(SNBenchException):
    """A disposed :class:`ConcurrentExecutor` was used."""

    def __init__(self, message: str | None = "ConcurrentExecutor disposed."):
        super().__init__(message=message)


# =============================================================================
# TASK
# =============================================================================


class ConcurrentExecutor(
    Generic[_IN, _RT],
    Task[_IN, Sequence["Future[_RT]"]],
    Disposable,
):
    """Run independent tasks that share an input on a work pool.

    The result is the list of futures in the order the tasks were given,
    so callers can join on them and map results back to their grid points.
    Each optimizer run owns its own random generator, so runs never share
    mutable state.

    .. note::
        A ``ThreadPoolExecutor`` is used by default. The heavy lifting of a
        run happens inside numpy and scipy, which release the GIL for most
        linear algebra. A ``ProcessPoolExecutor`` can be supplied instead
        through ``executor`` when tasks and their inputs are picklable.
    """

    def __init__(
        self,
        *tasks: Task[_IN, _RT],
        max_workers: int = 1,
        executor: Executor | None = None,
    ):
        """
        :param tasks: The tasks to run.
        :param max_workers: The size of the default thread pool.
        :param executor: An optional executor to use instead of the default.
        """
        from app.lib import ensure_greater_than

        ensure_greater_than(
            max_workers,
            0,
            message='"max_workers" must be a positive integer.',
        )
        self._tasks: Sequence[Task[_IN, _RT]] = tuple(tasks)
        self._executor: Executor = executor or ThreadPoolExecutor(
            max_workers=max_workers,
        )
        self._is_disposed: bool = False

    def __enter__(self) -> "ConcurrentExecutor[_IN, _RT]":
        self._ensure_not_disposed()
        return self

    @property
    def is_disposed(self) -> bool:
        return self._is_disposed

    @property
    def tasks(self) -> Sequence[Task[_IN, _RT]]:
        return self._tasks

    def dispose(self) -> None:
        self._executor.shutdown(wait=True)
        self._is_disposed = True

    def execute(self, an_input: _IN) -> Sequence[Future[_RT]]:
        self._ensure_not_disposed()
        return [
            self._executor.submit(self._do_execute_task, _task, an_input)
            for _task in self._tasks
        ]

    def _ensure_not_disposed(self) -> None:
        if self._is_disposed:
            raise ConcurrentExecutorDisposedError()

    @staticmethod
    def _do_execute_task(task: Task[_IN, _RT], an_input: _IN) -> _RT:
        try:
            return task.execute(an_input)
        except Exception as exp:
            _LOGGER.error(
                'Error while executing task of type="%s.%s".',
                task.__module__,
                task.__class__.__name__,
                exc_info=exp,
            )
            raise
