from collections.abc import Sequence
from functools import reduce
from typing import Any, Generic, TypeVar, cast

from app.core import Task

# =============================================================================
# TYPES
# =============================================================================


_IN = TypeVar("_IN")
_RT = TypeVar("_RT")


# =============================================================================
# TASK COMPOSITION
# =============================================================================


class Pipeline(Generic[_IN, _RT], Task[_IN, _RT]):
    """Run tasks in order, feeding each the output of the previous one."""

    def __init__(self, *tasks: Task[Any, Any]):
        from app.lib import ensure_not_none_nor_empty

        ensure_not_none_nor_empty(tasks, '"tasks" cannot be None or empty.')
        self._tasks: Sequence[Task[Any, Any]] = tuple(tasks)

    @property
    def tasks(self) -> Sequence[Task[Any, Any]]:
        return self._tasks

    def execute(self, an_input: _IN) -> _RT:
        return cast(
            _RT,
            reduce(
                lambda _acc, _tsk: _tsk.execute(_acc),
                self._tasks[1:],
                self._tasks[0].execute(an_input),
            ),
        )
