from abc import ABCMeta, abstractmethod
from typing import Generic, TypeVar

IN = TypeVar("IN")
RT = TypeVar("RT")


class Task(Generic[IN, RT], metaclass=ABCMeta):
    """A unit of work in an experiment, e.g. one optimizer run.

    Tasks are composed into :class:`pipelines <app.lib.Pipeline>` and fanned
    out over a work pool by the :class:`app.lib.ConcurrentExecutor`.
    """

    def __call__(self, an_input: IN) -> RT:
        return self.execute(an_input)

    @abstractmethod
    def execute(self, an_input: IN) -> RT:
        """Run the unit of work on the given input and return its result.

        :param an_input: The input of the task.
        :return: The result of the task.
        """
        ...
