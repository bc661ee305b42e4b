from abc import ABCMeta, abstractmethod
from collections.abc import Mapping
from contextlib import AbstractContextManager
from types import TracebackType
from typing import Any

# =============================================================================
# MIXINS
# =============================================================================


class Disposable(AbstractContextManager, metaclass=ABCMeta):
    """An entity holding resources, such as a worker pool, to be released."""

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: TracebackType | None,
    ) -> bool | None:
        self.dispose()
        return False

    @property
    @abstractmethod
    def is_disposed(self) -> bool:
        """Return ``True`` once :meth:`dispose` has been called."""
        ...

    @abstractmethod
    def dispose(self) -> None:
        """Release the underlying resources.

        Must be idempotent; using the object afterwards is an error.

        :return: None.
        """
        ...


class InitFromMapping(metaclass=ABCMeta):
    """
    Objects that can be built from a flat mapping, e.g. the ``EXPERIMENT``
    section of a config file or parsed command-line options.
    """

    @classmethod
    @abstractmethod
    def of_mapping(cls, mapping: Mapping[str, Any]) -> object:
        """Build and return an instance from the given mapping.

        :param mapping: The serialized state of the object.

        :return: the initialized object.
        """
        ...


class ToMapping(metaclass=ABCMeta):
    """Objects that can serialize their state into a flat mapping.

    The mapping is used for CSV rows and run file headers.
    """

    @abstractmethod
    def to_mapping(self) -> Mapping[str, Any]:
        """Return a mapping describing this object's state."""
        ...
