from abc import ABCMeta, abstractmethod
from typing import Any

from app.core import Task


class SettingInitializer(Task[Any, Any], metaclass=ABCMeta):
    """A task that validates, normalises or defaults a single setting.

    It receives the raw value of :attr:`setting` (``None`` when absent) and
    returns the value the session should use. Initializers run once, while
    the :class:`~app.lib.config.Config` is being built.
    """

    @property
    @abstractmethod
    def setting(self) -> str:
        """The name of the setting this initializer handles."""
