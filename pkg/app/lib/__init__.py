from .checkers import (
    ensure_greater_than,
    ensure_in_range,
    ensure_not_none,
    ensure_not_none_nor_empty,
    ensure_probability,
)
from .config import *  # noqa: F403
from .config import __all__ as _all_config
from .tasks import *  # noqa: F403
from .tasks import __all__ as _all_tasks

__all__ = [
    "ensure_greater_than",
    "ensure_in_range",
    "ensure_not_none",
    "ensure_not_none_nor_empty",
    "ensure_probability",
]
__all__ += _all_config  # type: ignore
__all__ += _all_tasks  # type: ignore
