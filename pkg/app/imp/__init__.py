from .libsvm import *  # noqa: F403
from .libsvm import __all__ as _all_libsvm
from .problems import *  # noqa: F403
from .problems import __all__ as _all_problems

__all__ = []
__all__ += _all_libsvm  # type: ignore
__all__ += _all_problems  # type: ignore
