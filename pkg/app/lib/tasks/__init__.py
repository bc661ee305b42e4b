from .common import Pipeline
from .concurrent import (
    ConcurrentExecutor,
    ConcurrentExecutorDisposedError,
    completed_successfully,
)

__all__ = [
    "ConcurrentExecutor",
    "ConcurrentExecutorDisposedError",
    "Pipeline",
    "completed_successfully",
]
