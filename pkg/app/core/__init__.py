from .domain import (
    AbstractDomainObject,
    DatasetStats,
    IterationRecord,
    OracleReport,
    RatioReport,
    RunTrace,
    SampleSets,
    SolutionKind,
    SubproblemSolution,
    TerminationReason,
)
from .exceptions import (
    ContractViolationError,
    DatasetError,
    ExperimentError,
    OptimizerError,
    SNBenchException,
)
from .mixins import Disposable, InitFromMapping, ToMapping
from .operator import SymmetricOperator
from .problem import (
    FiniteSumProblem,
    check_point,
    full_grad,
    full_hvp,
    full_value,
    oracle_bounds,
)
from .task import Task
from .variant import (
    Algorithm,
    InexactnessBudget,
    SarcCorrection,
    SizeRule,
    Variant,
    VariantConfig,
    to_enum,
)

__all__ = [
    "AbstractDomainObject",
    "Algorithm",
    "ContractViolationError",
    "DatasetError",
    "DatasetStats",
    "Disposable",
    "ExperimentError",
    "FiniteSumProblem",
    "InexactnessBudget",
    "InitFromMapping",
    "IterationRecord",
    "OptimizerError",
    "OracleReport",
    "RatioReport",
    "RunTrace",
    "SNBenchException",
    "SampleSets",
    "SarcCorrection",
    "SizeRule",
    "SolutionKind",
    "SubproblemSolution",
    "SymmetricOperator",
    "Task",
    "TerminationReason",
    "ToMapping",
    "Variant",
    "VariantConfig",
    "check_point",
    "full_grad",
    "full_hvp",
    "full_value",
    "oracle_bounds",
    "to_enum",
]
