from .optimizers import (
    Monitor,
    check_termination,
    full_objective_monitor,
    run_optimizer,
    run_sarc,
    run_str,
)
from .plot_data import downsample_rows, emit_plot_data, write_plot_data
from .run_experiment import (
    ExperimentData,
    ExperimentResult,
    ExperimentSpec,
    GridPoint,
    RunExperiment,
    RunGridPoint,
    expand_grid,
    load_experiment_data,
    run_experiment,
)
from .self_check import CheckOutcome, format_outcomes, run_self_check
from .telemetry import (
    SCHEMA_VERSION,
    read_run_csv,
    trace_frame,
    write_run_csv,
    write_summary_csv,
)
from .types import RunHeader, SummaryRow

__all__ = [
    "SCHEMA_VERSION",
    "CheckOutcome",
    "ExperimentData",
    "ExperimentResult",
    "ExperimentSpec",
    "GridPoint",
    "Monitor",
    "RunExperiment",
    "RunGridPoint",
    "RunHeader",
    "SummaryRow",
    "check_termination",
    "downsample_rows",
    "emit_plot_data",
    "expand_grid",
    "format_outcomes",
    "full_objective_monitor",
    "load_experiment_data",
    "read_run_csv",
    "run_experiment",
    "run_optimizer",
    "run_sarc",
    "run_self_check",
    "run_str",
    "trace_frame",
    "write_plot_data",
    "write_run_csv",
    "write_summary_csv",
]
