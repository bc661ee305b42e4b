import logging
import sys
from argparse import ArgumentParser, Namespace
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any, Final

import app
from app.__version__ import __title__, __version__
from app.core import (
    Algorithm,
    SarcCorrection,
    SizeRule,
    SNBenchException,
    Variant,
)
from app.use_cases import (
    ExperimentSpec,
    emit_plot_data,
    format_outcomes,
    run_experiment,
    run_self_check,
    write_plot_data,
)
from app.use_cases.plot_data import PLOT_METRICS
from app.use_cases.run_experiment import SUMMARY_FILE_NAME

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = logging.getLogger(__name__)

# Experiment options, as named in the ``EXPERIMENT`` setting, that map to a
# differently named ``ExperimentSpec`` field.
_SPEC_FIELDS: Final[Mapping[str, str]] = {
    "dataset": "datasets",
    "algo": "algorithms",
    "variant": "variants",
    "fraction": "fractions",
    "delta0": "delta0s",
    "sigma0": "sigma0s",
    "seed": "seeds",
    "out": "out_dir",
}

_EXPERIMENT_OPTIONS: Final[Sequence[str]] = (
    "dataset",
    "algo",
    "variant",
    "fraction",
    "delta0",
    "sigma0",
    "seed",
    "eta",
    "r1",
    "r2",
    "delta_max",
    "sigma_min",
    "eps_grad_target",
    "eps_hess_target",
    "eps_g",
    "eps_b",
    "eps_h",
    "derived_tolerances",
    "size_rule",
    "sarc_correction",
    "budget_props",
    "max_iters",
    "out",
    "synthetic_n",
    "synthetic_d",
)


# =============================================================================
# HELPERS
# =============================================================================


def argparse_factory(prog_name: str = __title__) -> ArgumentParser:
    """Returns a new ArgumentParser instance configured for use with this app.

    Experiment flags default to ``None`` so that values from the config file
    are only replaced by flags that were actually given.

    :param prog_name: An optional name to be used as the program name.
    :return: An ArgumentParser instance for use with this app.
    """

    parser = ArgumentParser(
        prog=prog_name,
        description=(
            "Run stochastic trust-region (STR) and adaptive cubic "
            "regularization (SARC) experiments with subsampled function, "
            "gradient and Hessian estimates and write CSV telemetry."
        ),
    )
    parser.add_argument(
        "-c",
        "--config",
        help=(
            "The location of the application config file. Only yaml files are "
            "supported currently."
        ),
        type=str,
    )

    grid = parser.add_argument_group("experiment grid")
    grid.add_argument(
        "--dataset",
        nargs="+",
        help='LIBSVM dataset files, relative to the data directory, or '
        '"synthetic".',
    )
    grid.add_argument(
        "--algo",
        nargs="+",
        choices=[_a.value for _a in Algorithm],
        help="The outer loops to run.",
    )
    grid.add_argument(
        "--variant",
        nargs="+",
        choices=[_v.value for _v in Variant],
        help="Which estimates are subsampled.",
    )
    grid.add_argument("--fraction", nargs="+", type=float)
    grid.add_argument(
        "--delta0",
        nargs="+",
        type=float,
        help="Initial trust-region radii.",
    )
    grid.add_argument(
        "--sigma0",
        nargs="+",
        type=float,
        help="Initial cubic penalties.",
    )
    grid.add_argument("--seed", nargs="+", type=int)

    hyper = parser.add_argument_group("hyperparameters")
    hyper.add_argument("--eta", type=float, help="Acceptance threshold.")
    hyper.add_argument("--r1", type=float, help="Shrink factor.")
    hyper.add_argument("--r2", type=float, help="Expansion factor.")
    hyper.add_argument("--delta-max", type=float)
    hyper.add_argument("--sigma-min", type=float)
    hyper.add_argument("--eps-grad-target", type=float)
    hyper.add_argument("--eps-hess-target", type=float)
    hyper.add_argument("--eps-g", type=float)
    hyper.add_argument("--eps-b", type=float)
    hyper.add_argument("--eps-h", type=float)
    hyper.add_argument(
        "--lemma-tolerances",
        "--derived-tolerances",
        dest="derived_tolerances",
        action="store_const",
        const=True,
        help="Derive eps_g, eps_b and eps_h from eta and the targets.",
    )
    hyper.add_argument(
        "--size-rule",
        choices=[_r.value for _r in SizeRule],
    )
    hyper.add_argument(
        "--sarc-correction",
        choices=[_c.value for _c in SarcCorrection],
    )

    run = parser.add_argument_group("run control")
    run.add_argument(
        "--budget-props",
        type=int,
        help="Stop a run before it exceeds this many propagations.",
    )
    run.add_argument("--max-iters", type=int)
    run.add_argument(
        "--out",
        type=str,
        help="The output directory of the run and summary CSVs.",
    )
    run.add_argument("--workers", type=int, help="Concurrent runs.")
    run.add_argument("--synthetic-n", type=int)
    run.add_argument("--synthetic-d", type=int)

    modes = parser.add_argument_group("other modes")
    modes.add_argument(
        "--self-check",
        action="store_true",
        help="Run the oracle battery and print a pass/fail table.",
    )
    modes.add_argument(
        "--plot-data",
        choices=list(PLOT_METRICS),
        help="Combine the run CSVs of the output directory into plot data.",
    )
    modes.add_argument(
        "--downsample",
        type=int,
        help="Keep at most this many rows per run in the plot data.",
    )

    parser.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        help="Only log warnings and errors.",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log every iteration (default: %(default)d).",
    )
    parser.add_argument(
        "--version",
        action="version",
        version="%(prog)s " + __version__,
    )

    return parser


def settings_from_args(args: Namespace) -> Mapping[str, Any]:
    """Return the settings overrides given on the command line."""
    experiment = {
        _option: getattr(args, _option)
        for _option in _EXPERIMENT_OPTIONS
        if getattr(args, _option, None) is not None
    }
    overrides: dict[str, Any] = {"EXPERIMENT": experiment}
    if args.workers is not None:
        overrides["WORKERS"] = args.workers
    return overrides


def experiment_spec_factory() -> ExperimentSpec:
    """Build the experiment spec from the current ``app.settings``.

    :raise ContractViolationError: If no dataset was configured or an option
        is invalid.
    """
    options: dict[str, Any] = {
        _SPEC_FIELDS.get(_k, _k): _v
        for _k, _v in app.settings.EXPERIMENT.items()
    }
    options.setdefault("datasets", ())
    options["data_dir"] = app.settings.DATA_DIR
    options["workers"] = app.settings.WORKERS
    options["record_wall_time"] = not app.settings.REPRODUCIBLE
    return ExperimentSpec.of_mapping(options)


def _configure_verbosity(args: Namespace) -> None:
    if args.quiet:
        logging.getLogger("app").setLevel(logging.WARNING)
    elif args.verbose:
        logging.getLogger("app").setLevel(logging.DEBUG)


def _plot_data(args: Namespace) -> int:
    out_dir = Path(app.settings.experiment_option("out", "out"))
    paths = sorted(
        _p for _p in out_dir.glob("*.csv")
        if _p.name != SUMMARY_FILE_NAME and not _p.name.startswith("plot_")
    )
    frame = emit_plot_data(paths, args.plot_data, downsample=args.downsample)
    target = out_dir / ("plot_%s.csv" % args.plot_data)
    write_plot_data(frame, target)
    print(target)  # noqa: T201
    return 0


def _self_check() -> int:
    outcomes = run_self_check()
    print(format_outcomes(outcomes))  # noqa: T201
    return 0 if all(_o.report.passed for _o in outcomes) else 1


# =============================================================================
# MAIN
# =============================================================================


def main(argv: Sequence[str] | None = None) -> int:
    """
    The main entry point for this tool.

    :param argv: The command-line arguments; ``sys.argv`` when omitted.

    :return: The exit code, 0 on success.
    """

    parser = argparse_factory()
    args = parser.parse_args(argv)

    try:
        app.setup(
            initial_settings=settings_from_args(args),
            config_file_path=args.config,
        )
        _configure_verbosity(args)
        if args.self_check:
            return _self_check()
        if args.plot_data:
            return _plot_data(args)
        result = run_experiment(experiment_spec_factory())
    except SNBenchException as exp:
        _LOGGER.error("%s", exp.message)
        return 1
    print(result.summary_file)  # noqa: T201
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
