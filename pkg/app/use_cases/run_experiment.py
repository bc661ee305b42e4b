import inspect
from collections.abc import Mapping, Sequence
from concurrent.futures import Future, wait
from itertools import groupby, product
from logging import getLogger
from pathlib import Path
from typing import Any, Final, NamedTuple

import numpy as np

from app.core import (
    Algorithm,
    ContractViolationError,
    ExperimentError,
    InexactnessBudget,
    InitFromMapping,
    OptimizerError,
    RunTrace,
    SarcCorrection,
    SizeRule,
    Task,
    ToMapping,
    Variant,
    VariantConfig,
    full_value,
    to_enum,
)
from app.core.variant import (
    DEFAULT_DELTA0,
    DEFAULT_DELTA_MAX,
    DEFAULT_ETA,
    DEFAULT_FRACTION,
    DEFAULT_R1,
    DEFAULT_R2,
    DEFAULT_SIGMA0,
    DEFAULT_SIGMA_MIN,
)
from app.imp import (
    Dataset,
    NllsLogisticProblem,
    dataset_name,
    load_dataset_pair,
    make_synthetic_classification,
)
from app.lib import ConcurrentExecutor, completed_successfully
from app.lib.tolerances import budget_with_derived_tolerances

from .optimizers import Monitor, run_optimizer
from .telemetry import write_run_csv, write_summary_csv
from .types import SummaryRow

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)

SYNTHETIC_DATASET: Final[str] = "synthetic"

SUMMARY_FILE_NAME: Final[str] = "summary.csv"


# =============================================================================
# EXPERIMENT SPEC
# =============================================================================


def _as_tuple(value: Any) -> tuple[Any, ...]:  # noqa: ANN401
    if isinstance(value, str) or not isinstance(value, Sequence):
        return (value,)
    return tuple(value)


class ExperimentSpec(InitFromMapping, ToMapping):
    """A grid of optimizer runs over one or more datasets.

    Every list-valued field is a grid axis; the grid is their product, with
    the STR runs ranging over ``delta0s`` and the SARC runs over
    ``sigma0s``. Scalar fields apply to every grid point.
    """

    def __init__(
        self,
        datasets: Sequence[str],
        algorithms: Sequence[Algorithm | str] = (Algorithm.STR,),
        variants: Sequence[Variant | str] = tuple(Variant),
        fractions: Sequence[float] = (DEFAULT_FRACTION,),
        delta0s: Sequence[float] = (DEFAULT_DELTA0,),
        sigma0s: Sequence[float] = (DEFAULT_SIGMA0,),
        seeds: Sequence[int] = (0,),
        eta: float = DEFAULT_ETA,
        r1: float = DEFAULT_R1,
        r2: float = DEFAULT_R2,
        delta_max: float = DEFAULT_DELTA_MAX,
        sigma_min: float = DEFAULT_SIGMA_MIN,
        eps_grad_target: float = 1e-6,
        eps_hess_target: float = 1e-3,
        eps_g: float = 0.0,
        eps_b: float = 0.0,
        eps_h: float = 0.0,
        derived_tolerances: bool = False,
        size_rule: SizeRule | str = SizeRule.FRACTION,
        sarc_correction: SarcCorrection | str = SarcCorrection.SIGMA,
        budget_props: int | None = None,
        max_iters: int = 1000,
        out_dir: str | Path = "out",
        data_dir: str | Path = "data",
        workers: int = 1,
        record_wall_time: bool = False,
        synthetic_n: int = 20_000,
        synthetic_d: int = 123,
    ):
        self.datasets: tuple[str, ...] = _as_tuple(datasets)
        self.algorithms: tuple[Algorithm, ...] = tuple(
            to_enum(Algorithm, _a) for _a in _as_tuple(algorithms)
        )
        self.variants: tuple[Variant, ...] = tuple(
            to_enum(Variant, _v) for _v in _as_tuple(variants)
        )
        self.fractions: tuple[float, ...] = tuple(
            map(float, _as_tuple(fractions)),
        )
        self.delta0s: tuple[float, ...] = tuple(map(float, _as_tuple(delta0s)))
        self.sigma0s: tuple[float, ...] = tuple(map(float, _as_tuple(sigma0s)))
        self.seeds: tuple[int, ...] = tuple(map(int, _as_tuple(seeds)))
        self.eta: float = float(eta)
        self.r1: float = float(r1)
        self.r2: float = float(r2)
        self.delta_max: float = float(delta_max)
        self.sigma_min: float = float(sigma_min)
        self.eps_grad_target: float = float(eps_grad_target)
        self.eps_hess_target: float = float(eps_hess_target)
        self.eps_g: float = float(eps_g)
        self.eps_b: float = float(eps_b)
        self.eps_h: float = float(eps_h)
        self.derived_tolerances: bool = bool(derived_tolerances)
        self.size_rule: SizeRule = to_enum(SizeRule, size_rule)
        self.sarc_correction: SarcCorrection = to_enum(
            SarcCorrection,
            sarc_correction,
        )
        self.budget_props: int | None = (
            None if budget_props is None else int(budget_props)
        )
        self.max_iters: int = int(max_iters)
        self.out_dir: Path = Path(out_dir)
        self.data_dir: Path = Path(data_dir)
        self.workers: int = int(workers)
        self.record_wall_time: bool = bool(record_wall_time)
        self.synthetic_n: int = int(synthetic_n)
        self.synthetic_d: int = int(synthetic_d)
        self._check_invariants()

    @classmethod
    def of_mapping(cls, mapping: Mapping[str, Any]) -> "ExperimentSpec":
        """Build a spec from a flat mapping such as the ``EXPERIMENT``
        setting. Keys that are not spec fields are ignored."""
        fields = inspect.signature(cls).parameters
        return cls(**{_k: mapping[_k] for _k in fields if _k in mapping})

    def to_mapping(self) -> Mapping[str, Any]:
        return {
            "datasets": list(self.datasets),
            "algorithms": [_a.value for _a in self.algorithms],
            "variants": [_v.value for _v in self.variants],
            "fractions": list(self.fractions),
            "delta0s": list(self.delta0s),
            "sigma0s": list(self.sigma0s),
            "seeds": list(self.seeds),
            "eta": self.eta,
            "r1": self.r1,
            "r2": self.r2,
            "delta_max": self.delta_max,
            "sigma_min": self.sigma_min,
            "eps_grad_target": self.eps_grad_target,
            "eps_hess_target": self.eps_hess_target,
            "eps_g": self.eps_g,
            "eps_b": self.eps_b,
            "eps_h": self.eps_h,
            "derived_tolerances": self.derived_tolerances,
            "size_rule": self.size_rule.value,
            "sarc_correction": self.sarc_correction.value,
            "budget_props": self.budget_props,
            "max_iters": self.max_iters,
            "out_dir": str(self.out_dir),
            "data_dir": str(self.data_dir),
            "workers": self.workers,
            "record_wall_time": self.record_wall_time,
            "synthetic_n": self.synthetic_n,
            "synthetic_d": self.synthetic_d,
        }

    def budget(self, algorithm: Algorithm) -> InexactnessBudget:
        """Return the tolerances of a run, derived from the targets when
        ``derived_tolerances`` is set."""
        budget = InexactnessBudget(
            eps_grad_target=self.eps_grad_target,
            eps_hess_target=self.eps_hess_target,
            eps_g=self.eps_g,
            eps_b=self.eps_b,
            eps_h=self.eps_h,
        )
        if self.derived_tolerances:
            budget = budget_with_derived_tolerances(
                algorithm,
                self.eta,
                budget,
            )
        return budget

    def _check_invariants(self) -> None:
        for axis in ("datasets", "algorithms", "variants", "fractions"):
            if not getattr(self, axis):
                raise ContractViolationError(
                    message='The "%s" grid axis cannot be empty.' % axis,
                )
        if not self.seeds:
            raise ContractViolationError(message="At least one seed needed.")
        if self.workers < 1:
            raise ContractViolationError(message="workers must be >= 1.")
        if self.budget_props is not None and self.budget_props < 1:
            raise ContractViolationError(
                message="budget_props must be a positive integer.",
            )
        if Algorithm.STR in self.algorithms and not all(
            0.0 < _d <= self.delta_max for _d in self.delta0s
        ):
            raise ContractViolationError(
                message="Every delta0 must lie in (0, delta_max = %g]."
                % self.delta_max,
            )
        if Algorithm.SARC in self.algorithms and not all(
            _s >= self.sigma_min > 0.0 for _s in self.sigma0s
        ):
            raise ContractViolationError(
                message="Every sigma0 must be at least sigma_min = %g > 0."
                % self.sigma_min,
            )


class GridPoint(NamedTuple):
    """One run of an experiment grid."""

    dataset: str
    algorithm: Algorithm
    variant: Variant
    fraction: float
    radius_or_penalty: float
    seed: int

    @property
    def file_name(self) -> str:
        return "%s_%s_%s_f%g_r%g_s%d.csv" % (
            dataset_name(Path(self.dataset)),
            self.algorithm.value,
            self.variant.value,
            self.fraction,
            self.radius_or_penalty,
            self.seed,
        )

    def to_config(self, spec: ExperimentSpec) -> VariantConfig:
        is_str = self.algorithm is Algorithm.STR
        # The start value of the other algorithm is unused by the run.
        delta0 = (
            self.radius_or_penalty
            if is_str
            else min(DEFAULT_DELTA0, spec.delta_max)
        )
        sigma0 = (
            max(DEFAULT_SIGMA0, spec.sigma_min)
            if is_str
            else self.radius_or_penalty
        )
        return VariantConfig(
            algorithm=self.algorithm,
            variant=self.variant,
            budget=spec.budget(self.algorithm),
            eta=spec.eta,
            r1=spec.r1,
            r2=spec.r2,
            delta0=delta0,
            delta_max=spec.delta_max,
            sigma0=sigma0,
            sigma_min=spec.sigma_min,
            max_iters=spec.max_iters,
            seed=self.seed,
            size_rule=spec.size_rule,
            fraction=self.fraction,
            sarc_correction=spec.sarc_correction,
            max_props=spec.budget_props,
        )


def expand_grid(spec: ExperimentSpec) -> Sequence[GridPoint]:
    """Return the grid points of a spec in a fixed order.

    The order is datasets, then algorithms, variants, fractions, the
    radius or penalty axis and finally seeds.
    """
    points: list[GridPoint] = []
    for dataset, algorithm in product(spec.datasets, spec.algorithms):
        starts = spec.delta0s if algorithm is Algorithm.STR else spec.sigma0s
        points.extend(
            GridPoint(dataset, algorithm, _v, _f, _r, _s)
            for _v, _f, _r, _s in product(
                spec.variants,
                spec.fractions,
                starts,
                spec.seeds,
            )
        )
    return points


# =============================================================================
# DATA
# =============================================================================


class ExperimentData(NamedTuple):
    """A training problem and its optional held-out split."""

    name: str
    train: Dataset
    test: Dataset | None
    problem: NllsLogisticProblem

    @property
    def has_test_split(self) -> bool:
        return self.test is not None

    def monitor(self) -> Monitor:
        """Return a monitor with the full training loss and, when there is a
        test split, the test misclassification error."""
        problem, test = self.problem, self.test

        def monitor(x: np.ndarray) -> tuple[float, float | None]:
            train_loss = full_value(problem, x)
            if test is None:
                return train_loss, None
            return train_loss, NllsLogisticProblem.misclassification_error(
                x,
                test.features,
                test.labels,
            )

        return monitor


def _test_split_path(path: Path) -> Path:
    if path.suffix == ".gz":
        return path.with_name(path.name.removesuffix(".gz") + ".t.gz")
    return path.with_name(path.name + ".t")


def load_experiment_data(source: str, spec: ExperimentSpec) -> ExperimentData:
    """Load a dataset argument: ``synthetic`` or a LIBSVM file path.

    Relative paths resolve against ``spec.data_dir`` when they do not exist
    as given. A sibling ``<file>.t`` is loaded as the test split.

    :raise DatasetError: If a file cannot be read or parsed.
    """
    if source == SYNTHETIC_DATASET:
        train, test = make_synthetic_classification(
            n=spec.synthetic_n,
            d=spec.synthetic_d,
        )
    else:
        path = Path(source)
        if not path.is_absolute() and not path.exists():
            path = spec.data_dir / path
        test_path = _test_split_path(path)
        train, test = load_dataset_pair(
            path,
            test_path if test_path.exists() else None,
        )
    return ExperimentData(
        name=train.name,
        train=train,
        test=test,
        problem=NllsLogisticProblem.from_dataset(train),
    )


# =============================================================================
# HELPERS
# =============================================================================


def _summary_row(
    point: GridPoint,
    trace: RunTrace | None,
    termination: str,
) -> SummaryRow:
    last = trace.last if trace is not None and trace.records else None
    return {
        "run_file": point.file_name,
        "dataset": dataset_name(Path(point.dataset)),
        "algorithm": point.algorithm.value,
        "variant": point.variant.value,
        "fraction": point.fraction,
        "radius_or_penalty": point.radius_or_penalty,
        "seed": point.seed,
        "iterations": last.iteration if last else 0,
        "cum_props": last.cum_props if last else 0,
        "train_loss": last.train_loss if last else None,
        "test_error": last.test_error if last else None,
        "termination": termination,
    }


# =============================================================================
# HELPER TASKS
# =============================================================================


class RunGridPoint(Task[ExperimentData, SummaryRow]):
    """Run one grid point, write its CSV and return its summary row.

    A run that fails still has its completed iterations written before the
    error is re-raised.
    """

    def __init__(self, point: GridPoint, spec: ExperimentSpec):
        self._point: GridPoint = point
        self._spec: ExperimentSpec = spec

    @property
    def point(self) -> GridPoint:
        return self._point

    def execute(self, an_input: ExperimentData) -> SummaryRow:
        config = self._point.to_config(self._spec)
        _LOGGER.info('Starting run "%s".', self._point.file_name)
        try:
            trace = run_optimizer(
                an_input.problem,
                np.zeros(an_input.problem.d),
                config,
                monitor=an_input.monitor(),
                record_wall_time=self._spec.record_wall_time,
            )
        except OptimizerError as exp:
            if exp.trace is not None:
                self._write(an_input, exp.trace, config)
            raise
        self._write(an_input, trace, config)
        _LOGGER.info(
            'Finished run "%s" (%s).',
            self._point.file_name,
            trace.termination.value if trace.termination else "unknown",
        )
        return _summary_row(
            self._point,
            trace,
            trace.termination.value if trace.termination else "unknown",
        )

    def _write(
        self,
        data: ExperimentData,
        trace: RunTrace,
        config: VariantConfig,
    ) -> Path:
        header = {
            "dataset": data.name,
            "algorithm": config.algorithm.value,
            "variant": config.variant.value,
            "seed": config.seed,
            "fraction": config.fraction,
            "radius_or_penalty": config.radius_or_penalty0,
            "n": data.problem.n,
            "d": data.problem.d,
            "termination": (
                trace.termination.value if trace.termination else "error"
            ),
        }
        return write_run_csv(
            self._spec.out_dir / self._point.file_name,
            trace,
            header,
            include_test_error=data.has_test_split,
        )


# =============================================================================
# MAIN TASKS
# =============================================================================


class ExperimentResult(NamedTuple):
    run_files: Sequence[Path]
    summary_file: Path
    failures: int


class RunExperiment(Task[ExperimentSpec, ExperimentResult]):
    """Run every grid point of a spec and write the summary CSV.

    Datasets are loaded once each; the runs of a dataset share a work pool
    of ``spec.workers`` threads and the summary is written after all of
    them have finished.

    :raise DatasetError: If a dataset cannot be loaded.
    :raise ExperimentError: If any run failed. The summary, and the partial
        CSVs of the failed runs, are still written.
    """

    def execute(self, an_input: ExperimentSpec) -> ExperimentResult:
        spec = an_input
        points = expand_grid(spec)
        _LOGGER.info("Running an experiment of %d runs.", len(points))
        rows: list[SummaryRow] = []
        failures = 0
        for source, group in groupby(points, key=lambda _p: _p.dataset):
            data = load_experiment_data(source, spec)
            tasks = [RunGridPoint(_p, spec) for _p in group]
            executor: ConcurrentExecutor[ExperimentData, SummaryRow]
            executor = ConcurrentExecutor(*tasks, max_workers=spec.workers)
            with executor:
                futures: Sequence[Future[SummaryRow]] = executor(data)
                wait(futures)
            for task, future in zip(tasks, futures, strict=True):
                if completed_successfully(future):
                    rows.append(future.result())
                    continue
                failures += 1
                error = future.exception()
                trace = getattr(error, "trace", None)
                rows.append(_summary_row(task.point, trace, "error"))

        summary = write_summary_csv(spec.out_dir / SUMMARY_FILE_NAME, rows)
        result = ExperimentResult(
            run_files=tuple(spec.out_dir / _p.file_name for _p in points),
            summary_file=summary,
            failures=failures,
        )
        if failures:
            raise ExperimentError(
                message="%d of %d runs failed; see %s."
                % (failures, len(points), summary),
            )
        return result


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run an experiment grid, see :class:`RunExperiment`."""
    return RunExperiment().execute(spec)
