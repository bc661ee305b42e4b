import sys
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd
import pytest

from app.core import (
    Algorithm,
    ContractViolationError,
    DatasetError,
    ExperimentError,
    OptimizerError,
    Variant,
)
from app.imp import make_synthetic_classification, serialize_libsvm
from app.use_cases import (
    ExperimentSpec,
    GridPoint,
    expand_grid,
    load_experiment_data,
    read_run_csv,
    run_experiment,
)
from app.use_cases.telemetry import SUMMARY_COLUMNS
from tests import TestCase

# =============================================================================
# HELPERS
# =============================================================================


def _tiny_spec(out_dir: Path, **overrides: object) -> ExperimentSpec:
    """A two-algorithm grid on a small synthetic dataset."""
    fields = {
        "datasets": ["synthetic"],
        "algorithms": ["str", "sarc"],
        "variants": ["full", "shgf"],
        "fractions": [0.1],
        "delta0s": [1.0],
        "sigma0s": [1.0],
        "seeds": [0],
        "max_iters": 4,
        "out_dir": out_dir,
        "synthetic_n": 120,
        "synthetic_d": 6,
    }
    fields.update(overrides)
    return ExperimentSpec.of_mapping(fields)


def _write_libsvm_pair(directory: Path, with_test: bool) -> Path:
    train, test = make_synthetic_classification(
        n=80,
        d=5,
        density=0.5,
        seed=4,
        test_fraction=0.25,
    )
    path = directory / "toy"
    with path.open("w", encoding="utf-8") as stream:
        serialize_libsvm(train, stream)
    if with_test:
        assert test is not None
        with (directory / "toy.t").open("w", encoding="utf-8") as stream:
            serialize_libsvm(test, stream)
    return path


# =============================================================================
# TEST CASES
# =============================================================================


class TestExperimentSpec(TestCase):
    """Tests for the :class:`ExperimentSpec` class."""

    def test_of_mapping_ignores_unknown_keys(self) -> None:
        """Assert unknown keys are dropped and scalars become axes."""
        spec = ExperimentSpec.of_mapping(
            {
                "datasets": "synthetic",
                "algorithms": ["sarc"],
                "fractions": 0.2,
                "colour": "blue",
            },
        )

        assert spec.datasets == ("synthetic",)
        assert spec.algorithms == (Algorithm.SARC,)
        assert spec.fractions == (0.2,)
        assert spec.variants == tuple(Variant)
        assert ExperimentSpec.of_mapping(spec.to_mapping()).to_mapping() == (
            spec.to_mapping()
        )

    def test_invalid_specs(self) -> None:
        """Assert empty axes and out-of-range scalars are rejected."""
        with pytest.raises(ContractViolationError, match="cannot be empty"):
            ExperimentSpec(datasets=[])
        with pytest.raises(ContractViolationError, match="cannot be empty"):
            ExperimentSpec(datasets=["synthetic"], variants=[])
        with pytest.raises(ContractViolationError, match="seed"):
            ExperimentSpec(datasets=["synthetic"], seeds=[])
        with pytest.raises(ContractViolationError, match="workers"):
            ExperimentSpec(datasets=["synthetic"], workers=0)
        with pytest.raises(ContractViolationError, match="budget_props"):
            ExperimentSpec(datasets=["synthetic"], budget_props=0)
        with pytest.raises(ContractViolationError):
            ExperimentSpec(datasets=["synthetic"], algorithms=["newton"])

    def test_budget_uses_the_configured_tolerances(self) -> None:
        """Assert the run budget carries the spec's targets and tolerances."""
        spec = ExperimentSpec(
            datasets=["synthetic"],
            eps_grad_target=1e-3,
            eps_hess_target=1e-2,
            eps_h=1e-5,
        )
        budget = spec.budget(Algorithm.STR)

        assert budget.eps_grad_target == 1e-3
        assert budget.eps_hess_target == 1e-2
        assert (budget.eps_g, budget.eps_b, budget.eps_h) == (0.0, 0.0, 1e-5)


class TestGrid(TestCase):
    """Tests for :func:`expand_grid` and :class:`GridPoint`."""

    def test_grid_order(self) -> None:
        """
        Assert points are ordered by dataset, algorithm, variant, fraction,
        start radius or penalty and seed, with each algorithm using its own
        start axis.
        """
        spec = ExperimentSpec(
            datasets=["a9a", "synthetic"],
            algorithms=["str", "sarc"],
            variants=["full", "sh"],
            fractions=[0.05],
            delta0s=[1.0, 8.0],
            sigma0s=[0.5],
            seeds=[0, 1],
        )
        points = expand_grid(spec)

        assert len(points) == 2 * (2 * 2 * 2 + 2 * 1 * 2)
        assert points[0] == GridPoint(
            "a9a",
            Algorithm.STR,
            Variant.FULL,
            0.05,
            1.0,
            0,
        )
        assert points[1].seed == 1
        assert points[2].radius_or_penalty == 8.0
        assert points[4].variant is Variant.SH
        assert points[8].algorithm is Algorithm.SARC
        assert points[8].radius_or_penalty == 0.5
        assert points[12].dataset == "synthetic"

    def test_file_name(self) -> None:
        """Assert run files are named after the point's coordinates."""
        point = GridPoint(
            "data/a9a.gz",
            Algorithm.STR,
            Variant.SHGF,
            0.1,
            8.0,
            3,
        )

        assert point.file_name == "a9a_str_shgf_f0.1_r8_s3.csv"

    def test_to_config(self) -> None:
        """
        Assert a point's config takes its start value and the spec's
        ``Δ_max`` and ``σ_min`` unchanged.
        """
        spec = ExperimentSpec(
            datasets=["synthetic"],
            algorithms=["str", "sarc"],
            delta0s=[8.0],
            sigma0s=[0.01],
            delta_max=16.0,
            sigma_min=0.001,
            budget_props=10_000,
            max_iters=7,
        )
        str_point = GridPoint(
            "synthetic",
            Algorithm.STR,
            Variant.SH,
            0.2,
            8.0,
            5,
        )
        sarc_point = str_point._replace(
            algorithm=Algorithm.SARC,
            radius_or_penalty=0.01,
        )

        str_config = str_point.to_config(spec)
        assert str_config.delta0 == 8.0
        assert str_config.delta_max == 16.0
        assert str_config.fraction == 0.2
        assert str_config.seed == 5
        assert str_config.max_props == 10_000
        assert str_config.max_iters == 7

        sarc_config = sarc_point.to_config(spec)
        assert sarc_config.sigma0 == 0.01
        assert sarc_config.sigma_min == 0.001
        assert sarc_config.radius_or_penalty0 == 0.01

    def test_start_values_outside_the_bounds_are_rejected(self) -> None:
        """
        Assert a start radius above ``Δ_max`` or a start penalty below
        ``σ_min`` is a configuration error rather than a silent change of
        the bounds.
        """
        with pytest.raises(ContractViolationError, match="delta_max"):
            ExperimentSpec(
                datasets=["synthetic"],
                delta0s=[1.0, 8.0],
                delta_max=4.0,
            )
        with pytest.raises(ContractViolationError, match="sigma_min"):
            ExperimentSpec(
                datasets=["synthetic"],
                algorithms=["sarc"],
                sigma0s=[0.01],
                sigma_min=0.1,
            )
        # The unused axis of an algorithm outside the grid is not checked.
        ExperimentSpec(
            datasets=["synthetic"],
            algorithms=["sarc"],
            delta0s=[8.0],
            delta_max=4.0,
        )

        spec = ExperimentSpec(
            datasets=["synthetic"],
            delta0s=[2.0],
            delta_max=4.0,
        )
        point = GridPoint(
            "synthetic",
            Algorithm.STR,
            Variant.SH,
            0.2,
            8.0,
            0,
        )
        with pytest.raises(ContractViolationError, match="delta0"):
            point.to_config(spec)


class TestLoadExperimentData(TestCase):
    """Tests for the :func:`load_experiment_data` function."""

    def test_synthetic(self) -> None:
        """Assert the synthetic source uses the spec's shape."""
        spec = ExperimentSpec(
            datasets=["synthetic"],
            synthetic_n=50,
            synthetic_d=4,
        )
        data = load_experiment_data("synthetic", spec)

        assert (data.problem.n, data.problem.d) == (50, 4)
        assert not data.has_test_split

    def test_missing_file(self) -> None:
        """Assert an unreadable dataset raises a dataset error."""
        spec = ExperimentSpec(datasets=["nowhere"], data_dir="/nonexistent")
        with pytest.raises(DatasetError, match="Could not read dataset"):
            load_experiment_data("nowhere", spec)


def test_libsvm_with_a_test_split(tmp_path: Path) -> None:
    """
    Assert a sibling ``.t`` file is loaded as the test split, with both
    splits padded to one dimension, and relative paths resolve against the
    data directory.
    """
    _write_libsvm_pair(tmp_path, with_test=True)
    spec = ExperimentSpec(datasets=["toy"], data_dir=tmp_path)
    data = load_experiment_data("toy", spec)

    assert data.name == "toy"
    assert data.has_test_split
    assert data.test is not None
    assert data.test.d == data.train.d == data.problem.d
    assert data.train.n == 60
    assert data.test.n == 20
    _, test_error = data.monitor()(np.zeros(data.problem.d))
    assert test_error is not None
    assert 0.0 <= test_error <= 1.0


def test_experiment_writes_runs_and_summary(tmp_path: Path) -> None:
    """
    Assert a grid writes one run file per point plus a summary row in grid
    order, and that the synthetic dataset has no test error column.
    """
    spec = _tiny_spec(tmp_path)
    result = run_experiment(spec)

    assert result.failures == 0
    assert [_p.name for _p in result.run_files] == [
        _p.file_name for _p in expand_grid(spec)
    ]
    summary = pd.read_csv(result.summary_file)
    assert list(summary.columns) == list(SUMMARY_COLUMNS)
    assert summary["run_file"].tolist() == [
        _p.name for _p in result.run_files
    ]
    for path in result.run_files:
        header, frame = read_run_csv(path)
        assert "test_error" not in frame.columns
        assert header["dataset"] == "synthetic-120-6-s0"
        assert frame["iter"].iloc[0] == 0
        assert frame["cum_props"].is_monotonic_increasing


def test_experiment_is_deterministic(tmp_path: Path) -> None:
    """Assert two runs of one grid write byte-identical files."""
    first = run_experiment(_tiny_spec(tmp_path / "first", workers=2))
    second = run_experiment(_tiny_spec(tmp_path / "second"))

    for left, right in zip(first.run_files, second.run_files, strict=True):
        assert left.read_bytes() == right.read_bytes()
    assert (
        first.summary_file.read_bytes() == second.summary_file.read_bytes()
    )


def test_experiment_respects_the_budget(tmp_path: Path) -> None:
    """Assert no run of a budgeted grid exceeds its propagation budget."""
    spec = _tiny_spec(tmp_path, budget_props=3000, max_iters=100)
    result = run_experiment(spec)

    summary = pd.read_csv(result.summary_file)
    assert (summary["cum_props"] <= 3000).all()
    assert (summary["termination"] != "error").all()


def test_experiment_on_a_libsvm_file(tmp_path: Path) -> None:
    """Assert runs on a dataset with a test split record the test error."""
    path = _write_libsvm_pair(tmp_path, with_test=True)
    spec = ExperimentSpec(
        datasets=[str(path)],
        variants=["full"],
        max_iters=3,
        out_dir=tmp_path / "out",
    )
    result = run_experiment(spec)

    (run_file,) = result.run_files
    assert run_file.name == "toy_str_full_f0.05_r8_s0.csv"
    _, frame = read_run_csv(run_file)
    assert frame["test_error"].between(0.0, 1.0).all()


def test_failed_runs_are_summarised(tmp_path: Path) -> None:
    """
    Assert a failing run is reported as an error row and the experiment
    raises once every run has finished.
    """
    spec = _tiny_spec(tmp_path, algorithms=["str"], variants=["full"])
    with mock.patch.object(
        sys.modules["app.use_cases.run_experiment"],
        "run_optimizer",
        side_effect=OptimizerError(message="Boom.", trace=None),
    ), pytest.raises(ExperimentError, match="1 of 1 runs failed"):
        run_experiment(spec)

    summary = pd.read_csv(tmp_path / "summary.csv")
    assert summary["termination"].tolist() == ["error"]
    assert summary["iterations"].tolist() == [0]
