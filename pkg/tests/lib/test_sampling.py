import math

import numpy as np
import pytest

from app.core import (
    ContractViolationError,
    SizeRule,
    Variant,
    full_grad,
)
from app.imp import NllsLogisticProblem, make_quadratic_problem
from app.lib.sampling import (
    SampleSizes,
    draw_sets,
    estimate_variance_bounds,
    function_sample_size,
    gradient_sample_size,
    hessian_sample_size,
    per_iteration_delta,
    plan_sample_sizes,
    step_radius_cap,
    subset_mean_second_moment,
    theorem_sample_size,
    variance_contraction_bound,
)
from tests import TestCase
from tests.factories import SyntheticDatasetFactory, VariantConfigFactory

# =============================================================================
# FAILURE PROBABILITY AND SAMPLE SIZES
# =============================================================================


def test_per_iteration_delta() -> None:
    """
    Assert ``per_iteration_delta`` splits the failure probability so that
    ``(1 − δ₀)^T = 1 − δ``.
    """
    assert per_iteration_delta(0.5, 1) == pytest.approx(0.5, abs=1e-15)
    assert per_iteration_delta(0.1, 10) == pytest.approx(0.0104807, abs=1e-7)
    for delta, iterations in ((0.05, 1000), (0.3, 7), (0.9, 2)):
        delta0 = per_iteration_delta(delta, iterations)

        assert 0.0 < delta0 <= delta
        assert (1.0 - delta0) ** iterations == pytest.approx(
            1.0 - delta,
            abs=1e-12,
        )


def test_per_iteration_delta_fails_on_invalid_input() -> None:
    """Assert out of range probabilities and budgets are rejected."""
    for delta, iterations in ((0.0, 1), (1.0, 1), (0.1, 0), (0.1, 2.5)):
        with pytest.raises(ContractViolationError):
            per_iteration_delta(delta, iterations)  # type: ignore


def test_gradient_sample_size() -> None:
    """
    Assert ``gradient_sample_size`` evaluates ``16·ln(2d/δ₀)·L²/ε_g²`` with
    the natural logarithm and scales with ``ε_g⁻²``.
    """
    assert gradient_sample_size(2, 0.2, 1.0, 0.5) == 192
    assert gradient_sample_size(2, 0.2, 1.0, 1.0) == math.ceil(
        16.0 * math.log(20.0),
    )
    assert gradient_sample_size(2, 0.2, 1.0, 0.5) == math.ceil(
        4.0 * 16.0 * math.log(20.0),
    )


def test_hessian_sample_size_matches_the_gradient_one_for_unit_v0() -> None:
    """
    Assert that with ``v0 = 1`` the Hessian size has the same arithmetic as
    the gradient size and that a smaller ``v0`` asks for more samples.
    """
    assert hessian_sample_size(2, 0.2, 1.0, 0.5) == 192
    assert hessian_sample_size(2, 0.2, 1.0, 0.5, v0=0.5) == 767


def test_function_sample_size() -> None:
    """
    Assert ``function_sample_size`` evaluates
    ``16·κ_f²·ln(2d/δ₀)/(ε_h²·Δ_c⁴)`` and scales with ``Δ_c⁻⁴``.
    """
    delta0 = 2.0 / math.e**2

    assert function_sample_size(1, delta0, 1.0, 1.0, 1.0) == 32
    assert function_sample_size(1, delta0, 1.0, 1.0, 0.5) == 512
    assert function_sample_size(1, delta0, 1.0, 1.0, 2.0) == 2


def test_sample_sizes_are_monotone() -> None:
    """
    Assert that the sample sizes do not increase with the tolerance and do
    not decrease with ``ln(2d/δ₀)``.
    """
    tolerances = (0.01, 0.05, 0.1, 0.5, 1.0)
    for d in (1, 10, 123):
        for delta0 in (1e-4, 0.01, 0.2):
            sizes = [
                gradient_sample_size(d, delta0, 2.0, _e) for _e in tolerances
            ]
            assert sizes == sorted(sizes, reverse=True)
            sizes = [
                function_sample_size(d, delta0, 2.0, _e, 1.5)
                for _e in tolerances
            ]
            assert sizes == sorted(sizes, reverse=True)
    for eps in tolerances:
        sizes = [
            hessian_sample_size(_d, 0.01, 3.0, eps) for _d in (1, 10, 1000)
        ]
        assert sizes == sorted(sizes)


def test_sample_sizes_fail_on_invalid_input() -> None:
    """Assert non-positive bounds and tolerances are rejected."""
    with pytest.raises(ContractViolationError, match="eps_g"):
        gradient_sample_size(2, 0.2, 1.0, 0.0)
    with pytest.raises(ContractViolationError, match="lip_hess_bound"):
        hessian_sample_size(2, 0.2, -1.0, 0.5)
    with pytest.raises(ContractViolationError, match="delta0"):
        function_sample_size(2, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ContractViolationError, match="d"):
        gradient_sample_size(0, 0.2, 1.0, 0.5)


def test_theorem_sample_size() -> None:
    """
    Assert ``theorem_sample_size`` takes the larger ratio, caps it at ``n``
    and falls back to ``n`` for exact oracles.
    """
    assert theorem_sample_size(100, 1.0, 0.0, 0.1, 0.1) == 10
    assert theorem_sample_size(100, 1.0, 3.0, 0.1, 0.1) == 30
    assert theorem_sample_size(100, 50.0, 0.0, 0.1, 0.1) == 100
    assert theorem_sample_size(100, 1.0, 1.0, 0.0, 0.1) == 100


def test_step_radius_cap() -> None:
    """
    Assert ``step_radius_cap`` is the larger of ``Δ_max`` and ``1/σ_min``.
    """
    assert step_radius_cap(1e3, 1e-4) == pytest.approx(1e4)
    assert step_radius_cap(8.0, 1.0) == pytest.approx(8.0)


# =============================================================================
# VARIANCE BOUNDS AND CONTRACTION
# =============================================================================


class TestEstimateVarianceBounds(TestCase):
    """Tests for the ``estimate_variance_bounds`` function."""

    def test_two_center_quadratic(self) -> None:
        """
        Assert that the gradient deviations of the two-center quadratic give
        ``H₁ = 1`` at any point and that identical Hessians give ``H₂ = 0``.
        """
        problem = make_quadratic_problem([[0.0, 0.0], [2.0, 0.0]])
        bounds = estimate_variance_bounds(
            problem,
            [np.array([5.0, 5.0]), np.array([-3.0, 0.5])],
        )

        assert bounds.h1 == pytest.approx(1.0)
        assert bounds.h2 == pytest.approx(0.0)
        assert not bounds.h2_is_estimate

    def test_single_sample_has_no_spread(self) -> None:
        """Assert that a problem with one sample has zero bounds."""
        train = SyntheticDatasetFactory(n=1, d=4, density=1.0)
        problem = NllsLogisticProblem.from_dataset(train)
        bounds = estimate_variance_bounds(problem, [np.ones(4)])

        assert bounds.h1 == pytest.approx(0.0, abs=1e-12)
        assert bounds.h2 == pytest.approx(0.0, abs=1e-12)

    def test_anchor_points_are_required(self) -> None:
        """Assert that an empty anchor list is rejected."""
        problem = make_quadratic_problem([[0.0]])
        with pytest.raises(ContractViolationError, match="anchor point"):
            estimate_variance_bounds(problem, [])


def test_random_subset_variance_contraction() -> None:
    """
    Assert that the mean of random subsets of zero-sum vectors has a second
    moment within the contraction bound, and exactly zero for full subsets.
    """
    rng = np.random.default_rng(11)
    vectors = rng.standard_normal((20, 3))
    vectors -= vectors.mean(axis=0)
    for subset_size in (1, 5, 19):
        empirical = subset_mean_second_moment(
            vectors, subset_size, 10_000, rng
        )
        bound = variance_contraction_bound(vectors, subset_size)

        assert empirical <= bound * (1.0 + 5.0 / math.sqrt(10_000))

    assert variance_contraction_bound(vectors, 20) == 0.0
    assert subset_mean_second_moment(vectors, 20, 10, rng) == pytest.approx(
        0.0,
        abs=1e-25,
    )


# =============================================================================
# SET SIZES AND DRAWS
# =============================================================================


class TestPlanSampleSizes(TestCase):
    """Tests for the ``plan_sample_sizes`` function."""

    def setUp(self) -> None:
        super().setUp()
        self._problem = NllsLogisticProblem.from_dataset(
            SyntheticDatasetFactory(n=200, d=8),
        )
        self._x0 = np.zeros(8)

    def test_fraction_rule_by_variant(self) -> None:
        """
        Assert that the fraction rule sizes every subsampled set and that the
        variant forces the others to ``n``.
        """
        expected = {
            Variant.FULL: SampleSizes(h=200, g=200, b=200),
            Variant.SH: SampleSizes(h=200, g=200, b=20),
            Variant.SHG: SampleSizes(h=200, g=20, b=20),
            Variant.SHGF: SampleSizes(h=20, g=20, b=20),
        }
        for variant, sizes in expected.items():
            config = VariantConfigFactory(variant=variant, fraction=0.1)

            assert plan_sample_sizes(self._problem, self._x0, config) == sizes

    def test_exact_oracles_use_all_samples(self) -> None:
        """
        Assert that the concentration rules fall back to ``n`` when the
        oracle tolerances are zero.
        """
        for size_rule in (SizeRule.THEOREM, SizeRule.BERNSTEIN):
            config = VariantConfigFactory(
                variant=Variant.SHGF,
                size_rule=size_rule,
            )

            assert plan_sample_sizes(
                self._problem,
                self._x0,
                config,
            ) == SampleSizes(h=200, g=200, b=200)

    def test_bernstein_rule_is_capped(self) -> None:
        """
        Assert that the concentration sizes never exceed ``n`` and stay
        positive.
        """
        config = VariantConfigFactory(
            variant=Variant.SHGF,
            size_rule=SizeRule.BERNSTEIN,
            budget__eps_g=1e-9,
            budget__eps_b=1e-4,
            budget__eps_h=1e-4,
        )
        sizes = plan_sample_sizes(self._problem, self._x0, config)

        assert sizes.g == 200
        assert all(1 <= _s <= 200 for _s in sizes)

    def test_concentration_rules_above_the_dense_limit(self) -> None:
        """
        Assert both concentration rules size the sets of a problem whose
        dimension is beyond the dense Hessian limit.
        """
        problem = NllsLogisticProblem.from_dataset(
            SyntheticDatasetFactory(n=40, d=600, density=0.05),
        )
        for size_rule in (SizeRule.THEOREM, SizeRule.BERNSTEIN):
            config = VariantConfigFactory(
                variant=Variant.SHGF,
                size_rule=size_rule,
                max_iters=3,
                budget__eps_grad_target=1.0,
                budget__eps_hess_target=1.0,
                budget__eps_g=0.5,
                budget__eps_b=0.5,
                budget__eps_h=0.5,
            )
            sizes = plan_sample_sizes(problem, np.zeros(600), config)

            assert all(1 <= _s <= 40 for _s in sizes)


class TestDrawSets(TestCase):
    """Tests for the ``draw_sets`` function."""

    def test_full_sets_are_ascending_ranges(self) -> None:
        """
        Assert that a set of size ``n`` is the full ascending index range and
        consumes no randomness.
        """
        rng = np.random.default_rng(0)
        sets = draw_sets(rng, 10, SampleSizes(h=10, g=10, b=10))

        np.testing.assert_array_equal(sets.s_g, np.arange(10))
        np.testing.assert_array_equal(sets.s_h, np.arange(10))
        assert rng.random() == np.random.default_rng(0).random()

    def test_draws_are_seeded_sorted_and_unique(self) -> None:
        """
        Assert that the same seed gives the same sets and that every set is
        sorted without duplicates.
        """
        sizes = SampleSizes(h=7, g=30, b=12)
        sets1 = draw_sets(np.random.default_rng(5), 100, sizes)
        sets2 = draw_sets(np.random.default_rng(5), 100, sizes)

        for name in ("s_h", "s_g", "s_b"):
            a, b = getattr(sets1, name), getattr(sets2, name)
            np.testing.assert_array_equal(a, b)
            assert np.all(np.diff(a) > 0)
            assert a[0] >= 0
            assert a[-1] < 100
        assert sets1.sizes == (7, 30, 12)
        assert not sets1.coupled

    def test_coupling_trigger(self) -> None:
        """
        Assert that with the coupling trigger the function set copies the
        gradient set.
        """
        sets = draw_sets(
            np.random.default_rng(1),
            50,
            SampleSizes(h=3, g=9, b=4),
            coupling_trigger=True,
        )

        assert sets.coupled
        np.testing.assert_array_equal(sets.s_h, sets.s_g)

    def test_oversized_sets_are_rejected(self) -> None:
        """Assert that a size above ``n`` is a contract violation."""
        with pytest.raises(ContractViolationError, match=r"\[1, 10\]"):
            draw_sets(np.random.default_rng(0), 10, SampleSizes(1, 11, 1))

    def test_full_subset_mean_is_the_full_gradient(self) -> None:
        """
        Assert that the subsampled gradient over a full-size set equals the
        full gradient bitwise.
        """
        problem = NllsLogisticProblem.from_dataset(SyntheticDatasetFactory())
        sets = draw_sets(
            np.random.default_rng(2),
            problem.n,
            SampleSizes(problem.n, problem.n, problem.n),
        )
        x = np.linspace(-1.0, 1.0, problem.d)

        np.testing.assert_array_equal(
            problem.mean_grad(x, sets.s_g),
            full_grad(problem, x),
        )
