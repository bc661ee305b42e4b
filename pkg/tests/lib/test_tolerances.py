import math

import pytest

from app.core import Algorithm, ContractViolationError
from app.lib.tolerances import (
    budget_with_derived_tolerances,
    kappa_s,
    derived_tolerances,
)
from tests import TestCase
from tests.factories import InexactnessBudgetFactory

# =============================================================================
# TEST CASES
# =============================================================================


class TestDerivedTolerances(TestCase):
    """Tests for the ``derived_tolerances`` function."""

    def test_tolerances_are_fixed_points(self) -> None:
        """
        Assert that each tolerance is the stated fraction of its remaining
        gap to the target.
        """
        cases = (
            (Algorithm.STR, 1.0 / 16.0, 1.0 / 10.0),
            (Algorithm.SARC, 1.0 / 220.0, 1.0 / 36.0),
        )
        for algorithm, grad_fraction, hess_fraction in cases:
            for eta in (0.1, 0.5, 0.9):
                tol = derived_tolerances(algorithm, eta, 1e-3, 2e-2)

                assert tol.eps_g == pytest.approx(
                    grad_fraction * (1.0 - eta) * (1e-3 - tol.eps_g),
                )
                assert tol.eps_b == pytest.approx(
                    hess_fraction * (1.0 - eta) * (2e-2 - tol.eps_b),
                )
                assert tol.eps_h == tol.eps_b
                assert 0.0 < tol.eps_g < 1e-3
                assert 0.0 < tol.eps_b < 2e-2

    def test_closed_form_value(self) -> None:
        """Assert the trust-region gradient tolerance for a unit target."""
        tol = derived_tolerances(Algorithm.STR, 0.1, 1.0, 1.0)

        assert tol.eps_g == pytest.approx(0.05625 / 1.05625)
        assert tol.eps_b == pytest.approx(0.09 / 1.09)

    def test_cubic_tolerances_are_tighter(self) -> None:
        """Assert the cubic tolerances are below the trust-region ones."""
        tr = derived_tolerances(Algorithm.STR, 0.2, 1e-4, 1e-2)
        arc = derived_tolerances(Algorithm.SARC, 0.2, 1e-4, 1e-2)

        assert arc.eps_g < tr.eps_g
        assert arc.eps_b < tr.eps_b

    def test_invalid_arguments(self) -> None:
        """Assert that ``η`` outside ``(0, 1)`` and bad targets fail."""
        with pytest.raises(ContractViolationError, match="eta"):
            derived_tolerances(Algorithm.STR, 1.0, 1.0, 1.0)
        with pytest.raises(ContractViolationError, match="eps_grad_target"):
            derived_tolerances(Algorithm.STR, 0.1, 0.0, 1.0)
        with pytest.raises(ContractViolationError, match="eps_hess_target"):
            derived_tolerances(Algorithm.SARC, 0.1, 1.0, -1.0)

    def test_budget_with_derived_tolerances(self) -> None:
        """
        Assert that only the oracle tolerances of a budget are replaced.
        """
        budget = InexactnessBudgetFactory(
            eps_grad_target=1e-2,
            eps_hess_target=1e-1,
            v0=0.5,
            delta=0.2,
        )
        updated = budget_with_derived_tolerances(Algorithm.SARC, 0.1, budget)
        tol = derived_tolerances(Algorithm.SARC, 0.1, 1e-2, 1e-1)

        assert (updated.eps_g, updated.eps_b, updated.eps_h) == tuple(tol)
        assert updated.eps_grad_target == 1e-2
        assert updated.eps_hess_target == 1e-1
        assert updated.v0 == 0.5
        assert updated.delta == 0.2


def test_kappa_s() -> None:
    """
    Assert that ``κ_s`` takes the smaller admissible branch and is infinite
    when neither is admissible.
    """
    value = kappa_s(0.1, 0.2, 1.0, 2.0, 3.0, 0.0, 0.5)

    assert value == pytest.approx(1.0 + 3.0 + 0.5 * 2.0)
    assert kappa_s(0.1, 0.2, 1.0, 2.0, 3.0, 0.5, 0.5, 0.3, 0.3) == (
        pytest.approx((0.2 + 1.0 + 3.0 + 0.2 + 1.0) / 0.5)
    )
    assert math.isinf(kappa_s(0.1, 0.2, 1.0, 2.0, 3.0, 1.0, 0.5))
