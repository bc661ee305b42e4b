"""The oracle battery behind ``--self-check``.

Each check runs a solver or a problem oracle against an independent
reference on seeded random instances and reports the worst instance.
"""

import math
from collections.abc import Callable, Sequence
from logging import getLogger
from typing import Final, NamedTuple

import numpy as np
import pandas as pd

from app.core import (
    Algorithm,
    OracleReport,
    SymmetricOperator,
    full_grad,
    full_hvp,
    full_value,
)
from app.imp import NllsLogisticProblem, make_synthetic_classification
from app.lib.models import ModelState, model_decrease
from app.lib.oracles import (
    brute_force_cubic_1d,
    brute_force_tr_1d,
    dense_min_eig,
    finite_diff_check,
    finite_diff_hessian_check,
)
from app.lib.solvers import (
    cauchy_point_tr,
    cauchy_step_arc,
    lanczos_min_eig,
    negative_curvature_step,
    refine_arc,
    steihaug_cg,
)

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)

DEFAULT_INSTANCES: Final[int] = 200

SLACK: Final[float] = 1e-10


# =============================================================================
# TYPES
# =============================================================================


class CheckOutcome(NamedTuple):
    name: str
    report: OracleReport


class _Instance(NamedTuple):
    g: np.ndarray
    matrix: np.ndarray

    def operator(self) -> SymmetricOperator:
        return SymmetricOperator.from_dense(self.matrix)


# =============================================================================
# HELPERS
# =============================================================================


def random_instance(rng: np.random.Generator, max_d: int = 20) -> _Instance:
    """Return a gradient with norm in ``[1e-3, 1e3]`` and a symmetric matrix
    with a mixed-sign spectrum."""
    d = int(rng.integers(2, max_d + 1))
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    spectrum = rng.uniform(-10.0, 10.0, d)
    matrix = (q * spectrum) @ q.T
    g = rng.standard_normal(d)
    g *= 10.0 ** rng.uniform(-3.0, 3.0) / np.linalg.norm(g)
    return _Instance(g=g, matrix=0.5 * (matrix + matrix.T))


def lower_bound_report(
    bounds: Sequence[float],
    values: Sequence[float],
    tolerance: float = SLACK,
) -> OracleReport:
    """Report the worst violation of ``values[i] ≥ bounds[i]``.

    The gaps are the largest shortfall, absolute and relative to
    ``max(1, |bound|)``; the report passes when the relative one is within
    ``tolerance``.
    """
    bound_arr = np.asarray(bounds, dtype=float)
    value_arr = np.asarray(values, dtype=float)
    shortfall = np.maximum(bound_arr - value_arr, 0.0)
    relative = shortfall / np.maximum(1.0, np.abs(bound_arr))
    worst = int(np.argmax(relative)) if relative.size else 0
    rel_gap = float(relative[worst]) if relative.size else 0.0
    return OracleReport(
        reference=float(bound_arr[worst]) if bound_arr.size else 0.0,
        candidate=float(value_arr[worst]) if value_arr.size else 0.0,
        abs_gap=float(shortfall[worst]) if shortfall.size else 0.0,
        rel_gap=rel_gap,
        tolerance=tolerance,
        passed=rel_gap <= tolerance,
    )


def _worst(reports: Sequence[OracleReport]) -> OracleReport:
    return max(reports, key=lambda _r: _r.rel_gap)


# =============================================================================
# CHECKS
# =============================================================================


def check_cauchy_tr(rng: np.random.Generator, count: int) -> OracleReport:
    """The trust-region Cauchy point decreases the model by at least
    ``½‖g‖·min{Δ, ‖g‖/‖B‖}``."""
    bounds, values = [], []
    for _ in range(count):
        instance = random_instance(rng)
        radius = 10.0 ** rng.uniform(-2.0, 2.0)
        g_norm = float(np.linalg.norm(instance.g))
        b_norm = float(np.linalg.norm(instance.matrix, ord=2))
        step = cauchy_point_tr(instance.g, instance.operator(), radius)
        bounds.append(0.5 * g_norm * min(radius, g_norm / b_norm))
        values.append(step.predicted_decrease)
    return lower_bound_report(bounds, values)


def check_steihaug(rng: np.random.Generator, count: int) -> OracleReport:
    """Steihaug-CG does at least as well as the best step along ``−g``."""
    bounds, values = [], []
    for _ in range(count):
        instance = random_instance(rng)
        radius = 10.0 ** rng.uniform(-2.0, 2.0)
        op = instance.operator()
        reference = brute_force_tr_1d(instance.g, op, radius)
        step = steihaug_cg(instance.g, op, radius)
        model = ModelState(0.0, instance.g, op, radius, Algorithm.STR)
        bounds.append(reference.decrease)
        values.append(model_decrease(model, step.s))
    return lower_bound_report(bounds, values, tolerance=1e-8)


def check_cauchy_arc(rng: np.random.Generator, count: int) -> OracleReport:
    """The cubic Cauchy step decreases ``p`` by at least
    ``(‖g‖/10)·min{‖g‖/‖B‖, sqrt(‖g‖/σ)}`` and the brute-force search
    along ``−g`` finds no less."""
    bounds, values = [], []
    for _ in range(count):
        instance = random_instance(rng)
        sigma = 10.0 ** rng.uniform(-3.0, 3.0)
        op = instance.operator()
        g_norm = float(np.linalg.norm(instance.g))
        b_norm = float(np.linalg.norm(instance.matrix, ord=2))
        step = cauchy_step_arc(instance.g, op, b_norm, sigma)
        bound = 0.1 * g_norm * min(g_norm / b_norm, math.sqrt(g_norm / sigma))
        reference = brute_force_cubic_1d(instance.g, op, sigma, b_norm=b_norm)
        bounds.extend((bound, bound))
        values.extend((step.predicted_decrease, reference.decrease))
    return lower_bound_report(bounds, values)


def check_refined_arc(rng: np.random.Generator, count: int) -> OracleReport:
    """Certified cubic steps decrease ``p`` by at least ``(σ/6)‖s‖³``."""
    bounds, values = [], []
    for _ in range(count):
        instance = random_instance(rng)
        sigma = 10.0 ** rng.uniform(-3.0, 3.0)
        op = instance.operator()
        b_norm = float(np.linalg.norm(instance.matrix, ord=2))
        start = cauchy_step_arc(instance.g, op, b_norm, sigma).s
        step = refine_arc(instance.g, op, sigma, start, kappa_theta=0.5)
        if not step.converged:
            continue
        model = ModelState(0.0, instance.g, op, sigma, Algorithm.SARC)
        bounds.append(sigma / 6.0 * float(np.linalg.norm(step.s)) ** 3)
        values.append(model_decrease(model, step.s))
    return lower_bound_report(bounds, values, tolerance=1e-8)


def check_lanczos(rng: np.random.Generator, count: int) -> OracleReport:
    """Lanczos matches a dense eigensolve and its curvature step reaches
    ``λ_min``."""
    reports: list[OracleReport] = []
    for _ in range(count):
        instance = random_instance(rng)
        op = instance.operator()
        expected, _ = dense_min_eig(instance.matrix)
        result = lanczos_min_eig(op, tol=1e-10, rng=rng)
        reports.append(
            OracleReport.compare(expected, result.lambda_min_est, 1e-6),
        )
        s = negative_curvature_step(result.direction, 1.0, instance.g)
        curvature = float(s @ instance.matrix @ s) / float(s @ s)
        reports.append(lower_bound_report([curvature], [expected + 1e-6]))
    return _worst(reports)


def _nlls_problem(seed: int) -> NllsLogisticProblem:
    train, _ = make_synthetic_classification(n=60, d=6, density=0.5, seed=seed)
    return NllsLogisticProblem.from_dataset(train)


def check_nlls_gradient(rng: np.random.Generator, count: int) -> OracleReport:
    """The NLLS gradient agrees with central differences."""
    problem = _nlls_problem(int(rng.integers(2**31)))
    points = [rng.standard_normal(problem.d) for _ in range(min(count, 5))]
    return finite_diff_check(
        lambda _x: full_value(problem, _x),
        lambda _x: full_grad(problem, _x),
        points,
    )


def check_nlls_hessian(rng: np.random.Generator, count: int) -> OracleReport:
    """The NLLS Hessian-vector products agree with gradient differences."""
    problem = _nlls_problem(int(rng.integers(2**31)))
    return _worst(
        [
            finite_diff_hessian_check(
                lambda _x: full_grad(problem, _x),
                lambda _x, _v: full_hvp(problem, _x, _v),
                rng.standard_normal(problem.d),
            )
            for _ in range(min(count, 3))
        ],
    )


CHECKS: Final[
    Sequence[tuple[str, Callable[[np.random.Generator, int], OracleReport]]]
] = (
    ("cauchy_tr_decrease", check_cauchy_tr),
    ("steihaug_vs_line_search", check_steihaug),
    ("cauchy_arc_decrease", check_cauchy_arc),
    ("refined_arc_decrease", check_refined_arc),
    ("lanczos_vs_dense", check_lanczos),
    ("nlls_gradient", check_nlls_gradient),
    ("nlls_hessian", check_nlls_hessian),
)


# =============================================================================
# BATTERY
# =============================================================================


def run_self_check(
    seed: int = 0,
    instances: int = DEFAULT_INSTANCES,
) -> Sequence[CheckOutcome]:
    """Run every check with its own generator derived from ``seed``."""
    outcomes: list[CheckOutcome] = []
    seeds = np.random.SeedSequence(seed).spawn(len(CHECKS))
    for (name, check), child in zip(CHECKS, seeds, strict=True):
        report = check(np.random.default_rng(child), instances)
        _LOGGER.debug(
            "%s: rel_gap=%.3g passed=%s",
            name,
            report.rel_gap,
            report.passed,
        )
        outcomes.append(CheckOutcome(name, report))
    return outcomes


def format_outcomes(outcomes: Sequence[CheckOutcome]) -> str:
    """Render outcomes as a fixed-width pass/fail table."""
    frame = pd.DataFrame(
        [
            {
                "check": _o.name,
                "abs_gap": _o.report.abs_gap,
                "rel_gap": _o.report.rel_gap,
                "tolerance": _o.report.tolerance,
                "result": "PASS" if _o.report.passed else "FAIL",
            }
            for _o in outcomes
        ],
    )
    return frame.to_string(index=False, float_format=lambda _v: "%.3g" % _v)
