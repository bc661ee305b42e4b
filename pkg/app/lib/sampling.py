"""Sample-set drawing and the sample-size calculators.

All logarithms are natural. The concentration-based sizes are computed in
floating point and rounded to nine decimals before the ceiling so that a
value that is an integer in exact arithmetic is not bumped up by rounding
noise.
"""

import math
from collections.abc import Callable
from logging import getLogger
from typing import NamedTuple

import numpy as np

from app.core import (
    ContractViolationError,
    FiniteSumProblem,
    SampleSets,
    SizeRule,
    Variant,
    VariantConfig,
    check_point,
    oracle_bounds,
)

from .checkers import ensure_greater_than, ensure_in_range, ensure_probability

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)

# Above this many stacked Hessian entries the variance bound H2 switches to
# the randomized estimate.
DENSE_VARIANCE_LIMIT: int = 5_000_000

HUTCHINSON_VECTORS: int = 8


# =============================================================================
# TYPES
# =============================================================================


class SampleSizes(NamedTuple):
    """The sizes ``(|S_h|, |S_g|, |S_B|)`` of one iteration's sets."""

    h: int
    g: int
    b: int


class VarianceBounds(NamedTuple):
    """Per-sample variance bounds of the gradients and the Hessians.

    ``h2_is_estimate`` is set when ``h2`` comes from random sketches instead
    of exact spectral norms.
    """

    h1: float
    h2: float
    h2_is_estimate: bool


# =============================================================================
# HELPERS
# =============================================================================


def _ceil_count(value: float) -> int:
    return max(1, math.ceil(round(value, 9)))


def _log_term(d: int, delta0: float) -> float:
    ensure_greater_than(d, 0, message='"d" must be a positive integer.')
    ensure_probability(delta0, message='"delta0" must lie in (0, 1).')
    return math.log(2.0 * d / delta0)


# =============================================================================
# FAILURE PROBABILITY AND SAMPLE SIZES
# =============================================================================


def per_iteration_delta(delta: float, iterations: int) -> float:
    """Return ``δ₀ = 1 − (1 − δ)^(1/T)``.

    Failing with probability ``δ₀`` independently at each of ``T``
    iterations gives an overall failure probability of ``δ``.

    :param delta: The overall failure probability, in ``(0, 1)``.
    :param iterations: The iteration budget ``T``, at least 1.

    :return: The per-iteration failure probability, in ``(0, δ]``.

    :raise ContractViolationError: If an argument is out of range.
    """
    ensure_probability(delta, message='"delta" must lie in (0, 1).')
    if int(iterations) != iterations or iterations < 1:
        raise ContractViolationError(
            message='"iterations" must be a positive integer.',
        )
    return -math.expm1(math.log1p(-delta) / iterations)


def gradient_sample_size(
    d: int,
    delta0: float,
    lip_grad_bound: float,
    eps_g: float,
) -> int:
    """Return ``⌈16·ln(2d/δ₀)·L²/ε_g²⌉``.

    ``lip_grad_bound`` is the uniform bound ``L`` on the per-sample
    gradients. Read literally it is a Lipschitz constant of ``f``, which
    coincides with a bound on ``‖∇f_i‖`` over the region of interest; the
    optimizers pass the domain-restricted ``κ_∇f`` of
    :func:`~app.core.oracle_bounds`. The caller caps the result at ``n``.
    """
    ensure_greater_than(lip_grad_bound, 0.0, '"lip_grad_bound" must be > 0.')
    ensure_greater_than(eps_g, 0.0, '"eps_g" must be > 0.')
    log_term = _log_term(d, delta0)
    return _ceil_count(16.0 * log_term * lip_grad_bound**2 / eps_g**2)


def hessian_sample_size(
    d: int,
    delta0: float,
    lip_hess_bound: float,
    eps_b: float,
    v0: float = 1.0,
) -> int:
    """Return ``⌈16·L_B²·ln(2d/δ₀)/(v₀²·ε_B²)⌉``."""
    ensure_greater_than(lip_hess_bound, 0.0, '"lip_hess_bound" must be > 0.')
    ensure_greater_than(eps_b, 0.0, '"eps_b" must be > 0.')
    ensure_in_range(v0, 0.0, 1.0, '"v0" must lie in (0, 1].')
    log_term = _log_term(d, delta0)
    return _ceil_count(16.0 * lip_hess_bound**2 * log_term / (v0 * eps_b) ** 2)


def step_radius_cap(delta_max: float, sigma_min: float) -> float:
    """Return ``Δ_c = sqrt(max{Δ_max², (1/σ_min)²})``."""
    ensure_greater_than(delta_max, 0.0, '"delta_max" must be > 0.')
    ensure_greater_than(sigma_min, 0.0, '"sigma_min" must be > 0.')
    return math.sqrt(max(delta_max**2, (1.0 / sigma_min) ** 2))


def function_sample_size(
    d: int,
    delta0: float,
    kappa_f: float,
    eps_h: float,
    delta_c: float,
) -> int:
    """Return ``⌈16·κ_f²·ln(2d/δ₀)/(ε_h²·Δ_c⁴)⌉``."""
    ensure_greater_than(kappa_f, 0.0, '"kappa_f" must be > 0.')
    ensure_greater_than(eps_h, 0.0, '"eps_h" must be > 0.')
    ensure_greater_than(delta_c, 0.0, '"delta_c" must be > 0.')
    log_term = _log_term(d, delta0)
    return _ceil_count(
        16.0 * kappa_f**2 * log_term / (eps_h**2 * delta_c**4),
    )


def theorem_sample_size(
    n: int,
    h1: float,
    h2: float,
    eps_g: float,
    eps_b: float,
) -> int:
    """Return ``min{n, ⌈max{H₁/ε_g, H₂/ε_B}⌉}``.

    The ratio of a standard deviation to a tolerance is not dimensionless,
    so the count depends on the scaling of the problem. It is computed as
    written; prefer :attr:`SizeRule.BERNSTEIN` when this matters. A zero
    tolerance asks for exact oracles and yields ``n``.
    """
    if eps_g <= 0.0 or eps_b <= 0.0:
        return n
    return min(n, _ceil_count(max(h1 / eps_g, h2 / eps_b)))


# =============================================================================
# VARIANCE BOUNDS
# =============================================================================


def _gradient_spread(problem: FiniteSumProblem, x: np.ndarray) -> float:
    grads = problem.batch_grads(x, problem.all_indices)
    deviations = grads - grads.mean(axis=0)
    return float(np.mean(np.sum(deviations * deviations, axis=1)))


def _hessian_spread_dense(problem: FiniteSumProblem, x: np.ndarray) -> float:
    indices = problem.all_indices
    eye = np.eye(problem.d)
    # stacked[i, :, j] = ∇²f_i(x) e_j
    stacked = np.stack(
        [problem.batch_hvps(x, eye[:, j], indices) for j in range(problem.d)],
        axis=2,
    )
    deviations = stacked - stacked.mean(axis=0)
    norms = np.linalg.norm(deviations, ord=2, axis=(1, 2))
    return float(np.mean(norms**2))


def _hessian_spread_sketched(
    problem: FiniteSumProblem,
    x: np.ndarray,
    rng: np.random.Generator,
) -> float:
    indices = problem.all_indices
    total = 0.0
    for _ in range(HUTCHINSON_VECTORS):
        z = rng.choice((-1.0, 1.0), size=problem.d)
        products = problem.batch_hvps(x, z, indices)
        deviations = products - products.mean(axis=0)
        total += float(np.mean(np.sum(deviations * deviations, axis=1)))
    return total / HUTCHINSON_VECTORS


def estimate_variance_bounds(
    problem: FiniteSumProblem,
    anchor_points: list[np.ndarray],
    seed: int = 0,
) -> VarianceBounds:
    """Estimate ``H₁`` and ``H₂`` as the largest spreads over anchor points.

    ``H₁² = max_x (1/n) Σ ‖∇f_i(x) − ∇f(x)‖²`` exactly. ``H₂²`` uses the
    spectral norms of the Hessian deviations when the stacked per-sample
    Hessians are small enough, otherwise the mean of ``‖(∇²f_i − ∇²f) z‖²``
    over Rademacher vectors ``z``. The sketched value estimates the Frobenius
    spread, an upper bound on the spectral one in expectation.

    :param problem: The problem.
    :param anchor_points: At least one point.
    :param seed: Seed of the Rademacher vectors.

    :return: The bounds, with ``h2_is_estimate`` set on the sketched path.

    :raise ContractViolationError: If no anchor point is given.
    """
    if not anchor_points:
        raise ContractViolationError(
            message="At least one anchor point is required.",
        )
    dense = problem.n * problem.d * problem.d <= DENSE_VARIANCE_LIMIT
    rng = np.random.default_rng(seed)
    h1_sq = h2_sq = 0.0
    for _x in anchor_points:
        x = check_point(_x, problem.d)
        h1_sq = max(h1_sq, _gradient_spread(problem, x))
        h2_sq = max(
            h2_sq,
            _hessian_spread_dense(problem, x)
            if dense
            else _hessian_spread_sketched(problem, x, rng),
        )
    _LOGGER.debug(
        "Variance bounds H1=%.6g, H2=%.6g (dense=%s).",
        math.sqrt(h1_sq),
        math.sqrt(h2_sq),
        dense,
    )
    return VarianceBounds(
        h1=math.sqrt(h1_sq),
        h2=math.sqrt(h2_sq),
        h2_is_estimate=not dense,
    )


# =============================================================================
# SET SIZES AND DRAWS
# =============================================================================


def plan_sample_sizes(
    problem: FiniteSumProblem,
    x0: np.ndarray,
    config: VariantConfig,
) -> SampleSizes:
    """Choose the run's set sizes from the size rule and the variant.

    The rule sizes all three sets; the variant then forces the sets it does
    not subsample to ``n``. Oracle bounds and variance bounds are measured at
    ``x0`` only when the rule needs them.
    """
    n, d = problem.n, problem.d
    budget = config.budget
    if config.size_rule is SizeRule.FRACTION:
        m = min(n, _ceil_count(config.fraction * n))
        sizes = SampleSizes(h=m, g=m, b=m)
    else:
        delta0 = per_iteration_delta(budget.delta, config.max_iters)
        bounds = oracle_bounds(problem, x0)

        def capped(eps: float, compute: Callable[[], int]) -> int:
            if eps <= 0.0:
                return n
            return min(n, compute())

        size_g = capped(
            budget.eps_g,
            lambda: gradient_sample_size(
                d, delta0, max(bounds.kappa_grad, 1e-12), budget.eps_g
            ),
        )
        size_b = capped(
            budget.eps_b,
            lambda: hessian_sample_size(
                d,
                delta0,
                max(bounds.kappa_hess, 1e-12),
                budget.eps_b,
                budget.v0,
            ),
        )
        if config.size_rule is SizeRule.THEOREM:
            variance = estimate_variance_bounds(
                problem,
                [x0],
                seed=config.seed,
            )
            size_h = theorem_sample_size(
                n, variance.h1, variance.h2, budget.eps_g, budget.eps_b
            )
        else:
            delta_c = step_radius_cap(config.delta_max, config.sigma_min)
            size_h = capped(
                budget.eps_h,
                lambda: function_sample_size(
                    d,
                    delta0,
                    max(bounds.kappa_f, 1e-12),
                    budget.eps_h,
                    delta_c,
                ),
            )
        sizes = SampleSizes(h=size_h, g=size_g, b=size_b)

    if not config.variant.subsamples_function:
        sizes = sizes._replace(h=n)
    if not config.variant.subsamples_gradient:
        sizes = sizes._replace(g=n)
    if not config.variant.subsamples_hessian:
        sizes = sizes._replace(b=n)
    _LOGGER.debug(
        "Sample sizes for %s with the %s rule: %s.",
        config.variant.value,
        config.size_rule.value,
        sizes,
    )
    return sizes


def _draw(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    if size < 1 or size > n:
        raise ContractViolationError(
            message="A sample size must lie in [1, %d], got %d." % (n, size),
        )
    if size == n:
        return np.arange(n)
    return np.sort(rng.choice(n, size=size, replace=False))


def draw_sets(
    rng: np.random.Generator,
    n: int,
    sizes: SampleSizes,
    coupling_trigger: bool = False,
) -> SampleSets:
    """Draw ``S_g``, ``S_B`` and ``S_h`` uniformly without replacement.

    Sets of size ``n`` are the full ascending index range and consume no
    randomness. With ``coupling_trigger`` the function set is a copy of the
    gradient set and no separate draw is made for it.

    :raise ContractViolationError: If a size is outside ``[1, n]``.
    """
    s_g = _draw(rng, n, sizes.g)
    s_b = _draw(rng, n, sizes.b)
    if coupling_trigger:
        return SampleSets(s_h=s_g.copy(), s_g=s_g, s_b=s_b, coupled=True)
    return SampleSets(
        s_h=_draw(rng, n, sizes.h),
        s_g=s_g,
        s_b=s_b,
        coupled=False,
    )


# =============================================================================
# SUBSET-MEAN CONTRACTION
# =============================================================================


def subset_mean_second_moment(
    vectors: np.ndarray,
    subset_size: int,
    draws: int,
    rng: np.random.Generator,
) -> float:
    """Return the empirical mean of ``‖(1/A) Σ_{b∈A} v_b‖²`` over draws of
    uniform subsets ``A`` of the rows of ``vectors``."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    n = vectors.shape[0]
    total = 0.0
    for _ in range(draws):
        subset = _draw(rng, n, subset_size)
        mean = vectors[subset].mean(axis=0)
        total += float(mean @ mean)
    return total / draws


def variance_contraction_bound(vectors: np.ndarray, subset_size: int) -> float:
    """Return ``(𝟙(A<n)/A)·(1/n) Σ ‖v_i‖²`` for the rows of ``vectors``."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    n = vectors.shape[0]
    if subset_size >= n:
        return 0.0
    mean_sq = float(np.mean(np.sum(vectors * vectors, axis=1)))
    return mean_sq / subset_size
