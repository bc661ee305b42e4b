"""The trust-region (STR) and adaptive cubic (SARC) outer loops.

Both loops share one iteration skeleton: draw the sample sets, build the
gradient and Hessian estimates, solve the subproblem, evaluate the function
estimate at both ends of the step, then accept or reject on ``ρ̂ ≥ η`` and
adapt ``Δ`` or ``σ``. A small gradient estimate switches to the
negative-curvature test, which either certifies approximate second-order
stationarity or yields a curvature step.
"""

import math
import time
from collections.abc import Callable
from logging import getLogger

import numpy as np

from app.core import (
    Algorithm,
    ContractViolationError,
    FiniteSumProblem,
    InexactnessBudget,
    IterationRecord,
    OptimizerError,
    RatioReport,
    RunTrace,
    SampleSets,
    SNBenchException,
    SolutionKind,
    SubproblemSolution,
    SymmetricOperator,
    TerminationReason,
    Variant,
    VariantConfig,
    check_point,
    full_value,
)
from app.lib.accounting import PropCounter
from app.lib.models import ModelState, model_decrease, ratio_sarc, ratio_str
from app.lib.sampling import SampleSizes, draw_sets, plan_sample_sizes
from app.lib.solvers import (
    cauchy_step_arc,
    lanczos_min_eig,
    negative_curvature_step,
    negative_curvature_step_arc,
    refine_arc,
    steihaug_cg,
)

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)

MIN_RADIUS: float = 1e-16

MAX_PENALTY: float = 1e16

# Power iteration underestimates ‖B‖; the cubic Cauchy step needs an upper
# estimate.
NORM_SAFETY: float = 1.1


# =============================================================================
# TYPES
# =============================================================================

Monitor = Callable[[np.ndarray], tuple[float, float | None]]


# =============================================================================
# TERMINATION
# =============================================================================


def check_termination(
    g_norm: float,
    lambda_min_est: float,
    budget: InexactnessBudget,
) -> bool:
    """Return ``True`` when the estimates certify approximate optimality.

    That is ``‖g‖ ≤ ε_∇f + ε_g`` and ``λ_min(B) ≥ −(ε_H − ε_B)``. With the
    oracle errors within ``ε_g`` and ``ε_B`` this gives
    ``‖∇f‖ ≤ ε_∇f + 2ε_g`` and ``λ_min(∇²f) ≥ −ε_H − v₀ε_B``.
    """
    return (
        g_norm <= budget.grad_threshold
        and lambda_min_est >= -budget.curvature_threshold
    )


def full_objective_monitor(problem: FiniteSumProblem) -> Monitor:
    """Return a monitor reporting the full objective and no test error."""

    def monitor(x: np.ndarray) -> tuple[float, float | None]:
        return full_value(problem, x), None

    return monitor


# =============================================================================
# RUN
# =============================================================================


class _Iterate:
    """The mutable state of a run between iterations."""

    def __init__(self, x: np.ndarray, radius_or_sigma: float):
        self.x: np.ndarray = x
        self.radius_or_sigma: float = radius_or_sigma


class _OptimizerRun:
    def __init__(
        self,
        problem: FiniteSumProblem,
        x0: np.ndarray,
        config: VariantConfig,
        monitor: Monitor | None,
        record_wall_time: bool,
    ):
        self._problem: FiniteSumProblem = problem
        self._config: VariantConfig = config
        self._monitor: Monitor = monitor or full_objective_monitor(problem)
        self._record_wall_time: bool = record_wall_time
        self._rng: np.random.Generator = np.random.default_rng(config.seed)
        self._counter: PropCounter = PropCounter(config.max_props)
        self._state: _Iterate = _Iterate(
            check_point(x0, problem.d, name="x0").copy(),
            config.radius_or_penalty0,
        )
        self._records: list[IterationRecord] = []
        self._sizes: SampleSizes = plan_sample_sizes(
            problem,
            self._state.x,
            config,
        )

    @property
    def _is_str(self) -> bool:
        return self._config.algorithm is Algorithm.STR

    def run(self) -> RunTrace:
        self._record_start()
        termination = TerminationReason.MAX_ITERS
        try:
            for k in range(1, self._config.max_iters + 1):
                reason = self._iterate(k)
                if reason is not None:
                    termination = reason
                    break
        except SNBenchException as exp:
            raise OptimizerError(
                message="Run aborted at iteration %d: %s"
                % (len(self._records), exp.message),
                trace=self._trace(None),
            ) from exp
        except Exception as exp:
            raise OptimizerError(
                message="Run aborted at iteration %d: %s"
                % (len(self._records), exp),
                trace=self._trace(None),
            ) from exp
        _LOGGER.info(
            "%s-%s stopped after %d iterations (%s), %d propagations, "
            "train loss %.6g.",
            self._config.algorithm.value,
            self._config.variant.value,
            len(self._records) - 1,
            termination.value,
            self._counter.total,
            self._records[-1].train_loss,
        )
        return self._trace(termination)

    # -------------------------------------------------------------------------
    # Iteration
    # -------------------------------------------------------------------------

    def _iterate(self, k: int) -> TerminationReason | None:
        started = time.perf_counter()
        problem, config, state = self._problem, self._config, self._state
        budget = config.budget
        sets = draw_sets(self._rng, problem.n, self._sizes)
        g = problem.mean_grad(state.x, sets.s_g)
        b_op = problem.hessian_operator(state.x, sets.s_b)
        g_norm = float(np.linalg.norm(g))

        small_gradient = g_norm <= budget.grad_threshold
        if small_gradient:
            eig = lanczos_min_eig(b_op, tol=config.lanczos_tol, rng=self._rng)
            if check_termination(g_norm, eig.lambda_min_est, budget):
                return self._finish_certified(k, sets, b_op, g_norm, started)
            solution = self._curvature_step(g, b_op, eig.direction)
        else:
            solution = self._solve(g, b_op)
        gamma = b_op.apply_count

        if small_gradient and config.variant is Variant.SHGF:
            sets = sets.couple()
        s = solution.s
        h_x = problem.mean_value(state.x, sets.s_h)
        h_xs = problem.mean_value(state.x + s, sets.s_h)
        model = ModelState(
            h_at_x=h_x,
            g=g,
            b_op=b_op,
            radius_or_sigma=state.radius_or_sigma,
            algorithm=config.algorithm,
            eps_h=budget.eps_h,
            sarc_correction=config.sarc_correction,
        )
        compute_ratio = ratio_str if self._is_str else ratio_sarc
        ratio = compute_ratio(model, h_x, h_xs, s)

        sizes = SampleSizes(*sets.sizes)
        if self._counter.would_exceed(sizes, gamma):
            _LOGGER.debug("Iteration %d would exceed the budget.", k)
            return TerminationReason.BUDGET
        props = self._counter.charge(sizes, gamma)

        accepted = not ratio.degenerate and ratio.rho_hat >= config.eta
        if accepted:
            state.x = state.x + s
        state.radius_or_sigma = self._adapt(accepted)
        self._append(
            k,
            props,
            ratio,
            accepted,
            solution,
            sets,
            g_norm,
            gamma,
            started,
        )
        if self._is_str and state.radius_or_sigma < MIN_RADIUS:
            return TerminationReason.STALLED
        if not self._is_str and state.radius_or_sigma > MAX_PENALTY:
            return TerminationReason.STALLED
        return None

    def _solve(
        self,
        g: np.ndarray,
        b_op: SymmetricOperator,
    ) -> SubproblemSolution:
        config, state = self._config, self._state
        if self._is_str:
            return steihaug_cg(
                g,
                b_op,
                state.radius_or_sigma,
                max_iter=config.steihaug_max_iter,
            )
        if b_op.dense is not None:
            b_norm = b_op.norm_estimate()
        else:
            b_norm = NORM_SAFETY * b_op.norm_estimate(rng=self._rng)
        cauchy = cauchy_step_arc(g, b_op, b_norm, state.radius_or_sigma)
        refined = refine_arc(
            g,
            b_op,
            state.radius_or_sigma,
            cauchy.s,
            config.kappa_theta,
            max_iter=config.refine_max_iter,
        )
        return refined if refined.converged else cauchy

    def _curvature_step(
        self,
        g: np.ndarray,
        b_op: SymmetricOperator,
        direction: np.ndarray,
    ) -> SubproblemSolution:
        state = self._state
        if not self._is_str:
            return negative_curvature_step_arc(
                direction,
                g,
                b_op,
                state.radius_or_sigma,
                self._config.kappa_theta,
                max_iter=self._config.refine_max_iter,
            )
        s = negative_curvature_step(direction, state.radius_or_sigma, g)
        model = ModelState(0.0, g, b_op, state.radius_or_sigma, Algorithm.STR)
        return SubproblemSolution(
            s=s,
            hvp_count=1,
            kind=SolutionKind.NEG_CURV,
            predicted_decrease=model_decrease(model, s),
            boundary_hit=True,
            residual_norm=None,
            converged=True,
            theta=None,
        )

    def _adapt(self, accepted: bool) -> float:
        config = self._config
        current = self._state.radius_or_sigma
        if self._is_str:
            if accepted:
                return min(config.delta_max, config.r2 * current)
            return config.r1 * current
        if accepted:
            return max(config.sigma_min, config.r1 * current)
        return config.r2 * current

    def _finish_certified(
        self,
        k: int,
        sets: SampleSets,
        b_op: SymmetricOperator,
        g_norm: float,
        started: float,
    ) -> TerminationReason:
        # No function estimate is evaluated on the certifying iteration.
        sizes = SampleSizes(h=0, g=len(sets.s_g), b=len(sets.s_b))
        gamma = b_op.apply_count
        if self._counter.would_exceed(sizes, gamma):
            return TerminationReason.BUDGET
        props = self._counter.charge(sizes, gamma)
        train_loss, test_error = self._monitor(self._state.x)
        self._records.append(
            IterationRecord(
                iteration=k,
                cum_props=self._counter.total,
                props=props,
                train_loss=train_loss,
                test_error=test_error,
                rho_tilde=math.nan,
                rho_hat=math.nan,
                accepted=False,
                delta_or_sigma=self._state.radius_or_sigma,
                step_norm=0.0,
                gamma=gamma,
                size_h=0,
                size_g=sizes.g,
                size_b=sizes.b,
                coupled=False,
                grad_norm=g_norm,
                theta=None,
                kind=None,
                wall_ms=self._elapsed_ms(started),
            ),
        )
        return TerminationReason.GRAD_AND_CURVATURE

    # -------------------------------------------------------------------------
    # Telemetry
    # -------------------------------------------------------------------------

    def _elapsed_ms(self, started: float) -> float | None:
        if not self._record_wall_time:
            return None
        return (time.perf_counter() - started) * 1e3

    def _record_start(self) -> None:
        started = time.perf_counter()
        train_loss, test_error = self._monitor(self._state.x)
        self._records.append(
            IterationRecord(
                iteration=0,
                cum_props=0,
                props=0,
                train_loss=train_loss,
                test_error=test_error,
                rho_tilde=math.nan,
                rho_hat=math.nan,
                accepted=False,
                delta_or_sigma=self._state.radius_or_sigma,
                step_norm=0.0,
                gamma=0,
                size_h=0,
                size_g=0,
                size_b=0,
                coupled=False,
                grad_norm=math.nan,
                theta=None,
                kind=None,
                wall_ms=self._elapsed_ms(started),
            ),
        )

    def _append(
        self,
        k: int,
        props: int,
        ratio: RatioReport,
        accepted: bool,
        solution: SubproblemSolution,
        sets: SampleSets,
        g_norm: float,
        gamma: int,
        started: float,
    ) -> None:
        train_loss, test_error = self._monitor(self._state.x)
        record = IterationRecord(
            iteration=k,
            cum_props=self._counter.total,
            props=props,
            train_loss=train_loss,
            test_error=test_error,
            rho_tilde=ratio.rho_tilde,
            rho_hat=ratio.rho_hat,
            accepted=accepted,
            delta_or_sigma=self._state.radius_or_sigma,
            step_norm=float(np.linalg.norm(solution.s)),
            gamma=gamma,
            size_h=len(sets.s_h),
            size_g=len(sets.s_g),
            size_b=len(sets.s_b),
            coupled=sets.coupled,
            grad_norm=g_norm,
            theta=solution.theta,
            kind=solution.kind.value,
            wall_ms=self._elapsed_ms(started),
        )
        self._records.append(record)
        _LOGGER.debug(
            "iter=%d rho_tilde=%.4g rho_hat=%.4g accepted=%s "
            "delta_or_sigma=%.4g props=%d loss=%.6g",
            k,
            ratio.rho_tilde,
            ratio.rho_hat,
            accepted,
            record.delta_or_sigma,
            record.cum_props,
            train_loss,
        )

    def _trace(self, termination: TerminationReason | None) -> RunTrace:
        return RunTrace(
            records=list(self._records),
            x_final=self._state.x.copy(),
            termination=termination,
        )


def _run(
    algorithm: Algorithm,
    problem: FiniteSumProblem,
    x0: np.ndarray,
    config: VariantConfig,
    monitor: Monitor | None,
    record_wall_time: bool,
) -> RunTrace:
    if config.algorithm is not algorithm:
        raise ContractViolationError(
            message='The config is for "%s", not "%s".'
            % (config.algorithm.value, algorithm.value),
        )
    return _OptimizerRun(problem, x0, config, monitor, record_wall_time).run()


def run_str(
    problem: FiniteSumProblem,
    x0: np.ndarray,
    config: VariantConfig,
    monitor: Monitor | None = None,
    record_wall_time: bool = False,
) -> RunTrace:
    """Minimize ``problem`` from ``x0`` with the stochastic trust region.

    Steps come from Steihaug-CG, or from a boundary step along the detected
    negative curvature when the gradient estimate is small. A step is
    accepted iff ``ρ̂ ≥ η``; then ``Δ ← min(Δ_max, r₂Δ)``, otherwise
    ``Δ ← r₁Δ``.

    :param problem: The finite sum to minimize.
    :param x0: The start point.
    :param config: A config with ``algorithm`` set to STR.
    :param monitor: Returns ``(train loss, test error)`` for each record;
        defaults to the full objective and no test error.
    :param record_wall_time: Fill ``wall_ms`` in the records.

    :return: The trace, starting with an iteration-0 record at ``x0``.

    :raise ContractViolationError: If the config or ``x0`` is invalid.
    :raise OptimizerError: If the run fails; carries the partial trace.
    """
    return _run(Algorithm.STR, problem, x0, config, monitor, record_wall_time)


def run_sarc(
    problem: FiniteSumProblem,
    x0: np.ndarray,
    config: VariantConfig,
    monitor: Monitor | None = None,
    record_wall_time: bool = False,
) -> RunTrace:
    """Minimize ``problem`` from ``x0`` with stochastic adaptive cubic
    regularization.

    Steps are cubic Cauchy steps refined until they satisfy the stationarity
    conditions, falling back to the Cauchy step. A step is accepted iff
    ``ρ̂ ≥ η``; then ``σ ← max(σ_min, r₁σ)``, otherwise ``σ ← r₂σ``.

    See :func:`run_str` for the parameters and errors.
    """
    return _run(Algorithm.SARC, problem, x0, config, monitor, record_wall_time)


def run_optimizer(
    problem: FiniteSumProblem,
    x0: np.ndarray,
    config: VariantConfig,
    monitor: Monitor | None = None,
    record_wall_time: bool = False,
) -> RunTrace:
    """Dispatch to :func:`run_str` or :func:`run_sarc` by the config."""
    runner = run_str if config.algorithm is Algorithm.STR else run_sarc
    return runner(problem, x0, config, monitor, record_wall_time)
