"""The extended dual-averaging iteration.

One step from iterate n to n+1, with mu_n = t_n / gamma_n (0 when
gamma_n = 0):

    xt'_n       = (1 - mu_n) xt_{n-1/2} + mu_n xt_n
    xt_{n+1/2}  = (a_n/a_{n+1}) xt'_n + (1 - a_n/a_{n+1}) xt_1
                  - (s_n / a_{n+1}) g_n
    gamma_{n+1} = (1 - mu_n) gamma_n + s_n
    x_{n+1}     = mirror_prox(G, grad_inverse(xt_{n+1/2}),
                              gamma_{n+1} / a_{n+1})

where xt denotes dual-side vectors (xt_n = grad phi(x_n)), g_n is a
subgradient of F at x_n, and a_n is the schedule's alpha.  The backward
step recovers a subgradient of G at the new iterate,

    h_{n+1} = (a_{n+1} / gamma_{n+1}) (xt_{n+1/2} - xt_{n+1}),

and the same trajectory can be written in accumulated form: x_{n+1} is
the backward step at gamma_{n+1}/a_{n+1} from the point whose dual
coordinates are xt_1 - (sum_{i<=n} s_i g_i + t_i h_i) / a_{n+1}
(``argmin_form_step``).  Under non-increasing s, non-decreasing alpha,
and 0 <= t_n <= gamma_n, the best and the s-weighted-average iterate
satisfy

    f - f*  <=  (alpha_n D(x*, x_1) + (M^2 / 2 sigma)
                 sum_{i<=n} s_i^2 / alpha_i) / sum_{i<=n} s_i,

which ``theoretical_bound`` evaluates from the state's accumulators.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import (ENTROPY_DOMAIN_FLOOR, MirrorDomainError, as_vector)
from .regularizers import canonical_argmin, ensure_supported, mirror_prox

NNZ_THRESHOLD = 1e-12

# relative slack for the lazy schedule-constraint checks
_SCHED_EPS = 1e-12


class ScheduleError(RuntimeError):
    """A schedule violated its constraints mid-run."""


@dataclass
class SolverState:
    """Everything the iteration carries between steps.

    Single-owner: mutate only through ``step`` / ``run``.  Accumulators
    hold sums over iterates 1..n: ``s_sum`` = sum s_i, ``weighted_sum``
    = sum s_i x_i, ``bound_acc`` = sum s_i^2 / alpha_i, ``dual_accum`` =
    sum s_i g_i + t_i h_i (this last one over steps taken, i.e. 1..n-1).
    """

    schedule: object
    n: int
    x: np.ndarray
    x_tilde: np.ndarray
    x_tilde_half: np.ndarray
    x_tilde_1: np.ndarray
    x1: np.ndarray
    gamma: float
    s_sum: float
    weighted_sum: np.ndarray
    bound_acc: float
    dual_accum: np.ndarray
    h: np.ndarray
    best_f: float
    best_x: np.ndarray
    last_s: float


@dataclass
class TraceRow:
    n: int
    f_x: float
    f_avg: float
    gap_best: float
    gap_avg: float
    bound: float
    backward_step: float
    nnz: int
    elapsed_s: float


@dataclass
class RunResult:
    state: SolverState
    rows: list


def init(problem, schedule, x1=None):
    """Start a run at x1, which must minimize G (default: canonical argmin)."""
    d = problem.d
    mirror = problem.mirror
    reg = problem.reg
    ensure_supported(mirror, reg)
    canonical = canonical_argmin(reg, d)
    if x1 is None:
        x1 = canonical
    else:
        x1 = as_vector(x1, dim=d).copy()
    if mirror.kind == "entropy" and np.any(x1 < ENTROPY_DOMAIN_FLOOR):
        raise MirrorDomainError(
            "start point lies outside the entropy mirror's domain (open positive "
            "orthant); pass a strictly positive x1 or use the simplex "
            "regularizer, whose default start is the uniform vector")
    if reg.value(x1) > reg.value(canonical) + 1e-9:
        raise ValueError(
            "start point does not minimize the regularizer: G(x1)=%g exceeds the "
            "canonical minimum %g" % (reg.value(x1), reg.value(canonical)))
    s1 = schedule.s(1)
    alpha1 = schedule.alpha(1)
    if not s1 > 0:
        raise ScheduleError("s_1 must be positive, got %g" % s1)
    if not alpha1 > 0:
        raise ScheduleError("alpha_1 must be positive, got %g" % alpha1)
    xt1 = mirror.grad(x1)
    f1 = problem.objective(x1)
    return SolverState(
        schedule=schedule,
        n=1,
        x=x1.copy(),
        x_tilde=xt1.copy(),
        x_tilde_half=xt1.copy(),
        x_tilde_1=xt1.copy(),
        x1=x1.copy(),
        gamma=0.0,
        s_sum=s1,
        weighted_sum=s1 * x1,
        bound_acc=s1 * s1 / alpha1,
        dual_accum=np.zeros(d),
        h=np.zeros(d),
        best_f=f1,
        best_x=x1.copy(),
        last_s=s1,
    )


def _schedule_values(state, unsafe):
    """Evaluate and (unless unsafe) validate this step's schedule values."""
    sched = state.schedule
    n = state.n
    s_n = sched.s(n)
    alpha_n = sched.alpha(n)
    alpha_next = sched.alpha(n + 1)
    gamma_n = state.gamma
    t_n = sched.t(n, gamma_n)
    if not unsafe:
        slack = _SCHED_EPS * max(1.0, abs(state.last_s))
        if not s_n > 0:
            raise ScheduleError("s_%d = %g is not positive" % (n, s_n))
        if s_n > state.last_s + slack:
            raise ScheduleError(
                "forward steps must be non-increasing: s_%d = %.17g exceeds s_%d = %.17g"
                % (n, s_n, n - 1, state.last_s))
        if not alpha_n > 0:
            raise ScheduleError("alpha_%d = %g is not positive" % (n, alpha_n))
        if alpha_next < alpha_n * (1.0 - _SCHED_EPS):
            raise ScheduleError(
                "alpha must be non-decreasing: alpha_%d = %.17g is below alpha_%d = %.17g"
                % (n + 1, alpha_next, n, alpha_n))
        tslack = _SCHED_EPS * max(1.0, abs(gamma_n))
        if t_n < -tslack or t_n > gamma_n + tslack:
            raise ScheduleError(
                "t_%d = %.17g outside [0, gamma_%d] = [0, %.17g]" % (n, t_n, n, gamma_n))
    mu = t_n / gamma_n if gamma_n > 0 else 0.0
    return s_n, alpha_n, alpha_next, t_n, mu


def step(state, problem, mode="exact", rng=None, unsafe=False):
    """Advance the state by one iteration; mutates and returns it."""
    s_n, alpha_n, alpha_next, t_n, mu = _schedule_values(state, unsafe)
    if mode == "exact":
        g = problem.subgradient(state.x)
    elif mode == "stochastic":
        if rng is None:
            raise ValueError("stochastic mode needs a numpy Generator")
        g = problem.sample_subgradient(state.x, rng).value
    else:
        raise ValueError("mode must be 'exact' or 'stochastic', got %r" % (mode,))

    mirror = problem.mirror
    xt_prime = (1.0 - mu) * state.x_tilde_half + mu * state.x_tilde
    ratio = alpha_n / alpha_next
    xt_half = ratio * xt_prime + (1.0 - ratio) * state.x_tilde_1 - (s_n / alpha_next) * g
    gamma_next = (1.0 - mu) * state.gamma + s_n
    x_next = mirror_prox(problem.reg, mirror, mirror.grad_inverse(xt_half),
                         gamma_next / alpha_next)
    xt_next = mirror.grad(x_next)

    state.dual_accum += s_n * g + t_n * state.h
    state.h = (alpha_next / gamma_next) * (xt_half - xt_next)
    state.x = x_next
    state.x_tilde = xt_next
    state.x_tilde_half = xt_half
    state.gamma = gamma_next
    state.last_s = s_n
    state.n += 1

    s_next = state.schedule.s(state.n)
    state.s_sum += s_next
    state.weighted_sum += s_next * x_next
    state.bound_acc += s_next * s_next / alpha_next

    f = problem.objective(x_next)
    if f < state.best_f:
        state.best_f = f
        state.best_x = x_next.copy()
    return state


def extract_h(state):
    """The recovered subgradient of G at the current iterate (zero at init)."""
    return state.h.copy()


def averaged_iterate(state):
    """The s-weighted average of iterates 1..n."""
    return state.weighted_sum / state.s_sum


def theoretical_bound(state, d_star, M, sigma):
    """Guaranteed objective gap at the current n for constants (D*, M, sigma)."""
    if d_star < 0:
        raise ValueError("Bregman distance to the optimum cannot be negative")
    alpha_n = state.schedule.alpha(state.n)
    return (alpha_n * d_star + (M * M) / (2.0 * sigma) * state.bound_acc) / state.s_sum


_ARGMIN_FORM_REGS = ("l1", "zero", "box")


def argmin_form_step(state, problem):
    """Next iterate computed from the accumulated dual sum instead of the
    forward recursion; Euclidean mirror with a separable-prox regularizer
    only.  Exact-gradient semantics."""
    mirror = problem.mirror
    reg = problem.reg
    if mirror.kind != "euclidean" or reg.kind not in _ARGMIN_FORM_REGS:
        raise NotImplementedError(
            "accumulated form supports the euclidean mirror with one of %s"
            % (_ARGMIN_FORM_REGS,))
    s_n, _, alpha_next, t_n, mu = _schedule_values(state, unsafe=False)
    g = problem.subgradient(state.x)
    dual = state.dual_accum + s_n * g + t_n * state.h
    gamma_next = (1.0 - mu) * state.gamma + s_n
    base = mirror.grad_inverse(state.x_tilde_1 - dual / alpha_next)
    return mirror_prox(reg, mirror, base, gamma_next / alpha_next)


def _preview_backward_step(state):
    """gamma_{n+1}/alpha_{n+1} as the next step would use it."""
    sched = state.schedule
    n = state.n
    s_n = sched.s(n)
    gamma_n = state.gamma
    t_n = sched.t(n, gamma_n)
    mu = t_n / gamma_n if gamma_n > 0 else 0.0
    return ((1.0 - mu) * gamma_n + s_n) / sched.alpha(n + 1)


def trace_row(state, problem, reference=None, d_star=None, t0=None, unsafe=False):
    """Snapshot the state into a TraceRow; gaps and bound are nan without a
    reference, and the bound is also nan for unsafe runs."""
    f_x = problem.objective(state.x)
    f_avg = problem.objective(averaged_iterate(state))
    nan = float("nan")
    if reference is not None:
        gap_best = state.best_f - reference.f_star
        gap_avg = f_avg - reference.f_star
    else:
        gap_best = gap_avg = nan
    if reference is not None and d_star is not None and not unsafe:
        bound = theoretical_bound(state, d_star, problem.M, problem.mirror.sigma)
    else:
        bound = nan
    nnz = int(np.count_nonzero(np.abs(state.x) > NNZ_THRESHOLD))
    elapsed = time.perf_counter() - t0 if t0 is not None else 0.0
    return TraceRow(state.n, f_x, f_avg, gap_best, gap_avg, bound,
                    _preview_backward_step(state), nnz, elapsed)


def run(problem, schedule, n_iters, mode="exact", seed=None, stride=100,
        x1=None, reference=None, unsafe=False, callback=None, timing="deterministic"):
    """Run n_iters steps, logging a TraceRow whenever the iterate index n is a
    multiple of stride.  Exact mode ignores the seed entirely."""
    if n_iters < 1:
        raise ValueError("need at least one iteration")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if timing not in ("deterministic", "wall"):
        raise ValueError("timing must be 'deterministic' or 'wall', got %r" % (timing,))
    rng = np.random.default_rng(seed) if mode == "stochastic" else None
    state = init(problem, schedule, x1=x1)
    d_star = None
    if reference is not None:
        d_star = problem.mirror.bregman(reference.x_star, state.x1)
    t0 = time.perf_counter() if timing == "wall" else None
    rows = []
    for _ in range(n_iters):
        state = step(state, problem, mode=mode, rng=rng, unsafe=unsafe)
        if callback is not None:
            callback(state)
        if state.n % stride == 0:
            rows.append(trace_row(state, problem, reference, d_star, t0, unsafe))
    return RunResult(state, rows)
