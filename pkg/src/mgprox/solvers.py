"""First-order solvers for composite problems.

ista / fista / agm run on the fine level; mfista is the monotone solver
used on smoothed coarse models; magma couples gradient and mirror steps
and replaces some gradient steps with coarse correction steps obtained
from a first-order-coherent reduced model.

All solvers stop on the gradient-mapping norm ||D(x_k)||_2 < eps, where
D(x) = x - prox(x), and emit a per-iteration trace with the columns
(k, step_kind, F, D_norm, eta, alpha, t, s, elapsed_ns).

A run owns its state exclusively; several runs sharing one (immutable)
problem may proceed concurrently.
"""

import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .mirror import EuclideanGeometry, mirror_step
from .multilevel import RestrictionChain, build_chain, build_coarse_model
from .problem import CompositeProblem, SmoothedView

__all__ = [
    "SolverConfig",
    "MagmaState",
    "TraceRow",
    "CoarseEvent",
    "Solution",
    "LineSearchError",
    "InvariantViolation",
    "ista",
    "fista",
    "agm",
    "mfista",
    "CoarseSolveResult",
    "coarse_condition",
    "armijo_search",
    "update_eta_alpha",
    "magma",
    "SOLVERS",
    "run_solver",
]

NAN = float("nan")


class LineSearchError(RuntimeError):
    """Raised when the backtracking grid is exhausted without acceptance."""


class InvariantViolation(RuntimeError):
    """Raised when a live bookkeeping or descent invariant fails."""


@dataclass
class SolverConfig:
    """Validated solver parameters.

    Defaults are the working set for the l1 instance family:
    kappa=0.8, K_d=30, tau=0.95, s0=10, eps=1e-6, coarse tolerance 1e-3.
    theta has no published value; 0.5 is used.  The Armijo constant c is
    also unpublished, and it does double duty here: it both accepts line
    search steps and scales the coarse-branch eta as L_H/(c s kappa^2),
    so the customary 1e-4 inflates eta by four orders of magnitude and
    wipes out the momentum after every coarse step (measured 10x more
    iterations at benchmark scale); 0.5 keeps the coupling tight.
    kappa=1 is allowed as a degenerate setting that switches coarse
    steps off (the norm test is strict).
    """

    eps: float = 1e-6
    max_iters: int = 1000
    kappa: float = 0.8
    theta: float = 0.5
    K_d: int = 30
    armijo_c: float = 0.5
    tau: float = 0.95
    s0: float = 10.0
    mu: float = 1e-3
    mu_schedule: str = "fixed"  # "fixed" or "horizon"
    zeta: float = 1.0
    coarse_tol: float = 1e-3
    coarse_budget: int = 100
    levels: int = 2
    line_search_cap: int = 100
    backtracking: bool = False
    bt_init_L: float = 1.0
    bt_growth: float = 2.0

    def __post_init__(self):
        checks = [
            (self.eps > 0, f"eps must be positive (got {self.eps})"),
            (self.max_iters >= 1, f"max_iters must be >= 1 (got {self.max_iters})"),
            (0 < self.kappa <= 1, f"kappa must lie in (0, 1] (got {self.kappa})"),
            (self.theta > 0, f"theta must be positive (got {self.theta})"),
            (self.K_d >= 1, f"K_d must be >= 1 (got {self.K_d})"),
            (0 < self.armijo_c < 1, f"armijo c must lie in (0, 1) (got {self.armijo_c})"),
            (0 < self.tau < 1, f"tau must lie in (0, 1) (got {self.tau})"),
            (self.s0 > 0, f"s0 must be positive (got {self.s0})"),
            (self.mu > 0, f"mu must be positive (got {self.mu})"),
            (self.mu_schedule in ("fixed", "horizon"),
             f"mu_schedule must be 'fixed' or 'horizon' (got {self.mu_schedule})"),
            (0 < self.zeta <= 1, f"zeta must lie in (0, 1] (got {self.zeta})"),
            (self.coarse_tol > 0, f"coarse_tol must be positive (got {self.coarse_tol})"),
            (self.coarse_budget >= 1,
             f"coarse_budget must be >= 1 (got {self.coarse_budget})"),
            (self.levels >= 1, f"levels must be >= 1 (got {self.levels})"),
            (self.line_search_cap >= 1,
             f"line_search_cap must be >= 1 (got {self.line_search_cap})"),
            (self.bt_init_L > 0, f"bt_init_L must be positive (got {self.bt_init_L})"),
            (self.bt_growth > 1, f"bt_growth must exceed 1 (got {self.bt_growth})"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)


@dataclass
class TraceRow:
    k: int
    step_kind: str  # grad | coarse | fallback
    F: float
    D_norm: float
    eta: float
    alpha: float
    t: float
    s: float
    elapsed_ns: int


@dataclass
class CoarseEvent:
    """Diagnostics of one executed coarse correction step."""

    k: int
    slope: float           # <d_k, grad F_mu(x_k)>
    grad_mu_norm: float
    L_H: float
    s: float
    coarse_iters: int


@dataclass
class MagmaState:
    """Coupled iterate triple and step-size bookkeeping."""

    k: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    alpha: float
    eta: float
    t: float = NAN
    x_tilde: np.ndarray = None
    q: int = 0
    s_prev: float = NAN
    step_log: list = field(default_factory=list)


@dataclass
class Solution:
    x: np.ndarray
    objective: float
    grad_map_norm: float
    iterations: int
    converged: bool
    step_counts: dict
    elapsed_s: float
    trace: list
    coarse_events: list = field(default_factory=list)


@dataclass
class CoarseSolveResult:
    x: np.ndarray
    iterations: int
    values: list       # F_H(x_{H,0}), F_H(x_{H,1}), ...
    grad_norm: float
    available: bool    # False when the start point was already stationary


# ---------------------------------------------------------------------------
# Shared helpers.


def _as_start(problem, x0):
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.dim,):
        raise ValueError(
            f"x0 has shape {x0.shape}, expected ({problem.dim},)")
    return x0.copy()


def _prox_at(problem, x, L):
    """Prox step and the gradient used to take it (one f-gradient pass)."""
    fgx = problem.f_grad(x)
    return problem.g_prox(x - fgx / L, 1.0 / L), fgx


def _backtracked_prox(problem, x, L, growth):
    """Grow L geometrically until F(prox_L(x)) <= F(x) - Prog_L(x)."""
    Fx = problem.value(x)
    fgx = problem.f_grad(x)
    gx_val = problem.g_value(x)
    while True:
        y = problem.g_prox(x - fgx / L, 1.0 / L)
        d = y - x
        prog_val = -(0.5 * L * float(d @ d) + float(fgx @ d)
                     + problem.g_value(y) - gx_val)
        if problem.value(y) <= Fx - prog_val + 1e-12 * max(1.0, abs(Fx)):
            return y, fgx, L
        L *= growth


def _finish(problem, x, Dn, k, converged, counts, t0, trace, events=None):
    return Solution(
        x=x,
        objective=problem.value(x),
        grad_map_norm=Dn,
        iterations=k,
        converged=converged,
        step_counts=dict(counts),
        elapsed_s=time.perf_counter() - t0,
        trace=trace,
        coarse_events=events or [],
    )


# ---------------------------------------------------------------------------
# Baseline solvers.


def ista(problem: CompositeProblem, x0, config: SolverConfig) -> Solution:
    """Proximal gradient iteration x_{k+1} = prox(x_k); monotone in F."""
    x = _as_start(problem, x0)
    t0 = time.perf_counter()
    ns0 = time.monotonic_ns()
    trace = []
    L = config.bt_init_L if config.backtracking else problem.L_f
    for k in range(config.max_iters):
        if config.backtracking:
            xn, _, L = _backtracked_prox(problem, x, L, config.bt_growth)
        else:
            xn, _ = _prox_at(problem, x, L)
        Dn = float(np.linalg.norm(x - xn))
        if Dn < config.eps:
            return _finish(problem, x, Dn, k, True, {"grad": k}, t0, trace)
        x = xn
        trace.append(TraceRow(k, "grad", problem.value(x), Dn,
                              NAN, NAN, NAN, NAN, time.monotonic_ns() - ns0))
    Dn = float(np.linalg.norm(x - _prox_at(problem, x, L)[0]))
    return _finish(problem, x, Dn, config.max_iters, Dn < config.eps,
                   {"grad": config.max_iters}, t0, trace)


def fista(problem: CompositeProblem, x0, config: SolverConfig) -> Solution:
    """Accelerated proximal gradient with the t_{k+1} = (1+sqrt(1+4t_k^2))/2
    momentum sequence; stops on ||D(x_k)|| < eps at the main iterate."""
    x_prev = _as_start(problem, x0)
    y = x_prev.copy()
    t = 1.0
    t0 = time.perf_counter()
    ns0 = time.monotonic_ns()
    trace = []
    L = config.bt_init_L if config.backtracking else problem.L_f
    best_F, best_x = problem.value(x_prev), x_prev
    for k in range(config.max_iters):
        if config.backtracking:
            x, _, L = _backtracked_prox(problem, y, L, config.bt_growth)
        else:
            x, _ = _prox_at(problem, y, L)
        p, _ = _prox_at(problem, x, problem.L_f)
        Dn = float(np.linalg.norm(x - p))
        Fx = problem.value(x)
        trace.append(TraceRow(k, "grad", Fx, Dn, NAN, NAN, NAN, NAN,
                              time.monotonic_ns() - ns0))
        if Fx < best_F:
            best_F, best_x = Fx, x
        if Dn < config.eps:
            return _finish(problem, x, Dn, k + 1, True, {"grad": k + 1}, t0, trace)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x + ((t - 1.0) / t_next) * (x - x_prev)
        x_prev, t = x, t_next
    Dn = float(np.linalg.norm(best_x - _prox_at(problem, best_x, problem.L_f)[0]))
    return _finish(problem, best_x, Dn, config.max_iters, False,
                   {"grad": config.max_iters}, t0, trace)


def update_eta_alpha(state, branch: str, s_k, L_f: float, L_H,
                     config: SolverConfig):
    """Next (eta, alpha) for the coupled bookkeeping.

    k = 0 seeds the recursion with eta_1 = L_f, alpha_1 = 1/L_f.  For
    k >= 1, eta_{k+1} is L_f on the gradient branch and
    max(1/(4 alpha_k^2 eta_k), L_H/(c s_k kappa^2)) on the coarse branch;
    alpha_{k+1} = 1/(2 eta_{k+1}) + alpha_k sqrt(eta_k/eta_{k+1}) is the
    positive root that keeps alpha^2 eta telescoping exactly, and reduces
    to (k+2)/(2 L_f) on all-gradient runs.
    """
    if state.k == 0:
        return L_f, 1.0 / L_f
    if branch == "coarse":
        eta_next = max(1.0 / (4.0 * state.alpha ** 2 * state.eta),
                       L_H / (config.armijo_c * s_k * config.kappa ** 2))
    else:
        eta_next = L_f
    alpha_next = 1.0 / (2.0 * eta_next) + state.alpha * math.sqrt(state.eta / eta_next)
    return eta_next, alpha_next


def _combination_weight(alpha, eta):
    """t = 1/(alpha * eta), snapped to 1 when float dust pushes it above."""
    return min(1.0 / (alpha * eta), 1.0)


def agm(problem: CompositeProblem, x0, config: SolverConfig) -> Solution:
    """Coupled gradient/mirror scheme with alpha_{k+1} = (k+2)/(2 L_f).

    x_k = t_k z_k + (1-t_k) y_k, y_{k+1} = prox(x_k),
    z_{k+1} = Mirr_{z_k}(grad f(x_k), alpha_{k+1}).
    """
    geometry = EuclideanGeometry()
    L_f = problem.L_f
    y = _as_start(problem, x0)
    z = y.copy()
    state = MagmaState(k=0, x=y, y=y, z=z, alpha=0.0, eta=L_f)
    t0 = time.perf_counter()
    ns0 = time.monotonic_ns()
    trace = []
    best_F, best_x = problem.value(y), y
    for k in range(config.max_iters):
        eta_n, alpha_n = update_eta_alpha(state, "grad", None, L_f, None, config)
        t = _combination_weight(alpha_n, eta_n)
        x = t * z + (1.0 - t) * y
        p, fgx = _prox_at(problem, x, L_f)
        Dn = float(np.linalg.norm(x - p))
        if Dn < config.eps:
            return _finish(problem, x, Dn, k, True, {"grad": k}, t0, trace)
        y = p
        z = mirror_step(geometry, problem, z, fgx, alpha_n)
        state.k, state.alpha, state.eta, state.t = k + 1, alpha_n, eta_n, t
        Fy = problem.value(y)
        if Fy < best_F:
            best_F, best_x = Fy, y
        trace.append(TraceRow(k, "grad", Fy, Dn, eta_n, alpha_n, t, NAN,
                              time.monotonic_ns() - ns0))
    Dn = float(np.linalg.norm(best_x - _prox_at(problem, best_x, L_f)[0]))
    return _finish(problem, best_x, Dn, config.max_iters, False,
                   {"grad": config.max_iters}, t0, trace)


def mfista(objective, x0, tol: float, max_iters: int) -> CoarseSolveResult:
    """Monotone accelerated gradient descent on a smooth objective.

    ``objective`` must provide value(x), grad(x) and lipschitz().  The
    iterate sequence is nonincreasing in value; stops when the gradient
    norm falls below ``tol`` or the budget runs out.  If the start point
    is already stationary the result is flagged unavailable so callers
    can fall back to a gradient step.
    """
    x0 = np.asarray(x0, dtype=float)
    L = objective.lipschitz()
    g0 = objective.grad(x0)
    gn = float(np.linalg.norm(g0))
    F0 = objective.value(x0)
    if gn < tol:
        return CoarseSolveResult(x0, 0, [F0], gn, available=False)
    x_prev, F_prev = x0, F0
    y = x0
    gy = g0
    t = 1.0
    values = [F0]
    for j in range(1, max_iters + 1):
        zc = y - gy / L
        Fz = objective.value(zc)
        if Fz <= F_prev:
            x, Fx = zc, Fz
        else:
            x, Fx = x_prev, F_prev
        values.append(Fx)
        gx = objective.grad(x)
        gn = float(np.linalg.norm(gx))
        if gn < tol or j == max_iters:
            return CoarseSolveResult(x, j, values, gn, available=True)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x + (t / t_next) * (zc - x) + ((t - 1.0) / t_next) * (x - x_prev)
        gy = objective.grad(y)
        x_prev, F_prev, t = x, Fx, t_next
    return CoarseSolveResult(x_prev, max_iters, values, gn, available=True)


def coarse_condition(state: MagmaState, grad_mu: np.ndarray,
                     chain: RestrictionChain, config: SolverConfig) -> bool:
    """Decide whether the coarse direction is worth computing at state.x.

    True iff ||R g|| > kappa ||g|| (strictly) and the iterate has either
    moved theta-relatively away from the last coarse anchor or at least
    K_d consecutive gradient steps have accumulated since then (the
    anchor-retry allowance).  Without the retry gate, consecutive coarse
    steps are never blocked (q resets to zero on each one) and the fine
    level is starved of prox steps near the optimum.  Before the first
    coarse step the proximity clause counts as satisfied.
    """
    gn = float(np.linalg.norm(grad_mu))
    rn = float(np.linalg.norm(chain.restrict(grad_mu)))
    if not rn > config.kappa * gn:
        return False
    if state.x_tilde is None:
        return True
    moved = float(np.linalg.norm(state.x - state.x_tilde)) \
        > config.theta * float(np.linalg.norm(state.x_tilde))
    return moved or state.q >= config.K_d


def armijo_search(view: SmoothedView, x: np.ndarray, d: np.ndarray,
                  config: SolverConfig, slope: float = None,
                  f_x: float = None, s_start: float = None) -> float:
    """Largest s in {s0 * tau^i} with F_mu(x+s d) <= F_mu(x) + c s <d, grad>.

    For convex F_mu the acceptance set along a descent direction is an
    interval [0, s_hat], so the largest accepted grid point is well
    defined and can be located from any grid point: ``s_start`` (itself
    of the form s0 * tau^i, e.g. the previously accepted step) is scanned
    up while accepted and down while rejected, giving the same result as
    the plain top-down scan with fewer evaluations.

    Raises LineSearchError after ``line_search_cap`` probes below the
    start; raises ValueError if d is not a descent direction at x.
    """
    if slope is None:
        slope = float(d @ view.grad(x))
    if not slope < 0:
        raise ValueError(f"d is not a descent direction (slope {slope:.3e})")
    if f_x is None:
        f_x = view.value(x)

    def accepted(step):
        return view.value(x + step * d) <= f_x + config.armijo_c * step * slope

    s = config.s0 if s_start is None else min(s_start, config.s0)
    if accepted(s):
        grown = s / config.tau
        while grown <= config.s0 * (1.0 + 1e-12) and accepted(grown):
            s = grown
            grown = s / config.tau
        return min(s, config.s0)
    for _ in range(config.line_search_cap):
        s *= config.tau
        if accepted(s):
            return s
    raise LineSearchError(
        f"no step accepted after {config.line_search_cap} shrinkages "
        f"(slope {slope:.3e})")


def _check_bookkeeping(state, eta_n, alpha_n, t):
    """Telescoping identity and t in (0, 1], enforced every iteration k >= 1."""
    prev = state.alpha ** 2 * state.eta
    residual = alpha_n ** 2 * eta_n - alpha_n + 1.0 / (4.0 * eta_n) - prev
    if abs(residual) > 1e-9 * max(1.0, abs(prev)):
        raise InvariantViolation(
            f"telescoping identity violated at k={state.k}: residual {residual:.3e}")
    if not 0.0 < t <= 1.0:
        raise InvariantViolation(f"t_k out of (0, 1] at k={state.k}: {t}")


def magma(problem: CompositeProblem, chain: RestrictionChain, x0,
          config: SolverConfig) -> Solution:
    """Multilevel accelerated gradient/mirror solver.

    Each iteration forms x_k = t_k z_k + (1-t_k) y_k, stops if
    ||D(x_k)|| < eps, then either takes the prox step y_{k+1} = prox(x_k)
    or, when the coarse condition fires, solves the coherent coarse model
    with mfista and sets y_{k+1} = x_k + s_k d_k with an Armijo step on
    the smoothed objective.  The mirror step z_{k+1} uses grad f(x_k) and
    the finalized alpha_{k+1}.

    The bookkeeping needs eta_{k+1} (hence s_k) before x_k exists, so the
    iterate is first formed with the gradient-branch weights; if the
    coarse condition fires, it is re-formed with the coarse-branch eta
    estimated from the previously accepted step size and the condition is
    re-verified at the new anchor.  Coarse-solve unavailability, a lost
    condition at the re-formed anchor, or a failed line search all fall
    back to the already-computed gradient step for that iteration.  A
    final gradient iteration is appended whenever the run would otherwise
    end on a coarse step.
    """
    if chain.fine_dim != problem.dim:
        raise ValueError(
            f"chain acts on dimension {chain.fine_dim}, problem has {problem.dim}")
    geometry = EuclideanGeometry()
    L_f = problem.L_f
    y = _as_start(problem, x0)
    z = y.copy()
    state = MagmaState(k=0, x=y, y=y, z=z, alpha=0.0, eta=L_f,
                       s_prev=config.s0)
    t0 = time.perf_counter()
    ns0 = time.monotonic_ns()
    trace = []
    events = []
    counts = {"grad": 0, "coarse": 0, "fallback": 0}
    F_y = problem.value(y)  # incumbent objective, updated every step
    best_F, best_x = F_y, y
    converged = False
    x_stop, Dn_stop = y, NAN
    horizon = config.max_iters if config.mu_schedule == "horizon" else None

    def smoothing_for(eta_prov, alpha_prov):
        if horizon is None:
            return config.mu
        beta = max(problem.smoothing_beta, 1e-30)
        mu_k = config.zeta / ((L_f + eta_prov) * alpha_prov ** 2 * beta * horizon)
        return max(mu_k, 1e-12)

    k = 0
    fail_streak = 0  # consecutive failed coarse attempts; backs off retries
    while k < config.max_iters:
        eta_g, alpha_g = update_eta_alpha(state, "grad", None, L_f, None, config)
        t_g = _combination_weight(alpha_g, eta_g)
        x = t_g * z + (1.0 - t_g) * y
        p, fgx = _prox_at(problem, x, L_f)
        Dn = float(np.linalg.norm(x - p))
        if Dn < config.eps:
            converged, x_stop, Dn_stop = True, x, Dn
            break
        mu_k = smoothing_for(eta_g, alpha_g)
        view = SmoothedView(problem, mu_k)

        kind = "grad"
        x_used, fg_used, y_next = x, fgx, p
        eta_n, alpha_n, t_used, s_used = eta_g, alpha_g, t_g, NAN

        if k >= 1 and not chain.is_identity:
            grad_mu = fgx + view.g_grad(x)
            state.x = x
            gate = config if fail_streak == 0 else dataclasses.replace(
                config, K_d=config.K_d * min(2 ** fail_streak, 64))
            if coarse_condition(state, grad_mu, chain, gate):
                kind = "fallback"  # promoted back to coarse only on success
                _, spectral = chain.coarse_dictionary(problem)
                L_H = spectral + problem.lam / mu_k
                eta_c = max(1.0 / (4.0 * state.alpha ** 2 * state.eta),
                            L_H / (config.armijo_c * state.s_prev * config.kappa ** 2))
                alpha_c = 1.0 / (2.0 * eta_c) \
                    + state.alpha * math.sqrt(state.eta / eta_c)
                t_c = _combination_weight(alpha_c, eta_c)
                x_c = t_c * z + (1.0 - t_c) * y
                fg_c = problem.f_grad(x_c)
                grad_mu_c = fg_c + view.g_grad(x_c)
                state.x = x_c
                # by coherence the coarse entry gradient is R grad F_mu(x_c),
                # so an entry-stationary (hence unavailable) solve can be
                # skipped without building the model.
                entry_grad = float(np.linalg.norm(chain.restrict(grad_mu_c)))
                if entry_grad >= config.coarse_tol \
                        and coarse_condition(state, grad_mu_c, chain, gate):
                    model = build_coarse_model(problem, chain, x_c, mu_k,
                                               fine_grad=grad_mu_c)
                    res = mfista(model, model.anchor, config.coarse_tol,
                                 config.coarse_budget)
                    if res.available and res.values[-1] < res.values[1]:
                        d = chain.prolong(res.x - model.anchor)
                        slope = float(d @ grad_mu_c)
                        gn2 = float(grad_mu_c @ grad_mu_c)
                        bound = -config.kappa ** 2 / (2.0 * L_H) * gn2
                        if not slope < bound + 1e-9:
                            raise InvariantViolation(
                                f"coarse direction not a descent direction at "
                                f"k={k}: slope {slope:.6e} vs bound {bound:.6e}")
                        try:
                            s_k = armijo_search(view, x_c, d, config,
                                                slope=slope,
                                                s_start=state.s_prev)
                        except LineSearchError:
                            s_k = None
                        # the Armijo test controls F_mu only; the true
                        # objective may grow by up to beta*mu, which keeps
                        # undoing late-stage convergence.  Require the
                        # coarse step to beat the incumbent y.
                        if s_k is not None:
                            y_cand = x_c + s_k * d
                            if problem.value(y_cand) > F_y:
                                s_k = None
                        if s_k is not None:
                            kind = "coarse"
                            y_next = y_cand
                            eta_n = max(
                                1.0 / (4.0 * state.alpha ** 2 * state.eta),
                                L_H / (config.armijo_c * s_k * config.kappa ** 2))
                            alpha_n = 1.0 / (2.0 * eta_n) \
                                + state.alpha * math.sqrt(state.eta / eta_n)
                            t_used, s_used = t_c, s_k
                            x_used, fg_used = x_c, fg_c
                            events.append(CoarseEvent(
                                k, slope, math.sqrt(gn2), L_H, s_k, res.iterations))

        if k >= 1:
            _check_bookkeeping(state, eta_n, alpha_n, t_used)

        z = mirror_step(geometry, problem, z, fg_used, alpha_n)
        y = y_next
        counts[kind] += 1
        if kind == "coarse":
            state.x_tilde, state.q, state.s_prev = x_used.copy(), 0, s_used
            fail_streak = 0
        else:
            if kind == "fallback":
                # remember the failed attempt anchor; without this the
                # moved-away clause re-fires every iteration and each
                # failing attempt costs a coarse solve.
                state.x_tilde = x_c.copy()
                state.q = 0
                fail_streak += 1
            state.q += 1
        state.k, state.alpha, state.eta, state.t = k + 1, alpha_n, eta_n, t_used
        state.x, state.y, state.z = x_used, y, z
        state.step_log.append(kind)
        F_y = problem.value(y)
        if F_y < best_F:
            best_F, best_x = F_y, y
        trace.append(TraceRow(k, kind, F_y, Dn, eta_n, alpha_n, t_used, s_used,
                              time.monotonic_ns() - ns0))
        k += 1

    if trace and trace[-1].step_kind == "coarse":
        # the convergence guarantee is stated for runs ending on a
        # gradient step; append one.
        eta_n, alpha_n = update_eta_alpha(state, "grad", None, L_f, None, config)
        t = _combination_weight(alpha_n, eta_n)
        x = t * z + (1.0 - t) * y
        p, fgx = _prox_at(problem, x, L_f)
        Dn_x = float(np.linalg.norm(x - p))
        _check_bookkeeping(state, eta_n, alpha_n, t)
        z = mirror_step(geometry, problem, z, fgx, alpha_n)
        y = p
        counts["grad"] += 1
        state.k, state.alpha, state.eta, state.t = state.k + 1, alpha_n, eta_n, t
        state.q += 1
        state.step_log.append("grad")
        Fy = problem.value(y)
        if Fy < best_F:
            best_F, best_x = Fy, y
        trace.append(TraceRow(k, "grad", Fy, Dn_x, eta_n, alpha_n, t, NAN,
                              time.monotonic_ns() - ns0))
        k += 1

    if converged:
        return _finish(problem, x_stop, Dn_stop, state.k, True, counts, t0,
                       trace, events)
    Dn = float(np.linalg.norm(best_x - _prox_at(problem, best_x, L_f)[0]))
    return _finish(problem, best_x, Dn, state.k, Dn < config.eps, counts, t0,
                   trace, events)


# ---------------------------------------------------------------------------
# Dispatch used by the harness and the CLI.

SOLVERS = ("ista", "fista", "agm", "magma")


def run_solver(name: str, problem: CompositeProblem, x0,
               config: SolverConfig, chain: RestrictionChain = None) -> Solution:
    """Run a solver by id; builds the restriction chain for magma if needed."""
    if name == "ista":
        return ista(problem, x0, config)
    if name == "fista":
        return fista(problem, x0, config)
    if name == "agm":
        return agm(problem, x0, config)
    if name == "magma":
        if chain is None:
            chain = build_chain(problem.n_x, config.levels,
                                bucket=problem.bucket, m=problem.m)
        return magma(problem, chain, x0, config)
    raise ValueError(f"unknown solver '{name}'; choose from {SOLVERS}")
