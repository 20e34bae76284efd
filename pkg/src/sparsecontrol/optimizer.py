"""Projected gradient solve of the budget-constrained tracking problem.

Iterates u+ = proj(u - s * (phi + kappa*u)) with an Armijo backtracking
line search; the method drives u to the fixed point u = proj(-phi/kappa)
of the first-order system.  The initial step 1/kappa makes the very first
trial iterate exactly the fixed-point map; afterwards the last accepted
step is reused and doubled whenever it was accepted without backtracking.
Convergence is declared on the relative fixed-point residual

    ||u - proj(-phi/kappa)|| / max(1, ||u||)

in the discrete Q norm.  On success the multiplier mu = -(phi + kappa*u)
is attached together with the per-slice activity record.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import SliceActivity, classify_slices
from .grid import SpaceTimeField, field_per_interval, l2_inner, l2_norm, like, \
    slice_l1_norm, slice_linf_norm
from .l1ball import project_field, recover_multiplier
from .objective import objective_value
from .pde import solve_adjoint, solve_state
from .problem import ProblemSpec


@dataclass(frozen=True)
class OptimizerConfig:
    tol: float = 1e-8
    max_iter: int = 2000
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    initial_step: float | None = None    # defaults to 1/kappa
    max_backtracks: int = 60
    u0: SpaceTimeField | None = None     # defaults to the zero control

    def __post_init__(self):
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtrack factor must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be >= 1")


@dataclass
class KKTResiduals:
    """First-order residual bundle at a point (u, y, phi, mu)."""

    stationarity: float    # ||u - proj(-phi/kappa)||
    feasibility: float     # worst budget violation over slices
    sign_gap: float        # Q norm of |u*mu| - u*mu
    slack_gap: float       # worst ||mu(m)||_inf * (gamma - ||u(m)||_1)^+
    identity_gap: float    # worst | ||phi||_1 - kappa ||u||_1 - ||mu||_1 | per slice

    def as_dict(self) -> dict:
        return {
            "stationarity": self.stationarity,
            "feasibility": self.feasibility,
            "sign_gap": self.sign_gap,
            "slack_gap": self.slack_gap,
            "identity_gap": self.identity_gap,
        }

    def max(self) -> float:
        return max(self.as_dict().values())


def kkt_residuals(spec: ProblemSpec, u: SpaceTimeField, y: SpaceTimeField,
                  phi: SpaceTimeField, mu: SpaceTimeField) -> KKTResiduals:
    """Evaluate the five first-order residuals; all vanish exactly at a
    point satisfying the projection form of the optimality system."""
    projected, _ = project_field(like(u, -phi.values / spec.kappa), spec.gamma)
    stationarity = l2_norm(like(u, u.values - projected.values))
    n = u.n_slices
    u_l1 = np.array([slice_l1_norm(u, m) for m in range(n)])
    feasibility = float(np.max(np.maximum(u_l1 - spec.gamma, 0.0)))
    prod = u.values * mu.values
    sign_gap = l2_norm(like(u, np.abs(prod) - prod))
    mu_inf = np.array([slice_linf_norm(mu, m) for m in range(n)])
    slack_gap = float(np.max(mu_inf * np.maximum(spec.gamma - u_l1, 0.0)))
    phi_l1 = np.array([slice_l1_norm(phi, m) for m in range(n)])
    mu_l1 = np.array([slice_l1_norm(mu, m) for m in range(n)])
    identity_gap = float(np.max(np.abs(phi_l1 - spec.kappa * u_l1 - mu_l1)))
    return KKTResiduals(stationarity, feasibility, sign_gap, slack_gap,
                        identity_gap)


@dataclass
class SolveReport:
    u: SpaceTimeField
    y: SpaceTimeField
    phi: SpaceTimeField
    mu: SpaceTimeField
    converged: bool
    iterations: int
    j_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    step_history: list = field(default_factory=list)
    activity: SliceActivity | None = None
    thresholds: np.ndarray | None = None
    kkt: KKTResiduals | None = None
    truncation_inactive: bool = True
    message: str = ""

    @property
    def objective(self) -> float:
        return self.j_history[-1]


def solve(spec: ProblemSpec, cfg: OptimizerConfig = OptimizerConfig()) -> SolveReport:
    """Run the projected gradient method on spec.

    Returns a report with converged=False when the iteration cap is reached;
    state-solver failures propagate.
    """
    if cfg.u0 is not None:
        u = cfg.u0.copy()
    else:
        u = field_per_interval(spec.grid, spec.tgrid)
    base_step = cfg.initial_step if cfg.initial_step is not None else 1.0 / spec.kappa
    step = base_step

    y = solve_state(spec, u)
    j_val = objective_value(spec, u, y)
    phi = solve_adjoint(spec, y)
    gradient = like(u, phi.values + spec.kappa * u.values)

    j_history = [j_val]
    residual_history = []
    step_history = []
    converged = False
    message = ""
    iterations = 0

    for iterations in range(cfg.max_iter + 1):
        fixed_point, _ = project_field(like(u, -phi.values / spec.kappa),
                                       spec.gamma)
        residual = l2_norm(like(u, u.values - fixed_point.values)) \
            / max(1.0, l2_norm(u))
        residual_history.append(residual)
        if residual <= cfg.tol:
            converged = True
            break
        if iterations == cfg.max_iter:
            message = f"iteration cap {cfg.max_iter} reached"
            break

        # once the predicted decrease drops below J's roundoff floor the
        # Armijo comparison is pure noise; accept such steps
        noise_floor = 16.0 * np.finfo(float).eps * max(1.0, abs(j_val))
        accepted = False
        trial_step = step
        for backtracks in range(cfg.max_backtracks):
            candidate, _ = project_field(
                like(u, u.values - trial_step * gradient.values), spec.gamma)
            y_new = solve_state(spec, candidate)
            j_new = objective_value(spec, candidate, y_new)
            decrement = l2_inner(gradient, like(u, candidate.values - u.values))
            if j_new <= j_val + cfg.armijo_c * decrement + noise_floor:
                accepted = True
                break
            trial_step *= cfg.backtrack
        if not accepted:
            message = "line search stalled"
            break

        u, y, j_val = candidate, y_new, j_new
        phi = solve_adjoint(spec, y)
        gradient = like(u, phi.values + spec.kappa * u.values)
        j_history.append(j_val)
        step_history.append(trial_step)
        if cfg.armijo_c * abs(decrement) <= noise_floor:
            # progress is no longer measurable in J; polish with the plain
            # fixed-point step instead of growing further
            step = base_step
        else:
            step = 2.0 * trial_step if backtracks == 0 else trial_step

    mu = recover_multiplier(u, phi, spec.kappa)
    fixed_point, thresholds = project_field(like(u, -phi.values / spec.kappa),
                                            spec.gamma)
    activity = classify_slices(u, mu, spec.gamma, thresholds=thresholds)
    level = spec.truncation_level
    truncation_inactive = bool(np.max(np.abs(y.values)) < level)
    return SolveReport(
        u=u, y=y, phi=phi, mu=mu,
        converged=converged, iterations=iterations,
        j_history=j_history, residual_history=residual_history,
        step_history=step_history,
        activity=activity, thresholds=thresholds,
        kkt=kkt_residuals(spec, u, y, phi, mu),
        truncation_inactive=truncation_inactive,
        message=message,
    )
