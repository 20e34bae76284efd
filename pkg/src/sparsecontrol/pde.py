"""Implicit Euler solvers for the reaction-diffusion state equation, its
linearization, and the exact discrete adjoint.

State steps, m = 1..n_t with y_0 the initial datum:

    (y_m - y_{m-1})/dt + A_h y_m + a_M(y_m) = u_m,

solved by Newton.  The linearization at a state y solves

    (z_m - z_{m-1})/dt + A_h z_m + a_M'(y_m) z_m = v_m,   z_0 = 0,

one sparse solve per step.  The backward solve is the algebraic transpose
of the forward step map: with B_m = I + dt A_h + dt diag(a_M'(y_m)) and
r_m = y_m - yd_m,

    B_m^T p_m = p_{m+1} + dt r_m,   p_{n_t+1} = 0,  m = n_t..1,

which makes sum_m dt <r_m, z_m> = sum_m dt <p_m, v_m> an exact identity
(telescoping), i.e. the adjoint-based gradient matches difference quotients
of the discrete objective to roundoff.  The adjoint field is per-interval,
p_m sitting at the right node t_m.

A_h is the finite-difference operator on interior nodes: the standard
3/5-point stencil for the diagonal part plus centered cross differences for
the off-diagonal tensor entry, Dirichlet values eliminated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .grid import (PER_INTERVAL, DiffusionTensor, SpaceGrid, SpaceTimeField,
                   field_at_nodes, field_per_interval)
from .nonlinearity import eval_a_truncated, eval_ay_truncated
from .problem import ProblemSpec


class NewtonError(RuntimeError):
    """Newton failed to reach the residual tolerance within its budget."""


class TruncationActiveWarning(UserWarning):
    """The computed state touched the reaction clamp; results describe the
    clamped equation, not the original one."""


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-12          # relative residual
    max_iter: int = 30
    linear_tol: float = 1e-12   # documentation of the solve contract; a
                                # direct sparse factorization is used

    def __post_init__(self):
        if not (self.tol > 0 and self.linear_tol > 0):
            raise ValueError("Newton tolerances must be > 0")
        if self.max_iter < 1:
            raise ValueError("Newton needs at least one iteration")


def _second_difference(n: int, h: float) -> sp.csr_matrix:
    """Dirichlet-eliminated -d^2/dx^2 on n interior nodes."""
    main = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return sp.diags([off, main, off], offsets=[-1, 0, 1], format="csr")


def _first_difference(n: int, h: float) -> sp.csr_matrix:
    """Dirichlet-eliminated centered d/dx on n interior nodes."""
    off = np.full(n - 1, 1.0 / (2.0 * h))
    return sp.diags([-off, off], offsets=[-1, 1], format="csr")


class EllipticOperator:
    """Assembled sparse matrix of -div(a_ij grad) on interior nodes.

    Symmetric for symmetric tensors; positive definiteness is exercised on
    tiny grids in the test suite.
    """

    def __init__(self, grid: SpaceGrid, tensor: DiffusionTensor):
        if tensor.n_dim != grid.n_dim:
            raise ValueError("tensor dimension does not match the grid")
        self.grid = grid
        self.tensor = tensor
        n, h = grid.n_per_axis, grid.h
        a = tensor.as_array()
        d2 = _second_difference(n, h)
        if grid.n_dim == 1:
            m = a[0, 0] * d2
        else:
            eye = sp.identity(n, format="csr")
            d1 = _first_difference(n, h)
            m = (a[0, 0] * sp.kron(d2, eye)
                 + a[1, 1] * sp.kron(eye, d2)
                 - 2.0 * a[0, 1] * sp.kron(d1, d1))
        self.matrix = m.tocsr()
        self.matrix_transpose = self.matrix.T.tocsr()

    @property
    def n_nodes(self) -> int:
        return self.grid.n_nodes


def _step_matrix(operator_matrix, dt: float, a_prime: np.ndarray) -> sp.csc_matrix:
    n = operator_matrix.shape[0]
    return (sp.identity(n, format="csr")
            + dt * operator_matrix
            + sp.diags(dt * a_prime)).tocsc()

def _step_factorizer(operator_matrix, dt: float, nl):
    """Per-step factorization of B = I + dt*A + dt*diag(a_M'(y)).

    The zero reaction has identically zero derivative, so its factorization
    is shared across steps.
    """
    if nl.kind == "zero":
        shared = splu(_step_matrix(operator_matrix, dt,
                                   np.zeros(operator_matrix.shape[0])))
        return lambda y_slice: shared
    return lambda y_slice: splu(
        _step_matrix(operator_matrix, dt, eval_ay_truncated(nl, y_slice)))



def _newton_attempt(rhs, y_start, operator_matrix, factorize, dt, nl, cfg,
                    damping):
    y = y_start.copy()
    scale = max(float(np.linalg.norm(rhs)), 1.0)
    for _ in range(cfg.max_iter):
        residual = y + dt * (operator_matrix @ y) + dt * eval_a_truncated(nl, y) - rhs
        if np.linalg.norm(residual) <= cfg.tol * scale:
            return y
        y = y + damping * factorize(y).solve(-residual)
    return None


def _implicit_step(rhs, y_start, operator_matrix, factorize, dt, nl, cfg):
    """One implicit Euler step; undamped Newton first, then bisection-damped
    retries before giving up."""
    for retry in range(6):
        y = _newton_attempt(rhs, y_start, operator_matrix, factorize, dt, nl,
                            cfg, 0.5**retry)
        if y is not None:
            return y
    raise NewtonError(f"implicit step did not converge to tol={cfg.tol} "
                      f"in {cfg.max_iter} iterations (with 5 damped retries)")


def solve_state(spec: ProblemSpec, u: SpaceTimeField,
                newton: NewtonConfig = NewtonConfig()) -> SpaceTimeField:
    """March the state equation forward from spec.y0 under the control u.

    u must be per-interval on spec's grids.  Emits TruncationActiveWarning
    when the computed state leaves (-M, M); the solution is still returned.
    """
    if u.slice_semantics != PER_INTERVAL:
        raise ValueError("control must be a per-interval field")
    if u.grid != spec.grid or u.tgrid != spec.tgrid:
        raise ValueError("control lives on different grids")
    nl = spec.clamped_nonlinearity
    a_mat = spec.operator.matrix
    dt = spec.tgrid.dt
    n_t = spec.tgrid.n_t
    factorize = _step_factorizer(a_mat, dt, nl)
    y = np.empty((n_t + 1, spec.grid.n_nodes))
    y[0] = spec.y0
    for m in range(1, n_t + 1):
        rhs = y[m - 1] + dt * u.values[m - 1]
        y[m] = _implicit_step(rhs, y[m - 1], a_mat, factorize, dt, nl, newton)
    max_abs = float(np.max(np.abs(y)))
    if max_abs >= nl.truncation.level:
        warnings.warn(
            f"state magnitude {max_abs:.3g} reached the clamp level "
            f"{nl.truncation.level:.3g}; the clamped equation was solved",
            TruncationActiveWarning, stacklevel=2)
    return field_at_nodes(spec.grid, spec.tgrid, y)


def solve_linearized(spec: ProblemSpec, y: SpaceTimeField,
                     v: SpaceTimeField) -> SpaceTimeField:
    """Directional state derivative at y in the control direction v."""
    if v.slice_semantics != PER_INTERVAL:
        raise ValueError("direction must be a per-interval field")
    nl = spec.clamped_nonlinearity
    dt = spec.tgrid.dt
    n_t = spec.tgrid.n_t
    factorize = _step_factorizer(spec.operator.matrix, dt, nl)
    z = np.zeros((n_t + 1, spec.grid.n_nodes))
    for m in range(1, n_t + 1):
        z[m] = factorize(y.values[m]).solve(z[m - 1] + dt * v.values[m - 1])
    return field_at_nodes(spec.grid, spec.tgrid, z)


def solve_adjoint(spec: ProblemSpec, y: SpaceTimeField) -> SpaceTimeField:
    """Backward solve with right-hand side y - yd, the exact transpose of
    the forward linearization.  Returns a per-interval field."""
    nl = spec.clamped_nonlinearity
    dt = spec.tgrid.dt
    n_t = spec.tgrid.n_t
    factorize = _step_factorizer(spec.operator.matrix_transpose, dt, nl)
    p = np.zeros((n_t, spec.grid.n_nodes))
    p_next = np.zeros(spec.grid.n_nodes)
    for m in range(n_t, 0, -1):
        p[m - 1] = factorize(y.values[m]).solve(
            p_next + dt * (y.values[m] - spec.yd.values[m]))
        p_next = p[m - 1]
    return field_per_interval(spec.grid, spec.tgrid, p)
