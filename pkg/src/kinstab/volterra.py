"""Nonlocal-in-time form of the kinetic system.

Eliminating ``V`` exactly gives a Volterra integro-differential equation for
``U`` alone,

    U' + c (beta * U')(t) + L U = F + beta(t) (V(0) - c U(0)),
    beta(t) = alpha exp(-alpha t),

and ``V`` is recovered from ``U`` by

    V(t) = exp(-alpha t) V(0) + int_0^t alpha c U(s) exp(-alpha (t - s)) ds.

Both convolutions are advanced with the exponential-kernel recurrence, so a
step costs O(n) regardless of the history length. The solver is an
independent cross-check of the coupled steppers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Boundary, Grid1D, State, WeightParams, grid_norm_p
from .errors import NumericError, ParameterError


@dataclass
class KernelState:
    """Running value of ``(beta * U')(t_n)``."""

    J: np.ndarray
    alpha: float

    def advance(self, tau, dU):
        # U' is piecewise constant, so the increment integrates exactly
        self.J = np.exp(-self.alpha * tau) * self.J - np.expm1(-self.alpha * tau) * dU / tau
        return self.J


@dataclass(frozen=True)
class NonlocalTrajectory:
    t: np.ndarray
    U: np.ndarray
    source_norm: np.ndarray


def _shifted_solve(L, shift, tau, rhs):
    if L is None:
        return rhs / shift
    if isinstance(L, np.ndarray):
        return np.linalg.solve(shift * np.eye(L.shape[0]) + tau * L, rhs)
    return L.solve_shifted(shift, tau, rhs)


def solve_nonlocal(L, U0, V0, w: WeightParams, tau: float, n_steps: int, F=None, grid: Grid1D | None = None):
    """Implicit Euler for the Volterra form, returning ``U`` at every step.

    ``L`` may be an assembled operator, a dense matrix or ``None`` (no
    transport). ``F`` is ``None``, a fixed vector, or a callable of ``t``.
    ``source_norm[n-1]`` records the grid 2-norm of the injected term
    ``beta(t_n)(V0 - c U0)``.
    """
    if not tau > 0:
        raise ParameterError("time step must be positive")
    U0 = np.asarray(U0, dtype=float)
    V0 = np.asarray(V0, dtype=float)
    n = U0.size
    grid = grid if grid is not None else Grid1D(0.0, float(n), n, Boundary.PERIODIC)
    a, c = w.alpha, w.c
    r0 = V0 - c * U0
    r0_norm = grid_norm_p(r0, grid)
    shift = 1.0 - c * np.expm1(-a * tau)
    kern = KernelState(np.zeros(n), a)

    U = np.empty((n_steps + 1, n))
    U[0] = U0
    src = np.empty(n_steps)
    t = tau * np.arange(n_steps + 1)
    for k in range(1, n_steps + 1):
        beta_t = a * np.exp(-a * t[k])
        rhs_src = beta_t * r0
        if F is None:
            Fk = 0.0
        elif callable(F):
            Fk = F(t[k])
        else:
            Fk = F
        rhs = shift * U[k - 1] + tau * (Fk + rhs_src - c * np.exp(-a * tau) * kern.J)
        U[k] = _shifted_solve(L, shift, tau, rhs)
        if not np.all(np.isfinite(U[k])):
            raise NumericError("nonlocal solver produced non-finite values", step=k)
        kern.advance(tau, U[k] - U[k - 1])
        src[k - 1] = beta_t * r0_norm
    return NonlocalTrajectory(t, U, src)


def recover_v(U_traj, V0, w: WeightParams, tau: float) -> np.ndarray:
    """``V`` at every step from the exponential recurrence with trapezoidal increments."""
    U_traj = np.asarray(U_traj, dtype=float)
    V = np.empty_like(U_traj)
    V[0] = V0
    decay = np.exp(-w.alpha * tau)
    gain = -w.c * np.expm1(-w.alpha * tau)
    for k in range(1, U_traj.shape[0]):
        V[k] = decay * V[k - 1] + gain * 0.5 * (U_traj[k - 1] + U_traj[k])
    return V


def equilibrium_residual(state: State, w: WeightParams, grid: Grid1D | None = None) -> float:
    """``||V - cU||`` in the h-weighted grid 2-norm (``h = 1`` when no grid is given)."""
    r = state.V - w.c * state.U
    if grid is None:
        return float(np.linalg.norm(r))
    return grid_norm_p(r, grid)
