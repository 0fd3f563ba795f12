"""Nonlinear kinetics ``V' = alpha (g(U) - V)`` and a two-species system.

Everything here lives in plain R^P: sums and inner products carry no grid
spacing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .core import State
from .errors import ConvergenceError, DimensionError, NumericError, ParameterError
from .operators import DifferenceFactor, apply, assemble_dtkd


@dataclass(frozen=True)
class MonotoneG:
    """Monotone increasing ``g`` with primitive ``G``.

    ``g`` must accept numpy arrays. Monotonicity is verified on ``n_check``
    samples of ``[lo, hi]`` at construction, which also yields ``slope``, the
    largest sampled difference quotient (used to stabilize the fixed-point
    iteration in :func:`step_nonlinear`). ``G`` falls back to quadrature from 0
    when not supplied; the primitive is always normalized so that ``G(0) = 0``.
    """

    g: Callable
    G: Optional[Callable] = None
    lo: float = -10.0
    hi: float = 10.0
    n_check: int = 1000
    slope: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ParameterError("empty monotonicity range")
        x = np.linspace(self.lo, self.hi, self.n_check)
        y = np.asarray(self.g(x), dtype=float)
        dy = np.diff(y)
        if np.any(dy < -1e-12 * max(1.0, float(np.max(np.abs(y))))):
            raise ParameterError("g is not monotone increasing on the declared range")
        object.__setattr__(self, "slope", float(np.max(dy / np.diff(x))))

    @classmethod
    def linear(cls, c, lo=-10.0, hi=10.0):
        return cls(lambda u: c * np.asarray(u), lambda u: 0.5 * c * np.asarray(u) ** 2, lo, hi)

    @classmethod
    def cubic(cls, lo=-3.0, hi=3.0):
        return cls(lambda u: np.asarray(u) ** 3, lambda u: 0.25 * np.asarray(u) ** 4, lo, hi)

    @classmethod
    def arctan(cls, lo=-10.0, hi=10.0):
        def prim(u):
            u = np.asarray(u)
            return u * np.arctan(u) - 0.5 * np.log1p(u * u)

        return cls(np.arctan, prim, lo, hi)

    @classmethod
    def exp_minus_one(cls, lo=-5.0, hi=3.0):
        return cls(lambda u: np.expm1(u), lambda u: np.expm1(u) - np.asarray(u), lo, hi)

    def check_range(self, u):
        u = np.asarray(u)
        if u.size and (np.min(u) < self.lo or np.max(u) > self.hi):
            raise ParameterError(
                f"values in [{np.min(u):.3g}, {np.max(u):.3g}] leave the monotone range [{self.lo}, {self.hi}]"
            )

    def primitive(self, u):
        u = np.asarray(u, dtype=float)
        if self.G is not None:
            return np.asarray(self.G(u), dtype=float) - float(self.G(np.array(0.0)))
        f = lambda s: float(self.g(np.array(s)))
        return np.array([integrate.quad(f, 0.0, float(x))[0] for x in u.ravel()]).reshape(u.shape)


def lyapunov(state, mg: MonotoneG) -> float:
    """``sum_j G(u_j) + 0.5 sum_j v_j^2``."""
    mg.check_range(state.U)
    return float(np.sum(mg.primitive(state.U)) + 0.5 * np.dot(state.V, state.V))


def _solve_shifted(L, shift, tau, rhs):
    if L is None:
        return rhs / shift
    if isinstance(L, DifferenceFactor):
        L = assemble_dtkd(L)
    if isinstance(L, np.ndarray):
        return np.linalg.solve(shift * np.eye(L.shape[0]) + tau * L, rhs)
    return L.solve_shifted(shift, tau, rhs)


def step_nonlinear(L, mg: MonotoneG, state, tau: float, alpha: float, tol=1e-12, max_iter=50):
    """Fully implicit step with nonlinear kinetics.

    ``g(U^n)`` is resolved by a stabilized fixed-point (Picard) iteration: at
    each sweep ``g`` is frozen at the previous iterate and linearized with the
    constant slope ``mg.slope``, and the resulting linear system (one banded
    solve) gives the next iterate. For linear ``g`` the first sweep is exact.
    """
    if not tau > 0:
        raise ParameterError("time step must be positive")
    b = alpha * tau
    r = b / (1.0 + b)
    m = mg.slope
    shift = 1.0 + r * m
    u_prev, v_prev = state.U, state.V
    u = u_prev.copy()
    diff = np.inf
    for _ in range(max_iter):
        mg.check_range(u)
        rhs = u_prev + r * (v_prev - mg.g(u) + m * u)
        u_new = _solve_shifted(L, shift, tau, rhs)
        if not np.all(np.isfinite(u_new)):
            raise NumericError("nonlinear step produced non-finite values")
        diff = float(np.max(np.abs(u_new - u))) if u.size else 0.0
        u = u_new
        if diff < tol * max(1.0, float(np.max(np.abs(u)))):
            break
    else:
        raise ConvergenceError("Picard iteration did not converge", diff)
    mg.check_range(u)
    v = (v_prev + b * mg.g(u)) / (1.0 + b)
    return State(u, v, state.t + tau)


def pairing_check(L, mg: MonotoneG, U) -> float:
    """``<L U, g(U)>``; for a :class:`DifferenceFactor` evaluated as ``<K D U, D g(U)>``."""
    U = np.asarray(U, dtype=float)
    gU = mg.g(U)
    if isinstance(L, DifferenceFactor):
        return float(np.dot(L.k * L.apply_D(U), L.apply_D(gU)))
    return float(np.dot(apply(L, U), gU))


@dataclass(frozen=True)
class TwoSpeciesState:
    U: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    alpha1: float
    alpha2: float
    c1: float
    c2: float
    t: float = 0.0

    def __post_init__(self):
        for name in ("U", "V1", "V2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.U.shape == self.V1.shape == self.V2.shape) or self.U.ndim != 1:
            raise DimensionError("U, V1, V2 must be 1-d of equal length")
        if min(self.alpha1, self.alpha2, self.c1, self.c2) <= 0:
            raise ParameterError("rates and partition coefficients must be positive")

    def _replace(self, U, V1, V2, t):
        return TwoSpeciesState(U, V1, V2, self.alpha1, self.alpha2, self.c1, self.c2, t)


def step_two_species(ts: TwoSpeciesState, L, tau: float, F=None) -> TwoSpeciesState:
    """Fully implicit step; both sorbed species are eliminated node by node."""
    if not tau > 0:
        raise ParameterError("time step must be positive")
    b1, b2 = ts.alpha1 * tau, ts.alpha2 * tau
    r1, r2 = b1 / (1 + b1), b2 / (1 + b2)
    shift = 1.0 + r1 * ts.c1 + r2 * ts.c2
    rhs = ts.U + r1 * ts.V1 + r2 * ts.V2
    if F is not None:
        rhs = rhs + tau * np.asarray(F)
    U = _solve_shifted(L, shift, tau, rhs)
    V1 = (ts.V1 + b1 * ts.c1 * U) / (1 + b1)
    V2 = (ts.V2 + b2 * ts.c2 * U) / (1 + b2)
    if not (np.all(np.isfinite(U)) and np.all(np.isfinite(V1)) and np.all(np.isfinite(V2))):
        raise NumericError("two-species step produced non-finite values")
    return ts._replace(U, V1, V2, ts.t + tau)


def two_species_quantity(ts: TwoSpeciesState) -> float:
    """``c1 c2 |U|^2 + c2 |V1|^2 + c1 |V2|^2``."""
    return float(ts.c1 * ts.c2 * ts.U @ ts.U + ts.c2 * ts.V1 @ ts.V1 + ts.c1 * ts.V2 @ ts.V2)
