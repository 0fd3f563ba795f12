"""One-step schemes for the kinetic system with implicit coupling.

Each step solves

    (U^n - U^{n-1})/tau + (V^n - V^{n-1})/tau + L_imp U^n + L_exp U^{n-1} = F^n
    (V^n - V^{n-1})/tau + alpha (V^n - c U^n) = 0

The second equation is solved for ``V^n`` node by node and substituted into
the first, leaving a single tridiagonal (Dirichlet) or cyclic tridiagonal
(periodic) solve for ``U^n``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import fft

from .core import Boundary, Grid1D, State, WeightParams, product_norm, weighted_norm, grid_norm_p
from .errors import NumericError, ParameterError
from .operators import (
    dirichlet_laplacian,
    dirichlet_upwind,
    periodic_diffusion,
    periodic_upwind,
)


class SchemeKind(enum.Enum):
    IMPLICIT_DIFFUSION = "implicit-diffusion"
    EXPLICIT_DIFFUSION = "explicit-diffusion"
    IMPLICIT_ADVECTION = "implicit-advection"
    EXPLICIT_ADVECTION = "explicit-advection"
    IMEX_ADVECTION_DIFFUSION = "imex-advection-diffusion"

    @property
    def is_fully_implicit(self) -> bool:
        return self in (SchemeKind.IMPLICIT_DIFFUSION, SchemeKind.IMPLICIT_ADVECTION)


@dataclass(frozen=True)
class SchemeSpec:
    """Scheme kind plus coefficients.

    ``operator`` replaces the assembled transport operator of the kind (it is
    treated implicitly or explicitly according to ``kind``); this is how 0-d
    problems and ``D^T K D`` operators are plugged in. For IMEX the override
    replaces the implicit (diffusion) part.
    """

    kind: SchemeKind
    grid: Grid1D
    w: WeightParams
    d: float = 0.0
    q: float = 0.0
    operator: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        if self.d < 0:
            raise ParameterError(f"diffusivity must be non-negative, got {self.d}")
        if self.q < 0:
            raise ParameterError(f"upwind schemes require q >= 0, got {self.q}")

    def _diffusion(self):
        g = self.grid
        if g.boundary is Boundary.PERIODIC:
            return periodic_diffusion(g.n_nodes, g.h, self.d)
        return dirichlet_laplacian(g.n_nodes, g.h, self.d)

    def _advection(self):
        g = self.grid
        if g.boundary is Boundary.PERIODIC:
            return periodic_upwind(g.n_nodes, g.h, self.q)
        return dirichlet_upwind(g.n_nodes, g.h, self.q)

    @cached_property
    def implicit_op(self):
        k = self.kind
        if k is SchemeKind.IMPLICIT_DIFFUSION or k is SchemeKind.IMEX_ADVECTION_DIFFUSION:
            return self.operator if self.operator is not None else self._diffusion()
        if k is SchemeKind.IMPLICIT_ADVECTION:
            return self.operator if self.operator is not None else self._advection()
        return None

    @cached_property
    def explicit_op(self):
        k = self.kind
        if k is SchemeKind.EXPLICIT_DIFFUSION:
            return self.operator if self.operator is not None else self._diffusion()
        if k is SchemeKind.EXPLICIT_ADVECTION:
            return self.operator if self.operator is not None else self._advection()
        if k is SchemeKind.IMEX_ADVECTION_DIFFUSION:
            return self._advection()
        return None

    @property
    def diffusion_number(self) -> float:
        """``d tau / h^2`` per unit tau."""
        return self.d / self.grid.h**2

    @property
    def courant_number(self) -> float:
        """``q tau / h`` per unit tau."""
        return self.q / self.grid.h


@dataclass(frozen=True)
class NormRecord:
    t: float
    weighted: float
    euclidean: float
    eq_residual: float


@dataclass
class NormTrace:
    """Norm history of a run; ``initial`` is the state before the first step."""

    initial: NormRecord
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def _column(self, name):
        return np.array([getattr(self.initial, name)] + [getattr(r, name) for r in self.records])

    @property
    def t(self):
        return self._column("t")

    @property
    def weighted(self):
        """Weighted norms, initial value first."""
        return self._column("weighted")

    @property
    def euclidean(self):
        return self._column("euclidean")

    @property
    def eq_residual(self):
        return self._column("eq_residual")


def norm_record(state: State, w: WeightParams, grid: Grid1D) -> NormRecord:
    res = grid_norm_p(state.V - w.c * state.U, grid)
    return NormRecord(state.t, weighted_norm(state, w, grid), product_norm(state, grid), res)


def eliminate_v(state_prev: State, u_new, tau: float, w: WeightParams):
    """Implicit update of ``V`` given the new ``U``: ``(v + b c u)/(1 + b)``, ``b = alpha tau``."""
    b = w.alpha * tau
    return (state_prev.V + b * w.c * np.asarray(u_new)) / (1.0 + b)


def _check_tau(tau):
    if not tau > 0:
        raise ParameterError(f"time step must be positive, got {tau}")


def step(spec: SchemeSpec, state: State, tau: float, F=None) -> State:
    """Advance ``state`` by one step of size ``tau``; ``F`` is the source at ``t + tau``."""
    _check_tau(tau)
    if not state.is_finite():
        raise NumericError("non-finite entries in input state")
    w = spec.w
    b = w.alpha * tau
    r = b / (1.0 + b)
    rhs = state.U + r * state.V
    if spec.explicit_op is not None:
        rhs = rhs - tau * spec.explicit_op.matvec(state.U)
    if F is not None:
        rhs = rhs + tau * np.asarray(F)
    shift = 1.0 + r * w.c
    if spec.implicit_op is None:
        U = rhs / shift
    else:
        U = spec.implicit_op.solve_shifted(shift, tau, rhs)
    V = eliminate_v(state, U, tau, w)
    out = State(U, V, state.t + tau)
    if not out.is_finite():
        raise NumericError("step produced non-finite values")
    return out


def run(
    spec: SchemeSpec,
    state0: State,
    tau: float,
    n_steps: int,
    F_provider: Optional[Callable] = None,
):
    """Take ``n_steps`` steps and record norms after each one.

    ``F_provider(t)`` returns the source vector at time ``t`` (or ``None``).
    """
    if n_steps < 1:
        raise ParameterError("n_steps must be >= 1")
    w, grid = spec.w, spec.grid
    trace = NormTrace(norm_record(state0, w, grid))
    state = state0
    for k in range(1, n_steps + 1):
        F = F_provider(state.t + tau) if F_provider is not None else None
        try:
            state = step(spec, state, tau, F)
        except NumericError as exc:
            raise NumericError(str(exc), step=k) from exc
        trace.records.append(norm_record(state, w, grid))
    return state, trace


def mass_matrix_step(M, spec: SchemeSpec, state: State, tau: float, F=None) -> State:
    """Fully implicit step of the mass-matrix (Galerkin) form.

    Solves ``M(W^n - W^{n-1})/tau + C M W^n + L W^n = F`` with ``M`` acting
    blockwise on ``U`` and ``V``. Dense; meant for small systems.
    """
    _check_tau(tau)
    if spec.explicit_op is not None:
        raise ParameterError("mass-matrix step is implemented for fully implicit schemes only")
    M = np.asarray(M, dtype=float)
    n = state.n
    if M.shape != (n, n):
        raise ParameterError(f"mass matrix shape {M.shape} does not match state size {n}")
    if not np.allclose(M, M.T, rtol=1e-13, atol=0):
        raise ParameterError("mass matrix must be symmetric")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise ParameterError("mass matrix is not positive definite") from exc
    w = spec.w
    b = w.alpha * tau
    r = b / (1.0 + b)
    L = spec.implicit_op.to_dense() if spec.implicit_op is not None else np.zeros((n, n))
    A = (1.0 + r * w.c) * M + tau * L
    rhs = M @ (state.U + r * state.V)
    if F is not None:
        rhs = rhs + tau * np.asarray(F)
    U = np.linalg.solve(A, rhs)
    V = eliminate_v(state, U, tau, w)
    return State(U, V, state.t + tau).require_finite()


def mass_weighted_norm(state: State, M, w: WeightParams) -> float:
    """``sqrt(c U^T M U + V^T M V)``."""
    M = np.asarray(M)
    return float(np.sqrt(w.c * state.U @ M @ state.U + state.V @ M @ state.V))


def modal_step_matrices(spec: SchemeSpec, tau: float) -> np.ndarray:
    """Per-eigenmode 2x2 step maps ``[u, v]^n = G_p [u, v]^{n-1}`` for Dirichlet diffusion."""
    g = spec.grid
    if g.boundary is not Boundary.DIRICHLET or spec.operator is not None:
        raise ParameterError("modal propagation needs the assembled Dirichlet operator")
    if spec.kind not in (SchemeKind.IMPLICIT_DIFFUSION, SchemeKind.EXPLICIT_DIFFUSION):
        raise ParameterError(f"modal propagation not available for {spec.kind.value}")
    n = g.n_nodes
    p = np.arange(1, n + 1)
    lam = spec.d / g.h**2 * 2.0 * (1.0 - np.cos(p * np.pi / (n + 1)))
    w = spec.w
    b = w.alpha * tau
    r = b / (1.0 + b)
    shift = 1.0 + r * w.c
    if spec.kind is SchemeKind.IMPLICIT_DIFFUSION:
        a_u = 1.0 / (shift + tau * lam)
        a_v = r / (shift + tau * lam)
    else:
        a_u = (1.0 - tau * lam) / shift
        a_v = np.full(n, r / shift)
    G = np.empty((n, 2, 2))
    G[:, 0, 0] = a_u
    G[:, 0, 1] = a_v
    G[:, 1, 0] = b * w.c * a_u / (1.0 + b)
    G[:, 1, 1] = (1.0 + b * w.c * a_v) / (1.0 + b)
    return G


def run_modal(spec: SchemeSpec, state0: State, tau: float, n_steps: int) -> State:
    """Result of ``n_steps`` unforced steps, computed in the sine eigenbasis.

    The Dirichlet Laplacian is diagonalized by the type-I DST, so the step map
    decouples into independent 2x2 maps; their ``n_steps``-th powers are
    formed by repeated squaring. Gives the same discrete solution as calling
    :func:`step` ``n_steps`` times, at O(n log n + n log n_steps) cost.
    """
    _check_tau(tau)
    if n_steps < 0:
        raise ParameterError("n_steps must be >= 0")
    G = modal_step_matrices(spec, tau)
    Gn = np.linalg.matrix_power(G, n_steps)
    uh = fft.dst(state0.U, type=1, norm="ortho")
    vh = fft.dst(state0.V, type=1, norm="ortho")
    u1 = Gn[:, 0, 0] * uh + Gn[:, 0, 1] * vh
    v1 = Gn[:, 1, 0] * uh + Gn[:, 1, 1] * vh
    U = fft.idst(u1, type=1, norm="ortho")
    V = fft.idst(v1, type=1, norm="ortho")
    return State(U, V, state0.t + n_steps * tau).require_finite()
