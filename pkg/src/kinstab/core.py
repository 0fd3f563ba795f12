"""Grids, paired states, grid norms and the weighted (symmetrizing) norm.

All norms carry the grid spacing ``h`` so that they are consistent
discretizations of the continuous L^p norms. A scalar (0-d) problem is a
one-node grid with ``h = 1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, NumericError, ParameterError


class Boundary(enum.Enum):
    DIRICHLET = "dirichlet"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on ``[a, b]``.

    For Dirichlet grids the unknowns live on the ``n_nodes`` interior nodes and
    ``h = (b - a) / (n_nodes + 1)``. For periodic grids node ``j`` sits at
    ``a + j*h`` for ``j = 0..n_nodes-1`` and ``h = (b - a) / n_nodes``.
    """

    a: float
    b: float
    n_nodes: int
    boundary: Boundary = Boundary.DIRICHLET

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ParameterError(f"n_nodes must be >= 1, got {self.n_nodes}")
        if not self.b > self.a:
            raise ParameterError(f"empty interval [{self.a}, {self.b}]")

    @classmethod
    def dirichlet(cls, a: float, b: float, n_cells: int) -> "Grid1D":
        """Grid with ``n_cells`` cells, i.e. ``n_cells - 1`` interior unknowns."""
        return cls(a, b, n_cells - 1, Boundary.DIRICHLET)

    @classmethod
    def periodic(cls, a: float, b: float, n_cells: int) -> "Grid1D":
        return cls(a, b, n_cells, Boundary.PERIODIC)

    @classmethod
    def point(cls) -> "Grid1D":
        """One-node grid with unit spacing, used for 0-d (ODE) problems."""
        return cls(0.0, 1.0, 1, Boundary.PERIODIC)

    @property
    def h(self) -> float:
        if self.boundary is Boundary.DIRICHLET:
            return (self.b - self.a) / (self.n_nodes + 1)
        return (self.b - self.a) / self.n_nodes

    @property
    def n_cells(self) -> int:
        if self.boundary is Boundary.DIRICHLET:
            return self.n_nodes + 1
        return self.n_nodes

    @property
    def x(self) -> np.ndarray:
        if self.boundary is Boundary.DIRICHLET:
            j = np.arange(1, self.n_nodes + 1)
        else:
            j = np.arange(self.n_nodes)
        return self.a + j * self.h

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class WeightParams:
    """Partition coefficient ``c`` and kinetic rate ``alpha``.

    Analysis assumes both positive; steppers also accept ``alpha = 0`` (the
    decoupled limit), so positivity of ``alpha`` is checked by :meth:`check`
    rather than at construction.
    """

    c: float
    alpha: float

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError(f"c must be positive, got {self.c}")
        if self.alpha < 0:
            raise ParameterError(f"alpha must be non-negative, got {self.alpha}")

    def check(self) -> "WeightParams":
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        return self


@dataclass(frozen=True)
class State:
    """Mobile (``U``) and adsorbed (``V``) node values at time ``t``."""

    U: np.ndarray
    V: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        U = np.asarray(self.U)
        V = np.asarray(self.V)
        if U.dtype.kind not in "fc":
            U = U.astype(float)
        if V.dtype.kind not in "fc":
            V = V.astype(float)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)
        if U.ndim != 1 or U.shape != V.shape:
            raise DimensionError(f"U and V must be 1-d of equal length, got {U.shape} and {V.shape}")

    @classmethod
    def zeros(cls, grid: Grid1D, t: float = 0.0) -> "State":
        return cls(np.zeros(grid.n_nodes), np.zeros(grid.n_nodes), t)

    @classmethod
    def equilibrium(cls, U, c: float, t: float = 0.0) -> "State":
        U = np.asarray(U, dtype=float)
        return cls(U, c * U, t)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.U)) and np.all(np.isfinite(self.V)))

    def require_finite(self, step=None) -> "State":
        if not self.is_finite():
            raise NumericError("non-finite entries in state", step=step)
        return self

    def with_time(self, t: float) -> "State":
        return replace(self, t=t)


def _check_length(F, grid: Grid1D):
    if F.shape != (grid.n_nodes,):
        raise DimensionError(f"vector of shape {F.shape} does not match grid with {grid.n_nodes} nodes")


def grid_norm_p(F, grid: Grid1D, p=2) -> float:
    """``(sum_j h |f_j|^p)^(1/p)``, or ``max_j |f_j|`` for ``p = inf``."""
    F = np.asarray(F)
    _check_length(F, grid)
    if p == np.inf:
        return float(np.max(np.abs(F))) if F.size else 0.0
    if p == 1:
        return float(grid.h * np.sum(np.abs(F)))
    if p == 2:
        # vdot handles complex Fourier-mode states as well
        return float(np.sqrt(grid.h * np.vdot(F, F).real))
    if p < 1:
        raise ParameterError(f"norm order must be >= 1, got {p}")
    return float((grid.h * np.sum(np.abs(F) ** p)) ** (1.0 / p))


def product_norm(state: State, grid: Grid1D) -> float:
    """Unweighted Euclidean norm of ``[U, V]`` on the product space."""
    return float(np.hypot(grid_norm_p(state.U, grid), grid_norm_p(state.V, grid)))


def weighted_norm(state: State, w: WeightParams, grid: Grid1D) -> float:
    """``sqrt(c ||U||^2 + ||V||^2)`` with h-weighted grid 2-norms."""
    if not w.c > 0:
        raise ParameterError(f"c must be positive, got {w.c}")
    nu = grid_norm_p(state.U, grid)
    nv = grid_norm_p(state.V, grid)
    return float(np.sqrt(w.c * nu * nu + nv * nv))


def symmetrize(state: State, w: WeightParams) -> State:
    """Change of variables ``[U, V] -> [sqrt(c) U, V]``."""
    return State(np.sqrt(w.c) * state.U, state.V, state.t)


def desymmetrize(state: State, w: WeightParams) -> State:
    """Inverse of :func:`symmetrize`."""
    return State(state.U / np.sqrt(w.c), state.V, state.t)
