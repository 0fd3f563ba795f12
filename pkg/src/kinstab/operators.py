"""Spatial operators L_h, the node-local coupling blocks, and banded solvers.

Operators are stored in banded (Dirichlet) or stencil (periodic) form and
expose ``matvec``, ``to_dense`` and ``solve_shifted``; the latter solves
``(shift*I + scale*L) x = rhs`` in O(n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import WeightParams
from .errors import DimensionError, ParameterError


def thomas(lower, diag, upper, rhs):
    """Solve a tridiagonal system by forward elimination / back substitution.

    ``lower[i]`` multiplies ``x[i-1]`` in row ``i`` (``lower[0]`` unused) and
    ``upper[i]`` multiplies ``x[i+1]`` (``upper[-1]`` unused). No pivoting;
    intended for diagonally dominant or SPD systems.
    """
    n = len(diag)
    dtype = np.result_type(lower, diag, upper, rhs, float)
    cp = np.empty(n, dtype=dtype)
    dp = np.empty(n, dtype=dtype)
    cp[0] = upper[0] / diag[0] if n > 1 else 0.0
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * cp[i - 1]
        if i < n - 1:
            cp[i] = upper[i] / m
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m
    x = np.empty(n, dtype=dtype)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def cyclic_thomas(lower, diag, upper, rhs):
    """Solve a periodic tridiagonal system via Sherman-Morrison.

    Same band convention as :func:`thomas`, except that ``lower[0]`` couples
    row 0 to ``x[n-1]`` and ``upper[n-1]`` couples row ``n-1`` to ``x[0]``.
    """
    n = len(diag)
    if n <= 2:
        A = np.zeros((n, n), dtype=np.result_type(lower, diag, upper, float))
        for i in range(n):
            A[i, i] += diag[i]
            A[i, (i - 1) % n] += lower[i]
            A[i, (i + 1) % n] += upper[i]
        return np.linalg.solve(A, rhs)
    corner_top = lower[0]
    corner_bottom = upper[-1]
    gamma = -diag[0] if diag[0] != 0 else -1.0
    d = np.array(diag, dtype=np.result_type(diag, float))
    d[0] -= gamma
    d[-1] -= corner_bottom * corner_top / gamma
    x = thomas(lower, d, upper, rhs)
    u = np.zeros(n, dtype=d.dtype)
    u[0] = gamma
    u[-1] = corner_bottom
    z = thomas(lower, d, upper, u)
    factor = (x[0] + corner_top * x[-1] / gamma) / (1.0 + z[0] + corner_top * z[-1] / gamma)
    return x - factor * z


@dataclass(frozen=True)
class TridiagonalOp:
    """Tridiagonal operator with homogeneous Dirichlet closure."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, di, up = (np.asarray(v, dtype=float) for v in (self.lower, self.diag, self.upper))
        if not (lo.shape == di.shape == up.shape) or di.ndim != 1:
            raise DimensionError("band lengths must agree")
        lo = lo.copy()
        up = up.copy()
        lo[0] = 0.0
        up[-1] = 0.0
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "diag", di)
        object.__setattr__(self, "upper", up)

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.lower[1:], self.upper[:-1]))

    def matvec(self, u):
        u = np.asarray(u)
        if u.shape != (self.n,):
            raise DimensionError(f"vector of shape {u.shape} for operator of size {self.n}")
        out = self.diag * u
        out[1:] += self.lower[1:] * u[:-1]
        out[:-1] += self.upper[:-1] * u[1:]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower[1:], -1) + np.diag(self.upper[:-1], 1)

    def solve_shifted(self, shift, scale, rhs):
        return thomas(scale * self.lower, shift + scale * self.diag, scale * self.upper, rhs)

    def __add__(self, other):
        if not isinstance(other, TridiagonalOp):
            return NotImplemented
        return TridiagonalOp(self.lower + other.lower, self.diag + other.diag, self.upper + other.upper)

    def __neg__(self):
        return TridiagonalOp(-self.lower, -self.diag, -self.upper)


@dataclass(frozen=True)
class CirculantOp:
    """Constant-stencil operator with periodic wraparound.

    ``stencil`` maps offset -> weight, so ``(Lu)_j = sum_k w_k u_{j+k}`` with
    indices taken mod ``n``.
    """

    n: int
    stencil: dict

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("circulant operator needs n >= 1")
        object.__setattr__(self, "stencil", {int(k): float(v) for k, v in self.stencil.items()})

    def matvec(self, u):
        u = np.asarray(u)
        if u.shape != (self.n,):
            raise DimensionError(f"vector of shape {u.shape} for operator of size {self.n}")
        out = np.zeros_like(u, dtype=np.result_type(u, float))
        for k, wk in self.stencil.items():
            if wk:
                out += wk * np.roll(u, -k)
        return out

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for j in range(self.n):
            for k, wk in self.stencil.items():
                A[j, (j + k) % self.n] += wk
        return A

    @property
    def is_symmetric(self) -> bool:
        A = self.to_dense()
        return bool(np.array_equal(A, A.T))

    def solve_shifted(self, shift, scale, rhs):
        if set(self.stencil) - {-1, 0, 1}:
            # wide stencils only arise in tests; fall back to dense
            return np.linalg.solve(shift * np.eye(self.n) + scale * self.to_dense(), rhs)
        n = self.n
        lo = np.full(n, scale * self.stencil.get(-1, 0.0))
        up = np.full(n, scale * self.stencil.get(1, 0.0))
        di = np.full(n, shift + scale * self.stencil.get(0, 0.0))
        return cyclic_thomas(lo, di, up, rhs)

    def __add__(self, other):
        if not isinstance(other, CirculantOp) or other.n != self.n:
            return NotImplemented
        st = dict(self.stencil)
        for k, v in other.stencil.items():
            st[k] = st.get(k, 0.0) + v
        return CirculantOp(self.n, st)

    def __neg__(self):
        return CirculantOp(self.n, {k: -v for k, v in self.stencil.items()})


Operator = Union[TridiagonalOp, CirculantOp]


@dataclass(frozen=True)
class CouplingBlock:
    """Node-local coupling matrices: ``C`` (original) and ``C_tilde`` (symmetrized)."""

    C: np.ndarray
    C_tilde: np.ndarray


@dataclass(frozen=True)
class DifferenceFactor:
    """Difference map ``D`` (``(n+1) x n``) with diagonal weights ``k``.

    ``(Du)_0 = u_0``, ``(Du)_j = u_j - u_{j-1}`` and ``(Du)_n = -u_{n-1}``,
    i.e. homogeneous Dirichlet values at both ends.
    """

    k: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        if k.ndim != 1 or k.size < 2:
            raise DimensionError("need at least two weights (n >= 1)")
        if np.any(k <= 0):
            raise ParameterError("difference weights must be positive")
        object.__setattr__(self, "k", k)

    @classmethod
    def identity(cls, n: int) -> "DifferenceFactor":
        return cls(np.ones(n + 1))

    @property
    def n(self) -> int:
        return self.k.size - 1

    def apply_D(self, u):
        u = np.asarray(u)
        return np.diff(u, prepend=0.0, append=0.0)

    def D_dense(self) -> np.ndarray:
        n = self.n
        D = np.zeros((n + 1, n))
        D[np.arange(n), np.arange(n)] = 1.0
        D[np.arange(1, n + 1), np.arange(n)] = -1.0
        return D


def dirichlet_laplacian(n: int, h: float, d: float) -> TridiagonalOp:
    """``(d/h^2) tridiag(-1, 2, -1)`` on ``n`` interior nodes."""
    if n < 1 or not h > 0:
        raise ParameterError("need n >= 1 and h > 0")
    if d < 0:
        raise ParameterError(f"diffusivity must be non-negative, got {d}")
    s = d / h**2
    return TridiagonalOp(np.full(n, -s), np.full(n, 2 * s), np.full(n, -s))


def dirichlet_upwind(n: int, h: float, q: float) -> TridiagonalOp:
    """Upwind advection ``q (u_j - u_{j-1}) / h`` with zero inflow value."""
    if q < 0:
        raise ParameterError(f"upwind stencil requires q >= 0, got {q}")
    s = q / h
    return TridiagonalOp(np.full(n, -s), np.full(n, s), np.zeros(n))


def periodic_upwind(n: int, h: float, q: float) -> CirculantOp:
    """Upwind advection ``q (u_j - u_{j-1}) / h`` with periodic wraparound."""
    if q < 0:
        raise ParameterError(f"upwind stencil requires q >= 0, got {q}")
    if not h > 0:
        raise ParameterError("h must be positive")
    s = q / h
    return CirculantOp(n, {0: s, -1: -s})


def periodic_diffusion(n: int, h: float, d: float) -> CirculantOp:
    """Periodic ``(d/h^2)(-1, 2, -1)`` stencil."""
    if d < 0:
        raise ParameterError(f"diffusivity must be non-negative, got {d}")
    s = d / h**2
    return CirculantOp(n, {-1: -s, 0: 2 * s, 1: -s})


def assemble_dtkd(f: DifferenceFactor) -> TridiagonalOp:
    """Symmetric operator ``D^T K D`` (no ``h`` scaling)."""
    k = f.k
    diag = k[:-1] + k[1:]
    off = -k[1:-1]
    n = f.n
    lower = np.zeros(n)
    upper = np.zeros(n)
    lower[1:] = off
    upper[:-1] = off
    return TridiagonalOp(lower, diag, upper)


def coupling_blocks(w: WeightParams) -> CouplingBlock:
    w.check()
    a, c = w.alpha, w.c
    s = np.sqrt(c)
    C = a * np.array([[c, -1.0], [-c, 1.0]])
    Ct = a * np.array([[c, -s], [-s, 1.0]])
    return CouplingBlock(C, Ct)


def as_dense(L) -> np.ndarray:
    if isinstance(L, np.ndarray):
        return L
    if isinstance(L, DifferenceFactor):
        return assemble_dtkd(L).to_dense()
    return L.to_dense()


def apply(L, u):
    if isinstance(L, np.ndarray):
        return L @ u
    if isinstance(L, DifferenceFactor):
        return assemble_dtkd(L).matvec(u)
    return L.matvec(u)


def accretivity_probe(L, trials: int = 1000, rng=None) -> float:
    """Minimum of ``<Lu, u>`` over ``trials`` random unit vectors ``u``.

    A value >= -1e-12 certifies accretivity on the sample; for a symmetric
    operator the minimum is bounded below by its smallest eigenvalue.
    """
    rng = np.random.default_rng(rng)
    n = L.n if not isinstance(L, np.ndarray) else L.shape[0]
    best = np.inf
    for _ in range(trials):
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        best = min(best, float(np.dot(apply(L, u), u)))
    return best
