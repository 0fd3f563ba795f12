"""Fourier symbols of the one-step schemes in symmetrized variables.

For a Fourier mode ``exp(i xi x)`` each scheme reads
``H1(xi) w^n = H0(xi) w^{n-1}`` with ``w = [sqrt(c) u_hat, v_hat]``; the
amplification matrix is ``G = H1^{-1} H0`` and the scheme is strongly stable
when ``||G(xi)||_2 <= 1`` for all ``xi``.

Symbols are functions of the dimensionless groups ``b = alpha tau``,
``nu = d tau / h^2``, ``lam = q tau / h`` and the phase ``theta = xi h``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError
from .steppers import SchemeKind

STABILITY_TOL = 1e-10


@dataclass(frozen=True)
class SymbolParams:
    b: float
    c: float
    nu: float = 0.0
    lam: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.b < 0 or not self.c > 0:
            raise ParameterError("need b >= 0 and c > 0")
        if self.nu < 0:
            raise ParameterError("need d tau / h^2 >= 0")

    @classmethod
    def from_physical(cls, d, q, alpha, c, tau, h, xi=0.0) -> "SymbolParams":
        return cls(alpha * tau, c, d * tau / h**2, q * tau / h, xi * h)

    @property
    def s_D(self) -> float:
        return diffusion_symbol(self.nu, self.theta)

    @property
    def s_lambda(self) -> complex:
        return advection_symbol(self.lam, self.theta)


def diffusion_symbol(nu, theta):
    """``s_D = 2 nu (1 - cos theta)``."""
    return 2.0 * nu * (1.0 - np.cos(theta))


def advection_symbol(lam, theta):
    """Upwind ``s_lambda = lam (1 - exp(-i theta))``."""
    return lam * (1.0 - np.exp(-1j * np.asarray(theta)))


@dataclass(frozen=True)
class AmplificationPair:
    H1: np.ndarray
    H0: np.ndarray

    @property
    def G(self) -> np.ndarray:
        return np.linalg.solve(self.H1, self.H0)


def symbol_stack(kind: SchemeKind, b, c, nu, lam, theta):
    """``H1``, ``H0`` as ``(m, 2, 2)`` complex stacks over the phases ``theta``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    m = theta.size
    beta = b * np.sqrt(c)
    H1 = np.zeros((m, 2, 2), dtype=complex)
    H0 = np.zeros((m, 2, 2), dtype=complex)
    H1[:, 0, 0] = 1.0 + b * c
    H1[:, 0, 1] = -beta
    H1[:, 1, 0] = -beta
    H1[:, 1, 1] = 1.0 + b
    H0[:, 0, 0] = 1.0
    H0[:, 1, 1] = 1.0
    sD = diffusion_symbol(nu, theta)
    sL = advection_symbol(lam, theta)
    if kind is SchemeKind.IMPLICIT_DIFFUSION:
        H1[:, 0, 0] += sD
    elif kind is SchemeKind.EXPLICIT_DIFFUSION:
        H0[:, 0, 0] -= sD
    elif kind is SchemeKind.IMPLICIT_ADVECTION:
        H1[:, 0, 0] += sL
    elif kind is SchemeKind.EXPLICIT_ADVECTION:
        H0[:, 0, 0] -= sL
    elif kind is SchemeKind.IMEX_ADVECTION_DIFFUSION:
        H1[:, 0, 0] += sD
        H0[:, 0, 0] -= sL
    else:
        raise ParameterError(f"unknown scheme kind {kind!r}")
    det = H1[:, 0, 0] * H1[:, 1, 1] - H1[:, 0, 1] * H1[:, 1, 0]
    if np.any(det == 0):
        raise NumericError("singular H1 symbol")
    return H1, H0


def build_pair(kind: SchemeKind, p: SymbolParams) -> AmplificationPair:
    H1, H0 = symbol_stack(kind, p.b, p.c, p.nu, p.lam, p.theta)
    return AmplificationPair(H1[0], H0[0])


def amplification(kind: SchemeKind, b, c, nu, lam, theta) -> np.ndarray:
    """``G = H1^{-1} H0`` stacked over ``theta``, via the explicit 2x2 inverse."""
    H1, H0 = symbol_stack(kind, b, c, nu, lam, theta)
    a, bb, cc, dd = H1[:, 0, 0], H1[:, 0, 1], H1[:, 1, 0], H1[:, 1, 1]
    det = a * dd - bb * cc
    inv = np.empty_like(H1)
    inv[:, 0, 0] = dd / det
    inv[:, 0, 1] = -bb / det
    inv[:, 1, 0] = -cc / det
    inv[:, 1, 1] = a / det
    return inv @ H0


def spectral_norm_2x2(G) -> np.ndarray:
    """Largest singular value of a 2x2 matrix (or a stack of them).

    Uses the closed-form top eigenvalue of the Hermitian matrix ``G^* G``.
    """
    G = np.asarray(G, dtype=complex)
    g00, g01, g10, g11 = G[..., 0, 0], G[..., 0, 1], G[..., 1, 0], G[..., 1, 1]
    p = np.abs(g00) ** 2 + np.abs(g10) ** 2
    r = np.abs(g01) ** 2 + np.abs(g11) ** 2
    z = np.conj(g00) * g01 + np.conj(g10) * g11
    top = 0.5 * (p + r) + np.sqrt(0.25 * (p - r) ** 2 + np.abs(z) ** 2)
    out = np.sqrt(top)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of a xi-scan.

    ``marginal`` flags a stable scan whose sup over nonzero frequencies is
    within tolerance of one (e.g. exactly at a CFL limit). ``xi = 0`` is
    excluded there because every consistent scheme has ``||G(0)|| = 1``.
    """

    kind: SchemeKind
    sup_norm: float
    stable: bool
    marginal: bool
    worst_xi: float
    sup_norm_nonzero: float


def _phases(n_samples):
    if n_samples < 3:
        raise ParameterError("need at least 3 xi samples")
    theta = np.linspace(-np.pi, np.pi, n_samples)
    if not np.any(theta == 0.0):
        theta = np.sort(np.append(theta, 0.0))
    return theta


def scan_symbols(kind, b, c, nu=0.0, lam=0.0, n_samples=1025, tol=STABILITY_TOL):
    """Scan ``||G||`` over ``theta = xi h`` in ``[-pi, pi]``; returns (verdict, theta, norms)."""
    theta = _phases(n_samples)
    norms = spectral_norm_2x2(amplification(kind, b, c, nu, lam, theta))
    i = int(np.argmax(norms))
    sup = float(norms[i])
    nz = theta != 0.0
    sup_nz = float(np.max(norms[nz]))
    stable = sup <= 1.0 + tol
    marginal = stable and sup_nz >= 1.0 - tol
    return StabilityVerdict(kind, sup, stable, marginal, float(theta[i]), sup_nz), theta, norms


def scan(kind, d, q, alpha, c, tau, h, n_samples=1025) -> StabilityVerdict:
    """Stability verdict for physical parameters; ``worst_xi`` is in units of 1/length."""
    v, _, _ = scan_symbols(kind, alpha * tau, c, d * tau / h**2, q * tau / h, n_samples)
    return StabilityVerdict(v.kind, v.sup_norm, v.stable, v.marginal, v.worst_xi / h, v.sup_norm_nonzero)


def table1_condition(kind: SchemeKind, nu=0.0, lam=0.0) -> bool:
    """Sufficient stability condition of the scalar schemes, applied to the system."""
    if kind in (SchemeKind.IMPLICIT_DIFFUSION, SchemeKind.IMPLICIT_ADVECTION):
        return bool(lam >= 0)
    if kind is SchemeKind.EXPLICIT_DIFFUSION:
        return bool(4.0 * nu <= 2.0)
    if kind in (SchemeKind.EXPLICIT_ADVECTION, SchemeKind.IMEX_ADVECTION_DIFFUSION):
        return bool(0.0 <= lam <= 1.0)
    raise ParameterError(f"unknown scheme kind {kind!r}")


def implicit_advection_certificate(p: SymbolParams) -> float:
    """``X*gamma - beta^2`` for the implicit-advection ``H1``.

    With ``X = 1 + bc + Re(s_lambda)``, ``gamma = 1 + b`` and
    ``beta = b sqrt(c)``; a value >= 1 gives ``det(H1 H1^*) >= 1``.
    """
    if p.lam < 0:
        raise ParameterError("certificate needs lam >= 0")
    # expanded so the b^2 c terms cancel exactly: 1 + b(1 + c) + Re(s_lambda)(1 + b)
    re_s = 2.0 * p.lam * np.sin(0.5 * p.theta) ** 2
    return float(1.0 + p.b * (1.0 + p.c) + re_s * (1.0 + p.b))


def explicit_h1_norm_check(b: float, c: float, tol: float = 1e-12):
    """Eigenvalues of the explicit-scheme ``H1``: exactly ``1`` and ``1 + b(1 + c)``."""
    if b < 0 or not c > 0:
        raise ParameterError("need b >= 0 and c > 0")
    beta = b * np.sqrt(c)
    H1 = np.array([[1.0 + b * c, -beta], [-beta, 1.0 + b]])
    lam1, lam2 = np.linalg.eigvalsh(H1)
    scale = 1.0 + b * (1.0 + c)
    if abs(lam1 - 1.0) > tol * scale or abs(lam2 - scale) > tol * scale:
        raise NumericError(f"unexpected H1 eigenvalues {lam1}, {lam2}")
    return float(lam1), float(lam2)
