"""Finite-difference solvers and stability tools for transport with kinetic
(non-equilibrium) adsorption,

    u_t + v_t + L u = f,    v_t = alpha (c u - v).

The weighted norm ``c|u|^2 + |v|^2`` makes every implicitly coupled step a
contraction whenever the scalar transport scheme is stable; the package
provides the steppers, their Fourier symbols, a nonlocal-in-time cross-check
and the refinement studies that exercise them.
"""

from .core import (
    Boundary,
    Grid1D,
    State,
    WeightParams,
    desymmetrize,
    grid_norm_p,
    product_norm,
    symmetrize,
    weighted_norm,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    KinstabError,
    NumericError,
    ParameterError,
)
from .operators import (
    CirculantOp,
    DifferenceFactor,
    TridiagonalOp,
    assemble_dtkd,
    coupling_blocks,
    dirichlet_laplacian,
    dirichlet_upwind,
    periodic_diffusion,
    periodic_upwind,
)
from .steppers import SchemeKind, SchemeSpec, run, run_modal, step
from .vonneumann import scan, scan_symbols

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "Grid1D",
    "State",
    "WeightParams",
    "desymmetrize",
    "grid_norm_p",
    "product_norm",
    "symmetrize",
    "weighted_norm",
    "ConfigError",
    "ConvergenceError",
    "DimensionError",
    "KinstabError",
    "NumericError",
    "ParameterError",
    "CirculantOp",
    "DifferenceFactor",
    "TridiagonalOp",
    "assemble_dtkd",
    "coupling_blocks",
    "dirichlet_laplacian",
    "dirichlet_upwind",
    "periodic_diffusion",
    "periodic_upwind",
    "SchemeKind",
    "SchemeSpec",
    "run",
    "run_modal",
    "step",
    "scan",
    "scan_symbols",
]
