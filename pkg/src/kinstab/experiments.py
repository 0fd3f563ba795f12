"""Experiment drivers: instability of the 0-d problem, refinement studies,
kinetic vs equilibrium transport, von Neumann sweeps and Volterra checks.

Every driver takes an :class:`ExperimentConfig` and returns plain data;
:mod:`kinstab.cli` turns the results into CSV files.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .core import Boundary, Grid1D, State, WeightParams, grid_norm_p, product_norm, weighted_norm
from .errors import ConfigError, DimensionError, NumericError, ParameterError
from .extensions import (
    MonotoneG,
    TwoSpeciesState,
    lyapunov,
    step_nonlinear,
    step_two_species,
    two_species_quantity,
)
from .operators import DifferenceFactor, TridiagonalOp, assemble_dtkd, coupling_blocks, dirichlet_laplacian
from .steppers import SchemeKind, SchemeSpec, run, run_modal, step
from .volterra import recover_v, solve_nonlocal
from .vonneumann import scan_symbols, table1_condition

EXPERIMENTS = (
    "zerod",
    "advection-conv",
    "diffusion-conv",
    "kinetic-vs-eq",
    "vn-sweep",
    "volterra-check",
    "nonlinear-demo",
    "two-species-demo",
)


@dataclass
class ExperimentConfig:
    """Flat configuration shared by all experiments; each uses what it needs."""

    experiment: str = "zerod"
    d: float = 0.0
    q: float = 1.0
    alpha: float = 0.1
    c: float = 5.0
    L: float = 0.1
    tau: float = 0.2
    n_steps: int = 200
    M_list: tuple = (20, 50, 100, 200, 500)
    M_fine: int = 5050
    lam: float = 0.99
    nu: float = 0.4
    T: float = 4.8
    a: float = -1.0
    b: float = 3.0
    initial: str = "box"
    boundary: str = "dirichlet"
    initial_samples: tuple = ()
    scheme: str = "implicit"
    snapshot_times: tuple = (0.5, 1.0, 2.0)
    alpha_list: tuple = (2.0, 20.0, 200.0)
    alpha2: float = 1.0
    c2: float = 2.0
    imex_nu: float = 10.0
    n_nodes: int = 16
    n_samples: int = 1025
    workers: int = 1
    output: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.experiment in ("advection-conv", "diffusion-conv"):
            if len(self.M_list) < 2:
                raise ConfigError("need at least two refinement levels")
            if not self.M_fine > max(self.M_list):
                raise ConfigError("M_fine must exceed every entry of M_list")
        if self.experiment in ("advection-conv", "kinetic-vs-eq") and not 0 < self.lam <= 1:
            raise ConfigError("lam must lie in (0, 1] for advection runs")
        if self.initial not in ("box", "bell", "custom"):
            raise ConfigError(f"unknown initial condition {self.initial!r}")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.initial == "custom" and len(self.initial_samples) < 2:
            raise ConfigError("custom initial condition needs at least two initial_samples")
        return self


DEFAULTS = {
    "zerod": dict(c=5.0, alpha=0.1, tau=0.2, L=0.1, n_steps=200),
    "advection-conv": dict(
        c=0.1, alpha=2.0, q=1.0, lam=0.99, T=4.8, a=-2.0, b=3.0, initial="box",
        boundary="dirichlet", M_list=(20, 50, 100, 200, 500), M_fine=5050,
    ),
    "diffusion-conv": dict(
        c=5.0, alpha=1.2, d=2.0, nu=0.4, T=3.2, a=0.0, b=1.0, initial="bell",
        M_list=(20, 50, 100, 200), M_fine=2000, scheme="implicit",
    ),
    "kinetic-vs-eq": dict(
        c=0.5, alpha=2.0, q=1.0, lam=0.99, T=2.0, a=-1.0, b=3.0, initial="box", boundary="periodic",
        M_fine=800, M_list=(400,), snapshot_times=(0.5, 1.0, 2.0), alpha_list=(2.0, 20.0, 200.0),
    ),
    "vn-sweep": dict(c=5.0, alpha=1.0, tau=0.2, imex_nu=10.0, n_samples=1025),
    "volterra-check": dict(c=5.0, alpha=0.1, L=0.1, tau=1e-3, T=2.0, d=1.0, n_nodes=16),
    "nonlinear-demo": dict(alpha=2.0, tau=1e-4, n_steps=1000, n_nodes=16, c=1.0),
    "two-species-demo": dict(alpha=1.0, c=1.5, alpha2=3.0, c2=0.5, tau=0.1, n_steps=200, n_nodes=16, d=1.0),
}


def default_config(name: str) -> ExperimentConfig:
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}")
    return ExperimentConfig(experiment=name, **DEFAULTS[name])


_TUPLE_FIELDS = {"M_list": int, "initial_samples": float, "snapshot_times": float, "alpha_list": float}


def parse_config(text: str, base: ExperimentConfig) -> ExperimentConfig:
    """Apply ``key = value`` lines (``#`` starts a comment) on top of ``base``."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _TUPLE_FIELDS:
                conv = _TUPLE_FIELDS[key]
                updates[key] = tuple(conv(v) for v in value.replace(",", " ").split())
            elif types[key] in ("int", int):
                updates[key] = int(value)
            elif types[key] in ("float", float):
                updates[key] = float(value)
            else:
                updates[key] = value
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    if "experiment" in updates and updates["experiment"] != base.experiment:
        raise ConfigError(f"config names experiment {updates['experiment']!r}, command runs {base.experiment!r}")
    return replace(base, **updates).validate()


# ---------------------------------------------------------------------------
# initial data


def box(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= -1.0) & (x <= 0.0), 1.0, 0.0)


def bell(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-((x - 0.5) ** 2) / 0.3)


def initial_profile(cfg: ExperimentConfig, x):
    if cfg.initial == "box":
        return box(x)
    if cfg.initial == "bell":
        return bell(x)
    samples = np.asarray(cfg.initial_samples, dtype=float)
    xs = np.linspace(cfg.a, cfg.b, samples.size)
    return np.interp(x, xs, samples)


# ---------------------------------------------------------------------------
# error measures


@dataclass(frozen=True)
class Reference:
    """Reference solution sampled on its own nodes.

    ``period`` enables periodic interpolation; otherwise coarse nodes must lie
    inside ``[x.min(), x.max()]``.
    """

    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    period: Optional[float] = None

    def at(self, xq):
        xq = np.asarray(xq, dtype=float)
        if self.period is None:
            lo, hi = self.x.min(), self.x.max()
            eps = 1e-12 * max(1.0, abs(lo), abs(hi))
            if xq.size and (xq.min() < lo - eps or xq.max() > hi + eps):
                raise DimensionError("reference does not cover the requested nodes")
            return np.interp(xq, self.x, self.u), np.interp(xq, self.x, self.v)
        return (
            np.interp(xq, self.x, self.u, period=self.period),
            np.interp(xq, self.x, self.v, period=self.period),
        )


def reference_from_state(state: State, grid: Grid1D) -> Reference:
    """Wrap a fine-grid state; periodic grids interpolate across the seam."""
    period = grid.length if grid.boundary is Boundary.PERIODIC else None
    return Reference(grid.x, state.U, state.V, period=period)


@dataclass(frozen=True)
class ErrorRow:
    L2_u_err: float
    L2_v_err: float
    L1_u_err: float
    Linf_u_err: float
    E_CQ: float
    E_QoI: float


ERROR_COLUMNS = ("L2_u_err", "L2_v_err", "L1_u_err", "Linf_u_err", "E_CQ", "E_QoI")


def error_quantities(coarse: State, reference: Reference, c: float, grid: Grid1D) -> ErrorRow:
    """Componentwise grid norms of the error plus the classical and weighted quantities."""
    if coarse.n != grid.n_nodes:
        raise DimensionError("coarse state does not match its grid")
    u_ref, v_ref = reference.at(grid.x)
    eu = u_ref - coarse.U
    ev = v_ref - coarse.V
    l2u = grid_norm_p(eu, grid)
    l2v = grid_norm_p(ev, grid)
    err = State(eu, ev)
    e_cq = product_norm(err, grid)
    e_qoi = weighted_norm(err, WeightParams(c, 0.0), grid)
    return ErrorRow(l2u, l2v, grid_norm_p(eu, grid, 1), grid_norm_p(eu, grid, np.inf), e_cq, e_qoi)


def convergence_orders(errors, Ms):
    """``log(E_i / E_{i+1}) / log(M_{i+1} / M_i)`` for consecutive levels; ``None`` if undefined."""
    if len(errors) != len(Ms) or len(Ms) < 2:
        raise ParameterError("need matching error/M lists with at least two levels")
    out = []
    for (e0, e1), (m0, m1) in zip(zip(errors, errors[1:]), zip(Ms, Ms[1:])):
        if e0 > 0 and e1 > 0 and m1 != m0:
            out.append(math.log(e0 / e1) / math.log(m1 / m0))
        else:
            out.append(None)
    return out


@dataclass
class ConvergenceReport:
    Ms: list
    rows: list
    orders: dict = field(default_factory=dict)

    @classmethod
    def from_rows(cls, Ms, rows):
        rep = cls(list(Ms), list(rows))
        for col in ERROR_COLUMNS:
            rep.orders[col] = [None] + convergence_orders([getattr(r, col) for r in rows], Ms)
        return rep

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def table(self):
        """Header and rows in CSV column order."""
        header = ["M"]
        for col in ERROR_COLUMNS:
            header += [col, "order_" + col.replace("_err", "")]
        body = []
        for i, (M, r) in enumerate(zip(self.Ms, self.rows)):
            line = [M]
            for col in ERROR_COLUMNS:
                line += [getattr(r, col), self.orders[col][i]]
            body.append(line)
        return header, body


# ---------------------------------------------------------------------------
# refinement studies


def _steps_for(T, tau_max):
    n = max(1, math.ceil(T / tau_max - 1e-9))
    return n, T / n


def advection_level(cfg: ExperimentConfig, M: int):
    """Explicit upwind run with ``M`` cells; returns (grid, final state).

    With ``boundary = dirichlet`` the inflow value is zero and the outflow
    end is free, so the interval stands in for the real line as long as the
    data has not reached its ends.
    """
    make = Grid1D.periodic if cfg.boundary == "periodic" else Grid1D.dirichlet
    grid = make(cfg.a, cfg.b, M)
    w = WeightParams(cfg.c, cfg.alpha)
    spec = SchemeSpec(SchemeKind.EXPLICIT_ADVECTION, grid, w, q=cfg.q)
    n, tau = _steps_for(cfg.T, cfg.lam * grid.h / cfg.q)
    state = State.equilibrium(initial_profile(cfg, grid.x), cfg.c)
    for _ in range(n):
        state = step(spec, state, tau)
    return grid, state


def diffusion_level(cfg: ExperimentConfig, M: int):
    """Dirichlet diffusion run with ``tau ~ nu h^2 / d``; returns (grid, final state)."""
    grid = Grid1D.dirichlet(cfg.a, cfg.b, M)
    w = WeightParams(cfg.c, cfg.alpha)
    kinds = {"implicit": SchemeKind.IMPLICIT_DIFFUSION, "explicit": SchemeKind.EXPLICIT_DIFFUSION}
    if cfg.scheme not in kinds:
        raise ConfigError(f"diffusion scheme must be one of {sorted(kinds)}")
    spec = SchemeSpec(kinds[cfg.scheme], grid, w, d=cfg.d)
    n, tau = _steps_for(cfg.T, cfg.nu * grid.h**2 / cfg.d)
    state0 = State.equilibrium(initial_profile(cfg, grid.x), cfg.c)
    return grid, run_modal(spec, state0, tau, n)


def _refinement(cfg, level):
    Ms = sorted(cfg.M_list)
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        results = list(pool.map(lambda M: level(cfg, M), Ms + [cfg.M_fine]))
    fine_grid, fine_state = results[-1]
    ref = reference_from_state(fine_state, fine_grid)
    rows = [error_quantities(s, ref, cfg.c, g) for g, s in results[:-1]]
    return ConvergenceReport.from_rows(Ms, rows)


def run_advection_convergence(cfg: ExperimentConfig) -> ConvergenceReport:
    return _refinement(cfg, advection_level)


def run_diffusion_convergence(cfg: ExperimentConfig) -> ConvergenceReport:
    return _refinement(cfg, diffusion_level)


# ---------------------------------------------------------------------------
# 0-d instability


@dataclass
class ZeroDReport:
    op_norm: float
    eig_max: float
    sym_op_norm: float
    gamma: float
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    euclidean: np.ndarray
    weighted: np.ndarray


def zerod_matrices(c, alpha, L):
    """``B = C + diag(L, 0)`` and its symmetrized counterpart."""
    blocks = coupling_blocks(WeightParams(c, alpha))
    Lm = np.array([[L, 0.0], [0.0, 0.0]])
    return blocks.C + Lm, blocks.C_tilde + Lm


def run_zerod_instability(cfg: ExperimentConfig) -> ZeroDReport:
    B, Bt = zerod_matrices(cfg.c, cfg.alpha, cfg.L)
    I = np.eye(2)
    with np.errstate(all="ignore"):
        A = np.linalg.inv(I + cfg.tau * B)
        At = np.linalg.inv(I + cfg.tau * Bt)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(At))):
        raise NumericError("0-d step matrix is not finite")
    ev, vecs = np.linalg.eig(A)
    i = int(np.argmax(np.abs(ev)))
    gamma = float(np.real(vecs[1, i] / vecs[0, i]))

    grid = Grid1D.point()
    w = WeightParams(cfg.c, cfg.alpha)
    spec = SchemeSpec(SchemeKind.IMPLICIT_DIFFUSION, grid, w, operator=TridiagonalOp([0.0], [cfg.L], [0.0]))
    _, trace = run(spec, State([1.0], [1.0]), cfg.tau, cfg.n_steps)
    # replay for the trajectory itself; run() keeps only norms
    u, v = [1.0], [1.0]
    s = State([1.0], [1.0])
    for _ in range(cfg.n_steps):
        s = step(spec, s, cfg.tau)
        u.append(float(s.U[0]))
        v.append(float(s.V[0]))
    return ZeroDReport(
        op_norm=float(np.linalg.norm(A, 2)),
        eig_max=float(np.abs(ev[i])),
        sym_op_norm=float(np.linalg.norm(At, 2)),
        gamma=gamma,
        t=trace.t,
        u=np.array(u),
        v=np.array(v),
        euclidean=trace.euclidean,
        weighted=trace.weighted,
    )


# ---------------------------------------------------------------------------
# kinetic vs equilibrium


def equilibrium_step(u, c, lam):
    """Upwind step of ``(1 + c) u_t + q u_x = 0`` with Courant number ``lam = q tau / h``."""
    return u - lam / (1.0 + c) * (u - np.roll(u, 1))


def run_kinetic_vs_equilibrium(cfg: ExperimentConfig):
    """Snapshots of the kinetic model for each rate in ``alpha_list`` and of the equilibrium model.

    Returns ``(grid, rows)`` with rows ``(model, alpha, t, x, u, v)``; the
    equilibrium model reports ``v = c u`` and ``alpha = inf``. All models share
    the periodic grid (``M_fine`` cells) and the time step.
    """
    grid = Grid1D.periodic(cfg.a, cfg.b, cfg.M_fine)
    tau_max = cfg.lam * grid.h / cfg.q
    times = sorted(set(cfg.snapshot_times) | {cfg.T})
    u0 = initial_profile(cfg, grid.x)
    rows = []
    # uniform tau across snapshot intervals keeps the models comparable
    n_total, tau = _steps_for(times[-1], tau_max)
    marks = {min(n_total, int(round(tm / tau))): tm for tm in times}
    lam = cfg.q * tau / grid.h

    def emit(model, alpha, t, U, V):
        for x, uu, vv in zip(grid.x, U, V):
            rows.append((model, alpha, t, x, uu, vv))

    for alpha in cfg.alpha_list:
        spec = SchemeSpec(SchemeKind.EXPLICIT_ADVECTION, grid, WeightParams(cfg.c, alpha), q=cfg.q)
        s = State.equilibrium(u0, cfg.c)
        for k in range(1, n_total + 1):
            s = step(spec, s, tau)
            if k in marks:
                emit("kinetic", alpha, marks[k], s.U, s.V)
    u = u0.copy()
    for k in range(1, n_total + 1):
        u = equilibrium_step(u, cfg.c, lam)
        if k in marks:
            emit("equilibrium", math.inf, marks[k], u, cfg.c * u)
    return grid, rows


def snapshot(rows, model, alpha, t):
    sel = [r for r in rows if r[0] == model and r[1] == alpha and r[2] == t]
    return np.array([r[4] for r in sel]), np.array([r[5] for r in sel])


# ---------------------------------------------------------------------------
# von Neumann sweep


def run_vn_sweep(cfg: ExperimentConfig):
    """Rows ``(scheme, parameter, value, sup_norm, verdict, table1)`` over Table-1 style sweeps.

    Diffusion kinds sweep ``nu = d tau/h^2`` over 20 log-spaced values in
    ``[1e-3, 2]``; advection kinds (and IMEX at ``nu = imex_nu``) sweep
    ``lam = q tau / h`` over 20 values in ``[0, 2]``.
    """
    b = cfg.alpha * cfg.tau
    nus = np.geomspace(1e-3, 2.0, 20)
    lams = np.linspace(0.0, 2.0, 20)
    rows = []

    def add(kind, pname, val, nu, lam):
        v, _, _ = scan_symbols(kind, b, cfg.c, nu, lam, cfg.n_samples)
        verdict = "marginal" if v.marginal else ("stable" if v.stable else "unstable")
        rows.append((kind.value, pname, float(val), v.sup_norm, verdict, table1_condition(kind, nu, lam)))

    for kind in (SchemeKind.IMPLICIT_DIFFUSION, SchemeKind.EXPLICIT_DIFFUSION):
        for nu in nus:
            add(kind, "nu", nu, nu, 0.0)
    for kind in (SchemeKind.IMPLICIT_ADVECTION, SchemeKind.EXPLICIT_ADVECTION):
        for lam in lams:
            add(kind, "lam", lam, 0.0, lam)
    for lam in lams:
        add(SchemeKind.IMEX_ADVECTION_DIFFUSION, "lam", lam, cfg.imex_nu, lam)
    return rows


# ---------------------------------------------------------------------------
# Volterra cross-check


def coupled_trajectory(spec: SchemeSpec, state0: State, tau: float, n_steps: int):
    U = [state0.U]
    V = [state0.V]
    s = state0
    for _ in range(n_steps):
        s = step(spec, s, tau)
        U.append(s.U)
        V.append(s.V)
    return np.array(U), np.array(V)


def volterra_gap(spec: SchemeSpec, state0: State, tau: float, T: float):
    """Max-in-time gaps (U, V) between the coupled implicit and nonlocal solvers."""
    n = int(round(T / tau))
    L = spec.implicit_op
    Uc, Vc = coupled_trajectory(spec, state0, tau, n)
    traj = solve_nonlocal(L, state0.U, state0.V, spec.w, tau, n, grid=spec.grid)
    Vn = recover_v(traj.U, state0.V, spec.w, tau)
    return float(np.max(np.abs(traj.U - Uc))), float(np.max(np.abs(Vn - Vc)))


def volterra_problems(cfg: ExperimentConfig, seed=0):
    """The 0-d problem and a Dirichlet diffusion problem with ``n_nodes`` unknowns."""
    w = WeightParams(cfg.c, cfg.alpha)
    zerod = SchemeSpec(
        SchemeKind.IMPLICIT_DIFFUSION, Grid1D.point(), w, operator=TridiagonalOp([0.0], [cfg.L], [0.0])
    )
    grid = Grid1D(0.0, 1.0, cfg.n_nodes, Boundary.DIRICHLET)
    diff = SchemeSpec(SchemeKind.IMPLICIT_DIFFUSION, grid, w, d=cfg.d)
    rng = np.random.default_rng(seed)
    s_diff = State(np.sin(np.pi * grid.x) + 0.1 * rng.standard_normal(grid.n_nodes), rng.uniform(0, 1, grid.n_nodes))
    return [("zerod", zerod, State([1.0], [1.0])), ("diffusion", diff, s_diff)]


def run_volterra_check(cfg: ExperimentConfig, seed=0):
    """Rows ``(problem, tau, gap_u, gap_v, ratio_u)``; ratio is gap(2 tau)/gap(tau)."""
    rows = []
    for name, spec, s0 in volterra_problems(cfg, seed):
        prev = None
        for k in range(3):
            tau = cfg.tau * 2.0 ** (-k)
            gu, gv = volterra_gap(spec, s0, tau, cfg.T)
            rows.append((name, tau, gu, gv, prev / gu if prev else None))
            prev = gu
    return rows


# ---------------------------------------------------------------------------
# demos for the extensions


def run_nonlinear_demo(cfg: ExperimentConfig, seed=0):
    """Lyapunov functional along a cubic-kinetics run with ``L = D^T D``."""
    rng = np.random.default_rng(seed)
    mg = MonotoneG.cubic()
    L = assemble_dtkd(DifferenceFactor.identity(cfg.n_nodes))
    s = State(rng.uniform(-1, 1, cfg.n_nodes), rng.uniform(-1, 1, cfg.n_nodes))
    rows = [(0, 0.0, lyapunov(s, mg))]
    for k in range(1, cfg.n_steps + 1):
        s = step_nonlinear(L, mg, s, cfg.tau, cfg.alpha)
        rows.append((k, s.t, lyapunov(s, mg)))
    return rows


def run_two_species_demo(cfg: ExperimentConfig, seed=0):
    rng = np.random.default_rng(seed)
    n = cfg.n_nodes
    grid = Grid1D(0.0, 1.0, n, Boundary.DIRICHLET)
    L = dirichlet_laplacian(n, grid.h, cfg.d)
    ts = TwoSpeciesState(rng.standard_normal(n), rng.standard_normal(n), rng.standard_normal(n),
                         cfg.alpha, cfg.alpha2, cfg.c, cfg.c2)
    rows = [(0, 0.0, two_species_quantity(ts))]
    for k in range(1, cfg.n_steps + 1):
        ts = step_two_species(ts, L, cfg.tau)
        rows.append((k, ts.t, two_species_quantity(ts)))
    return rows


def kinetic_mass(state: State, grid: Grid1D) -> float:
    return float(grid.h * np.sum(state.U + state.V))

