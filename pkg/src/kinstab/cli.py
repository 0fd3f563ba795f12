"""Command-line entry point: ``kinstab <experiment> [--config F] [--out DIR]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from . import experiments as ex
from .errors import ConfigError, DimensionError, NumericError, ParameterError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def fmt(value) -> str:
    """CSV cell: floats as ``%.12e``, ``None`` as an empty cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.12e" % value
    try:
        return "%.12e" % float(value)
    except (TypeError, ValueError):
        return str(value)


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _zerod(cfg, seed):
    rep = ex.run_zerod_instability(cfg)
    summary = [
        ("op_norm", rep.op_norm),
        ("eig_max", rep.eig_max),
        ("sym_op_norm", rep.sym_op_norm),
        ("gamma", rep.gamma),
    ]
    trace = [
        (k, float(t), float(u), float(v), float(e), float(wn))
        for k, (t, u, v, e, wn) in enumerate(zip(rep.t, rep.u, rep.v, rep.euclidean, rep.weighted))
    ]
    return [
        ("zerod_summary.csv", ["quantity", "value"], summary),
        ("zerod.csv", ["step", "t", "u", "v", "euclidean", "weighted"], trace),
    ]


def _convergence(runner):
    def go(cfg, seed):
        header, body = runner(cfg).table()
        return [(f"{cfg.experiment}.csv", header, body)]

    return go


def _kinetic(cfg, seed):
    _, rows = ex.run_kinetic_vs_equilibrium(cfg)
    return [("kinetic-vs-eq.csv", ["model", "alpha", "t", "x", "u", "v"], rows)]


def _vn(cfg, seed):
    rows = ex.run_vn_sweep(cfg)
    return [("vn-sweep.csv", ["scheme", "parameter", "value", "sup_norm", "verdict", "table1_stable"], rows)]


def _volterra(cfg, seed):
    rows = ex.run_volterra_check(cfg, seed)
    return [("volterra-check.csv", ["problem", "tau", "gap_u", "gap_v", "ratio"], rows)]


def _nonlinear(cfg, seed):
    return [("nonlinear-demo.csv", ["step", "t", "lyapunov"], ex.run_nonlinear_demo(cfg, seed))]


def _two_species(cfg, seed):
    return [("two-species-demo.csv", ["step", "t", "quantity"], ex.run_two_species_demo(cfg, seed))]


RUNNERS = {
    "zerod": _zerod,
    "advection-conv": _convergence(ex.run_advection_convergence),
    "diffusion-conv": _convergence(ex.run_diffusion_convergence),
    "kinetic-vs-eq": _kinetic,
    "vn-sweep": _vn,
    "volterra-check": _volterra,
    "nonlinear-demo": _nonlinear,
    "two-species-demo": _two_species,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kinstab", description="Kinetic adsorption stability experiments.")
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in ex.EXPERIMENTS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="flat 'key = value' file overriding defaults")
        s.add_argument("--out", type=Path, default=Path("."), help="output directory")
        s.add_argument("--format", choices=["csv"], default="csv")
        s.add_argument("--seed", type=int, default=0, help="seed for randomized demos")
        s.add_argument("--quiet", action="store_true")
    return p


def load_config(name: str, path: Path | None) -> ex.ExperimentConfig:
    cfg = ex.default_config(name)
    if path is None:
        return cfg.validate()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ex.parse_config(text, cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.experiment, args.config)
        outputs = RUNNERS[args.experiment](cfg, args.seed)
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ParameterError, DimensionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for fname, header, rows in outputs:
        if cfg.output and len(outputs) == 1:
            fname = cfg.output
        path = write_csv(args.out / fname, header, rows)
        if not args.quiet:
            print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
