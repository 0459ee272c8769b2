"""Command line entry point for the experiment runner."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .bench import EXPERIMENTS, ExperimentConfig, run_experiment

log = logging.getLogger("spectralcd")


def parse_grid(text):
    """``"1,10,100"`` or ``"log:LO:HI:N"`` (exponents of ten) to a tuple of floats."""
    if text.startswith("log:"):
        _, lo, hi, n = text.split(":")
        return tuple(float(v) for v in np.logspace(float(lo), float(hi), int(n)))
    return tuple(float(v) for v in text.split(","))


def parse_ints(text):
    return tuple(int(v) for v in text.split(","))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spectralcd",
        description="Run time-spectral convection-diffusion experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--methods", type=lambda s: tuple(s.split(",")),
                       help="comma list, e.g. Galerkin,SUPG,VMS_GLS,ASU")
        p.add_argument("--beta", "--womersley", dest="second", type=parse_grid,
                       help="beta values (1D) or Womersley numbers (2D/3D)")
        p.add_argument("--alpha-grid", "--peclet-grid", dest="grid", type=parse_grid,
                       help="comma list or log:LO:HI:N")
        p.add_argument("--mesh-n", type=parse_ints,
                       help="elements per direction, axial layers, or refinement levels")
        p.add_argument("--tol", type=float)
        p.add_argument("--solver", choices=("gmres", "direct"))
        p.add_argument("--limiter", choices=("on", "off", "auto"), default="auto")
        p.add_argument("--out", help="output CSV path; a JSON summary is written beside it")
        p.add_argument("--seed", type=int, default=0, help="probe RNG seed")
        p.add_argument("--deterministic", action="store_true",
                       help="serial, fixed-order assembly (always the case here)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    mesh_n = args.mesh_n
    if mesh_n is not None and len(mesh_n) == 1 and args.experiment != "convergence":
        mesh_n = mesh_n[0]
    limiter = {"on": True, "off": False, "auto": None}[args.limiter]
    cfg = ExperimentConfig.default(
        args.experiment, methods=args.methods, grid=args.grid, second=args.second,
        mesh_n=mesh_n, tol=args.tol, solver=args.solver, out=args.out, seed=args.seed,
        deterministic=True, limiter=limiter)
    log.info("running %s", cfg.experiment)
    report = run_experiment(cfg)
    if cfg.out:
        path = report.write(cfg.out)
        log.info("wrote %s", path)
    else:
        for c in report.cells:
            print(",".join(str(v) for v in c.row().values()))
    if report.extra:
        print(json.dumps(report.extra, indent=2, default=str))
    return 0 if report.all_converged else 1


if __name__ == "__main__":
    sys.exit(main())
