"""Command line entry points: single solves and initial-penalty sweeps.

    admmto solve <config> [--seed N] [--out DIR]
    admmto sweep <config> --rho 1e-3,1e-2,1e-1,1 [--seed N] [--out DIR] [--jobs K]
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .admm import AdmmProblem, IterationRecord, RunResult, initialize, run
from .config import ConfigError, SolverConfig, load_config
from .raster import rasterize, write_pgm

log = logging.getLogger("admmto")

SWEEP_FIELDS = ("rho0", "iterations_to_converge", "rho_final", "rho_ratio", "rejections", "converged",
                "failed", "error")


def write_history(path, history: list[IterationRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(IterationRecord.CSV_FIELDS)
        for rec in history:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in rec.row()])


def read_history(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _snapshot(problem: AdmmProblem, out: Path, j: int, v, w) -> None:
    write_pgm(out / f"v_{j:03d}.pgm", rasterize(problem.mesh, v))
    write_pgm(out / f"w_{j:03d}.pgm", rasterize(problem.mesh, w))


def solve_to_dir(config: SolverConfig) -> RunResult:
    """Run ADMM for ``config`` and write every output file into ``config.output_dir``."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config.to_text())
    problem = AdmmProblem(config)

    init = initialize(problem)
    _snapshot(problem, out, 0, init.v, init.w)

    def on_iteration(state, record):
        if record.j % config.snapshot_stride == 0:
            _snapshot(problem, out, record.j, state.v, state.w)

    result = run(problem, callback=on_iteration)
    last = result.state
    if last.j % config.snapshot_stride != 0:
        _snapshot(problem, out, last.j, last.v, last.w)

    write_history(out / "history.csv", result.history)
    np.savez_compressed(
        out / "iterates.npz",
        v=np.array([r.v for r in result.history]).reshape(-1, problem.mesh.n_elements),
        w=np.array([r.w for r in result.history]).reshape(-1, problem.mesh.n_elements),
        lam=np.array([r.lam for r in result.history]).reshape(-1, problem.mesh.n_elements),
        rho=np.array([r.rho for r in result.history]),
        v0=result.initial.v, w0=result.initial.w, tau0=result.initial.tau, rho0=result.initial.rho,
    )
    with open(out / "final_w.txt", "w") as fh:
        fh.write("# element value\n")
        for e, val in enumerate(last.w):
            fh.write(f"{e} {int(val)}\n")
    final = result.history[-1] if result.history else None
    objective = final.original_objective if final else problem.original_objective(last.w)
    (out / "summary.txt").write_text(
        f"converged={result.converged}\n"
        f"iterations={last.j}\n"
        f"final_residual={last.residual!r}\n"
        f"original_objective={objective!r}\n"
        f"tv_convention=original_objective uses 2 x (each adjacent pair once)\n"
        f"rho0={result.initial.rho!r}\n"
        f"rho_final={last.rho!r}\n"
        f"rho_ratio={result.rho_ratio!r}\n"
        f"rejections={result.rejections}\n"
        f"volume={int(last.w.sum())}/{problem.budget:g}\n"
        f"tol_inner={config.tol_inner!r}\n"
        f"seed={config.seed}\n"
    )
    return result


def run_single(config: SolverConfig) -> int:
    result = solve_to_dir(config)
    log.info("finished: converged=%s iterations=%d residual=%.3e", result.converged, result.state.j,
             result.state.residual)
    return 0 if result.converged else 1


def _sweep_one(config: SolverConfig) -> dict:
    row = dict.fromkeys(SWEEP_FIELDS, "")
    row.update(rho0=config.rho0, failed=0)
    try:
        result = solve_to_dir(config)
    except Exception as exc:  # recorded, sweep continues
        log.exception("sweep run with rho0=%g failed", config.rho0)
        row.update(failed=1, converged=0, error=str(exc).replace("\n", " "))
        return row
    row.update(
        iterations_to_converge=result.state.j if result.converged else "",
        rho_final=result.state.rho,
        rho_ratio=result.rho_ratio,
        rejections=result.rejections,
        converged=int(result.converged),
    )
    return row


def run_rho_sweep(config: SolverConfig, rho_list, jobs: int = 1, delta_tol: float = 1.0) -> int:
    """One full run per initial penalty, stopping at ``||w - v||^2 <= delta_tol``; writes sweep.csv."""
    rho_list = [float(r) for r in rho_list]
    if not rho_list or any(not (r > 0 and math.isfinite(r)) for r in rho_list):
        raise ValueError("rho list must be nonempty and strictly positive")
    root = Path(config.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    configs = [config.replace(rho0=r, delta_tol=delta_tol, output_dir=str(root / f"run_{k:02d}_rho_{r:g}"))
               for k, r in enumerate(rho_list)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, configs))
    else:
        rows = [_sweep_one(c) for c in configs]
    with open(root / "sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return 0 if all(r["converged"] == 1 for r in rows) else 1


def _parse_rho_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rho list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="admmto", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="log every outer iteration")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="key=value configuration file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory (overrides output_dir)")

    common(sub.add_parser("solve", help="single ADMM run"))
    sweep = sub.add_parser("sweep", help="iterations to reach ||w-v||^2 <= 1 for several initial penalties")
    common(sweep)
    sweep.add_argument("--rho", type=_parse_rho_list, required=True, help="comma separated rho0 values")
    sweep.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config, seed=args.seed, output_dir=args.out)
    except (ConfigError, OSError) as exc:
        print(f"admmto: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "solve":
            return run_single(config)
        return run_rho_sweep(config, args.rho, jobs=args.jobs)
    except OSError as exc:
        print(f"admmto: cannot write output: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
