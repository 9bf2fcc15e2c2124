"""Iterations needed to reach ||w - v||^2 <= 1 for a range of initial penalties.

    python scripts/rho_sweep.py [--config configs/desk_n8.cfg] [--rho 1e-3,1e-2,1e-1,1] [--jobs 4]
"""
import argparse
import csv
from pathlib import Path

from admmto.cli import run_rho_sweep
from admmto.config import load_config


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default="configs/desk_n8.cfg")
    parser.add_argument("--rho", default="1e-4,1e-3,1e-2,1e-1,1")
    parser.add_argument("--out", default="out/rho_sweep")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    cfg = load_config(args.config, output_dir=args.out)
    run_rho_sweep(cfg, [float(r) for r in args.rho.split(",")], jobs=args.jobs)
    with open(Path(args.out) / "sweep.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"{'rho0':>10} {'iters':>6} {'rho_final/rho0':>15} {'rejections':>10}")
    for r in rows:
        print(f"{float(r['rho0']):>10.1e} {r['iterations_to_converge'] or '-':>6} "
              f"{r['rho_ratio'] or '-':>15} {r['rejections'] or '-':>10}")


if __name__ == "__main__":
    main()
