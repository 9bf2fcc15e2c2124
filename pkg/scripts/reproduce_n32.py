"""Full-size heat-sink run (n=32) and a coarse text rendering of the final design.

    python scripts/reproduce_n32.py [--config configs/heatsink_n32.cfg] [--out DIR]
"""
import argparse
import logging

from admmto.cli import solve_to_dir
from admmto.config import load_config
from admmto.mesh import build_unit_square_mesh
from admmto.raster import element_at_pixels


def ascii_design(n, w, scale=1):
    idx = element_at_pixels(build_unit_square_mesh(n), scale)
    return "\n".join("".join("#" if w[e] else "." for e in row) for row in idx)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default="configs/heatsink_n32.cfg")
    parser.add_argument("--out", default=None)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = load_config(args.config, output_dir=args.out)
    result = solve_to_dir(cfg)
    w = result.state.w
    print(ascii_design(cfg.n, w))
    print(f"converged={result.converged} iterations={result.state.j} residual={result.state.residual:.3e}")
    print(f"volume {int(w.sum())} / {cfg.budget:g}, rho ratio {result.rho_ratio:g}")
    if result.history:
        print(f"objective {result.history[-1].original_objective:.6e}")
    print(f"outputs in {cfg.output_dir}")


if __name__ == "__main__":
    main()
