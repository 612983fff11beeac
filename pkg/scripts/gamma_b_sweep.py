"""Plateau of the seed-mean suboptimality for each synthetic gamma_b config.

    python3 scripts/gamma_b_sweep.py configs/synthetic_gamma_b_*.ini [--jobs N]

Prints one row per config: gamma_b, plateau (mean over the second half of the
recorded points) and the strongly convex neighborhood 2 gamma_b sigma^2 / (mu alpha).
"""

import argparse
from pathlib import Path

import numpy as np

from spsgd.analysis import ensemble_quantity
from spsgd.cli import bound_spec, execute, prepare
from spsgd.config import parse_config


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("configs", nargs="+", type=Path)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()
    print(f"{'gamma_b':>8} {'plateau':>12} {'neighborhood':>13}")
    for path in args.configs:
        cfg = parse_config(path.read_text(encoding="utf-8"))
        prep = prepare(cfg)
        spec = bound_spec(cfg, prep)
        k = prep.constants
        _, mean = ensemble_quantity(execute(prep, cfg.seeds, args.jobs), "suboptimality", k.f_star)
        plateau = float(np.mean(mean[len(mean) // 2:]))
        neighborhood = 2 * spec.gamma_b * k.sigma_sq / (k.mu * spec.alpha)
        print(f"{spec.gamma_b:8g} {plateau:12.4e} {neighborhood:13.4e}")


if __name__ == "__main__":
    main()
