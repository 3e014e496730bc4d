#!/usr/bin/env python3
"""Regenerate the three shipped sweep tables as CSV files.

fig2: Werner family, consonance (closed form + optimizer) vs discord,
      concurrence and EoF on a in [0, 1].
fig3: Werner family, the consonance-minus-concurrence gap on a dense grid.
fig4: qubit-qutrit family along gamma with the third weight held at 0.07.

The optimizer-backed columns use a fuller budget than the test suite;
expect a few minutes for fig2 and fig4.
"""

import argparse
import sys
import time
from pathlib import Path

from consonance.cli import RECIPES, run_sweep
from consonance.optimizer import OptimizerConfig, Preset


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results"),
                    help="directory for the CSV files (default: results/)")
    ap.add_argument("--recipes", nargs="+", choices=sorted(RECIPES),
                    default=sorted(RECIPES))
    ap.add_argument("--points", type=int, default=None,
                    help="override the per-recipe default grid size")
    ap.add_argument("--restarts", type=int, default=16)
    ap.add_argument("--max-evals", type=int, default=12000)
    ap.add_argument("--seed", type=int, default=0)
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    config = OptimizerConfig(preset=Preset(), restarts=args.restarts,
                             seed=args.seed, max_evals=args.max_evals)
    for name in args.recipes:
        maker = RECIPES[name]
        spec = maker(args.points) if args.points else maker()
        t0 = time.perf_counter()
        text = run_sweep(spec, config, args.seed)
        path = args.out_dir / f"{name}.csv"
        path.write_text(text)
        rows = sum(1 for line in text.splitlines() if not line.startswith("#")) - 1
        print(f"{path}  ({rows} rows, {time.perf_counter() - t0:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
