"""PFR vs hybrid iteration percentiles over the sigma grid.

Runs the geometric simulation for the full grid in D = 1 and D = 2, then a
full-run spot check at sigma = 10 to compare against it.
"""

import argparse
import sys
from pathlib import Path

from chansim.cli import main


def run(out: Path, trials: int) -> int:
    for dim in (1, 2):
        code = main(["-v", "gaussian", "--dim", str(dim), "--trials", str(trials), "--out", str(out)])
        if code:
            return code
    return main(["-v", "gaussian", "--sigma-grid", "10", "--mode", "full", "--trials", str(trials),
                 "--out", str(out / "full")])


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--trials", type=int, default=10_000)
    args = parser.parse_args()
    sys.exit(run(args.out, args.trials))
