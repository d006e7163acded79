"""Desk-scale categorical study; writes ``categorical_<alg>.dat`` tables.

    python scripts/run_categorical.py --out results
    python scripts/run_categorical.py --full-scale --out results/full
"""

import sys

from chansim.cli import main

if __name__ == "__main__":
    sys.exit(main(["-v", "categorical", *sys.argv[1:]]))
