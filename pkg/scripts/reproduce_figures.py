"""Write the data files of every figure preset into one directory.

    python3 scripts/reproduce_figures.py [outdir] [--plot-script]
"""

import argparse
import sys

from gausspt import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", nargs="?", default="figures")
    ap.add_argument("--plot-script", action="store_true")
    args = ap.parse_args()
    worst = 0
    for fig in cli.FIGURES:
        argv = ["figure", fig, "--out", args.outdir]
        if args.plot_script:
            argv.append("--plot-script")
        worst = max(worst, cli.main(argv))
    return worst


if __name__ == "__main__":
    sys.exit(main())
