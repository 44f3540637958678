"""Entanglement death time along the s = 2 line, for two squeezing strengths.

Prints a table of death_time(G, r) so the effect of moving G towards or away
from the exceptional point (G_c = 0.75 kappa) can be read off directly.
"""

import argparse

import numpy as np

from gausspt.dynamics import TrajectoryGrid
from gausspt.observables import evolve_observables
from gausspt.params import SystemParams
from gausspt.reductions import death_time


def main():
    ap = argparse.ArgumentParser(description="death time scan for unbalanced gain")
    ap.add_argument("--s", type=float, default=2.0)
    ap.add_argument("--g-min", type=float, default=0.5)
    ap.add_argument("--g-max", type=float, default=3.0)
    ap.add_argument("--count", type=int, default=26)
    ap.add_argument("--r", type=float, nargs="+", default=[1.0, 2.0])
    ap.add_argument("--t-end", type=float, default=5.0)
    args = ap.parse_args()

    grid = TrajectoryGrid(0.0, args.t_end, int(round(args.t_end / 0.005)))
    g_c = (args.s + 1) / 4
    print(f"# s = {args.s:g}, G_c = {g_c:g}")
    print("G," + ",".join(f"t_death_r{r:g}" for r in args.r))
    for G in np.linspace(args.g_min, args.g_max, args.count):
        cells = []
        for r in args.r:
            series = evolve_observables(SystemParams(s=args.s, coupling_G=G, squeeze_r=r), grid)
            td = death_time(series)
            cells.append("" if td is None else f"{td:.3f}")
        print(f"{G:.3f}," + ",".join(cells))


if __name__ == "__main__":
    main()
