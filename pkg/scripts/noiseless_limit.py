"""Balanced gain and loss with and without the Langevin noise.

With the physical noise the entanglement of the squeezed input dies within a
fraction of 1/kappa. Dropping the noise (noise_scale = 0) restores a periodic
E_N, at the price of states that violate the uncertainty relation. This script
prints both, plus the maxima spacing against pi / sqrt(G^2 - G_c^2).
"""

import math

import numpy as np

from gausspt.dynamics import TrajectoryGrid, propagate_rk4, tmsv_initial
from gausspt.observables import evolve_observables
from gausspt.params import SystemParams
from gausspt.reductions import death_time, local_maxima, period_estimate
from gausspt.spectrum import drift_matrix, noise_matrix


def summarize(G, scale, grid):
    p = SystemParams(s=1.0, coupling_G=G, squeeze_r=1.0)
    series = evolve_observables(p, grid, noise_scale=scale)
    cov = propagate_rk4(tmsv_initial(1.0), drift_matrix(p), noise_matrix(p, scale), grid)
    min_eig = min(cm.min_uncertainty_eig() for cm in cov.states)
    e = series.column("e_n")
    peaks = series.times[local_maxima(e)]
    return {
        "death_time": death_time(series),
        "period_estimate": period_estimate(series),
        "first_maxima": np.round(peaks[:4], 3).tolist(),
        "min_uncertainty_eig": min_eig,
    }


def main():
    grid = TrajectoryGrid(0.0, 20.0, 4000)
    for G in (1.5, 0.7):
        T = math.pi / math.sqrt(G * G - 0.25)
        print(f"G = {G:g}: pi/sqrt(G^2 - G_c^2) = {T:.4f}, half = {T / 2:.4f}")
        for scale in (1.0, 0.0):
            print(f"  noise_scale={scale:g}: {summarize(G, scale, grid)}")


if __name__ == "__main__":
    main()
