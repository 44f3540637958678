"""Independent checks used by the test suite and ``gausspt verify``.

Two brute-force routes that share nothing with the main pipeline beyond the
drift and noise matrices:

* a Monte Carlo ensemble of the classical linear SDE ``du = A u dt + dxi``
  (Euler-Maruyama), whose second moments obey the same Lyapunov equation;
* direct summation over the Fock expansion of the two-mode squeezed vacuum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import DIVERGENCE_LIMIT, DivergenceError, TrajectoryGrid, tmsv_initial
from .params import SystemParams
from .spectrum import drift_matrix, noise_matrix
from .tables import SweepTable

BLOCK_SIZE = 8192
MAX_SDE_STEP = 0.005
DEFAULT_SDE_STEP = 0.001
TAIL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EnsembleEstimate:
    times: np.ndarray
    mean_cm: np.ndarray  # (n_points, 4, 4)
    std_err: np.ndarray  # (n_points, 4, 4)
    n_traj: int
    seed: int

    def to_table(self) -> SweepTable:
        idx = [(i, j) for i in range(4) for j in range(i, 4)]
        names = [f"w{i + 1}{j + 1}" for i, j in idx]
        table = SweepTable(("t",) + tuple(names) + tuple("std_err_" + n for n in names))
        for k, t in enumerate(self.times):
            table.append([t] + [self.mean_cm[k, i, j] for i, j in idx]
                         + [self.std_err[k, i, j] for i, j in idx])
        return table


def _run_block(child: np.random.SeedSequence, n: int, A: np.ndarray, Z: np.ndarray,
               chol0: np.ndarray, h: float, substeps: int, n_points: int):
    """Sums of ``u_i u_j`` and their squares at each sample point for one block."""
    rng = np.random.Generator(np.random.PCG64(child))
    u = rng.standard_normal((n, 4)) @ chol0.T
    noise_sd = np.sqrt(np.diag(Z) * h)
    step = np.eye(4) + h * A
    s1 = np.zeros((n_points, 4, 4))
    s2 = np.zeros((n_points, 4, 4))

    def accumulate(k):
        prod = u[:, :, None] * u[:, None, :]
        s1[k] = prod.sum(axis=0)
        s2[k] = (prod * prod).sum(axis=0)

    accumulate(0)
    for k in range(1, n_points):
        for _ in range(substeps):
            u = u @ step.T + rng.standard_normal((n, 4)) * noise_sd
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) ** 2 > DIVERGENCE_LIMIT:
            raise DivergenceError(f"SDE ensemble diverged before sample {k}")
        accumulate(k)
    return s1, s2


def sde_ensemble(p: SystemParams, grid: TrajectoryGrid, n_traj: int, seed: int,
                 h: float = DEFAULT_SDE_STEP, threads: int | None = None) -> EnsembleEstimate:
    """Empirical covariance of ``n_traj`` Euler-Maruyama trajectories at each grid point.

    Trajectories are grouped in fixed blocks of ``BLOCK_SIZE``; block ``b`` draws
    from the ``b``-th child of ``SeedSequence(seed)``, so the estimate is
    identical for any thread count. The integration step ``h`` is refined so
    that it divides the grid spacing.
    """
    if n_traj < 100:
        raise ValueError(f"n_traj must be >= 100, got {n_traj}")
    if not 0 < h <= MAX_SDE_STEP:
        raise ValueError(f"SDE step must lie in (0, {MAX_SDE_STEP}], got {h}")
    substeps = max(1, math.ceil(grid.step / h - 1e-9))
    h_eff = grid.step / substeps
    A = drift_matrix(p).a
    Z = noise_matrix(p).z
    chol0 = np.linalg.cholesky(tmsv_initial(p.squeeze_r).w)
    n_points = grid.n_steps + 1

    sizes = [BLOCK_SIZE] * (n_traj // BLOCK_SIZE)
    if n_traj % BLOCK_SIZE:
        sizes.append(n_traj % BLOCK_SIZE)
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def work(b):
        return _run_block(children[b], sizes[b], A, Z, chol0, h_eff, substeps, n_points)

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(b) for b in range(len(sizes))]

    # summed in block order, independent of scheduling
    s1 = np.zeros((n_points, 4, 4))
    s2 = np.zeros((n_points, 4, 4))
    for a1, a2 in parts:
        s1 += a1
        s2 += a2
    mean = s1 / n_traj
    var = (s2 - n_traj * mean ** 2) / (n_traj - 1)
    std_err = np.sqrt(np.maximum(var, 0.0) / n_traj)
    return EnsembleEstimate(grid.times, mean, std_err, n_traj, seed)


@dataclass(frozen=True)
class FockMoments:
    n: float
    m_bc: float
    fourth: float
    cutoff: int
    truncation_error: float

    @property
    def antibunching(self) -> float:
        return (self.fourth - self.n * self.n) / (self.n * self.n)


def _tail_bound(x: float, cutoff: int) -> float:
    """Upper bound on ``sum_{n > cutoff} (n+1)^2 (1 - x) x^n``.

    Covers the neglected probability mass and the largest moment summed.
    """
    if x == 0.0:
        return 0.0
    m = cutoff + 1
    rho = ((m + 2) / (m + 1)) ** 2 * x
    if rho >= 1.0:
        return math.inf
    first = (m + 1) ** 2 * (1.0 - x) * x ** m
    return first / (1.0 - rho)


def sufficient_cutoff(squeeze_r: float, tol: float = 1e-13) -> int:
    x = math.tanh(squeeze_r) ** 2
    cutoff = 10
    while _tail_bound(x, cutoff) > tol:
        cutoff += 10
    return cutoff


def fock_tmsv_moments(squeeze_r: float, cutoff: int | None = None) -> FockMoments:
    """Moments of ``sech r * sum_n tanh(r)^n |n, n>`` by direct summation.

    ``cutoff=None`` picks the smallest multiple of ten whose tail bound is
    below 1e-13. An explicit cutoff whose tail bound exceeds 1e-10 is rejected.
    """
    if squeeze_r < 0:
        raise ValueError(f"squeeze_r must be >= 0, got {squeeze_r}")
    if cutoff is None:
        cutoff = sufficient_cutoff(squeeze_r)
    if cutoff < 10:
        raise ValueError(f"cutoff must be >= 10, got {cutoff}")
    x = math.tanh(squeeze_r) ** 2
    err = _tail_bound(x, cutoff)
    if err > TAIL_TOL:
        raise ValueError(f"cutoff {cutoff} too small for r={squeeze_r}: tail bound {err:.3g}")

    sech = 1.0 / math.cosh(squeeze_r)
    th = math.tanh(squeeze_r)
    amps = [sech * th ** k for k in range(cutoff + 1)]
    probs = [a * a for a in amps]
    n_mean = math.fsum(k * probs[k] for k in range(cutoff + 1))
    # b c |k, k> = k |k-1, k-1>
    m_bc = math.fsum(k * amps[k - 1] * amps[k] for k in range(1, cutoff + 1))
    fourth = math.fsum(k * k * probs[k] for k in range(cutoff + 1))
    return FockMoments(n_mean, m_bc, fourth, cutoff, err)


def fraction_within(estimate: EnsembleEstimate, reference: np.ndarray, k_sigma: float = 3.0,
                    skip_first: bool = False) -> float:
    """Share of upper-triangle entries with ``|mean - reference| <= k_sigma * std_err``."""
    iu = np.triu_indices(4)
    start = 1 if skip_first else 0
    diff = np.abs(estimate.mean_cm - reference)[start:, iu[0], iu[1]]
    se = estimate.std_err[start:, iu[0], iu[1]]
    return float(np.mean(diff <= k_sigma * se))

