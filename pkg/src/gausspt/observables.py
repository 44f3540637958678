"""Physical quantities read off a two-mode covariance matrix."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (OMEGA, CovarianceMatrix, NonPhysicalStateError, TrajectoryGrid,
                       propagate_closed_form, propagate_rk4, tmsv_initial)
from .params import SystemParams
from .spectrum import drift_matrix, noise_matrix
from .tables import SweepTable

log = logging.getLogger(__name__)

OCCUPANCY_REJECT = 1e-9
DISCRIMINANT_TOL = 1e-12
ANTIBUNCH_MIN_DENOM = 1e-12

OBSERVABLE_COLUMNS = ("t", "e_n", "antibunching", "n_p", "n_s")


@dataclass(frozen=True)
class SecondMoments:
    n_p: float
    n_s: float
    m_bc: complex
    m_bdc: complex


@dataclass(frozen=True)
class ObservableSample:
    t: float
    e_n: float
    antibunch: float | None  # None where the occupancy product vanishes
    n_p: float
    n_s: float


@dataclass
class ObservableSeries:
    params: SystemParams
    grid: TrajectoryGrid
    samples: list[ObservableSample] = field(default_factory=list)
    diverged_at: int | None = None

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def to_table(self) -> SweepTable:
        table = SweepTable(OBSERVABLE_COLUMNS)
        for s in self.samples:
            table.append((s.t, s.e_n, s.antibunch, s.n_p, s.n_s))
        return table


def _occupancy(x: float, which: str) -> float:
    if x < -OCCUPANCY_REJECT:
        raise NonPhysicalStateError(f"negative {which} occupancy {x:.3g}")
    return max(x, 0.0)


def mode_moments(w: CovarianceMatrix) -> SecondMoments:
    """Occupancies and cross-mode moments of the cavity ``c`` and resonator ``b``.

    Cross-mode operators commute, so the symmetrized cross entries of ``W`` give
    ``<cb>`` and ``<c^dag b>`` directly.
    """
    W = w.w
    n_p = _occupancy((W[0, 0] + W[1, 1] - 1.0) / 2.0, "photon")
    n_s = _occupancy((W[2, 2] + W[3, 3] - 1.0) / 2.0, "phonon")
    m_bc = complex(W[0, 2] - W[1, 3], W[0, 3] + W[1, 2]) / 2.0
    m_cdb = complex(W[0, 2] + W[1, 3], W[0, 3] - W[1, 2]) / 2.0
    return SecondMoments(n_p, n_s, m_bc, m_cdb.conjugate())


def _det2(m: np.ndarray) -> float:
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


_PT = np.diag([1.0, 1.0, 1.0, -1.0])
NEAR_DEGENERATE = 1e-4


def _symplectic_min_hermitian(w: np.ndarray) -> float:
    # eigenvalues of W^{1/2} (i Omega) W^{1/2} are +-nu_k; Hermitian, so well conditioned
    lam, v = np.linalg.eigh(w)
    if lam[0] <= 0:
        raise NonPhysicalStateError(f"covariance eigenvalue {lam[0]:.3g} is not positive")
    root = (v * np.sqrt(lam)) @ v.T
    ev = np.linalg.eigvalsh(root @ (1j * OMEGA) @ root)
    return float(ev[2])


def symplectic_min_pt(w: CovarianceMatrix) -> float:
    """Smaller symplectic eigenvalue of the partially transposed covariance matrix.

    Uses the invariant formula, except when the two eigenvalues nearly coincide:
    there the discriminant cancels to about sqrt(machine eps) and a Hermitian
    eigenproblem is solved instead.
    """
    # nu scales linearly with W; a power-of-two rescale is exact and keeps
    # sigma^2 and det W finite on strongly amplified states
    top = float(np.abs(w.w).max())
    scale = 2.0 ** math.frexp(top)[1] if top > 1.0 else 1.0
    W = w.w / scale
    sigma = _det2(W[:2, :2]) + _det2(W[2:, 2:]) - 2.0 * _det2(W[:2, 2:])
    det_w = float(np.linalg.det(W))
    if det_w <= 0:
        raise NonPhysicalStateError(f"covariance determinant {det_w:.3g} is not positive")
    disc = sigma * sigma - 4.0 * det_w
    if disc < 0:
        if disc < -DISCRIMINANT_TOL * max(1.0, sigma * sigma):
            raise NonPhysicalStateError(f"negative discriminant {disc:.3g}")
        disc = 0.0
    if disc < NEAR_DEGENERATE * sigma * sigma:
        return scale * _symplectic_min_hermitian(_PT @ W @ _PT)
    # (sigma - sqrt(disc)) / 2 rewritten to avoid cancellation for strong squeezing
    nu_sq = 2.0 * det_w / (sigma + math.sqrt(disc))
    return scale * math.sqrt(nu_sq)


def log_negativity(w: CovarianceMatrix) -> float:
    nu = symplectic_min_pt(w)
    return max(0.0, -math.log(2.0 * nu))


def antibunching(w: CovarianceMatrix) -> float | None:
    """Normalized inter-mode correlator ``(<b^dag c^dag b c> - n_s n_p) / (n_s n_p)``.

    The fourth moment uses Gaussian factorization for zero-mean states, which
    leaves ``(|<bc>|^2 + |<b^dag c>|^2) / (n_p n_s)``. Returns ``None`` when the
    occupancy product is below 1e-12.
    """
    m = mode_moments(w)
    denom = m.n_p * m.n_s
    if denom <= ANTIBUNCH_MIN_DENOM:
        return None
    return (abs(m.m_bc) ** 2 + abs(m.m_bdc) ** 2) / denom


def wick_fourth_moment(w: CovarianceMatrix) -> float:
    """``<b^dag c^dag b c>`` of a zero-mean Gaussian state."""
    m = mode_moments(w)
    return m.n_p * m.n_s + abs(m.m_bc) ** 2 + abs(m.m_bdc) ** 2


def sample(t: float, w: CovarianceMatrix) -> ObservableSample:
    m = mode_moments(w)
    return ObservableSample(float(t), log_negativity(w), antibunching(w), m.n_p, m.n_s)


def evolve_observables(p: SystemParams, grid: TrajectoryGrid, noise_scale: float = 1.0,
                       spot_check_tol: float = 1e-6) -> ObservableSeries:
    """Propagate the squeezed initial state with RK4 and read out every grid point.

    The final state is compared against the exact propagator; a mismatch above
    ``spot_check_tol`` (relative to the largest entry) is logged as a warning.
    ``noise_scale`` is passed to :func:`noise_matrix`.
    """
    a, z = drift_matrix(p), noise_matrix(p, noise_scale)
    w0 = tmsv_initial(p.squeeze_r)
    cov = propagate_rk4(w0, a, z, grid)
    out = ObservableSeries(p, grid, diverged_at=cov.diverged_at)
    for t, w in zip(cov.times, cov.states):
        out.samples.append(sample(t, w))
    if cov.diverged_at is None:
        exact = propagate_closed_form(w0, a, z, grid.t_end - grid.t0).w
        last = cov.states[-1].w
        err = np.max(np.abs(last - exact)) / np.max(np.abs(exact))
        if err > spot_check_tol:
            log.warning("RK4 deviates from exact propagator by %.3g at t=%g", err, grid.t_end)
    else:
        log.info("trajectory diverged at step %d", cov.diverged_at)
    return out
