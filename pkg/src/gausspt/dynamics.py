"""Covariance-matrix construction and Lyapunov propagation.

The covariance matrix holds symmetrized second moments of
``u = (q1, p1, q2, p2)`` with ``q = (a + a^dag)/sqrt(2)`` and
``p = (a - a^dag)/(i sqrt(2))``, so the vacuum is ``I/2``. Its evolution is

    dW/dt = A W + W A^T + Z

which is solved two ways: exactly through an augmented matrix exponential,
and by fixed-step classical RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .spectrum import DriftMatrix, NoiseMatrix
from .tables import SweepTable

DIVERGENCE_LIMIT = 1e100
PHYSICALITY_TOL = 1e-9

# symplectic form, one [[0, 1], [-1, 0]] block per mode
OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))

UPPER = [(i, j) for i in range(4) for j in range(i, 4)]
COVARIANCE_COLUMNS = ("t",) + tuple(f"w{i + 1}{j + 1}" for i, j in UPPER)


class DivergenceError(ArithmeticError):
    """A covariance entry grew past the overflow guard."""


class NonPhysicalStateError(ValueError):
    pass


def _sym(w: np.ndarray) -> np.ndarray:
    return 0.5 * (w + w.T)


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {w.shape}")
        w = _sym(w)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def vacuum(cls) -> "CovarianceMatrix":
        return cls(0.5 * np.eye(4))

    @property
    def block_a(self) -> np.ndarray:
        return self.w[:2, :2]

    @property
    def block_b(self) -> np.ndarray:
        return self.w[2:, 2:]

    @property
    def block_ab(self) -> np.ndarray:
        return self.w[:2, 2:]

    def min_uncertainty_eig(self) -> float:
        """Smallest eigenvalue of ``W + i Omega / 2``; negative means unphysical."""
        return float(np.linalg.eigvalsh(self.w + 0.5j * OMEGA)[0])

    def is_physical(self, tol: float = PHYSICALITY_TOL) -> bool:
        return self.min_uncertainty_eig() >= -tol

    def swapped(self) -> "CovarianceMatrix":
        """Exchange the two mode blocks."""
        perm = [2, 3, 0, 1]
        return CovarianceMatrix(self.w[np.ix_(perm, perm)])

    def upper(self) -> tuple[float, ...]:
        return tuple(float(self.w[i, j]) for i, j in UPPER)


@dataclass(frozen=True)
class TrajectoryGrid:
    t0: float = 0.0
    t_end: float = 20.0
    n_steps: int = 4000

    def __post_init__(self):
        if not isinstance(self.n_steps, (int, np.integer)) or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not (self.t0 >= 0 and self.t_end > self.t0 and math.isfinite(self.t_end)):
            raise ValueError(f"need t_end > t0 >= 0, got t0={self.t0}, t_end={self.t_end}")

    @property
    def step(self) -> float:
        return (self.t_end - self.t0) / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.step * np.arange(self.n_steps + 1)

    @classmethod
    def with_step(cls, t_end: float, h: float, t0: float = 0.0) -> "TrajectoryGrid":
        return cls(t0, t_end, int(round((t_end - t0) / h)))


@dataclass
class CovarianceSeries:
    grid: TrajectoryGrid
    states: list[CovarianceMatrix] = field(default_factory=list)
    diverged_at: int | None = None

    @property
    def times(self) -> np.ndarray:
        return self.grid.times[: len(self.states)]

    def to_table(self) -> SweepTable:
        table = SweepTable(COVARIANCE_COLUMNS)
        for t, cm in zip(self.times, self.states):
            table.append((float(t),) + cm.upper())
        return table


def tmsv_initial(squeeze_r: float) -> CovarianceMatrix:
    """Two-mode squeezed vacuum generated by ``exp[r (c^dag b^dag - c b)]``."""
    if squeeze_r < 0:
        raise ValueError(f"squeeze_r must be >= 0, got {squeeze_r}")
    c = math.cosh(2 * squeeze_r) / 2
    s = math.sinh(2 * squeeze_r) / 2
    return CovarianceMatrix(np.array([
        [c, 0.0, s, 0.0],
        [0.0, c, 0.0, -s],
        [s, 0.0, c, 0.0],
        [0.0, -s, 0.0, c],
    ]))


def _check(w: np.ndarray) -> None:
    if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > DIVERGENCE_LIMIT:
        raise DivergenceError("covariance entry exceeded divergence guard")


def lyapunov_propagators(a: DriftMatrix, z: NoiseMatrix, t: float) -> tuple[np.ndarray, np.ndarray]:
    """``(exp(A t), Q(t))`` with ``Q(t) = int_0^t exp(A s) Z exp(A^T s) ds``.

    Uses the block exponential of ``[[A, Z], [0, -A^T]] t``; the upper-right
    block times ``exp(A t)^T`` is the noise integral. Valid at the
    exceptional point where ``A`` is defective.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    A, Z = a.a, z.z
    m = np.zeros((8, 8))
    m[:4, :4] = A
    m[:4, 4:] = Z
    m[4:, 4:] = -A.T
    e = expm(m * t)
    f = e[:4, :4]
    q = e[:4, 4:] @ f.T
    return f, _sym(q)


def propagate_closed_form(w0: CovarianceMatrix, a: DriftMatrix, z: NoiseMatrix,
                          t: float) -> CovarianceMatrix:
    if t == 0:
        return w0
    f, q = lyapunov_propagators(a, z, t)
    w = f @ w0.w @ f.T + q
    _check(w)
    return CovarianceMatrix(w)


def propagate_closed_form_series(w0: CovarianceMatrix, a: DriftMatrix, z: NoiseMatrix,
                                 grid: TrajectoryGrid) -> CovarianceSeries:
    """Exact solution on every grid point, ``w0`` being the state at ``grid.t0``.

    Steps with the one-step propagator, so each point carries the rounding of
    the previous ones; use :func:`propagate_closed_form` for a single time.
    """
    f, q = lyapunov_propagators(a, z, grid.step)
    w = w0.w
    series = CovarianceSeries(grid, [w0])
    for k in range(1, grid.n_steps + 1):
        w = _sym(f @ w @ f.T + q)
        try:
            _check(w)
        except DivergenceError:
            series.diverged_at = k
            break
        series.states.append(CovarianceMatrix(w))
    return series


def propagate_rk4(w0: CovarianceMatrix, a: DriftMatrix, z: NoiseMatrix,
                  grid: TrajectoryGrid) -> CovarianceSeries:
    """Classical fixed-step RK4 on the Lyapunov equation.

    ``w0`` is taken as the state at ``grid.t0``. Integration stops at the first
    step that trips the divergence guard and records its index.
    """
    if grid.n_steps < 1:
        raise ValueError("n_steps must be positive")
    A, Z = a.a, z.z
    h = grid.step

    def rhs(w):
        aw = A @ w
        return aw + aw.T + Z

    w = w0.w.copy()
    series = CovarianceSeries(grid, [w0])
    for k in range(1, grid.n_steps + 1):
        k1 = rhs(w)
        k2 = rhs(w + 0.5 * h * k1)
        k3 = rhs(w + 0.5 * h * k2)
        k4 = rhs(w + h * k3)
        w = _sym(w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > DIVERGENCE_LIMIT:
            series.diverged_at = k
            break
        series.states.append(CovarianceMatrix(w))
    return series
