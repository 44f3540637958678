"""Linear-dynamics matrices, supermode frequencies and PT-phase labels.

Quadrature ordering is ``u = (q1, p1, q2, p2)`` with mode 1 the lossy cavity
and mode 2 the amplified resonator. In the frame rotating at the common
resonance the noiseless equations are::

    dq1 = -kappa/2 q1 - G p2      dq2 = gamma/2 q2 - G p1
    dp1 = -kappa/2 p1 + G q2      dp2 = gamma/2 p2 + G q1
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .params import DispersiveInputs, SystemParams
from .tables import SweepTable

EP_TOLERANCE = 1e-12
DISPERSIVE_LIMIT = 0.1

SPECTRUM_COLUMNS = ("g_over_kappa", "re_omega_plus", "re_omega_minus",
                    "im_omega_plus", "im_omega_minus")


class DispersiveValidityWarning(UserWarning):
    pass


class Phase(enum.Enum):
    PT_SYMMETRIC = "PTSymmetric"
    BROKEN = "Broken"
    EXCEPTIONAL_POINT = "ExceptionalPoint"


@dataclass(frozen=True, eq=False)
class DriftMatrix:
    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)


@dataclass(frozen=True, eq=False)
class NoiseMatrix:
    z: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        if z.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {z.shape}")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class Spectrum:
    omega_plus: complex
    omega_minus: complex
    g_c: float
    phase: Phase | None


def dispersive_reduction(inputs: DispersiveInputs) -> tuple[float, float, float]:
    """Shifted frequencies and effective coupling after eliminating the qubit.

    Returns ``(omega_c0, omega_m0, G)``.
    """
    g, lam, dc, dm = inputs.g, inputs.lam, inputs.delta_c, inputs.delta_m
    if not (dc > 0 and dm > 0):
        raise ValueError("detunings must be positive")
    if abs(g) / dc > DISPERSIVE_LIMIT or abs(lam) / dm > DISPERSIVE_LIMIT:
        warnings.warn(
            f"outside dispersive regime: g/delta_c={abs(g) / dc:.3g}, "
            f"lambda/delta_m={abs(lam) / dm:.3g}", DispersiveValidityWarning, stacklevel=2)
    omega_c0 = inputs.omega_c - g * g / dc
    omega_m0 = inputs.omega_m - lam * lam / dm
    G = g * lam * (dc + dm) / (2.0 * dc * dm)
    return omega_c0, omega_m0, G


def drift_matrix(p: SystemParams) -> DriftMatrix:
    lk, gg, G = -p.kappa / 2.0, p.gamma / 2.0, p.coupling_G
    a = np.array([
        [lk, 0.0, 0.0, -G],
        [0.0, lk, G, 0.0],
        [0.0, -G, gg, 0.0],
        [G, 0.0, 0.0, gg],
    ])
    return DriftMatrix(a)


def noise_matrix(p: SystemParams, scale: float = 1.0) -> NoiseMatrix:
    """Symmetrized white-noise strengths: vacuum for the cavity, thermal for the resonator.

    ``scale`` multiplies the whole matrix. Anything below 1 no longer preserves
    the uncertainty relation; ``scale=0`` gives the noiseless coherent flow.
    """
    if scale < 0:
        raise ValueError(f"noise scale must be >= 0, got {scale}")
    mech = p.gamma * (p.n_th + 0.5)
    return NoiseMatrix(scale * np.diag([p.kappa / 2.0, p.kappa / 2.0, mech, mech]))


def eigenfrequencies(p: SystemParams) -> Spectrum:
    """Closed-form supermode frequencies ``i(gamma-kappa)/4 +- sqrt(G^2 - G_c^2)``.

    The square root is taken on the principal branch: a negative radicand
    gives ``+i sqrt(|.|)`` on ``omega_plus``. Phase labels are only assigned
    for balanced gain and loss; ``phase`` is ``None`` otherwise.
    """
    g_c = p.g_c
    shift = 1j * (p.gamma - p.kappa) / 4.0
    radicand = p.coupling_G ** 2 - g_c ** 2
    root = complex(math.sqrt(radicand), 0.0) if radicand >= 0 else complex(0.0, math.sqrt(-radicand))
    phase = None
    if p.balanced:
        if abs(p.coupling_G - g_c) <= EP_TOLERANCE * p.kappa:
            phase = Phase.EXCEPTIONAL_POINT
        elif p.coupling_G > g_c:
            phase = Phase.PT_SYMMETRIC
        else:
            phase = Phase.BROKEN
    return Spectrum(shift + root, shift - root, g_c, phase)


def _spectrum_row(p_template: SystemParams, ratio: float) -> tuple:
    sp = eigenfrequencies(p_template.with_(coupling_G=ratio * p_template.kappa))
    return (ratio, sp.omega_plus.real, sp.omega_minus.real,
            sp.omega_plus.imag, sp.omega_minus.imag)


def spectrum_sweep(p_template: SystemParams, g_over_kappa, threads: int | None = None) -> SweepTable:
    """Eigenfrequencies along a list of ``G / kappa`` values, one row each."""
    ratios = [float(x) for x in g_over_kappa]
    if not ratios:
        raise ValueError("empty coupling list")
    for x in ratios:
        if not math.isfinite(x):
            raise ValueError(f"non-finite coupling ratio {x}")
        if x < 0:
            raise ValueError(f"negative coupling ratio {x}")
    table = SweepTable(SPECTRUM_COLUMNS)
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(lambda x: _spectrum_row(p_template, x), ratios))
    else:
        rows = [_spectrum_row(p_template, x) for x in ratios]
    for row in rows:
        table.append(row)
    return table
