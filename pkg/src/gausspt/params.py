"""System parameters and unit conventions.

All rates are measured in units of the cavity loss ``kappa`` (``kappa = 1`` by
default) and time in units of ``1/kappa``. The only function that touches SI
units is :func:`thermal_occupancy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.constants import hbar, k as k_B


@dataclass(frozen=True)
class SystemParams:
    """Rates and regime knobs of the gain/loss electromechanical pair.

    Mode 1 is the lossy cavity (energy loss ``kappa``), mode 2 the amplified
    mechanical resonator with gain ``gamma = s * kappa``.
    """

    kappa: float = 1.0
    s: float = 1.0
    coupling_G: float = 0.0
    n_th: float = 0.0
    squeeze_r: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "s", "coupling_G", "n_th", "squeeze_r"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.s < 0:
            raise ValueError(f"gain ratio s must be >= 0, got {self.s}")
        if self.coupling_G < 0:
            raise ValueError(f"coupling_G must be >= 0, got {self.coupling_G}")
        if self.n_th < 0:
            raise ValueError(f"n_th must be >= 0, got {self.n_th}")
        if self.squeeze_r < 0:
            raise ValueError(f"squeeze_r must be >= 0, got {self.squeeze_r}")

    @property
    def gamma(self) -> float:
        """Mechanical gain rate."""
        return self.s * self.kappa

    @property
    def g_c(self) -> float:
        """Critical (exceptional-point) coupling ``(gamma + kappa) / 4``."""
        return (self.gamma + self.kappa) / 4.0

    @property
    def balanced(self) -> bool:
        return self.s == 1.0

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def params_from_ratio(kappa: float = 1.0, s: float = 1.0, coupling_G: float = 0.0,
                      n_th: float = 0.0, squeeze_r: float = 0.0) -> SystemParams:
    return SystemParams(kappa=float(kappa), s=float(s), coupling_G=float(coupling_G),
                        n_th=float(n_th), squeeze_r=float(squeeze_r))


@dataclass(frozen=True)
class DispersiveInputs:
    """Bare couplings and detunings of the qubit-mediated setup (rad/s)."""

    g: float
    lam: float
    delta_c: float
    delta_m: float
    omega_c: float = 0.0
    omega_m: float = 0.0

    def __post_init__(self):
        if not (self.delta_c > 0 and self.delta_m > 0):
            raise ValueError(
                f"dispersive regime needs positive detunings, got "
                f"delta_c={self.delta_c}, delta_m={self.delta_m}")


def thermal_occupancy(omega_m0: float, temperature: float) -> float:
    """Bose-Einstein occupancy ``1 / (exp(hbar w / k_B T) - 1)``.

    ``omega_m0`` in rad/s, ``temperature`` in kelvin. Returns 0 at ``T = 0``.
    """
    if not omega_m0 > 0:
        raise ValueError(f"omega_m0 must be positive, got {omega_m0}")
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    x = hbar * omega_m0 / (k_B * temperature)
    if x > 700.0:
        # expm1 overflows; 1/(e^x - 1) == e^-x to double precision here
        return math.exp(-x)
    return 1.0 / math.expm1(x)
