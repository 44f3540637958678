import math

import mpmath
import pytest
from hypothesis import given, strategies as st
from scipy.constants import hbar, k as k_B

from gausspt.params import DispersiveInputs, SystemParams, params_from_ratio, thermal_occupancy


def bose_mp(omega, temperature):
    with mpmath.workdps(50):
        x = mpmath.mpf(hbar) * mpmath.mpf(omega) / (mpmath.mpf(k_B) * mpmath.mpf(temperature))
        return float(1 / (mpmath.exp(x) - 1))


def test_zero_temperature():
    assert thermal_occupancy(2 * math.pi * 5e6, 0.0) == 0.0


def test_unit_occupancy_at_ln2():
    temperature = 0.02
    omega = math.log(2) * k_B * temperature / hbar
    assert thermal_occupancy(omega, temperature) == pytest.approx(1.0, rel=1e-14)


def test_ten_mhz_at_ten_mk_matches_high_precision():
    omega, temperature = 2 * math.pi * 10e6, 10e-3
    n = thermal_occupancy(omega, temperature)
    assert n == pytest.approx(bose_mp(omega, temperature), rel=1e-13)
    assert 20.2 < n < 20.4


@pytest.mark.parametrize("omega", [0.0, -1.0])
def test_rejects_nonpositive_frequency(omega):
    with pytest.raises(ValueError):
        thermal_occupancy(omega, 0.1)


def test_deep_quantum_limit_does_not_overflow():
    assert thermal_occupancy(1e12, 1e-6) == 0.0


def test_rejects_negative_temperature():
    with pytest.raises(ValueError):
        thermal_occupancy(1e6, -1.0)


@given(st.floats(1e5, 1e10), st.floats(1e-3, 1.0), st.floats(1.01, 2.0))
def test_occupancy_monotone(omega, temperature, factor):
    assert thermal_occupancy(omega * factor, temperature) < thermal_occupancy(omega, temperature)
    assert thermal_occupancy(omega, temperature * factor) > thermal_occupancy(omega, temperature)


def test_fig3_parameters():
    p = params_from_ratio(1, 1, 1.5, 0, 1)
    assert p.gamma == 1.0 and p.coupling_G == 1.5 and p.squeeze_r == 1.0


def test_fig5_parameters():
    p = params_from_ratio(1, 2, 2.3, 0, 1)
    assert p.gamma == 2.0
    assert p.g_c == 0.75


def test_passive_edge():
    p = params_from_ratio(1, 0, 0.5, 0, 0)
    assert p.gamma == 0.0


@pytest.mark.parametrize("kwargs", [
    dict(kappa=0.0), dict(kappa=-1.0), dict(s=-0.1), dict(n_th=-1.0),
    dict(squeeze_r=-0.5), dict(coupling_G=-1.0), dict(kappa=math.nan),
])
def test_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        params_from_ratio(**kwargs)


@given(st.just(0.0) | st.floats(1e-300, 10), st.integers(-6, 6))
def test_gain_ratio_round_trip_power_of_two_kappa(s, e):
    kappa = 2.0 ** e
    assert params_from_ratio(kappa, s).gamma / kappa == s


@given(st.floats(1e-3, 1e3), st.just(0.0) | st.floats(1e-300, 10))
def test_gain_ratio_round_trip(kappa, s):
    p = params_from_ratio(kappa, s)
    assert p.gamma / p.kappa == pytest.approx(s, rel=4e-16, abs=0)


def test_params_are_immutable():
    p = SystemParams()
    with pytest.raises(AttributeError):
        p.kappa = 2.0


def test_dispersive_inputs_reject_nonpositive_detuning():
    with pytest.raises(ValueError):
        DispersiveInputs(g=1.0, lam=1.0, delta_c=0.0, delta_m=1.0)
    with pytest.raises(ValueError):
        DispersiveInputs(g=1.0, lam=1.0, delta_c=1.0, delta_m=-2.0)
