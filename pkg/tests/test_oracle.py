import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gausspt.dynamics import TrajectoryGrid, propagate_closed_form_series, tmsv_initial
from gausspt.observables import antibunching, wick_fourth_moment
from gausspt.oracle import (BLOCK_SIZE, fock_tmsv_moments, fraction_within, sde_ensemble,
                            sufficient_cutoff)
from gausspt.params import SystemParams
from gausspt.spectrum import drift_matrix, noise_matrix


def exact_series(p, grid):
    series = propagate_closed_form_series(tmsv_initial(p.squeeze_r), drift_matrix(p),
                                          noise_matrix(p), grid)
    return np.array([cm.w for cm in series.states])


# ------------------------------------------------------------ SDE ensemble

def test_passive_vacuum_is_stationary():
    p = SystemParams(s=0.0, coupling_G=0.0, squeeze_r=0.0)
    grid = TrajectoryGrid(0, 1, 10)
    est = sde_ensemble(p, grid, 20000, seed=5)
    ref = np.broadcast_to(0.5 * np.eye(4), est.mean_cm.shape)
    assert fraction_within(est, ref) >= 0.99
    assert np.abs(est.mean_cm - ref).max() < 0.05


def test_balanced_matches_closed_form(balanced):
    grid = TrajectoryGrid(0, 1, 10)
    est = sde_ensemble(balanced, grid, 30000, seed=11)
    assert fraction_within(est, exact_series(balanced, grid)) >= 0.99


def test_unbalanced_photon_growth(unbalanced):
    grid = TrajectoryGrid(0, 1, 10)
    est = sde_ensemble(unbalanced, grid, 20000, seed=3)
    ref = exact_series(unbalanced, grid)
    for i in (0, 1):
        diff = np.abs(est.mean_cm[:, i, i] - ref[:, i, i])
        assert np.mean(diff <= 3 * est.std_err[:, i, i]) >= 0.9
    n_p = (est.mean_cm[:, 0, 0] + est.mean_cm[:, 1, 1] - 1) / 2
    n_p_ref = (ref[:, 0, 0] + ref[:, 1, 1] - 1) / 2
    assert n_p[-1] == pytest.approx(n_p_ref[-1], rel=0.05)


def test_seed_reproducible_and_thread_independent(balanced):
    grid = TrajectoryGrid(0, 0.2, 4)
    n = BLOCK_SIZE + 500   # two blocks, second one partial
    a = sde_ensemble(balanced, grid, n, seed=42)
    b = sde_ensemble(balanced, grid, n, seed=42, threads=2)
    c = sde_ensemble(balanced, grid, n, seed=43)
    assert np.array_equal(a.mean_cm, b.mean_cm)
    assert np.array_equal(a.std_err, b.std_err)
    assert not np.array_equal(a.mean_cm, c.mean_cm)
    assert (a.n_traj, a.seed) == (n, 42)


def test_first_block_reproducible_alone(balanced):
    # a block's stream does not depend on how many blocks follow it
    grid = TrajectoryGrid(0, 0.1, 2)
    one = sde_ensemble(balanced, grid, BLOCK_SIZE, seed=9)
    two = sde_ensemble(balanced, grid, 2 * BLOCK_SIZE, seed=9)
    assert not np.array_equal(one.mean_cm, two.mean_cm)
    three = sde_ensemble(balanced, grid, BLOCK_SIZE, seed=9)
    assert np.array_equal(one.mean_cm, three.mean_cm)


def test_std_err_positive(balanced):
    est = sde_ensemble(balanced, TrajectoryGrid(0, 0.5, 5), 200, seed=1)
    assert np.all(est.std_err > 0)
    assert est.mean_cm.shape == (6, 4, 4)
    assert np.array_equal(est.mean_cm, np.swapaxes(est.mean_cm, 1, 2))


def test_sde_validation(balanced):
    grid = TrajectoryGrid(0, 0.1, 2)
    with pytest.raises(ValueError):
        sde_ensemble(balanced, grid, 99, seed=1)
    with pytest.raises(ValueError):
        sde_ensemble(balanced, grid, 1000, seed=1, h=0.01)


def test_ensemble_table_columns(balanced):
    table = sde_ensemble(balanced, TrajectoryGrid(0, 0.1, 2), 200, seed=1).to_table()
    assert table.columns[:2] == ("t", "w11")
    assert table.columns[11] == "std_err_w11"
    assert len(table.columns) == 21


# ------------------------------------------------------------ Fock sums

def test_fock_vacuum():
    m = fock_tmsv_moments(0.0, 10)
    assert (m.n, m.m_bc, m.fourth, m.truncation_error) == (0.0, 0.0, 0.0, 0.0)


def test_fock_r1_cutoff60():
    m = fock_tmsv_moments(1.0, 60)
    assert m.n == pytest.approx(1.3810978455418157, rel=1e-10)
    assert m.antibunching == pytest.approx(1 / math.tanh(1) ** 2, rel=1e-9)
    assert m.truncation_error < 1e-10


def test_fock_r2_needs_more_than_120_levels():
    with pytest.raises(ValueError, match="too small"):
        fock_tmsv_moments(2.0, 120)
    m = fock_tmsv_moments(2.0)
    assert m.cutoff > 120
    assert m.n == pytest.approx(math.sinh(2) ** 2, rel=1e-12)
    assert m.n == pytest.approx(13.1541, abs=1e-4)
    ratio = m.n / fock_tmsv_moments(1.0).n
    assert ratio == pytest.approx(9.5244, abs=1e-4)
    assert 9 <= ratio <= 10.5


def test_fock_validation():
    with pytest.raises(ValueError):
        fock_tmsv_moments(-1.0)
    with pytest.raises(ValueError):
        fock_tmsv_moments(0.1, 5)


@given(st.floats(0, 2.5))
def test_fock_cutoff_doubling_is_stable(r):
    m1 = fock_tmsv_moments(r)
    m2 = fock_tmsv_moments(r, 2 * m1.cutoff)
    for a, b in [(m1.n, m2.n), (m1.m_bc, m2.m_bc), (m1.fourth, m2.fourth)]:
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b))
    assert m1.n == pytest.approx(math.sinh(r) ** 2, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0])
def test_wick_identity(r):
    fock = fock_tmsv_moments(r)
    assert wick_fourth_moment(tmsv_initial(r)) == pytest.approx(fock.fourth, rel=1e-9)
    assert antibunching(tmsv_initial(r)) == pytest.approx(fock.antibunching, rel=1e-9)


def test_sufficient_cutoff_monotone():
    cuts = [sufficient_cutoff(r) for r in (0.1, 0.5, 1.0, 2.0, 3.0)]
    assert cuts == sorted(cuts)
    assert cuts[0] == 10
