"""Explicit solver for the coarse-grained density equation."""

import math

import numpy as np
import pytest

from fepsim.pde import (
    DensityProfile,
    cell_centers,
    coarsen,
    fde_step,
    flux_g,
    max_stable_dt,
    solve_fde,
    solve_fde_snapshots,
)


def _sinusoid(u):
    return 0.75 + 0.15 * math.sin(2.0 * math.pi * u)


def test_flux_pinned_values():
    assert flux_g(1.0) == 1.0
    assert flux_g(0.75) == pytest.approx(2.0 / 3.0, abs=1e-15)
    np.testing.assert_allclose(flux_g([0.8, 1.0]), [0.75, 1.0])


def test_profile_validation():
    with pytest.raises(ValueError):
        DensityProfile([0.5, 0.6])  # boundary excluded
    with pytest.raises(ValueError):
        DensityProfile([0.8, 1.2])
    with pytest.raises(ValueError):
        DensityProfile([0.8])
    DensityProfile([1.0, 1.0])  # full density allowed
    p = DensityProfile([0.8, 0.9])
    with pytest.raises(ValueError):
        p.cells[0] = 0.7  # frozen


def test_from_function_cell_centered():
    p = DensityProfile.from_function(_sinusoid, 8)
    u = cell_centers(8)
    assert u[0] == 0.0625
    np.testing.assert_allclose(p.cells, [_sinusoid(x) for x in u], rtol=0, atol=0)


def test_constant_profile_is_exact_fixed_point():
    p = DensityProfile(np.full(32, 0.8))
    q = fde_step(p, max_stable_dt(p))
    assert np.array_equal(q.cells, p.cells)
    assert q.t == max_stable_dt(p)


def test_step_conserves_mass_and_tracks_time():
    p = DensityProfile.from_function(_sinusoid, 64)
    m0 = p.mass
    dt = max_stable_dt(p)
    for _ in range(200):
        p = fde_step(p, dt)
    assert abs(p.mass - m0) < 1e-14
    assert p.t == pytest.approx(200 * dt, rel=1e-12)


def test_step_rejects_unstable_dt():
    p = DensityProfile.from_function(_sinusoid, 32)
    with pytest.raises(ValueError):
        fde_step(p, max_stable_dt(p) * 1.01)
    with pytest.raises(ValueError):
        fde_step(p, 0.0)


def test_max_principle():
    p = DensityProfile.from_function(_sinusoid, 48)
    lo, hi = p.cells.min(), p.cells.max()
    dt = max_stable_dt(p)
    for _ in range(500):
        p = fde_step(p, dt)
        assert p.cells.min() >= lo - 1e-12
        assert p.cells.max() <= hi + 1e-12
        lo, hi = p.cells.min(), p.cells.max()


def test_sinusoid_flattens_monotonically():
    p = DensityProfile.from_function(_sinusoid, 64)
    snaps = solve_fde_snapshots(p, [0.001, 0.002, 0.004, 0.008, 0.05])
    spreads = [float(np.abs(s.cells - 0.75).mean()) for s in snaps]
    assert all(b < a for a, b in zip(spreads, spreads[1:]))
    assert spreads[-1] < 0.01  # close to the flat state by t = 0.05


def test_solve_fde_zero_horizon_and_validation():
    p = DensityProfile.from_function(_sinusoid, 16)
    assert solve_fde(p, 0.0) is p
    with pytest.raises(ValueError):
        solve_fde(p, -1.0)


def test_snapshots_consistent_with_direct_solve():
    p = DensityProfile.from_function(_sinusoid, 32)
    dt = max_stable_dt(p) / 2
    snaps = solve_fde_snapshots(p, [0.002, 0.004], dt=dt)
    direct = solve_fde(solve_fde(p, 0.002, dt=dt), 0.002, dt=dt)
    np.testing.assert_allclose(snaps[-1].cells, direct.cells, rtol=0, atol=1e-13)
    assert snaps[-1].t == pytest.approx(0.004)
    with pytest.raises(ValueError):
        solve_fde_snapshots(p, [0.004, 0.002])


def test_coarsen_averages_and_validates():
    p = DensityProfile([0.8, 0.9, 0.7, 0.8], t=1.0)
    q = coarsen(p, 2)
    np.testing.assert_allclose(q.cells, [0.85, 0.75])
    assert q.mass == pytest.approx(p.mass)
    assert q.t == 1.0
    with pytest.raises(ValueError):
        coarsen(p, 3)


def test_self_convergence_is_second_order():
    """Grid-halving errors shrink by about 4x (light version of the
    three-grid check run by the acceptance suite)."""
    t_end = 0.01
    sols = {m: solve_fde(DensityProfile.from_function(_sinusoid, m), t_end) for m in (32, 64, 128)}
    e_coarse = float(np.abs(coarsen(sols[64], 2).cells - sols[32].cells).mean())
    e_fine = float(np.abs(coarsen(sols[128], 2).cells - sols[64].cells).mean())
    order = math.log2(e_coarse / e_fine)
    assert 1.5 < order < 2.5, order


def test_profile_csv_header():
    p = DensityProfile([0.8, 0.9])
    lines = p.to_csv().splitlines()
    assert lines[0] == "u,rho"
    assert len(lines) == 3
