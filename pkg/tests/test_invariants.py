"""Conserved functionals and the energy identities."""

import csv

import numpy as np
import pytest

from botorus.control import DampingProfile
from botorus.invariants import (
    InvariantReport, damped_energy_identity, energy, mass, psi4, psi6,
)
from botorus.solver import FeedbackSource, TimeGrid, ZeroSource, integrate
from botorus.spectral import GridSpec, RealField, l2_norm
from conftest import smooth_random


def eps_cos(grid, eps):
    return RealField.from_modes(grid, [(1, eps, 0.0)])


def test_mass_of_zero_mean_field(rng):
    g = GridSpec(64)
    assert mass(smooth_random(g, rng)) == 0.0
    assert np.isclose(mass(RealField.from_modes(g, [(0, 1.5, 0.0)])),
                      2.0 * np.pi * 1.5)


def test_energy_of_cosine():
    g = GridSpec(64)
    assert np.isclose(energy(eps_cos(g, 1.0)), np.pi, rtol=1e-12)


def test_energy_parseval(rng):
    g = GridSpec(64)
    u = smooth_random(g, rng, norm=0.7)
    spectral_sum = np.sum(np.abs(u.coeffs) ** 2) / (2.0 * np.pi)
    assert np.isclose(energy(u), spectral_sum, rtol=1e-12)


def test_psi4_zero():
    assert psi4(RealField.zero(GridSpec(64))) == 0.0


def test_psi4_cosine_oracle():
    # closed form on eps cos x: 2 pi eps^2 + (3 pi / 16) eps^4
    g = GridSpec(64)
    for eps in (0.3, 1e-2):
        want = 2.0 * np.pi * eps ** 2 + (3.0 * np.pi / 16.0) * eps ** 4
        assert np.isclose(psi4(eps_cos(g, eps)), want, rtol=1e-12), eps


def test_psi6_zero():
    assert psi6(RealField.zero(GridSpec(64))) == 0.0


def test_psi6_cosine_leading_term():
    # 8 pi eps^2 plus a quartic remainder
    g = GridSpec(64)
    rem = []
    for eps in (1e-2, 1e-3):
        rem.append(abs(psi6(eps_cos(g, eps)) - 8.0 * np.pi * eps ** 2))
    assert rem[0] < 50.0 * (1e-2) ** 4
    assert rem[0] / rem[1] == pytest.approx(1e4, rel=0.05)


def test_unforced_conservation():
    g = GridSpec(128)
    u0 = RealField.from_modes(g, [(1, 0.5, 0.0), (2, 0.3, -np.pi / 2)])
    traj = integrate(u0, ZeroSource(), TimeGrid(0.0, 0.25, 250),
                     save_every=25)
    rep = InvariantReport.from_trajectory(traj)
    drift = rep.max_drift()
    assert drift["I1"] < 1e-14
    assert drift["I2"] < 1e-8
    assert drift["Psi4"] < 1e-6
    assert drift["Psi6"] < 1e-5


def test_damped_identity_zero_data():
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    times = 1e-2 * np.arange(11)
    from botorus.solver import Trajectory
    traj = Trajectory(g, times, [RealField.zero(g) for _ in times])
    assert np.max(np.abs(damped_energy_identity(traj, prof))) == 0.0


def test_damped_identity_off_profile(rng):
    # with the control off the identity is plain energy conservation
    g = GridSpec(64)
    u0 = smooth_random(g, rng, norm=0.5)
    traj = integrate(u0, ZeroSource(), TimeGrid(0.0, 2.0, 2000),
                     save_every=10)
    defect = damped_energy_identity(traj, DampingProfile.off(g))
    assert np.max(np.abs(defect)) < 1e-8


def test_damped_identity_feedback_run(rng):
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    u0 = smooth_random(g, rng, norm=0.5)
    traj = integrate(u0, FeedbackSource(prof), TimeGrid(0.0, 2.0, 2000),
                     save_every=10)
    defect = damped_energy_identity(traj, prof)
    assert np.max(np.abs(defect)) < 1e-7 * l2_norm(u0) ** 2


def test_feedback_norm_monotone(rng):
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    u0 = smooth_random(g, rng, norm=0.5)
    traj = integrate(u0, FeedbackSource(prof), TimeGrid(0.0, 2.0, 2000),
                     save_every=20)
    norms = np.array([l2_norm(f) for f in traj.fields])
    assert np.all(np.diff(norms) <= 1e-14)


def test_report_csv_roundtrip(tmp_path, rng):
    g = GridSpec(64)
    u0 = smooth_random(g, rng, norm=0.3)
    traj = integrate(u0, ZeroSource(), TimeGrid(0.0, 0.1, 100),
                     save_every=20)
    rep = InvariantReport.from_trajectory(traj)
    path = tmp_path / "invariants.csv"
    rep.to_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "I1", "I2", "Psi4", "Psi6",
                       "energy_identity_defect"]
    assert len(rows) == 1 + len(traj)
    back = np.array([[float(v) for v in row] for row in rows[1:]])
    assert np.allclose(back[:, 2], rep.I2, rtol=1e-15)
    assert np.allclose(back[:, 0], rep.times)


def test_report_defect_column_uses_profile(rng):
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    u0 = smooth_random(g, rng, norm=0.3)
    traj = integrate(u0, FeedbackSource(prof), TimeGrid(0.0, 0.5, 500),
                     save_every=10)
    rep = InvariantReport.from_trajectory(traj, profile=prof)
    direct = damped_energy_identity(traj, prof)
    assert np.array_equal(rep.defect, direct)
