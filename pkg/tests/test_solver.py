"""Time stepping: exact linear phases, conservation, adjoint runs, residuals."""

import numpy as np
import pytest

from botorus.control import DampingProfile
from botorus.errors import BlowUp
from botorus.invariants import energy, forced_energy_balance
from botorus.solver import (
    CallableSource, ControlSource, FeedbackSource, FixedSource, TimeGrid,
    Trajectory, ZeroSource, integrate, integrate_terminal, integrate_window,
    residual,
)
from botorus.spectral import (
    GridSpec, RealField, free_group, l2_norm, sup_norm,
)
from conftest import smooth_random


def run_free(u0, T, dt, **kw):
    tg = TimeGrid(0.0, T, int(round(T / dt)))
    return integrate(u0, ZeroSource(), tg, **kw)


def test_zero_data_stays_zero():
    g = GridSpec(64)
    traj = run_free(RealField.zero(g), 1.0, 1e-2)
    assert all(l2_norm(f) == 0.0 for f in traj.fields)


def test_timegrid_rejects_empty_interval():
    with pytest.raises(ValueError):
        TimeGrid(1.0, 1.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 1.0, 0)


def test_linear_run_matches_free_group(rng):
    g = GridSpec(64)
    u0 = smooth_random(g, rng)
    traj = run_free(u0, 1.0, 1e-3, nonlinear=False, save_every=250)
    for t, f in zip(traj.times, traj.fields):
        assert l2_norm(f - free_group(t, u0)) < 1e-10


def test_save_every_thins_output(rng):
    g = GridSpec(32)
    traj = run_free(smooth_random(g, rng, norm=0.1), 0.5, 1e-2, save_every=10)
    assert len(traj) == 6
    assert np.isclose(traj.times[-1], 0.5)
    assert np.allclose(np.diff(traj.times), 0.1)


def test_nonlinear_energy_drift():
    g = GridSpec(128)
    u0 = RealField.from_modes(g, [(1, 0.5, 0.0)])
    traj = run_free(u0, 1.0, 1e-3, save_every=100)
    e0 = energy(u0)
    drift = max(abs(energy(f) - e0) for f in traj.fields) / e0
    assert drift < 1e-9


def test_nonlinear_refinement_agreement():
    g = GridSpec(128)
    u0 = RealField.from_modes(g, [(1, 0.5, 0.0)])
    coarse = run_free(u0, 1.0, 1e-3, save_every=1000)
    fine = run_free(u0, 1.0, 5e-4, save_every=2000)
    assert l2_norm(coarse[-1] - fine[-1]) < 1e-8


def test_terminal_roundtrip(rng):
    g = GridSpec(64)
    u0 = smooth_random(g, rng, norm=0.5)
    tg = TimeGrid(0.0, 1.0, 1000)
    fwd = integrate(u0, ZeroSource(), tg, save_every=1000)
    back = integrate_terminal(fwd[-1], ZeroSource(), tg, save_every=1000)
    assert l2_norm(back[0] - u0) < 1e-7


def test_terminal_of_zero_is_zero():
    g = GridSpec(32)
    tg = TimeGrid(0.0, 0.5, 100)
    back = integrate_terminal(RealField.zero(g), ZeroSource(), tg)
    assert all(l2_norm(f) == 0.0 for f in back.fields)


def test_linear_control_run_matches_duhamel_quadrature(rng):
    # u(T) = int_0^T U(T-s) g(s) ds for u0 = 0; composite Simpson oracle
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    h0 = smooth_random(g, rng, norm=0.3)
    src = ControlSource(h0, prof)
    T, n = 1.0, 500
    tg = TimeGrid(0.0, T, n)
    traj = integrate(RealField.zero(g), src, tg, nonlinear=False,
                     save_every=n)
    m = 4 * n                      # finer Simpson panels than the run used
    s = np.linspace(0.0, T, 2 * m + 1)
    w = np.ones(2 * m + 1)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w *= (T / m) / 6.0
    acc = np.zeros(g.n_modes, dtype=complex)
    for sk, wk in zip(s, w):
        gk = RealField(g, src.coeffs_at(sk, None), copy=False)
        acc += wk * free_group(T - sk, gk).coeffs
    oracle = RealField(g, acc, copy=False)
    assert l2_norm(traj[-1] - oracle) < 1e-8


def test_mean_exactly_conserved_under_damping(rng):
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    u0 = smooth_random(g, rng, norm=0.5)
    traj = integrate(u0, FeedbackSource(prof), TimeGrid(0.0, 1.0, 500),
                     save_every=100)
    assert all(f.coeffs[0] == 0.0 for f in traj.fields)


def test_forced_energy_balance_defect(rng):
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    u0 = smooth_random(g, rng, norm=0.3)
    src = FeedbackSource(prof)
    traj = integrate(u0, src, TimeGrid(0.0, 0.5, 500), save_every=1)
    defect = forced_energy_balance(traj, src)
    assert np.max(np.abs(defect)) < 1e-10


def test_residual_of_zero_trajectory():
    g = GridSpec(32)
    traj = run_free(RealField.zero(g), 0.5, 1e-2)
    assert np.max(residual(traj, ZeroSource())) == 0.0


def test_residual_second_order_on_linear_mode():
    g = GridSpec(64)
    u0 = RealField.from_modes(g, [(3, 1.0, 0.0)])
    r = []
    for dt in (2e-3, 1e-3):
        traj = run_free(u0, 0.25, dt, nonlinear=False)
        r.append(np.max(residual(traj, ZeroSource(), nonlinear=False)))
    assert r[0] / r[1] == pytest.approx(4.0, rel=0.1)


def test_residual_second_order_nonlinear():
    g = GridSpec(64)
    u0 = RealField.from_modes(g, [(1, 0.3, 0.0)])
    r = []
    for dt in (2e-3, 1e-3):
        traj = run_free(u0, 0.25, dt)
        r.append(np.max(residual(traj, ZeroSource())))
    assert r[0] / r[1] == pytest.approx(4.0, rel=0.1)


def test_flow_lipschitz_in_data(rng):
    g = GridSpec(64)
    worst = 0.0
    for _ in range(6):
        u0 = smooth_random(g, rng, norm=0.3)
        pert = smooth_random(g, rng, norm=1e-4)
        a = run_free(u0, 1.0, 2e-3, save_every=500)
        b = run_free(u0 + pert, 1.0, 2e-3, save_every=500)
        worst = max(worst, l2_norm(a[-1] - b[-1]) / l2_norm(pert))
    assert worst <= 2.0


def test_blowup_reports_step_and_time():
    g = GridSpec(32)
    u0 = RealField.from_modes(g, [(1, 1.0, 0.0)])
    with pytest.raises(BlowUp) as exc:
        integrate(u0, ZeroSource(), TimeGrid(0.0, 1.0, 100),
                  blowup_threshold=0.5)
    assert exc.value.step >= 1
    assert 0.0 < exc.value.t <= 1.0


def test_integrate_window_spans_and_hits_datum(rng):
    g = GridSpec(64)
    u0 = smooth_random(g, rng, norm=1e-2)
    T = 0.25
    traj = integrate_window(u0, ZeroSource(), T, 1.0 / 64.0)
    assert np.isclose(traj.times[0], -0.5 * T)
    assert np.isclose(traj.times[-1], 1.5 * T)
    assert l2_norm(traj.at_time(0.0) - u0) < 1e-12


def test_callable_source_matches_fixed(rng):
    # a time dependent source fed two ways drives identical runs
    g = GridSpec(32)
    h = smooth_random(g, rng, norm=0.2)

    def fn(t):
        return RealField(g, np.cos(3.0 * t) * h.coeffs, copy=False)

    tg = TimeGrid(0.0, 0.5, 200)
    a = integrate(RealField.zero(g), CallableSource(fn, g), tg, save_every=50)
    times = tg.times
    ref = Trajectory(g, times, [fn(t) for t in times])
    b = integrate(RealField.zero(g), FixedSource(ref), tg, save_every=50)
    # stage-time interpolation keeps the two paths consistent, not identical
    assert max(l2_norm(x - y) for x, y in zip(a.fields, b.fields)) < 1e-11
