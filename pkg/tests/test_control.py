"""Damping operator, observability Gramian, exact control, stabilization."""

import numpy as np
import pytest

from botorus.control import (
    DampingProfile, GramianOperator, apply_G, apply_G_mu, gramian_apply,
    gramian_solve, large_data_control, linear_gap, observability_ratio,
    picard_control, stabilization_experiment, steer,
)
from botorus.errors import MeanMismatch, NoConvergence, ZeroData
from botorus.solver import ControlSource, TimeGrid, integrate
from botorus.spectral import (
    GridSpec, RealField, free_group, inner, l2_norm, mean, reflect,
)
from conftest import smooth_random


@pytest.fixture
def prof32():
    return DampingProfile.bump(GridSpec(32))


def fit_slope(xs, ys):
    return np.polyfit(np.log(xs), np.log(ys), 1)[0]


# -- damping profile and operator -------------------------------------------

def test_bump_profile_normalized():
    for n in (32, 64, 128):
        prof = DampingProfile.bump(GridSpec(n))
        assert abs(prof.field.coeffs[0].real - 1.0) < 1e-12
        assert np.min(prof.field.values().real) > -1e-12


def test_bump_profile_support():
    g = GridSpec(128)
    prof = DampingProfile.bump(g)
    vals = prof.field.values().real
    inside = np.abs(g.x - np.pi) < 0.5 * np.pi
    assert np.max(np.abs(vals[~inside])) < 1e-13
    assert vals[np.argmin(np.abs(g.x - np.pi))] > 0.1


def test_off_profile():
    g = GridSpec(64)
    prof = DampingProfile.off(g)
    assert prof.is_off
    assert l2_norm(prof.field) == 0.0


def test_apply_G_kills_constants(prof32):
    g = GridSpec(32)
    out = apply_G(RealField.from_modes(g, [(0, 2.0, 0.0)]), prof32)
    assert l2_norm(out) < 1e-14


def test_apply_G_mean_free(prof32, rng):
    g = GridSpec(32)
    for _ in range(5):
        out = apply_G(smooth_random(g, rng), prof32)
        assert abs(mean(out)) < 1e-15


def test_apply_G_self_adjoint(prof32, rng):
    g = GridSpec(32)
    f, h = smooth_random(g, rng), smooth_random(g, rng)
    assert abs(inner(apply_G(f, prof32), h)
               - inner(f, apply_G(h, prof32))) < 1e-12


def test_apply_G_mu_reductions(prof32, rng):
    g = GridSpec(32)
    h = smooth_random(g, rng)
    base = apply_G(h, prof32)
    assert l2_norm(apply_G_mu(h, prof32, 0.0, 0.37) - base) < 1e-14
    assert l2_norm(apply_G_mu(h, prof32, 0.8, 0.0) - base) < 1e-14


def test_apply_G_mu_mean_free(prof32, rng):
    g = GridSpec(32)
    h = smooth_random(g, rng)
    out = apply_G_mu(h, prof32, 0.6, 1.3)
    assert abs(mean(out)) < 1e-14
    assert l2_norm(out - apply_G(h, prof32)) > 1e-6


# -- Gramian -----------------------------------------------------------------

def test_gramian_of_zero(prof32):
    g = GridSpec(32)
    out = gramian_apply(RealField.zero(g), prof32, 1.0, n_quad=64)
    assert l2_norm(out) == 0.0


def test_gramian_short_time_linear_in_T(prof32, rng):
    g = GridSpec(32)
    h = smooth_random(g, rng)
    a = l2_norm(gramian_apply(h, prof32, 1e-3, n_quad=64))
    b = l2_norm(gramian_apply(h, prof32, 2e-3, n_quad=64))
    assert b / a == pytest.approx(2.0, rel=0.05)


def test_gramian_gauss_legendre_oracle(prof32, rng):
    # independent quadrature of int_0^T U(-s) G G U(s) h ds
    g = GridSpec(32)
    h = smooth_random(g, rng)
    T = 1.0
    nodes, weights = np.polynomial.legendre.leggauss(64)
    s = 0.5 * T * (nodes + 1.0)
    acc = np.zeros(g.n_modes, dtype=complex)
    for sk, wk in zip(s, weights):
        fwd = free_group(sk, h)
        mid = RealField(g, prof32.GG_coeffs(fwd.coeffs), copy=False)
        acc += (0.5 * T * wk) * free_group(-sk, mid).coeffs
    oracle = RealField(g, acc, copy=False)
    got = gramian_apply(h, prof32, T, n_quad=2048)
    assert l2_norm(got - oracle) < 1e-8


def test_gramian_symmetry_and_positivity(prof32, rng):
    g = GridSpec(32)
    op = GramianOperator(prof32, 1.0, 256)
    f, h = smooth_random(g, rng), smooth_random(g, rng)
    lf = RealField(g, op.apply_coeffs(f.coeffs), copy=False)
    lh = RealField(g, op.apply_coeffs(h.coeffs), copy=False)
    scale = l2_norm(f) * l2_norm(h)
    assert abs(inner(lf, h) - inner(f, lh)) < 1e-10 * scale
    assert inner(lf, f) > 0


def test_gramian_solve_zero_rhs(prof32):
    g = GridSpec(32)
    h0, iters = gramian_solve(RealField.zero(g), prof32, 1.0, n_quad=64)
    assert l2_norm(h0) == 0.0
    assert iters == 0


def test_gramian_solve_roundtrip(prof32, rng):
    g = GridSpec(32)
    rhs = smooth_random(g, rng)
    tol = 1e-10
    op = GramianOperator(prof32, 1.0, 256)
    h0, _ = gramian_solve(rhs, prof32, 1.0, tol=tol, operator=op)
    back = RealField(g, op.apply_coeffs(h0.coeffs), copy=False)
    assert l2_norm(back - rhs) < 10.0 * tol * l2_norm(rhs)


def test_gramian_solve_methods_agree(prof32, rng):
    g = GridSpec(32)
    rhs = smooth_random(g, rng)
    op = GramianOperator(prof32, 1.0, 256)
    cg, _ = gramian_solve(rhs, prof32, 1.0, operator=op, method="cg")
    de, _ = gramian_solve(rhs, prof32, 1.0, operator=op, method="dense")
    assert l2_norm(cg - de) < 1e-8 * l2_norm(rhs)


def test_gramian_solve_starved_iterations(prof32, rng):
    g = GridSpec(32)
    rhs = smooth_random(g, rng)
    with pytest.raises(NoConvergence) as exc:
        gramian_solve(rhs, prof32, 1.0, n_quad=64, tol=1e-14, max_iter=2)
    assert exc.value.iterations == 2
    assert exc.value.residual > 0


def test_lanczos_matches_dense_extremes(prof32):
    op = GramianOperator(prof32, 1.0, 256)
    dense = op.dense()
    # drop the zero-mode null direction from the dense spectrum
    eigs = np.linalg.eigvalsh(dense)
    eigs = eigs[eigs > 1e-12]
    lz = op.eigs_lanczos(k=12, seed=0)
    assert lz[-1] == pytest.approx(float(eigs[-1]), rel=1e-2)
    assert lz[0] == pytest.approx(float(eigs[0]), rel=1e-2)


def test_linear_exact_control(prof32, rng):
    # solve for the free datum, then check the linear loop really lands at 0
    g = GridSpec(32)
    u0 = smooth_random(g, rng, norm=0.5)
    T, n = 1.0, 500
    op = GramianOperator(prof32, T, n)
    h0, _ = gramian_solve(u0, prof32, T, operator=op, method="dense")
    traj = integrate(u0, ControlSource(h0, prof32),
                     TimeGrid(0.0, T, n), nonlinear=False, save_every=n)
    assert l2_norm(traj[-1]) < 1e-6 * l2_norm(u0)


# -- nonlinear control -------------------------------------------------------

def test_picard_zero_data(prof32):
    g = GridSpec(32)
    res = picard_control(RealField.zero(g), prof32, 1.0, dt=5e-3)
    assert res.iterations == 0
    assert res.terminal_error == 0.0
    assert l2_norm(res.h0) == 0.0
    assert res.contraction_history == []


def test_picard_small_data_converges():
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    u0 = RealField.from_modes(g, [(1, 1e-2, 0.0)])
    res = picard_control(u0, prof, 1.0, dt=2e-3)
    assert res.iterations <= 10
    assert res.terminal_error <= 1e-6 * l2_norm(u0)
    steps = res.contraction_history
    assert all(b < 0.5 * a for a, b in zip(steps, steps[1:]))


def test_picard_warns_on_large_data(prof32, rng):
    g = GridSpec(32)
    u0 = smooth_random(g, rng, norm=0.2)
    with pytest.warns(UserWarning):
        try:
            picard_control(u0, prof32, 0.5, dt=5e-3, max_iter=3)
        except NoConvergence:
            pass


def test_control_remainder_quadratic(prof32):
    # terminal of the nonlinear loop under the linear exact control
    g = GridSpec(32)
    T, n = 0.5, 250
    op = GramianOperator(prof32, T, n)
    base = RealField.from_modes(g, [(1, 1.0, 0.0)])
    h1, _ = gramian_solve(base, prof32, T, operator=op, method="dense")
    eps_list, rem = (3e-3, 1e-2, 3e-2), []
    for eps in eps_list:
        h0 = RealField(g, eps * h1.coeffs, copy=False)
        u0 = RealField(g, eps * base.coeffs, copy=False)
        traj = integrate(u0, ControlSource(h0, prof32),
                         TimeGrid(0.0, T, n), nonlinear=True, save_every=n)
        rem.append(l2_norm(traj[-1]))
    assert fit_slope(eps_list, rem) == pytest.approx(2.0, abs=0.15)


def test_steer_zero_to_zero(prof32):
    g = GridSpec(32)
    res = steer(RealField.zero(g), RealField.zero(g), prof32, 1.0, dt=5e-3)
    assert res.terminal_error == 0.0
    assert l2_norm(res.h0) == 0.0
    assert l2_norm(res.h0_reverse) == 0.0


def test_steer_to_rest_reduces_to_drive_to_zero():
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    u0 = RealField.from_modes(g, [(1, 1e-2, 0.0)])
    res = steer(u0, RealField.zero(g), prof, 1.0, dt=2e-3)
    leg = picard_control(u0, prof, 0.5, dt=2e-3)
    assert l2_norm(res.h0 - leg.h0) < 1e-14
    assert l2_norm(res.h0_reverse) == 0.0
    assert res.terminal_error < 1e-6 * l2_norm(u0)


def test_steer_mean_mismatch(prof32):
    g = GridSpec(32)
    u0 = RealField.from_modes(g, [(0, 0.5, 0.0)])
    u1 = RealField.zero(g)
    with pytest.raises(MeanMismatch):
        steer(u0, u1, prof32, 1.0)


def test_steer_state_to_state_verified_by_single_run():
    from botorus.control import _ReversedControlSource
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    u0 = RealField.from_modes(g, [(1, 1e-2, 0.0)])
    u1 = RealField.from_modes(g, [(2, 1e-2, -np.pi / 2)])   # 1e-2 sin 2x
    T = 1.0
    res = steer(u0, u1, prof, T, dt=2e-3)
    # replay both legs from the returned data without any state reset
    legA = integrate(u0, ControlSource(res.h0, prof),
                     TimeGrid(0.0, 0.5 * T, 250), save_every=250)
    rev_src = _ReversedControlSource(res.h0_reverse, prof, 0.5 * T, 0.5 * T)
    legB = integrate(legA[-1], rev_src, TimeGrid(0.5 * T, T, 250),
                     save_every=250)
    scale = max(l2_norm(u0), l2_norm(u1))
    assert l2_norm(legB[-1] - u1) < 1e-5 * scale
    assert res.terminal_error < 1e-5 * scale


def test_large_data_control_two_stage():
    g = GridSpec(32)
    prof = DampingProfile.bump(g)
    u0 = RealField.from_modes(g, [(1, 0.04, 0.0)])
    with pytest.warns(UserWarning):
        res = large_data_control(u0, prof, 16.0, delta=0.06, dt=2e-3)
    assert res.terminal_error < 1e-5 * l2_norm(u0)
    assert np.all(np.diff(res.traj.times) > 0)
    assert np.isclose(res.traj.times[-1], 16.0)


def test_large_data_control_needs_room():
    g = GridSpec(32)
    prof = DampingProfile.bump(g)
    u0 = RealField.from_modes(g, [(1, 0.2, 0.0)])
    with pytest.raises(NoConvergence):
        large_data_control(u0, prof, 2.0, delta=1e-3, dt=5e-3)


# -- stabilization and observability ----------------------------------------

def test_stabilization_zero_data(prof32):
    g = GridSpec(32)
    res = stabilization_experiment(RealField.zero(g), prof32, 2.0, dt=5e-3)
    assert np.isnan(res.lambda_fit)


def test_stabilization_control_off(rng):
    g = GridSpec(64)
    u0 = smooth_random(g, rng, norm=0.5)
    res = stabilization_experiment(u0, DampingProfile.off(g), 5.0, dt=2e-3)
    assert abs(res.lambda_fit) <= 1e-6


def test_stabilization_decays(rng):
    g = GridSpec(64)
    prof = DampingProfile.bump(g)
    u0 = smooth_random(g, rng, norm=0.5)
    res = stabilization_experiment(u0, prof, 10.0, dt=2e-3)
    assert res.lambda_fit > 0
    norms = np.array([l2_norm(f) for f in res.traj.fields])
    assert np.all(np.diff(norms) <= 1e-14)


def test_observability_zero_data(prof32):
    g = GridSpec(32)
    with pytest.raises(ZeroData):
        observability_ratio(RealField.zero(g), prof32, 1.0)


def test_observability_linear_mode_gramian_oracle(prof32):
    # free linear flow: the denominator is the Gramian quadratic form
    g = GridSpec(32)
    u0 = RealField.from_modes(g, [(3, 0.5, 0.0)])
    got = observability_ratio(u0, prof32, 1.0, dt=5e-4,
                              nonlinear=False, damped=False)
    lu = gramian_apply(u0, prof32, 1.0, n_quad=4096)
    want = l2_norm(u0) ** 2 / inner(lu, u0)
    assert got == pytest.approx(want, rel=1e-4)


def test_observability_monotone_in_T(prof32, rng):
    g = GridSpec(32)
    for _ in range(3):
        u0 = smooth_random(g, rng, norm=0.5)
        r1 = observability_ratio(u0, prof32, 0.5, nonlinear=False,
                                 damped=False)
        r2 = observability_ratio(u0, prof32, 1.0, nonlinear=False,
                                 damped=False)
        assert r2 <= r1 * (1.0 + 1e-9)


def test_observability_ensemble_finite(prof32, rng):
    g = GridSpec(32)
    worst = max(observability_ratio(smooth_random(g, rng, norm=0.5),
                                    prof32, 1.0, dt=5e-3)
                for _ in range(10))
    assert np.isfinite(worst)
    assert worst > 0


def test_linear_gap_zero_data(prof32):
    g = GridSpec(32)
    assert linear_gap(RealField.zero(g), prof32, 1.0, dt=5e-3) == 0.0


def test_linear_gap_quadratic(prof32):
    g = GridSpec(32)
    base = RealField.from_modes(g, [(1, 1.0, 0.0)])
    eps_list = (1e-1, 3e-2, 1e-2)
    gaps = [linear_gap(RealField(g, eps * base.coeffs, copy=False),
                       prof32, 1.0, dt=2e-3)
            for eps in eps_list]
    assert fit_slope(eps_list, gaps) == pytest.approx(2.0, abs=0.1)
