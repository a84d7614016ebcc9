"""Gauge transform w = dx Pplus(exp(-iF/2)) and its inversion identities.

F is the zero-mean primitive of u, so the chain rule turns the quadratic
Benjamin-Ono nonlinearity into the quadratic source terms of a Schrodinger
evolution for w:

    w_t - i w_xx = I + II + III
    I   = -dx Pplus[ W (Pminus u_x) ]
    II  = -(i/2) Pplus[ g exp(-iF/2) ]
    III = -(1/4) Pplus[ (-(1/2) mean(u^2) + dx^{-1} g) u exp(-iF/2) ]

Exact inversion recovers the positive-frequency half of u from (w, F):

    Pplus u = 2i w + A + B
    A = 2i Pplus[ w (exp(iF/2) - 1) ]
    B = Pplus[ Pplus(exp(iF/2) - 1) PleqZero(u exp(-iF/2)) ]

and the high-frequency split, for a cutoff N:

    PgeqN u = A_N + B_N
    A_N = 2i PgeqN[ w exp(iF/2) ]
    B_N = PgeqN[ PgeqN(exp(iF/2)) PleqZero(u exp(-iF/2)) ]

All products are dealiased; the identities hold to the spectral-tail level of
exp(±iF/2), so identity checks draw smooth random fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    TWO_PI, ComplexField, RealField, antiderivative, derivative, exp_gauge,
    l2_norm, product, project,
)


@dataclass
class GaugeState:
    """u together with its primitive and gauge variables."""

    u: RealField
    F: RealField
    W: ComplexField
    w: ComplexField


def gauge(u: RealField) -> GaugeState:
    """Build the gauge state of a zero-mean field."""
    F = antiderivative(u)
    W = project(exp_gauge(F, -1), "Pplus")
    w = derivative(W)
    return GaugeState(u=u, F=F, W=W, w=w)


def ungauge(state: GaugeState):
    """Addends (2i w, A, B) of the inversion Pplus u = 2i w + A + B."""
    u, F, w = state.u, state.F, state.w
    e_plus = exp_gauge(F, +1)
    e_minus = exp_gauge(F, -1)
    e_plus_m1 = e_plus - _one(u.grid)
    two_iw = 2j * w
    A = 2j * project(product(w, e_plus_m1), "Pplus")
    # inside B the "-1" only touches the zero mode, which Pplus kills anyway
    low = project(product(u, e_minus), "PleqZero")
    B = project(product(project(e_plus, "Pplus"), low), "Pplus")
    return two_iw, A, B


def ungauge_highfreq(state: GaugeState, N: int):
    """Addends (A_N, B_N) of PgeqN u = A_N + B_N."""
    if N < 1:
        raise ValueError("cutoff N must be >= 1")
    u, F, w = state.u, state.F, state.w
    e_plus = exp_gauge(F, +1)
    e_minus = exp_gauge(F, -1)
    A_N = 2j * project(product(w, e_plus), "PgeqN", N)
    low = project(product(u, e_minus), "PleqZero")
    B_N = project(product(project(e_plus, "PgeqN", N), low), "PgeqN", N)
    return A_N, B_N


def gauge_rhs(state: GaugeState, g: RealField | None = None):
    """The three source terms of the gauged evolution, as fields.

    g is the external forcing of the underlying flow (None means unforced).
    Returns (I, II, III); the full right-hand side of w_t - i w_xx is their
    sum.
    """
    u, F, W = state.u, state.F, state.W
    e_minus = exp_gauge(F, -1)
    term1 = -derivative(project(
        product(W, project(derivative(u), "Pminus")), "Pplus"))
    mean_u2 = l2_norm(u) ** 2 / TWO_PI
    if g is None:
        term2 = ComplexField.zero(u.grid)
        coeff_field = (-0.5 * mean_u2) * _one(u.grid)
    else:
        term2 = (-0.5j) * project(product(g, e_minus), "Pplus")
        coeff_field = (-0.5 * mean_u2) * _one(u.grid) + antiderivative(g)
    term3 = -0.25 * project(
        product(coeff_field, product(u, e_minus)), "Pplus")
    return term1, term2, term3


def _one(grid) -> RealField:
    c = np.zeros(grid.n_modes, dtype=np.complex128)
    c[0] = TWO_PI
    return RealField(grid, c, copy=False)


def gauge_residual(u_traj, g_traj=None) -> np.ndarray:
    """Defect of the gauged evolution along a trajectory.

    Gauges every snapshot, forms dt w by centered differences, and returns
    the per-interior-node L2 norm of  dt w - i w_xx - (I + II + III).
    Second order in the stored spacing.
    """
    m = len(u_traj)
    if m < 3:
        raise ValueError("gauge_residual needs at least three nodes")
    dts = np.diff(u_traj.times)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * abs(dts[0]):
        raise ValueError("gauge_residual needs uniform node spacing")
    dt = dts[0]
    states = [gauge(f) for f in u_traj.fields]
    w_stack = np.array([s.w.coeffs for s in states])
    out = np.empty(m - 2)
    for k in range(1, m - 1):
        g = g_traj[k] if g_traj is not None else None
        t1, t2, t3 = gauge_rhs(states[k], g)
        dt_w = (w_stack[k + 1] - w_stack[k - 1]) / (2.0 * dt)
        lap = derivative(states[k].w, 2).coeffs
        r = dt_w - 1j * lap - (t1.coeffs + t2.coeffs + t3.coeffs)
        out[k - 1] = float(np.linalg.norm(r)) / np.sqrt(TWO_PI)
    return out
