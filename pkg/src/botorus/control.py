"""Localized damping, exact HUM control, and stabilization experiments.

The damping operator is (G h)(x) = a(x) (h(x) - integral a(y) h(y) dy) with a
nonnegative profile of unit integral; G is self-adjoint and maps everything
to mean zero.  The control Gramian

    L = integral_0^T U(-s) G G U(s) ds

is realized by composite Simpson quadrature over the exact free group, which
is the same rule the integrating-factor RK4 realizes for a linear run with a
state-independent source, so a control solved here steers the forward
integration to the target at the conjugate-gradient tolerance.  The
nonlinear steering iteration is the fixed point

    h <- h + L^{-1} (u0 - u_h(0))

where u_h is the terminal-value nonlinear solve with control source
g(t) = -G G U(t) h; its update sizes contract for small data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh_tridiagonal

from .errors import NoConvergence, NonZeroMean, MeanMismatch, ZeroData
from .solver import (
    ControlSource, FeedbackSource, Source, TimeGrid, Trajectory, ZeroSource,
    integrate, integrate_terminal,
)
from .spectral import (
    TWO_PI, GridSpec, RealField, _padded_values, _values_to_coeffs,
    l2_norm, mean, reflect, shift,
)

SMALLNESS_THRESHOLD = 5e-2


class DampingProfile:
    """Nonnegative damping weight a with unit integral, plus its operator."""

    def __init__(self, grid: GridSpec, values: np.ndarray, *,
                 x0: float | None = None, r: float | None = None,
                 is_off: bool = False):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_modes,):
            raise ValueError("profile samples do not match the grid")
        if np.min(values) < -1e-12:
            raise ValueError(
                f"profile must be nonnegative (min {np.min(values):.3e})")
        quad = float(np.sum(values)) * TWO_PI / grid.n_modes
        if is_off or quad == 0.0:
            if np.any(values != 0.0) and abs(quad - 1.0) > 1e-12:
                raise ValueError("profile integral must equal 1")
            is_off = True
        elif abs(quad - 1.0) > 1e-12:
            raise ValueError(
                f"profile integral must equal 1 (got {quad:.15g})")
        self.grid = grid
        self.is_off = is_off
        self.x0 = x0
        self.r = r
        self.field = RealField.from_values(grid, values)
        n = grid.n_modes
        self._ac = self.field.coeffs.copy()
        self._av2 = _padded_values(self._ac, n, 2 * n).real
        self._mask_hi = np.abs(grid.freqs) > grid.dealias_cut

    @classmethod
    def bump(cls, grid: GridSpec, x0: float = np.pi,
             r: float = np.pi / 2) -> "DampingProfile":
        """Smooth compactly supported bump centered at x0 with radius r."""
        d = np.mod(grid.x - x0 + np.pi, TWO_PI) - np.pi
        s = d / r
        vals = np.zeros(grid.n_modes)
        inside = np.abs(s) < 1.0
        vals[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
        vals /= np.sum(vals) * TWO_PI / grid.n_modes
        return cls(grid, vals, x0=x0, r=r)

    @classmethod
    def off(cls, grid: GridSpec) -> "DampingProfile":
        """Control-off profile, a == 0 (G vanishes identically)."""
        return cls(grid, np.zeros(grid.n_modes), is_off=True)

    @classmethod
    def from_field(cls, f: RealField, *, x0=None, r=None) -> "DampingProfile":
        return cls(f.grid, f.values(), x0=x0, r=r)

    @property
    def omega(self):
        """Open interval where the bump profile is positive, if known."""
        if self.x0 is None or self.r is None:
            return None
        return (self.x0 - self.r, self.x0 + self.r)

    def G_coeffs(self, c: np.ndarray) -> np.ndarray:
        """Raw-array damping operator; output is band-limited and mean-free."""
        if self.is_off:
            return np.zeros_like(c)
        n = self.grid.n_modes
        vals = self._av2 * _padded_values(c, n, 2 * n)
        pc = _values_to_coeffs(vals, n)
        out = pc - pc[0] * self._ac
        out[self._mask_hi] = 0.0
        out[0] = 0.0
        return out

    def GG_coeffs(self, c: np.ndarray) -> np.ndarray:
        return self.G_coeffs(self.G_coeffs(c))


def apply_G(h: RealField, profile: DampingProfile) -> RealField:
    """(G h)(x) = a(x) (h(x) - integral a h)."""
    if h.grid.n_modes != profile.grid.n_modes:
        from .errors import GridMismatch
        raise GridMismatch("field and profile grids differ")
    return RealField(h.grid, profile.G_coeffs(h.coeffs), copy=False)


def apply_G_mu(h: RealField, profile: DampingProfile, mu: float,
               t: float) -> RealField:
    """Moving-frame damping a(x - mu t) (h(x - mu t) - integral a h).

    Both the weight and the state are read in the moving frame, so this is
    exactly the translate of G h by mu t.
    """
    return shift(apply_G(h, profile), mu * t)


# -- Gramian ---------------------------------------------------------------

class GramianOperator:
    """Matrix-free L = int_0^T U(-s) G G U(s) ds with Simpson weights.

    n_quad counts Simpson panels; 2 n_quad + 1 group evaluations are used.
    A dense representation over the band-limited zero-mean subspace can be
    assembled once and Cholesky-factored for repeated solves.
    """

    def __init__(self, profile: DampingProfile, T: float, n_quad: int = 1024):
        if T <= 0:
            raise ValueError("T must be positive")
        if n_quad < 1:
            raise ValueError("n_quad must be >= 1")
        self.profile = profile
        self.T = float(T)
        self.n_quad = int(n_quad)
        self.grid = profile.grid
        xi = self.grid.freqs.astype(float)
        omega = xi * np.abs(xi)
        h = self.T / self.n_quad
        s_nodes = 0.5 * h * np.arange(2 * self.n_quad + 1)
        wgt = np.full(2 * self.n_quad + 1, 2.0 * h / 6.0)
        wgt[1::2] = 4.0 * h / 6.0
        wgt[0] = wgt[-1] = h / 6.0
        self._wgt = wgt
        self._phases = np.exp(-1j * np.outer(s_nodes, omega))
        self._dense = None
        self._chol = None
        self._basis = None

    def apply_coeffs(self, c: np.ndarray) -> np.ndarray:
        out = np.zeros_like(c)
        GG = self.profile.GG_coeffs
        for j in range(self._phases.shape[0]):
            ph = self._phases[j]
            out += self._wgt[j] * np.conj(ph) * GG(ph * c)
        return out

    def apply(self, h0: RealField) -> RealField:
        return RealField(self.grid, self.apply_coeffs(h0.coeffs), copy=False)

    # dense path over the orthonormal cos/sin basis of the zero-mean band

    def _build_basis(self):
        if self._basis is not None:
            return self._basis
        n = self.grid.n_modes
        cut = self.grid.dealias_cut
        basis = []
        for xi in range(1, cut + 1):
            b = np.zeros(n, dtype=np.complex128)
            b[xi] = np.sqrt(np.pi)
            b[(n - xi) % n] = np.sqrt(np.pi)
            basis.append(b)
            b = np.zeros(n, dtype=np.complex128)
            b[xi] = -1j * np.sqrt(np.pi)
            b[(n - xi) % n] = 1j * np.sqrt(np.pi)
            basis.append(b)
        self._basis = np.array(basis)
        return self._basis

    def dense(self) -> np.ndarray:
        if self._dense is None:
            basis = self._build_basis()
            cols = [self.apply_coeffs(b) for b in basis]
            M = np.array([[float(np.real(np.vdot(bi, col))) / TWO_PI
                           for col in cols] for bi in basis])
            self._dense = 0.5 * (M + M.T)
        return self._dense

    def _to_basis(self, c: np.ndarray) -> np.ndarray:
        basis = self._build_basis()
        return np.array([float(np.real(np.vdot(b, c))) / TWO_PI
                         for b in basis])

    def _from_basis(self, beta: np.ndarray) -> np.ndarray:
        return self._build_basis().T @ beta.astype(complex)

    def solve_dense(self, rhs: np.ndarray) -> np.ndarray:
        if self.profile.is_off:
            raise ZeroData("Gramian of the control-off profile is singular")
        if self._chol is None:
            self._chol = cho_factor(self.dense())
        beta = self._to_basis(rhs)
        return self._from_basis(cho_solve(self._chol, beta))

    def solve_cg(self, rhs: np.ndarray, tol: float = 1e-10,
                 max_iter: int = 2000):
        """Conjugate gradients on the zero-mean subspace.

        Returns (solution, iterations); the zero mode is projected out of
        every iterate.  Raises NoConvergence at max_iter.
        """
        if self.profile.is_off:
            raise ZeroData("Gramian of the control-off profile is singular")

        def ip(f, g):
            return float(np.real(np.vdot(f, g))) / TWO_PI

        b = rhs.copy()
        b[0] = 0.0
        x = np.zeros_like(b)
        r = b.copy()
        p = r.copy()
        rs = ip(r, r)
        bnorm = np.sqrt(ip(b, b))
        if bnorm == 0:
            return x, 0
        for it in range(1, max_iter + 1):
            Ap = self.apply_coeffs(p)
            Ap[0] = 0.0
            alpha = rs / ip(p, Ap)
            x += alpha * p
            r -= alpha * Ap
            x[0] = 0.0
            r[0] = 0.0
            rs_new = ip(r, r)
            if np.sqrt(rs_new) <= tol * bnorm:
                return x, it
            p = r + (rs_new / rs) * p
            rs = rs_new
        raise NoConvergence(max_iter, residual=float(np.sqrt(rs) / bnorm))

    def eigs_lanczos(self, k: int = 20, seed: int = 0) -> np.ndarray:
        """Lanczos eigenvalue estimates on the zero-mean band subspace."""
        basis = self._build_basis()
        dim = basis.shape[0]
        k = min(k, dim)
        rng = np.random.default_rng(seed)

        def ip(f, g):
            return float(np.real(np.vdot(f, g))) / TWO_PI

        v = basis.T @ rng.normal(size=dim).astype(complex)
        v /= np.sqrt(ip(v, v))
        V = [v]
        alphas, betas = [], []
        for j in range(k):
            w = self.apply_coeffs(V[j])
            w[0] = 0.0
            a = ip(w, V[j])
            alphas.append(a)
            w = w - a * V[j] - (betas[-1] * V[j - 1] if betas else 0.0)
            for q in V:  # full reorthogonalization, k is small
                w = w - ip(w, q) * q
            bnrm = np.sqrt(ip(w, w))
            if bnrm < 1e-14 or j == k - 1:
                break
            betas.append(bnrm)
            V.append(w / bnrm)
        vals = eigh_tridiagonal(np.array(alphas), np.array(betas),
                                eigvals_only=True)
        return np.sort(vals)


def gramian_apply(h0: RealField, profile: DampingProfile, T: float,
                  n_quad: int = 1024) -> RealField:
    """L h0 by composite Simpson quadrature over the exact free group."""
    return GramianOperator(profile, T, n_quad).apply(h0)


def gramian_solve(rhs: RealField, profile: DampingProfile, T: float, *,
                  n_quad: int = 1024, tol: float = 1e-10,
                  max_iter: int = 2000, method: str = "cg",
                  operator: GramianOperator | None = None):
    """Solve L h0 = rhs; returns (h0, iterations).

    rhs must have zero mean (the Gramian range is mean-free).  method "cg"
    runs matrix-free conjugate gradients; "dense" assembles and factors L.
    """
    _require_zero_mean(rhs, "gramian_solve rhs")
    op = operator or GramianOperator(profile, T, n_quad)
    if method == "dense":
        return RealField(op.grid, op.solve_dense(rhs.coeffs), copy=False), 0
    x, iters = op.solve_cg(rhs.coeffs, tol=tol, max_iter=max_iter)
    return RealField(op.grid, x, copy=False), iters


def _require_zero_mean(u: RealField, what: str):
    scale = max(l2_norm(u), 1e-300)
    if abs(mean(u)) > 1e-10 * scale:
        raise NonZeroMean(f"{what} must have zero mean "
                          f"(got mean {mean(u):.3e})")


# -- control results -------------------------------------------------------

@dataclass
class ControlResult:
    """Outcome of an exact-control solve."""

    h0: RealField
    traj: Trajectory
    iterations: int
    contraction_history: list
    terminal_error: float
    h0_reverse: RealField | None = None


@dataclass
class StabilizationResult:
    traj: Trajectory
    lambda_fit: float
    rsquared: float
    fit_window: tuple


def _warn_if_large(norm: float, what: str):
    if norm > SMALLNESS_THRESHOLD:
        warnings.warn(
            f"{what} norm {norm:.3g} exceeds the smallness threshold "
            f"{SMALLNESS_THRESHOLD:g}; the contraction may fail "
            f"(consider stabilizing first)", stacklevel=3)


def picard_control(u0: RealField, profile: DampingProfile, T: float, *,
                   dt: float = 1e-3, n_quad: int | None = None,
                   tol: float = 1e-8, max_iter: int = 30,
                   save_every: int | None = None) -> ControlResult:
    """Steer u0 to zero at time T through the nonlinear flow.

    Fixed point on the free wave datum h: each iteration runs one backward
    nonlinear solve with source g = -G G U(t) h and corrects h by the
    Gramian inverse of the misfit at t = 0.  The returned trajectory is the
    forward verification run under the converged control; its endpoint norm
    is terminal_error.
    """
    _require_zero_mean(u0, "picard_control initial state")
    unorm = l2_norm(u0)
    n_steps = max(int(round(T / dt)), 8)
    if unorm == 0:
        # already at rest: the zero control is exact
        sv = save_every or max(n_steps // 256, 1)
        tg = TimeGrid(0.0, T, n_steps)
        idx = np.arange(0, n_steps + 1, sv)
        if idx[-1] != n_steps:
            idx = np.append(idx, n_steps)
        zeros = [RealField.zero(u0.grid) for _ in idx]
        traj = Trajectory(u0.grid, tg.times[idx], zeros)
        return ControlResult(h0=RealField.zero(u0.grid), traj=traj,
                             iterations=0, contraction_history=[],
                             terminal_error=0.0)
    _warn_if_large(unorm, "initial state")
    if n_quad is None:
        n_quad = n_steps
    op = GramianOperator(profile, T, n_quad)
    tg = TimeGrid(0.0, T, n_steps)
    grid = u0.grid
    zero_T = RealField.zero(grid)

    h = RealField(grid, op.solve_dense(u0.coeffs), copy=False)
    history = []
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        back = integrate_terminal(zero_T, ControlSource(h, profile), tg,
                                  nonlinear=True, save_every=n_steps)
        misfit = u0.coeffs - back[0].coeffs
        delta = op.solve_dense(misfit)
        h = RealField(grid, h.coeffs + delta, copy=False)
        step = float(np.linalg.norm(delta)) / np.sqrt(TWO_PI)
        history.append(step)
        if step <= tol * unorm:
            converged = True
            break
    if not converged:
        raise NoConvergence(iterations, residual=history[-1],
                            message=f"picard iteration stalled at update "
                                    f"{history[-1]:.3e} after {iterations} "
                                    f"iterations")
    sv = save_every or max(n_steps // 256, 1)
    fwd = integrate(u0, ControlSource(h, profile), tg, nonlinear=True,
                    save_every=sv)
    return ControlResult(h0=h, traj=fwd, iterations=iterations,
                         contraction_history=history,
                         terminal_error=l2_norm(fwd[-1]))


class _ReversedControlSource(Source):
    """Control for the second steering leg, read through the reversal map.

    If ub is the backward-steered solution with free datum h0 on [0, T_half],
    then v(x, t) = ub(-x, T_half - (t - t_off)) solves the flow on
    [t_off, t_off + T_half] with source +reflect(G G U(T_half - tau) h0).
    """

    def __init__(self, h0: RealField, profile: DampingProfile,
                 T_half: float, t_off: float):
        self.h0 = h0
        self.profile = profile
        self.T_half = T_half
        self.t_off = t_off
        grid = h0.grid
        xi = grid.freqs.astype(float)
        self._omega = xi * np.abs(xi)
        self._rev = (grid.n_modes - np.arange(grid.n_modes)) % grid.n_modes
        self._h0c = h0.coeffs.copy()

    def coeffs_at(self, t, u_coeffs):
        s = self.T_half - (t - self.t_off)
        h = np.exp(-1j * s * self._omega) * self._h0c
        g = self.profile.GG_coeffs(h)
        return g[self._rev]


def steer(u0: RealField, u1: RealField, profile: DampingProfile, T: float, *,
          dt: float = 1e-3, tol: float = 1e-8, max_iter: int = 30,
          save_every: int | None = None) -> ControlResult:
    """Steer u0 to u1 over [0, T]: drive to zero, then reach the target.

    The second leg uses the reversal symmetry (x, t) -> (-x, T - t) of the
    flow, which turns a drive-to-zero control for reflect(u1) into a
    reach-from-zero control.  Both legs get T/2.  Endpoint means must agree
    and be zero (the mean is conserved; nonzero common mean would need the
    moving-frame damping reduction, which is out of scope here).
    """
    if u0.grid.n_modes != u1.grid.n_modes:
        from .errors import GridMismatch
        raise GridMismatch("steer endpoints live on different grids")
    m0, m1 = mean(u0), mean(u1)
    scale = max(l2_norm(u0), l2_norm(u1), 1.0)
    if abs(m0 - m1) > 1e-10 * scale:
        raise MeanMismatch(
            f"endpoint means differ: {m0:.6e} vs {m1:.6e} "
            f"(the mean is invariant under the controlled flow)")
    _require_zero_mean(u0, "steer initial state")
    _require_zero_mean(u1, "steer target state")
    if l2_norm(u0) == 0 and l2_norm(u1) == 0:
        # rest to rest: the zero control is exact
        res = picard_control(u0, profile, T, dt=dt, save_every=save_every)
        return ControlResult(h0=res.h0, traj=res.traj, iterations=0,
                             contraction_history=[], terminal_error=0.0,
                             h0_reverse=RealField.zero(u0.grid))
    _warn_if_large(max(l2_norm(u0), l2_norm(u1)), "steering data")
    T_half = 0.5 * T
    kw = dict(dt=dt, tol=tol, max_iter=max_iter)

    hist0 = []
    if l2_norm(u0) > 0:
        leg1 = picard_control(u0, profile, T_half, **kw)
        h_fwd, hist0 = leg1.h0, leg1.contraction_history
    else:
        h_fwd = RealField.zero(u0.grid)

    hist1 = []
    if l2_norm(u1) > 0:
        leg2 = picard_control(reflect(u1), profile, T_half, **kw)
        h_rev, hist1 = leg2.h0, leg2.contraction_history
    else:
        h_rev = RealField.zero(u0.grid)

    n_half = max(int(round(T_half / dt)), 8)
    sv = save_every or max(n_half // 128, 1)
    first = integrate(u0, ControlSource(h_fwd, profile),
                      TimeGrid(0.0, T_half, n_half),
                      nonlinear=True, save_every=sv)
    src2 = _ReversedControlSource(h_rev, profile, T_half, T_half)
    second = integrate(first[-1], src2, TimeGrid(T_half, T, n_half),
                       nonlinear=True, save_every=sv)
    times = np.concatenate([first.times[:-1], second.times])
    fields = first.fields[:-1] + second.fields
    traj = Trajectory(u0.grid, times, fields)
    return ControlResult(
        h0=h_fwd, traj=traj,
        iterations=len(hist0) + len(hist1),
        contraction_history=hist0 + hist1,
        terminal_error=l2_norm(traj[-1] - u1),
        h0_reverse=h_rev)


def large_data_control(u0: RealField, profile: DampingProfile, T: float, *,
                       delta: float = SMALLNESS_THRESHOLD, dt: float = 1e-3,
                       tol: float = 1e-8, max_iter: int = 30,
                       save_every: int | None = None) -> ControlResult:
    """Drive data of any size to zero: damp first, control the remainder.

    The Picard construction only contracts near the origin, so a feedback
    stage runs in slices of T/8 until the norm drops below delta; the
    exact control then spends whatever horizon is left.  Raises
    NoConvergence when damping has not reached the basin by 3T/4.
    """
    _require_zero_mean(u0, "large_data_control initial state")
    if l2_norm(u0) <= delta:
        return picard_control(u0, profile, T, dt=dt, tol=tol,
                              max_iter=max_iter, save_every=save_every)
    slice_T = T / 8.0
    n_slice = max(int(round(slice_T / dt)), 8)
    sv = save_every or max(n_slice // 32, 1)
    u = u0
    t_used = 0.0
    times = [0.0]
    fields = [u0]
    src = FeedbackSource(profile)
    slices = 0
    while t_used < 0.75 * T - 1e-12:
        leg = integrate(u, src, TimeGrid(0.0, slice_T, n_slice),
                        nonlinear=True, save_every=sv)
        times.extend((t_used + leg.times[1:]).tolist())
        fields.extend(leg.fields[1:])
        u = leg[-1]
        t_used += slice_T
        slices += 1
        if l2_norm(u) <= delta:
            break
    if l2_norm(u) > delta:
        raise NoConvergence(slices, residual=l2_norm(u),
                            message="damping did not reach the contraction "
                                    f"basin {delta:.2e} within {t_used:.2f} "
                                    "time units")
    tail = picard_control(u, profile, T - t_used, dt=dt, tol=tol,
                          max_iter=max_iter, save_every=save_every)
    times.extend((t_used + tail.traj.times[1:]).tolist())
    fields.extend(tail.traj.fields[1:])
    traj = Trajectory(u0.grid, np.asarray(times), fields)
    return ControlResult(h0=tail.h0, traj=traj, iterations=tail.iterations,
                         contraction_history=tail.contraction_history,
                         terminal_error=tail.terminal_error)


# -- experiments -----------------------------------------------------------

def stabilization_experiment(u0: RealField, profile: DampingProfile,
                             T: float, *, dt: float = 1e-3,
                             save_every: int = 10) -> StabilizationResult:
    """Damped feedback run with an exponential-decay fit on [T/2, T].

    lambda_fit is minus the fitted slope of log ||u(t)||; rsquared reports
    the fit quality.  The control-off profile leaves the norm constant.
    """
    n_steps = max(int(round(T / dt)), 2)
    traj = integrate(u0, FeedbackSource(profile),
                     TimeGrid(0.0, T, n_steps), nonlinear=True,
                     save_every=save_every)
    norms = np.array([l2_norm(f) for f in traj.fields])
    if np.any(norms <= 0):
        return StabilizationResult(traj, float("nan"), float("nan"),
                                   (0.5 * T, T))
    sel = traj.times >= 0.5 * T
    t_fit = traj.times[sel]
    y = np.log(norms[sel])
    slope, icpt = np.polyfit(t_fit, y, 1)
    resid = y - (slope * t_fit + icpt)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot < 1e-20:
        rsq = 1.0 if ss_res < 1e-20 else 0.0
    else:
        rsq = 1.0 - ss_res / ss_tot
    return StabilizationResult(traj, float(-slope), rsq, (0.5 * T, T))


def observability_ratio(u0: RealField, profile: DampingProfile, T: float, *,
                        dt: float = 2e-3, nonlinear: bool = True,
                        damped: bool = True) -> float:
    """||u0||^2 / int_0^T ||G u||^2 dt along the chosen flow.

    Default flow is the damped nonlinear loop; damped=False runs the free
    flow (useful against the Gramian quadratic form).  Trapezoid in time.
    """
    if l2_norm(u0) == 0:
        raise ZeroData("observability ratio of the zero state")
    n_steps = max(int(round(T / dt)), 2)
    src = FeedbackSource(profile) if damped else ZeroSource()
    traj = integrate(u0, src, TimeGrid(0.0, T, n_steps),
                     nonlinear=nonlinear, save_every=1)
    gnorm2 = np.array([np.linalg.norm(profile.G_coeffs(f.coeffs)) ** 2 / TWO_PI
                       for f in traj.fields])
    denom = float(np.trapezoid(gnorm2, traj.times))
    if denom == 0:
        return float("inf")
    return l2_norm(u0) ** 2 / denom


def linear_gap(u0: RealField, profile: DampingProfile, T: float, *,
               dt: float = 1e-3, save_every: int = 10) -> float:
    """sup_t ||u - u_L|| between damped nonlinear and damped linear flows."""
    n_steps = max(int(round(T / dt)), 2)
    tg = TimeGrid(0.0, T, n_steps)
    nl = integrate(u0, FeedbackSource(profile), tg, nonlinear=True,
                   save_every=save_every)
    ln = integrate(u0, FeedbackSource(profile), tg, nonlinear=False,
                   save_every=save_every)
    return max(l2_norm(a - b) for a, b in zip(nl.fields, ln.fields))
