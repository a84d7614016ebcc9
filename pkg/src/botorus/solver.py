"""Time integration of u_t + H u_xx - u u_x = g on the torus.

The integrator is an integrating-factor RK4: the dispersive symbol
-i xi |xi| is purely imaginary, so the linear flow is applied as an exact
phase rotation between explicit RK4 stages.  For a state-independent source
and the linear equation this reduces to composite Simpson quadrature of the
Duhamel integral with exact phase transport, which the control module relies
on.  Backward (terminal-value) integration runs the same scheme with a
negative step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BlowUp, GridMismatch
from .spectral import (
    TWO_PI, ComplexField, GridSpec, RealField, _Field, product_coeffs,
)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid with n_steps steps from t0 to t1."""

    t0: float
    t1: float
    n_steps: int

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.t1 == self.t0:
            raise ValueError("empty time interval")

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.n_steps

    @cached_property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)


def default_dt(u0: RealField) -> float:
    """min(1e-3, 0.5 / (max|xi| max|u|)), the documented default step."""
    from .spectral import sup_norm
    ximax = float(np.max(np.abs(u0.grid.freqs)))
    amp = sup_norm(u0)
    if amp == 0:
        return 1e-3
    return min(1e-3, 0.5 / (ximax * amp))


@dataclass
class Trajectory:
    """Fields sampled on a uniform time grid (forward-ordered)."""

    grid: GridSpec
    times: np.ndarray
    fields: list

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.fields) != self.times.shape[0]:
            raise ValueError("times and fields length mismatch")

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, k):
        return self.fields[k]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    def stack(self) -> np.ndarray:
        """(n_times, n_modes) complex coefficient array."""
        return np.array([f.coeffs for f in self.fields])

    @classmethod
    def from_stack(cls, grid, times, stack, real=True):
        fcls = RealField if real else ComplexField
        return cls(grid, times, [fcls(grid, row) for row in stack])

    def index_of(self, t: float) -> int:
        k = int(round((t - self.times[0]) / self.dt)) if len(self) > 1 else 0
        if k < 0 or k >= len(self) or abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not a stored node")
        return k

    def at_time(self, t: float):
        return self.fields[self.index_of(t)]


# -- sources ---------------------------------------------------------------

class Source:
    """Forcing term g; subclasses fill in coeffs_at(t, u_coeffs)."""

    state_dependent = False

    def coeffs_at(self, t: float, u_coeffs: np.ndarray):
        raise NotImplementedError


class ZeroSource(Source):
    def coeffs_at(self, t, u_coeffs):
        return None

    def __repr__(self):
        return "ZeroSource()"


class CallableSource(Source):
    """g(t) supplied as a callable returning a field or coefficient array."""

    def __init__(self, fn, grid: GridSpec):
        self.fn = fn
        self.grid = grid

    def coeffs_at(self, t, u_coeffs):
        g = self.fn(t)
        return g.coeffs if isinstance(g, _Field) else np.asarray(g)


class FixedSource(Source):
    """g sampled on a uniform time grid; cubic interpolation at stage times."""

    def __init__(self, traj: Trajectory):
        if len(traj) < 2:
            raise ValueError("fixed source needs at least two samples")
        self.traj = traj
        self._stack = traj.stack()
        self._t0 = float(traj.times[0])
        self._dt = traj.dt

    def coeffs_at(self, t, u_coeffs):
        m = self._stack.shape[0]
        s = (t - self._t0) / self._dt
        k = int(round(s))
        if 0 <= k < m and abs(s - k) < 1e-8:
            return self._stack[k]
        if s < -1e-8 or s > m - 1 + 1e-8:
            raise ValueError(f"fixed source queried outside its span (t = {t})")
        if m < 4:
            # linear fallback for tiny tables
            i = min(max(int(np.floor(s)), 0), m - 2)
            w = s - i
            return (1 - w) * self._stack[i] + w * self._stack[i + 1]
        j0 = min(max(int(np.floor(s)) - 1, 0), m - 4)
        out = np.zeros_like(self._stack[0])
        for j in range(j0, j0 + 4):
            w = 1.0
            for l in range(j0, j0 + 4):
                if l != j:
                    w *= (s - l) / (j - l)
            out += w * self._stack[j]
        return out


class FeedbackSource(Source):
    """Damping loop g = -G G* u evaluated on the current state."""

    state_dependent = True

    def __init__(self, profile):
        self.profile = profile

    def coeffs_at(self, t, u_coeffs):
        return -self.profile.GG_coeffs(u_coeffs)


class ControlSource(Source):
    """HUM control loop g(t) = -G G* U(t) h0 with U the free group."""

    def __init__(self, h0: RealField, profile):
        self.h0 = h0
        self.profile = profile
        xi = h0.grid.freqs.astype(float)
        self._omega = xi * np.abs(xi)
        self._h0c = h0.coeffs.copy()

    def coeffs_at(self, t, u_coeffs):
        h = np.exp(-1j * t * self._omega) * self._h0c
        return -self.profile.GG_coeffs(h)


# -- integrator ------------------------------------------------------------

def _nl_mult(grid: GridSpec) -> np.ndarray:
    # (u u_x)^ = 0.5 * i xi * (u^2)^
    return 0.5j * grid.freqs.astype(float)


def _step_ifrk4(c, t, dt, E, E2, rhs):
    a = rhs(c, t)
    ua = E2 * (c + (0.5 * dt) * a)
    b = rhs(ua, t + 0.5 * dt)
    ub = E2 * c + (0.5 * dt) * b
    cc = rhs(ub, t + 0.5 * dt)
    uc = E * c + dt * (E2 * cc)
    d = rhs(uc, t + dt)
    return E * c + (dt / 6.0) * (E * a + 2.0 * E2 * (b + cc) + d)


def _run(u0, src, tgrid, nonlinear, save_every, blowup_threshold, backward):
    grid = u0.grid
    n = grid.n_modes
    cut = grid.dealias_cut
    xi = grid.freqs.astype(float)
    symbol = -1j * xi * np.abs(xi)
    dt = -tgrid.dt if backward else tgrid.dt
    E = np.exp(symbol * dt)
    E2 = np.exp(symbol * (0.5 * dt))
    nlm = _nl_mult(grid)
    zero = np.zeros(n, dtype=np.complex128)

    def rhs(c, t):
        out = nlm * product_coeffs(c, c, n, cut) if nonlinear else zero.copy()
        g = src.coeffs_at(t, c)
        if g is not None:
            out = out + g
        return out

    c = u0.coeffs.copy()
    norm0 = np.linalg.norm(c)
    limit = blowup_threshold * (1.0 + norm0)
    t = tgrid.t1 if backward else tgrid.t0
    saved = [(t, c.copy())]
    for k in range(tgrid.n_steps):
        c = _step_ifrk4(c, t, dt, E, E2, rhs)
        t = (tgrid.t1 if backward else tgrid.t0) + (k + 1) * dt
        if not np.all(np.isfinite(c)) or np.linalg.norm(c) > limit:
            raise BlowUp(k + 1, t=t)
        if (k + 1) % save_every == 0 or k + 1 == tgrid.n_steps:
            saved.append((t, c.copy()))
    if backward:
        saved.reverse()
    times = np.array([s[0] for s in saved])
    fields = [RealField(grid, s[1], copy=False) for s in saved]
    return Trajectory(grid, times, fields)


def integrate(u0: RealField, src: Source, tgrid: TimeGrid, *,
              nonlinear: bool = True, save_every: int = 1,
              blowup_threshold: float = 1e8) -> Trajectory:
    """March u0 from t0 to t1; returns the saved trajectory.

    Raises BlowUp (with the failing step index) if the state leaves the
    finite regime.  The zero Fourier mode is exact: the nonlinear flux and
    every G-built source have no mean component.
    """
    return _run(u0, src, tgrid, nonlinear, save_every, blowup_threshold,
                backward=False)


def integrate_terminal(uT: RealField, src: Source, tgrid: TimeGrid, *,
                       nonlinear: bool = True, save_every: int = 1,
                       blowup_threshold: float = 1e8) -> Trajectory:
    """Integrate backward from u(t1) = uT; trajectory is returned forward in time."""
    return _run(uT, src, tgrid, nonlinear, save_every, blowup_threshold,
                backward=True)


def integrate_window(u0: RealField, src: Source, T: float, dt: float, *,
                     nonlinear: bool = True,
                     back_fraction: float = 0.5,
                     forward_fraction: float = 1.5) -> Trajectory:
    """Trajectory on [-back_fraction*T, forward_fraction*T] through u(0) = u0.

    Grown dynamically in both directions so that restriction-norm cutoffs see
    a smooth extension rather than a clamped one.
    """
    n_back = max(int(round(back_fraction * T / dt)), 1)
    n_fwd = max(int(round(forward_fraction * T / dt)), 1)
    back = integrate_terminal(u0, src, TimeGrid(-n_back * dt, 0.0, n_back),
                              nonlinear=nonlinear)
    fwd = integrate(u0, src, TimeGrid(0.0, n_fwd * dt, n_fwd),
                    nonlinear=nonlinear)
    times = np.concatenate([back.times[:-1], fwd.times])
    fields = back.fields[:-1] + fwd.fields
    return Trajectory(u0.grid, times, fields)


def residual(traj: Trajectory, src: Source, *, nonlinear: bool = True) -> np.ndarray:
    """Centered-difference defect of the PDE at each interior saved node.

    Returns the L2 norm of u_t + H u_xx - u u_x - g per node (length
    len(traj) - 2); second-order in the stored spacing.
    """
    if len(traj) < 3:
        raise ValueError("residual needs at least three nodes")
    dts = np.diff(traj.times)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * abs(dts[0]):
        raise ValueError("residual needs uniform node spacing")
    dt = dts[0]
    grid = traj.grid
    n, cut = grid.n_modes, grid.dealias_cut
    xi = grid.freqs.astype(float)
    lin = 1j * xi * np.abs(xi)   # (H u_xx)^ multiplier
    nlm = _nl_mult(grid)
    stack = traj.stack()
    out = np.empty(len(traj) - 2)
    for k in range(1, len(traj) - 1):
        c = stack[k]
        rc = (stack[k + 1] - stack[k - 1]) / (2.0 * dt) + lin * c
        if nonlinear:
            rc = rc - nlm * product_coeffs(c, c, n, cut)
        g = src.coeffs_at(float(traj.times[k]), c)
        if g is not None:
            rc = rc - g
        out[k - 1] = np.linalg.norm(rc) / np.sqrt(TWO_PI)
    return out
