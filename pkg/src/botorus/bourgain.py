"""Discrete dispersive space-time norms and empirical inequality checks.

Restriction norms over a horizon [0, T] are never minimized over extensions;
every check uses one canonical extension: multiply the trajectory by a fixed
smooth cutoff equal to 1 on [0, T] and supported in (-T/2, 3T/2), then
periodize over a window of length 4 T.  All reported inequalities are
therefore conservative upper bounds of the restriction-norm statements.

Space-time spectra store Fourier series amplitudes: coeffs[m, j] is the
complex amplitude of e^{i (xi_j x + tau_m t)}, so a plane wave of modulus A
occupies a single lattice point with |coeff| = A and the weighted norms
below need no window-volume factors.  The dispersive weight is
<tau + xi |xi|>, which vanishes in argument on solutions of the free flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .gauge import gauge, gauge_rhs
from .solver import Trajectory
from .spectral import TWO_PI, ComplexField, GridSpec, RealField, l2_norm

__all__ = [
    "SpaceTimeSpectrum", "NormReport", "time_cutoff", "free_trajectory",
    "xsb_norm", "zsb_norm", "ztilde_norm", "x2prime_norm",
    "l4_norm", "linf_l2_norm", "x_composite_norm",
    "strichartz_check", "smoothing_check", "bilinear_check",
    "bilinear_scaling_check", "highfreq_exp_check", "interpolation_check",
]


def _smooth_step(s: np.ndarray) -> np.ndarray:
    """C-infinity monotone 0 -> 1 transition on [0, 1]."""
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return a / (a + b)


def time_cutoff(t, T: float) -> np.ndarray:
    """Smooth bump equal to 1 on [0, T], supported in (-T/2, 3T/2)."""
    t = np.asarray(t, dtype=float)
    ramp_in = _smooth_step((t + 0.5 * T) / (0.5 * T))
    ramp_out = _smooth_step((1.5 * T - t) / (0.5 * T))
    return ramp_in * ramp_out


def free_trajectory(u0, times) -> Trajectory:
    """Samples of the free group orbit through u0 at the given times."""
    times = np.asarray(times, dtype=float)
    xi = u0.grid.freqs.astype(float)
    omega = xi * np.abs(xi)
    cls = type(u0)
    fields = [cls(u0.grid, np.exp(-1j * t * omega) * u0.coeffs)
              for t in times]
    return Trajectory(u0.grid, times, fields)


@dataclass
class SpaceTimeSpectrum:
    """Amplitudes on the (xi, tau) lattice of a periodized cutoff extension."""

    grid: GridSpec
    t_period: float
    taus: np.ndarray
    coeffs: np.ndarray      # shape (n_taus, n_modes)
    T: float

    def __post_init__(self):
        self.taus = np.asarray(self.taus, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (self.taus.shape[0], self.grid.n_modes):
            raise ValueError("coefficient array shape mismatch")

    @classmethod
    def from_trajectory(cls, traj: Trajectory, T: float, *,
                        t_period: float | None = None) -> "SpaceTimeSpectrum":
        """Cutoff, periodize, and transform a uniformly sampled trajectory.

        The trajectory must cover the cutoff support [-T/2, 3T/2]; its
        uniform spacing becomes the time sampling of the window.
        """
        if T <= 0:
            raise ValueError("T must be positive")
        W = 4.0 * T if t_period is None else float(t_period)
        if W < 2.0 * T - 1e-9:
            raise ValueError("t_period must be at least twice the horizon")
        dt = traj.dt
        if dt <= 0:
            raise ValueError("need at least two trajectory nodes")
        M = int(round(W / dt))
        if abs(M * dt - W) > 1e-9 * W:
            raise ValueError("window is not a whole number of time steps")
        half = int(round(0.5 * T / dt))
        if abs(half * dt - 0.5 * T) > 1e-9 * max(T, 1.0):
            raise ValueError("T/2 must sit on the trajectory time lattice")
        t0 = -0.5 * T
        if (traj.times[0] > t0 + 1e-9 or
                traj.times[-1] < 1.5 * T - 1e-9):
            raise ValueError(
                "trajectory does not span the cutoff support [-T/2, 3T/2]")
        tm = t0 + dt * np.arange(M)
        eta = time_cutoff(tm, T)
        stack = traj.stack() / TWO_PI   # series amplitudes per node
        V = np.zeros((M, traj.grid.n_modes), dtype=np.complex128)
        live = np.nonzero(eta > 0.0)[0]
        shift = (t0 - traj.times[0]) / dt
        base = int(round(shift))
        if abs(shift - base) > 1e-6:
            raise ValueError("trajectory nodes miss the window time lattice")
        for m in live:
            V[m] = eta[m] * stack[base + m]
        F = np.fft.fft(V, axis=0) / M
        k = np.concatenate([np.arange(0, M // 2 + 1),
                            np.arange(-((M - 1) // 2), 0)])
        taus = (TWO_PI / W) * k
        F *= np.exp(-1j * taus * t0)[:, None]
        if M % 2 == 0:
            F[M // 2] = 0.0   # drop the unpaired tau-Nyquist row
        return cls(traj.grid, W, taus, F, T)

    def __add__(self, other: "SpaceTimeSpectrum") -> "SpaceTimeSpectrum":
        if (self.grid.n_modes != other.grid.n_modes or
                self.taus.shape != other.taus.shape or
                abs(self.t_period - other.t_period) > 1e-12):
            raise ValueError("space-time lattices differ")
        return SpaceTimeSpectrum(self.grid, self.t_period, self.taus,
                                 self.coeffs + other.coeffs, self.T)

    def __rmul__(self, c) -> "SpaceTimeSpectrum":
        return SpaceTimeSpectrum(self.grid, self.t_period, self.taus,
                                 c * self.coeffs, self.T)


def _weights(v: SpaceTimeSpectrum, s: float, b: float) -> np.ndarray:
    xi = v.grid.freqs.astype(float)
    sigma = v.taus[:, None] + (xi * np.abs(xi))[None, :]
    return ((1.0 + np.abs(sigma)) ** b) * ((1.0 + np.abs(xi)) ** s)[None, :]


def xsb_norm(v: SpaceTimeSpectrum, s: float, b: float) -> float:
    """Weighted l2 of the lattice amplitudes: <tau + xi|xi|>^b <xi>^s."""
    return float(np.linalg.norm(_weights(v, s, b) * v.coeffs))


def zsb_norm(v: SpaceTimeSpectrum, s: float, b: float) -> float:
    """l2 over xi of the weighted l1 over tau (sup-in-time flavor).

    The display in the source text integrates in the opposite order, which
    would not control sup-in-time; the l2_xi(l1_tau) order implemented here
    is the one the continuous embedding into C_t H^s actually uses.
    """
    col = np.sum(_weights(v, s, b) * np.abs(v.coeffs), axis=0)
    return float(np.linalg.norm(col))


def ztilde_norm(v: SpaceTimeSpectrum, s: float, b: float) -> float:
    """Zero mode plus square-summed sharp dyadic blocks of zsb_norm."""
    xi = np.abs(v.grid.freqs)
    w = _weights(v, s, b) * np.abs(v.coeffs)
    col = np.sum(w, axis=0)
    total = float(np.linalg.norm(col[xi == 0]))
    block2 = 0.0
    N = 1
    ximax = int(np.max(xi)) if xi.size else 0
    while N <= ximax:
        sel = (xi >= N) & (xi < 2 * N)
        if np.any(sel):
            block2 += float(np.sum(col[sel] ** 2))
        N *= 2
    return total + float(np.sqrt(block2))


def x2prime_norm(v: SpaceTimeSpectrum) -> float:
    """Smoothing-estimate target norm: X^{0,-1/2} plus Ztilde^{0,-1}."""
    return xsb_norm(v, 0.0, -0.5) + ztilde_norm(v, 0.0, -1.0)


def continuum_scale(v: SpaceTimeSpectrum) -> float:
    """Factor turning amplitude-convention norms into space-time integrals.

    Parseval on the window gives ||v||_{L2(T x window)} equal to
    sqrt(2 pi W) times the amplitude-l2; inequality checks apply this so
    both sides carry the same measure normalization.
    """
    return float(np.sqrt(TWO_PI * v.t_period))


# -- trajectory norms on the horizon ---------------------------------------

def _horizon_nodes(traj: Trajectory, T: float) -> np.ndarray:
    sel = (traj.times >= -1e-12) & (traj.times <= T + 1e-12)
    idx = np.nonzero(sel)[0]
    if idx.size < 2:
        raise ValueError("trajectory has fewer than two nodes in [0, T]")
    return idx

def l4_norm(traj: Trajectory, T: float) -> float:
    """Space-time L4 norm over [0, T], trapezoid in t, padded quadrature in x."""
    idx = _horizon_nodes(traj, T)
    slab = []
    for k in idx:
        vals = traj.fields[k].values(pad=2)
        slab.append(np.mean(np.abs(vals) ** 4) * TWO_PI)
    return float(np.trapezoid(np.array(slab), traj.times[idx]) ** 0.25)


def linf_l2_norm(traj: Trajectory, T: float) -> float:
    idx = _horizon_nodes(traj, T)
    return max(l2_norm(traj.fields[k]) for k in idx)


def x_composite_norm(u_traj: Trajectory, w_traj: Trajectory, T: float, *,
                     t_period: float | None = None) -> float:
    """Five-component solution norm of the state and its gauge pair.

    L-infinity-in-time L2 and space-time L4 of u on [0, T], plus the
    canonical-extension norms X^{-1,1}(u), X^{0,1/2}(w), Ztilde^{0,0}(w),
    the latter in continuum (space-time integral) normalization.
    """
    if (len(u_traj) != len(w_traj) or
            not np.allclose(u_traj.times, w_traj.times)):
        raise ValueError("state and gauge trajectories are not aligned")
    vu = SpaceTimeSpectrum.from_trajectory(u_traj, T, t_period=t_period)
    vw = SpaceTimeSpectrum.from_trajectory(w_traj, T, t_period=t_period)
    cs = continuum_scale(vu)
    return (linf_l2_norm(u_traj, T) + l4_norm(u_traj, T)
            + cs * xsb_norm(vu, -1.0, 1.0) + cs * xsb_norm(vw, 0.0, 0.5)
            + cs * ztilde_norm(vw, 0.0, 0.0))


# -- reports and ensemble checks -------------------------------------------

@dataclass
class NormReport:
    """Outcome of one empirical inequality check."""

    name: str
    lhs: float
    rhs: float
    ratio: float
    ensemble_max_ratio: float
    seed: int | None = None
    details: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
             "ratio": self.ratio,
             "ensemble_max_ratio": self.ensemble_max_ratio}
        if self.seed is not None:
            d["seed"] = self.seed
        d.update(self.details)
        return d


def _random_real(grid: GridSpec, rng, *, xi0=6.0, band=None, norm=1.0):
    band = band or grid.dealias_cut
    c = np.zeros(grid.n_modes, dtype=np.complex128)
    for xi in range(1, band + 1):
        z = (rng.normal() + 1j * rng.normal()) * np.exp(-((xi / xi0) ** 2))
        c[xi] = z
        c[grid.n_modes - xi] = np.conj(z)
    f = RealField(grid, c, copy=False)
    nrm = l2_norm(f)
    return (norm / nrm) * f if nrm > 0 else f


def strichartz_check(ensemble_size: int = 16, seed: int = 0, *,
                     grid: GridSpec | None = None, T: float = 1.0,
                     dt: float = 1.0 / 256.0,
                     nonlinear: bool = False,
                     amplitude: float = 1e-2) -> NormReport:
    """L4 space-time norm against X^{0,3/8} of the cutoff extension.

    Members are window trajectories through random smooth data (free flow
    by default; nonlinear=True runs the full equation at the given
    amplitude).  Reports the worst ratio over the ensemble.
    """
    if ensemble_size < 1:
        raise ValueError("ensemble_size must be at least 1")
    grid = grid or GridSpec(64)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(ensemble_size):
        u0 = _random_real(grid, rng, norm=amplitude)
        traj = _window_members(u0, T, dt, nonlinear)
        v = SpaceTimeSpectrum.from_trajectory(traj, T)
        lhs = l4_norm(traj, T)
        rhs = continuum_scale(v) * xsb_norm(v, 0.0, 0.375)
        if rhs > 0:
            ratios.append(lhs / rhs)
    lhs, rhs = float(lhs), float(rhs)
    worst = max(ratios) if ratios else 0.0
    return NormReport("strichartz", lhs, rhs,
                      lhs / rhs if rhs > 0 else 0.0, worst, seed,
                      {"ensemble_size": ensemble_size, "ratios": ratios,
                       "n_modes": grid.n_modes, "T": T})


def _window_members(u0, T, dt, nonlinear):
    if nonlinear:
        from .solver import ZeroSource, integrate_window
        return integrate_window(u0, ZeroSource(), T, dt)
    n_back = int(round(0.5 * T / dt))
    n_fwd = int(round(1.5 * T / dt))
    times = dt * np.arange(-n_back, n_fwd + 1)
    return free_trajectory(u0, times)


def smoothing_check(ensemble_size: int = 8, seed: int = 0, *,
                    grid: GridSpec | None = None,
                    T_list=(1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0),
                    dt: float = 1.0 / 256.0,
                    t_period: float = 16.0,
                    epsilon: float = 0.35) -> NormReport:
    """Horizon gain of the smoothing norm over the space-time L2 norm.

    The estimate under test trades a power of the horizon for half a unit
    of dispersive regularity: x2prime of a cutoff piece is bounded by
    T^{1/2-eps} times its space-time L2 norm, for every positive eps.
    Members are cutoff free orbits of random data, the family
    concentrated on the dispersive shell which saturates the gain
    (off-shell content ships a T-independent ratio far below the bound).
    The fitted log-log "slope" of the worst ratio against T is expected
    to reach at least 1/2 - epsilon.

    The epsilon is not decoration.  The l1-in-tau pieces of x2prime sum
    <sigma>^{-1/2} and <sigma>^{-1} over the 1/T spread of the cutoff,
    which costs a logarithm of T; the measured slope therefore approaches
    1/2 like 1/2 - O(1/log(1/T)) and sits well below it on moderate
    horizons.  The default epsilon absorbs that loss for the default
    T_list; tightening it requires pushing T_list toward zero.  Two
    diagnostics expose the mechanism: "slope_regularized" fits the same
    sweep with the weight <sigma>^{-1/2+epsilon} that a Cauchy-Schwarz in
    tau converts the l1 sums into, and "domination" records the worst
    lattice constant of that conversion.

    The periodization window stays fixed across the sweep so the tau
    lattice resolves the 1/T spread of every cutoff; tying the window to T
    would leave the lattice exactly too coarse to see any gain.
    """
    grid = grid or GridSpec(64)
    rng = np.random.default_rng(seed)
    T_list = sorted(T_list)
    if 4.0 * max(T_list) > t_period + 1e-12:
        raise ValueError("t_period must cover four times the largest T")
    data = [_random_real(grid, rng) for _ in range(ensemble_size)]
    cont = float(np.sqrt(TWO_PI * t_period))
    reg_by_T, full_by_T = [], []
    domination = 0.0
    for T in T_list:
        worst_reg, worst_full = 0.0, 0.0
        for z0 in data:
            traj = _window_members(z0, T, dt, nonlinear=False)
            v = SpaceTimeSpectrum.from_trajectory(traj, T,
                                                  t_period=t_period)
            reg = cont * xsb_norm(v, 0.0, -0.5 + epsilon)
            full = cont * x2prime_norm(v)
            rhs = np.sqrt(T) * l2_norm(z0)   # the free flow conserves L2
            if rhs > 0:
                worst_reg = max(worst_reg, reg / rhs)
                worst_full = max(worst_full, full / rhs)
            if reg > 0:
                domination = max(domination, full / reg)
        reg_by_T.append(worst_reg)
        full_by_T.append(worst_full)
    logT = np.log(T_list)
    slope = float(np.polyfit(logT, np.log(full_by_T), 1)[0])
    slope_reg = float(np.polyfit(logT, np.log(reg_by_T), 1)[0])
    lhs, rhs = full_by_T[-1], 1.0
    return NormReport("smoothing", lhs, rhs, lhs, max(full_by_T), seed,
                      {"T_list": list(T_list), "epsilon": epsilon,
                       "slope": slope, "slope_target": 0.5 - epsilon,
                       "slope_regularized": slope_reg,
                       "domination": domination,
                       "max_ratio_by_T": full_by_T,
                       "reg_ratio_by_T": reg_by_T,
                       "ensemble_size": ensemble_size})


def term_one_trajectory(u_traj: Trajectory) -> Trajectory:
    """Gauge-evolution bilinear term along a state trajectory."""
    fields = []
    for f in u_traj.fields:
        state = gauge(f)
        fields.append(gauge_rhs(state)[0])
    return Trajectory(u_traj.grid, u_traj.times, fields)


def gauge_trajectory(u_traj: Trajectory) -> Trajectory:
    """w = dx P+ e^{-iF/2} along a state trajectory."""
    fields = [gauge(f).w for f in u_traj.fields]
    return Trajectory(u_traj.grid, u_traj.times, fields)


def bilinear_check(u_traj: Trajectory, w_traj: Trajectory,
                   T: float, *, theta: float = 0.125,
                   t_period: float | None = None,
                   seed: int | None = None) -> NormReport:
    """x2prime of the bilinear gauge term against T^theta times the
    squared composite norm of the pair."""
    b_traj = term_one_trajectory(u_traj)
    vb = SpaceTimeSpectrum.from_trajectory(b_traj, T, t_period=t_period)
    lhs = continuum_scale(vb) * x2prime_norm(vb)
    comp = x_composite_norm(u_traj, w_traj, T, t_period=t_period)
    rhs = (T ** theta) * comp ** 2
    ratio = lhs / rhs if rhs > 0 else 0.0
    return NormReport("bilinear", lhs, rhs, ratio, ratio, seed,
                      {"theta": theta, "composite": comp, "T": T})


def bilinear_scaling_check(ensemble_size: int = 3, seed: int = 0, *,
                           grid: GridSpec | None = None,
                           T_list=(1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0),
                           amplitudes=(1e-3, 3.16e-3, 1e-2),
                           dt: float = 1.0 / 256.0,
                           t_period: float = 16.0,
                           theta: float = 0.125) -> NormReport:
    """Quadratic and horizon scaling of the bilinear gauge estimate.

    Runs the full equation through random small data and applies
    bilinear_check along two axes: an amplitude sweep at the middle
    horizon (the bilinear term should grow with slope 2) and a horizon
    sweep of the worst ratio lhs / composite^2 over the ensemble (fitted
    T-exponent should not fall below theta).
    """
    grid = grid or GridSpec(64)
    rng = np.random.default_rng(seed)
    T_list = sorted(T_list)
    if 4.0 * max(T_list) > t_period + 1e-12:
        raise ValueError("t_period must cover four times the largest T")
    shapes = [_random_real(grid, rng) for _ in range(ensemble_size)]

    T_mid = T_list[len(T_list) // 2]
    lhs_by_amp = []
    for a in amplitudes:
        u0 = RealField(grid, shapes[0].coeffs * a)
        traj = _window_members(u0, T_mid, dt, nonlinear=True)
        rep = bilinear_check(traj, gauge_trajectory(traj), T_mid,
                             theta=theta)
        lhs_by_amp.append(rep.lhs)
    amp_slope = float(np.polyfit(np.log(amplitudes),
                                 np.log(lhs_by_amp), 1)[0])

    amp = amplitudes[-1]
    ratio_by_T = []
    for T in T_list:
        worst = 0.0
        for s in shapes:
            u0 = RealField(grid, s.coeffs * amp)
            traj = _window_members(u0, T, dt, nonlinear=True)
            rep = bilinear_check(traj, gauge_trajectory(traj), T,
                                 theta=theta, t_period=t_period)
            worst = max(worst, rep.lhs / rep.details["composite"] ** 2)
        ratio_by_T.append(worst)
    t_exponent = float(np.polyfit(np.log(T_list),
                                  np.log(ratio_by_T), 1)[0])
    constant = max(r / T ** theta for r, T in zip(ratio_by_T, T_list))
    lhs, rhs = ratio_by_T[-1], T_list[-1] ** theta
    return NormReport("bilinear", lhs, rhs, lhs / rhs, constant, seed,
                      {"T_list": list(T_list), "ratio_by_T": ratio_by_T,
                       "amplitudes": list(amplitudes),
                       "lhs_by_amp": lhs_by_amp,
                       "amp_slope": amp_slope, "t_exponent": t_exponent,
                       "theta": theta, "ensemble_size": ensemble_size})


def highfreq_exp_check(ensemble_size: int = 32, seed: int = 0, *,
                       grid: GridSpec | None = None,
                       N_list=(4, 8, 16, 32, 64),
                       decay: float = 1.6) -> NormReport:
    """Sup-norm decay of high-frequency blocks of gauge exponentials.

    Members are random real F with |F^(xi)| = |xi|^{-decay} and uniform
    phases; the block sup norm ||P_{>=N} e^{i F / 2}||_inf should fall
    like N^{-1/2} against ||F||_{H^1}.  Reports the fitted slope and the
    worst normalized ratio.
    """
    from .spectral import exp_gauge_full, hs_norm, project, sup_norm
    grid = grid or GridSpec(256)
    if max(N_list) > grid.n_modes // 4:
        raise ValueError("largest block exceeds a quarter of the modes")
    rng = np.random.default_rng(seed)
    n = grid.n_modes
    sup_by_N = np.zeros((ensemble_size, len(N_list)))
    worst = 0.0
    for m in range(ensemble_size):
        c = np.zeros(n, dtype=np.complex128)
        for xi in range(1, n // 2):
            z = np.exp(1j * rng.uniform(0.0, TWO_PI)) * xi ** (-decay)
            c[xi] = TWO_PI * 0.5 * z
            c[n - xi] = np.conj(c[xi])
        F = RealField(grid, c, copy=False)
        h1 = hs_norm(F, 1.0)
        e = exp_gauge_full(F, -1)
        for j, N in enumerate(N_list):
            q = sup_norm(project(e, "PgeqN", N), pad=2)
            sup_by_N[m, j] = q
            worst = max(worst, q * np.sqrt(N) / h1)
    env = np.max(sup_by_N, axis=0)
    slope = float(np.polyfit(np.log(N_list), np.log(env), 1)[0])
    lhs, rhs = float(env[-1]), float(N_list[-1] ** -0.5)
    return NormReport("highfreq", lhs, rhs, lhs / rhs, worst, seed,
                      {"N_list": list(N_list), "sup_envelope": env.tolist(),
                       "slope": slope, "decay": decay,
                       "ensemble_size": ensemble_size})


def interpolation_check(ensemble_size: int = 8, seed: int = 0, *,
                        grid: GridSpec | None = None,
                        b: float = 0.5, b_prime: float = 0.25,
                        T_list=(1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0),
                        dt: float = 1.0 / 256.0,
                        t_period: float = 16.0) -> NormReport:
    """Horizon gain of lowering the dispersive exponent.

    On cutoff free orbits the ratio X^{0,b'} / X^{0,b} should shrink like
    T^{b - b'}; the fitted slope is reported.  A fixed periodization
    window keeps the tau lattice resolution uniform across the sweep.
    """
    grid = grid or GridSpec(64)
    rng = np.random.default_rng(seed)
    T_list = sorted(T_list)
    if 4.0 * max(T_list) > t_period + 1e-12:
        raise ValueError("t_period must cover four times the largest T")
    data = [_random_real(grid, rng) for _ in range(ensemble_size)]
    ratios_by_T = []
    for T in T_list:
        worst = 0.0
        for u0 in data:
            traj = _window_members(u0, T, dt, nonlinear=False)
            v = SpaceTimeSpectrum.from_trajectory(traj, T,
                                                  t_period=t_period)
            hi = xsb_norm(v, 0.0, b)
            lo = xsb_norm(v, 0.0, b_prime)
            if hi > 0:
                worst = max(worst, lo / hi)
        ratios_by_T.append(worst)
    slope = float(np.polyfit(np.log(T_list), np.log(ratios_by_T), 1)[0])
    lhs, rhs = ratios_by_T[-1], ratios_by_T[0]
    return NormReport("interpolation", lhs, rhs,
                      lhs / rhs if rhs > 0 else 0.0,
                      max(ratios_by_T), seed,
                      {"T_list": list(T_list), "slope": slope,
                       "b": b, "b_prime": b_prime,
                       "max_ratio_by_T": ratios_by_T})
