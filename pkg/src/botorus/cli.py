"""Batch experiment runner binding the library modules to disk artifacts.

Each invocation resolves a RunConfig from built-in defaults, an optional
JSON manifest (--config), and explicit flags, in that order of increasing
precedence.  Exactly one verb executes per run and writes into the output
directory:

* ``run.ndjson``    one JSON record per line, sorted keys, no timestamps;
* ``invariants.csv``  for the time-marching verbs;
* ``fields/*.bofield``  field snapshots and control data;
* ``*.png``         rendered figures, unless --no-figures.

Every record carries the sha-256 of the resolved configuration, the seed,
and the package version, so identical configurations produce bit-identical
record streams on one platform.  Exit status: 0 success, 2 validation
failure, 3 solver blow-up or non-convergence; failures print one JSON
diagnostic line on standard error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import figures as fig
from .bourgain import (bilinear_scaling_check, highfreq_exp_check,
                       interpolation_check, smoothing_check,
                       strichartz_check)
from .control import (DampingProfile, GramianOperator, observability_ratio,
                      stabilization_experiment, steer)
from .errors import (BlowUp, NoConvergence, ParseError, ValidationError,
                     ZeroData)
from .gauge import gauge, gauge_residual, ungauge
from .invariants import InvariantReport
from .solver import TimeGrid, ZeroSource, integrate
from .spectral import (GridSpec, RealField, l2_norm, mean, project,
                       read_field, truncate, write_field)

VERBS = ("simulate", "conserved", "gauge-check", "stabilize", "steer",
         "observability", "gramian-spectrum", "norms")
CHECKS = ("strichartz", "smoothing", "bilinear", "highfreq", "interp")


# -- configuration ---------------------------------------------------------

@dataclass
class RunConfig:
    """Fully resolved description of one run."""

    verb: str
    out: str
    n_modes: int | None = 128
    dt: float = 1e-3
    T: float = 1.0
    seed: int = 0
    u0: str = "modes:(1, 0.5, 0)"
    u1: str | None = None
    profile: str = "bump"
    profile_center: float = float(np.pi)
    profile_radius: float = float(np.pi / 2)
    save_every: int = 10
    snapshot_every: int = 0        # 0 = pick about eight snapshots
    jobs: int = 1
    render: bool = True
    linear: bool = False
    tol: float = 1e-8
    max_iter: int = 30
    ensemble: int = 16
    band: int = 0                  # 0 = full dealiased band
    check: str = "strichartz"
    window: float = 16.0
    n_eigs: int = 12
    n_quad: int = 256

    def validate(self) -> None:
        if self.verb not in VERBS:
            raise ValidationError(f"unknown verb {self.verb!r}")
        if self.n_modes is None and self.verb != "norms":
            raise ValidationError("a grid size is required")
        if self.n_modes is not None:
            try:
                GridSpec(self.n_modes)
            except ValueError as e:
                raise ValidationError(str(e)) from None
        for name in ("dt", "T", "tol", "window", "profile_radius"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        for name in ("save_every", "jobs", "max_iter", "ensemble",
                     "n_eigs", "n_quad"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be at least 1")
        for name in ("seed", "snapshot_every", "band"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")
        if self.profile not in ("bump", "off"):
            raise ValidationError(f"unknown damping profile {self.profile!r}")
        if self.check not in CHECKS:
            raise ValidationError(f"unknown norm check {self.check!r}")
        if self.verb == "steer" and not self.u1:
            raise ValidationError("steer needs a target state (--u1)")
        if round(self.T / self.dt) < 1:
            raise ValidationError("horizon shorter than one time step")

    def as_dict(self) -> dict:
        return asdict(self)

    def sha(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except OSError as e:
            raise ValidationError(f"cannot read config file: {e}") from None
        except json.JSONDecodeError as e:
            raise ValidationError(f"config file is not JSON: {e}") from None
        if not isinstance(loaded, dict):
            raise ValidationError("config file must hold a JSON object")
        known = set(RunConfig.__dataclass_fields__)
        for key in loaded:
            if key not in known:
                raise ValidationError(f"unknown config key {key!r}")
        merged.update(loaded)
    for key in RunConfig.__dataclass_fields__:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if args.no_figures:
        merged["render"] = False
    merged["verb"] = args.verb
    merged.setdefault("out", f"runs/{args.verb}")
    if merged.get("dt") is None:
        # sweep checks slice dyadic horizons, so their steps must too
        merged["dt"] = 1.0 / 256.0 if args.verb == "norms" else 1e-3
    if args.verb == "norms" and "n_modes" not in merged:
        merged["n_modes"] = None   # let each check pick its natural grid
    try:
        cfg = RunConfig(**merged)
    except TypeError as e:
        raise ValidationError(str(e)) from None
    cfg.validate()
    return cfg


# -- initial data ----------------------------------------------------------

def initial_data(spec: str, grid: GridSpec) -> RealField:
    """Build a field from a textual description.

    Forms: ``modes:(xi, amp, phase), ...`` summing amp cos(xi x + phase);
    ``random:s,norm,seed`` drawing |xi|^{-s-1/2} magnitudes with uniform
    phases, rescaled to the requested L2 norm, zero mean; ``file:path``
    reading a stored field.
    """
    if spec.startswith("modes:"):
        body = spec[len("modes:"):].strip()
        if not body:
            return RealField.zero(grid)
        groups = re.findall(r"\(([^()]*)\)", body)
        rest = re.sub(r"\(([^()]*)\)", "", body).replace(",", "").strip()
        if not groups or rest:
            raise ParseError(f"cannot parse mode list {body!r}")
        modes = []
        for text in groups:
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 3:
                raise ParseError(f"mode needs (xi, amp, phase): {text!r}")
            try:
                modes.append((int(parts[0]), float(parts[1]),
                              float(parts[2])))
            except ValueError:
                raise ParseError(f"non-numeric mode entry {text!r}") from None
        return RealField.from_modes(grid, modes)
    if spec.startswith("random:"):
        parts = spec[len("random:"):].split(",")
        if len(parts) != 3:
            raise ParseError("random data needs s,norm,seed")
        try:
            s, norm, seed = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(f"non-numeric random spec {spec!r}") from None
        if norm < 0:
            raise ParseError("requested norm must be nonnegative")
        rng = np.random.default_rng(seed)
        n = grid.n_modes
        xi = np.arange(1, n // 2)
        phases = np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=xi.size))
        c = np.zeros(n, dtype=np.complex128)
        c[xi] = np.pi * xi.astype(float) ** (-s - 0.5) * phases
        c[n - xi] = np.conj(c[xi])
        f = RealField(grid, c, copy=False)
        have = l2_norm(f)
        if norm > 0 and have > 0:
            f = f * (norm / have)
        return f
    if spec.startswith("file:"):
        f = read_field(spec[len("file:"):])
        if f.grid.n_modes != grid.n_modes:
            raise ValidationError(
                f"stored field has {f.grid.n_modes} modes, run uses "
                f"{grid.n_modes}")
        if not isinstance(f, RealField):
            f = RealField(f.grid, f.coeffs)
        return f
    raise ParseError(f"unrecognized initial data spec {spec!r}")


# -- record plumbing -------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


class RecordWriter:
    """Appends stamped, key-sorted JSON records to run.ndjson."""

    def __init__(self, path: Path, stamp: dict):
        self._fh = open(path, "w")
        self._stamp = stamp

    def emit(self, record: dict) -> None:
        rec = dict(record)
        rec.update(self._stamp)
        self._fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")

    def close(self) -> None:
        self._fh.close()


def _emit_states(writer: RecordWriter, traj) -> None:
    for t, f in zip(traj.times, traj.fields):
        writer.emit({"record": "state", "t": float(t),
                     "l2": l2_norm(f), "mean": mean(f)})


def _save_snapshots(writer, outdir, traj, every: int) -> None:
    if every == 0:
        every = max(1, (len(traj) - 1) // 8 or 1)
    idx = sorted(set(range(0, len(traj), every)) | {len(traj) - 1})
    for k in idx:
        path = outdir / "fields" / f"snap-{k:06d}.bofield"
        write_field(traj.fields[k], path)
        writer.emit({"record": "snapshot", "t": float(traj.times[k]),
                     "path": str(path.relative_to(outdir))})


def _grid(cfg: RunConfig) -> GridSpec:
    return GridSpec(cfg.n_modes)


def _damping(cfg: RunConfig, grid: GridSpec) -> DampingProfile:
    if cfg.profile == "off":
        return DampingProfile.off(grid)
    return DampingProfile.bump(grid, cfg.profile_center, cfg.profile_radius)


def _march(cfg: RunConfig, u0: RealField):
    n_steps = max(int(round(cfg.T / cfg.dt)), 1)
    return integrate(u0, ZeroSource(), TimeGrid(0.0, cfg.T, n_steps),
                     nonlinear=not cfg.linear, save_every=cfg.save_every)


# -- verbs -----------------------------------------------------------------

def _run_simulate(cfg, outdir, writer):
    grid = _grid(cfg)
    traj = _march(cfg, initial_data(cfg.u0, grid))
    rep = InvariantReport.from_trajectory(traj)
    rep.to_csv(outdir / "invariants.csv")
    _emit_states(writer, traj)
    _save_snapshots(writer, outdir, traj, cfg.snapshot_every)
    writer.emit({"record": "result", "verb": cfg.verb,
                 "final_l2": l2_norm(traj.fields[-1]),
                 "final_mean": mean(traj.fields[-1]),
                 "drift": rep.max_drift()})
    if cfg.render:
        fig.spacetime(outdir, traj)
        fig.norm_history(outdir, traj)
        fig.invariant_drift(outdir, rep)


def _run_conserved(cfg, outdir, writer):
    grid = _grid(cfg)
    traj = _march(cfg, initial_data(cfg.u0, grid))
    rep = InvariantReport.from_trajectory(traj)
    rep.to_csv(outdir / "invariants.csv")
    _emit_states(writer, traj)
    drift = rep.max_drift()
    writer.emit({"record": "drift", **drift})
    writer.emit({"record": "result", "verb": cfg.verb, "drift": drift})
    if cfg.render:
        fig.invariant_drift(outdir, rep)
        fig.norm_history(outdir, traj)


def _run_gauge_check(cfg, outdir, writer):
    grid = _grid(cfg)
    traj = _march(cfg, initial_data(cfg.u0, grid))
    if len(traj) < 3:
        raise ValidationError("gauge-check needs at least three saved nodes")
    res = gauge_residual(traj)
    for t, r in zip(traj.times[1:-1], res):
        writer.emit({"record": "gauge", "t": float(t), "residual": float(r)})
    # inversion identity: P+ u = 2i w + A + B at every saved node
    worst = 0.0
    for f in traj.fields:
        two_iw, A, B = ungauge(gauge(f))
        defect = l2_norm(two_iw + A + B - project(f, "Pplus"))
        worst = max(worst, defect)
    writer.emit({"record": "result", "verb": cfg.verb,
                 "max_residual": float(np.max(res)),
                 "median_residual": float(np.median(res)),
                 "inversion_defect": worst,
                 "saved_dt": float(traj.times[1] - traj.times[0])})
    if cfg.render:
        fig.residual_history(outdir, traj.times[1:-1], res)


def _run_stabilize(cfg, outdir, writer):
    grid = _grid(cfg)
    u0 = initial_data(cfg.u0, grid)
    profile = _damping(cfg, grid)
    res = stabilization_experiment(u0, profile, cfg.T, dt=cfg.dt,
                                   save_every=cfg.save_every)
    rep = InvariantReport.from_trajectory(res.traj, profile=profile)
    rep.to_csv(outdir / "invariants.csv")
    _emit_states(writer, res.traj)
    _save_snapshots(writer, outdir, res.traj, cfg.snapshot_every)
    writer.emit({"record": "result", "verb": cfg.verb,
                 "lambda_fit": res.lambda_fit, "rsquared": res.rsquared,
                 "fit_window": list(res.fit_window),
                 "final_l2": l2_norm(res.traj.fields[-1])})
    if cfg.render:
        fig.spacetime(outdir, res.traj)
        fig.norm_history(outdir, res.traj,
                         fit=(res.lambda_fit, res.fit_window))


def _run_steer(cfg, outdir, writer):
    grid = _grid(cfg)
    u0 = initial_data(cfg.u0, grid)
    u1 = initial_data(cfg.u1, grid)
    profile = _damping(cfg, grid)
    res = steer(u0, u1, profile, cfg.T, dt=cfg.dt, tol=cfg.tol,
                max_iter=cfg.max_iter, save_every=cfg.save_every)
    _emit_states(writer, res.traj)
    for name, f in (("initial", u0), ("target", u1),
                    ("final", res.traj.fields[-1]), ("control-h0", res.h0)):
        path = outdir / "fields" / f"{name}.bofield"
        write_field(f, path)
        writer.emit({"record": "field", "name": name,
                     "path": str(path.relative_to(outdir))})
    if res.h0_reverse is not None:
        path = outdir / "fields" / "control-h0-reverse.bofield"
        write_field(res.h0_reverse, path)
        writer.emit({"record": "field", "name": "control-h0-reverse",
                     "path": str(path.relative_to(outdir))})
    writer.emit({"record": "result", "verb": cfg.verb,
                 "terminal_error": res.terminal_error,
                 "iterations": res.iterations,
                 "contraction_history": list(res.contraction_history)})
    if cfg.render:
        fig.profiles(outdir, [("initial", u0), ("target", u1),
                              ("final", res.traj.fields[-1])])
        fig.norm_history(outdir, res.traj)


def _member_field(cfg, grid, index):
    f = initial_data(f"random:1,{1.0},{cfg.seed + index}", grid)
    if cfg.band:
        f = truncate(f, cfg.band)
        n = l2_norm(f)
        if n > 0:
            f = f * (1.0 / n)
    return f


def _run_observability(cfg, outdir, writer):
    grid = _grid(cfg)
    profile = _damping(cfg, grid)

    def one(index):
        u0 = _member_field(cfg, grid, index)
        return observability_ratio(u0, profile, cfg.T, dt=cfg.dt,
                                   nonlinear=not cfg.linear)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            ratios = list(pool.map(one, range(cfg.ensemble)))
    else:
        ratios = [one(k) for k in range(cfg.ensemble)]
    for k, r in enumerate(ratios):
        writer.emit({"record": "member", "index": k, "ratio": float(r)})
    writer.emit({"record": "result", "verb": cfg.verb,
                 "max_ratio": float(np.max(ratios)),
                 "min_ratio": float(np.min(ratios)),
                 "mean_ratio": float(np.mean(ratios)),
                 "ensemble": cfg.ensemble})
    if cfg.render:
        fig.ratio_histogram(outdir, ratios)


def _run_gramian_spectrum(cfg, outdir, writer):
    grid = _grid(cfg)
    profile = _damping(cfg, grid)
    if profile.is_off:
        raise ZeroData("the control-off profile has a vanishing Gramian")
    op = GramianOperator(profile, cfg.T, n_quad=cfg.n_quad)
    eigs = np.sort(op.eigs_lanczos(k=cfg.n_eigs, seed=cfg.seed))[::-1]
    for k, ev in enumerate(eigs):
        writer.emit({"record": "eigenvalue", "index": k, "value": float(ev)})
    lo, hi = float(eigs[-1]), float(eigs[0])
    writer.emit({"record": "result", "verb": cfg.verb,
                 "lambda_max_est": hi, "lambda_min_est": lo,
                 "condition_est": hi / lo if lo > 0 else float("inf"),
                 "n_quad": cfg.n_quad})
    if cfg.render:
        fig.eigenvalues(outdir, eigs)


def _run_norms(cfg, outdir, writer):
    grid = GridSpec(cfg.n_modes) if cfg.n_modes else None
    if cfg.check == "strichartz":
        rep = strichartz_check(cfg.ensemble, cfg.seed, grid=grid,
                               T=cfg.T, dt=cfg.dt,
                               nonlinear=not cfg.linear)
    elif cfg.check == "smoothing":
        rep = smoothing_check(cfg.ensemble, cfg.seed, grid=grid,
                              dt=cfg.dt, t_period=cfg.window)
    elif cfg.check == "bilinear":
        rep = bilinear_scaling_check(cfg.ensemble, cfg.seed, grid=grid,
                                     dt=cfg.dt, t_period=cfg.window)
    elif cfg.check == "highfreq":
        rep = highfreq_exp_check(cfg.ensemble, cfg.seed, grid=grid)
    else:
        rep = interpolation_check(cfg.ensemble, cfg.seed, grid=grid,
                                  dt=cfg.dt, t_period=cfg.window)
    writer.emit({"record": "norm_report", **rep.to_dict()})
    if cfg.render:
        d = rep.details
        if "max_ratio_by_T" in d and "slope" in d:
            fig.scaling(outdir, d["T_list"], d["max_ratio_by_T"],
                        d["slope"], "T", f"{rep.name}-sweep.png")
        elif "ratio_by_T" in d:
            fig.scaling(outdir, d["T_list"], d["ratio_by_T"],
                        d["t_exponent"], "T", f"{rep.name}-sweep.png")
        elif "sup_envelope" in d:
            fig.scaling(outdir, d["N_list"], d["sup_envelope"],
                        d["slope"], "N", f"{rep.name}-sweep.png")
        elif "ratios" in d:
            fig.ratio_histogram(outdir, d["ratios"])


_VERB_TABLE = {
    "simulate": _run_simulate,
    "conserved": _run_conserved,
    "gauge-check": _run_gauge_check,
    "stabilize": _run_stabilize,
    "steer": _run_steer,
    "observability": _run_observability,
    "gramian-spectrum": _run_gramian_spectrum,
    "norms": _run_norms,
}


# -- entry point -----------------------------------------------------------

def run(cfg: RunConfig) -> int:
    cfg.validate()
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "fields").mkdir(exist_ok=True)
    stamp = {"config_sha": cfg.sha(), "seed": cfg.seed,
             "version": __version__}
    writer = RecordWriter(outdir / "run.ndjson", stamp)
    try:
        writer.emit({"record": "run", "verb": cfg.verb,
                     "config": cfg.as_dict()})
        _VERB_TABLE[cfg.verb](cfg, outdir, writer)
    finally:
        writer.close()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE",
                        help="JSON manifest; flags override its values")
    common.add_argument("--out", metavar="DIR",
                        help="output directory (default runs/<verb>)")
    common.add_argument("--grid", dest="n_modes", type=int, metavar="N",
                        help="number of spatial modes")
    common.add_argument("--dt", type=float, help="time step")
    common.add_argument("--T", type=float, help="time horizon")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--u0", metavar="SPEC",
                        help="initial data: modes:/random:/file:")
    common.add_argument("--profile", choices=("bump", "off"),
                        help="damping profile")
    common.add_argument("--profile-center", dest="profile_center",
                        type=float, metavar="X0")
    common.add_argument("--profile-radius", dest="profile_radius",
                        type=float, metavar="R")
    common.add_argument("--save-every", dest="save_every", type=int,
                        metavar="K", help="store every K-th step")
    common.add_argument("--snapshot-every", dest="snapshot_every", type=int,
                        metavar="K", help="write every K-th saved field")
    common.add_argument("--jobs", type=int, metavar="K",
                        help="parallel workers across ensemble members")
    common.add_argument("--no-figures", dest="no_figures",
                        action="store_true", default=False,
                        help="skip PNG rendering")

    p = argparse.ArgumentParser(
        prog="botorus",
        description="pseudospectral experiments for a nonlocal dispersive "
                    "equation on the circle")
    sub = p.add_subparsers(dest="verb", required=True)
    sub.add_parser("simulate", parents=[common],
                   help="free or unforced nonlinear evolution").add_argument(
        "--linear", action="store_true", default=None,
        help="drop the nonlinear term")
    sub.add_parser("conserved", parents=[common],
                   help="conserved-quantity drift along an unforced run")
    sub.add_parser("gauge-check", parents=[common],
                   help="gauged evolution residual along a run")
    sub.add_parser("stabilize", parents=[common],
                   help="damped feedback run with decay-rate fit")
    sp = sub.add_parser("steer", parents=[common],
                        help="drive the state between two profiles")
    sp.add_argument("--u1", metavar="SPEC", help="target state")
    sp.add_argument("--tol", type=float, help="fixed-point tolerance")
    sp.add_argument("--max-iter", dest="max_iter", type=int)
    so = sub.add_parser("observability", parents=[common],
                        help="ensemble observability ratios")
    so.add_argument("--ensemble", type=int, metavar="K")
    so.add_argument("--band", type=int, metavar="B",
                    help="truncate members to |xi| <= B")
    so.add_argument("--linear", action="store_true", default=None,
                    help="use the linearized flow")
    sg = sub.add_parser("gramian-spectrum", parents=[common],
                        help="extreme eigenvalue estimates of the control "
                             "Gramian")
    sg.add_argument("--n-eigs", dest="n_eigs", type=int, metavar="K")
    sg.add_argument("--n-quad", dest="n_quad", type=int, metavar="K")
    sn = sub.add_parser("norms", parents=[common],
                        help="empirical dispersive norm inequalities")
    sn.add_argument("--check", choices=CHECKS)
    sn.add_argument("--ensemble", type=int, metavar="K")
    sn.add_argument("--window", type=float, metavar="W",
                    help="periodization window for sweep checks")
    sn.add_argument("--linear", action="store_true", default=None,
                    help="free-flow members where applicable")
    return p


def _diagnostic(err: Exception) -> None:
    d = {"error": type(err).__name__, "message": str(err)}
    if isinstance(err, BlowUp):
        d["step"] = err.step
        if err.t is not None:
            d["t"] = err.t
    if isinstance(err, NoConvergence):
        d["iterations"] = err.iterations
        if err.residual is not None:
            d["residual"] = err.residual
    print(json.dumps(_jsonable(d), sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return run(cfg)
    except ValidationError as e:
        _diagnostic(e)
        return 2
    except ValueError as e:          # bad parameter combinations deep down
        _diagnostic(e)
        return 2
    except OSError as e:
        _diagnostic(e)
        return 2
    except (BlowUp, NoConvergence) as e:
        _diagnostic(e)
        return 3


if __name__ == "__main__":
    sys.exit(main())
