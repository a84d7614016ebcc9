"""Figure rendering for CLI runs.

Every function writes one PNG with a fixed name into the run directory and
returns the path.  Rendering is optional plumbing around the records: the
NDJSON output is the authoritative result, figures are for eyeballs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spectral import l2_norm

_DPI = 120


def _finish(fig, outdir, name):
    path = outdir / name
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def spacetime(outdir, traj):
    """Heatmap of u(x, t) over the saved trajectory."""
    vals = np.array([f.values() for f in traj.fields])
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    extent = (0.0, 2 * np.pi, traj.times[0], traj.times[-1])
    im = ax.imshow(vals, aspect="auto", origin="lower", extent=extent,
                   cmap="RdBu_r")
    fig.colorbar(im, ax=ax, label="u")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    return _finish(fig, outdir, "spacetime.png")


def norm_history(outdir, traj, fit=None):
    """L2 norm against time, log scale; optional (rate, window) overlay."""
    norms = np.array([l2_norm(f) for f in traj.fields])
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.semilogy(traj.times, np.maximum(norms, 1e-300), lw=1.2)
    if fit is not None:
        rate, (t0, t1) = fit
        sel = (traj.times >= t0) & (traj.times <= t1)
        if np.any(sel) and norms[sel][0] > 0:
            tt = traj.times[sel]
            ax.semilogy(tt, norms[sel][0] * np.exp(-rate * (tt - tt[0])),
                        "--", lw=1.0, label=f"rate {rate:.4g}")
            ax.legend()
    ax.set_xlabel("t")
    ax.set_ylabel("L2 norm")
    return _finish(fig, outdir, "norms.png")


def invariant_drift(outdir, report):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, a in (("I1", report.I1), ("I2", report.I2),
                     ("Psi4", report.Psi4), ("Psi6", report.Psi6)):
        base = max(abs(a[0]), 1e-300)
        ax.semilogy(report.times,
                    np.maximum(np.abs(a - a[0]) / base, 1e-18),
                    lw=1.0, label=label)
    ax.semilogy(report.times, np.maximum(np.abs(report.defect), 1e-18),
                "k--", lw=1.0, label="energy identity")
    ax.set_xlabel("t")
    ax.set_ylabel("relative drift")
    ax.legend(ncol=2, fontsize=8)
    return _finish(fig, outdir, "invariants.png")


def profiles(outdir, named_fields):
    """Overlay of physical-space profiles, e.g. initial/target/final."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, f in named_fields:
        x = f.grid.x
        ax.plot(np.append(x, 2 * np.pi), np.append(f.values(), f.values()[0]),
                lw=1.2, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend()
    return _finish(fig, outdir, "profiles.png")


def ratio_histogram(outdir, ratios):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.hist(ratios, bins=max(5, len(ratios) // 4), edgecolor="black")
    ax.set_xlabel("observability ratio")
    ax.set_ylabel("count")
    return _finish(fig, outdir, "ratios.png")


def eigenvalues(outdir, eigs):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.semilogy(np.arange(1, len(eigs) + 1), np.sort(eigs)[::-1], "o-",
                markersize=4)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue estimate")
    return _finish(fig, outdir, "spectrum.png")


def scaling(outdir, xs, ys, slope, xlabel, name):
    """Log-log sweep with the fitted power overlaid."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.loglog(xs, ys, "o-", markersize=4)
    if ys[0] > 0:
        ax.loglog(xs, ys[0] * (xs / xs[0]) ** slope, "--", lw=1.0,
                  label=f"slope {slope:.3f}")
        ax.legend()
    ax.set_xlabel(xlabel)
    ax.set_ylabel("ratio")
    return _finish(fig, outdir, name)


def residual_history(outdir, times, residuals):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.semilogy(times, np.maximum(residuals, 1e-18), lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("gauge evolution residual")
    return _finish(fig, outdir, "residual.png")
