"""Shared fixtures and field generators for the test suite."""

import numpy as np
import pytest

from botorus.spectral import GridSpec, RealField, l2_norm


def smooth_random(grid, rng, *, band=None, norm=1.0, xi0=6.0):
    """Random real field with Gaussian-decaying spectrum and zero mean.

    Modes up to `band` (the dealiasing cut by default) get magnitude
    exp(-(xi/xi0)^2) and a uniform random phase; the result is rescaled
    to the requested L2 norm.
    """
    n = grid.n_modes
    if band is None:
        band = grid.dealias_cut
    c = np.zeros(n, dtype=complex)
    xi = np.arange(1, band + 1)
    mags = np.exp(-((xi / xi0) ** 2))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=xi.size)
    c[xi] = np.pi * mags * np.exp(1j * phases)
    c[n - xi] = np.conj(c[xi])
    f = RealField(grid, c, copy=False)
    nrm = l2_norm(f)
    if nrm > 0 and norm is not None:
        f = RealField(grid, c * (norm / nrm), copy=False)
    return f


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid64():
    return GridSpec(64)


@pytest.fixture
def grid128():
    return GridSpec(128)
