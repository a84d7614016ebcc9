"""Periodic Fourier fields on the torus [0, 2pi) and the operator toolbox.

Conventions, fixed once for the whole package:

    fhat(xi) = integral_T exp(-i x xi) f(x) dx
    f(x)     = (1/2pi) sum_xi fhat(xi) exp(i x xi)

so Parseval reads  integral |f|^2 dx = (1/2pi) sum |fhat|^2.  Coefficients are
stored in numpy fft layout; the slot at index n/2 is labeled +n/2 (it is kept
identically zero by dealiasing in every produced field).  Products of two
fields are computed exactly: zero-pad to a 2n grid, multiply pointwise,
transform back, truncate to the dealias cut floor(n/3).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatch, NonZeroMean, ParseError

TWO_PI = 2.0 * np.pi

PROJECTION_KINDS = ("Pplus", "Pminus", "PleqZero", "PgeqN", "PlowN", "QN", "P0")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with n_modes points on [0, 2pi)."""

    n_modes: int

    def __post_init__(self):
        n = self.n_modes
        if n < 8 or n % 2 != 0:
            raise ValueError(f"n_modes must be even and >= 8, got {n}")

    @cached_property
    def x(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_modes) / self.n_modes

    @cached_property
    def freqs(self) -> np.ndarray:
        """Frequency labels in storage order: 0, 1, ..., n/2, -n/2+1, ..., -1."""
        n = self.n_modes
        return np.concatenate([np.arange(0, n // 2 + 1),
                               np.arange(-n // 2 + 1, 0)])

    @property
    def dealias_cut(self) -> int:
        return self.n_modes // 3

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.n_modes * factor)


def _symmetrize(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[0]
    rev = (n - np.arange(n)) % n
    return 0.5 * (coeffs + np.conj(coeffs[rev]))


def _hermitian_defect(coeffs: np.ndarray) -> float:
    n = coeffs.shape[0]
    rev = (n - np.arange(n)) % n
    return float(np.linalg.norm(coeffs - np.conj(coeffs[rev])))


class _Field:
    """Shared implementation of the coefficient container."""

    __slots__ = ("grid", "coeffs")

    is_real = False

    def __init__(self, grid: GridSpec, coeffs: np.ndarray, copy: bool = True):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (grid.n_modes,):
            raise GridMismatch(
                f"coefficient array of length {coeffs.shape} does not match "
                f"grid with {grid.n_modes} modes")
        self.grid = grid
        self.coeffs = coeffs.copy() if copy else coeffs

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, grid: GridSpec):
        return cls(grid, np.zeros(grid.n_modes, dtype=np.complex128), copy=False)

    @classmethod
    def from_coeffs(cls, grid: GridSpec, coeffs):
        return cls(grid, coeffs)

    # -- basics ------------------------------------------------------------

    def copy(self):
        return type(self)(self.grid, self.coeffs)

    def values(self, pad: int = 1) -> np.ndarray:
        """Physical samples on a pad*n grid (spectral interpolation)."""
        n = self.grid.n_modes
        if pad == 1:
            vals = np.fft.ifft(self.coeffs) * (n / TWO_PI)
        else:
            m = pad * n
            big = np.zeros(m, dtype=np.complex128)
            big[: n // 2 + 1] = self.coeffs[: n // 2 + 1]
            big[m - (n // 2 - 1):] = self.coeffs[n // 2 + 1:]
            vals = np.fft.ifft(big) * (m / TWO_PI)
        return vals.real if self.is_real else vals

    def __add__(self, other):
        _require_same_grid(self, other)
        cls = RealField if (self.is_real and other.is_real) else ComplexField
        return cls(self.grid, self.coeffs + other.coeffs, copy=False)

    def __sub__(self, other):
        _require_same_grid(self, other)
        cls = RealField if (self.is_real and other.is_real) else ComplexField
        return cls(self.grid, self.coeffs - other.coeffs, copy=False)

    def __mul__(self, scalar):
        if isinstance(scalar, _Field):
            raise TypeError("use product() for pointwise field multiplication")
        real_scalar = np.isrealobj(scalar) or (np.imag(scalar) == 0)
        cls = RealField if (self.is_real and real_scalar) else ComplexField
        return cls(self.grid, self.coeffs * scalar, copy=False)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __neg__(self):
        return type(self)(self.grid, -self.coeffs, copy=False)


class RealField(_Field):
    """Real-valued field; Hermitian symmetry is enforced at construction."""

    is_real = True

    def __init__(self, grid, coeffs, copy=True):
        super().__init__(grid, coeffs, copy=copy)
        scale = np.linalg.norm(self.coeffs)
        if scale > 0:
            defect = _hermitian_defect(self.coeffs)
            # absolute floor: roundoff asymmetry of a near-zero field is fine
            if defect > max(1e-10 * scale, 1e-13):
                raise ValueError(
                    f"coefficients violate Hermitian symmetry "
                    f"(defect {defect:.3e} vs norm {scale:.3e})")
        self.coeffs = _symmetrize(self.coeffs)

    @classmethod
    def from_values(cls, grid: GridSpec, values) -> "RealField":
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_modes,):
            raise GridMismatch("value array does not match grid")
        coeffs = np.fft.fft(values) * (TWO_PI / grid.n_modes)
        return cls(grid, coeffs, copy=False)

    @classmethod
    def from_modes(cls, grid: GridSpec, modes) -> "RealField":
        """Sum of amp*cos(xi x + phase) terms; modes = [(xi, amp, phase), ...]."""
        coeffs = np.zeros(grid.n_modes, dtype=np.complex128)
        n = grid.n_modes
        for xi, amp, phase in modes:
            xi = int(xi)
            if xi < 0 or xi > n // 2:
                raise ParseError(f"mode frequency {xi} outside [0, {n // 2}]")
            if xi == 0:
                coeffs[0] += TWO_PI * amp * np.cos(phase)
            else:
                coeffs[xi] += np.pi * amp * np.exp(1j * phase)
                coeffs[(n - xi) % n] += np.pi * amp * np.exp(-1j * phase)
        return cls(grid, coeffs, copy=False)


class ComplexField(_Field):
    """Complex-valued field (gauge variables live here)."""

    is_real = False


def _require_same_grid(f: _Field, g: _Field):
    if f.grid.n_modes != g.grid.n_modes:
        raise GridMismatch(
            f"grids differ: {f.grid.n_modes} vs {g.grid.n_modes} modes")


# -- measurement -----------------------------------------------------------

def mean(f: _Field) -> float | complex:
    m = f.coeffs[0] / TWO_PI
    return m.real if f.is_real else m


def inner(f: _Field, g: _Field):
    """L2 inner product integral f conj(g) dx via Parseval."""
    _require_same_grid(f, g)
    val = np.vdot(g.coeffs, f.coeffs) / TWO_PI
    if f.is_real and g.is_real:
        return val.real
    return val


def l2_norm(f: _Field) -> float:
    return float(np.linalg.norm(f.coeffs)) / np.sqrt(TWO_PI)


def hs_norm(f: _Field, s: float) -> float:
    """Sobolev norm with weight <xi> = 1 + |xi|."""
    w = (1.0 + np.abs(f.grid.freqs)) ** s
    return float(np.linalg.norm(w * f.coeffs)) / np.sqrt(TWO_PI)


def sup_norm(f: _Field, pad: int = 4) -> float:
    return float(np.max(np.abs(f.values(pad=pad))))


# -- multipliers -----------------------------------------------------------

def hilbert(f: _Field):
    """Hilbert transform, multiplier -i sgn(xi); sgn(0) = 0."""
    mult = -1j * np.sign(f.grid.freqs)
    return type(f)(f.grid, mult * f.coeffs, copy=False)


def derivative(f: _Field, order: int = 1):
    mult = (1j * f.grid.freqs.astype(float)) ** order
    return type(f)(f.grid, mult * f.coeffs, copy=False)


def antiderivative(f: _Field):
    """Zero-mean primitive, multiplier 1/(i xi); requires mean zero."""
    scale = np.linalg.norm(f.coeffs)
    if np.abs(f.coeffs[0]) > 1e-12 * max(scale, 1e-300):
        raise NonZeroMean(
            f"antiderivative needs a zero-mean field "
            f"(|coeff(0)| = {np.abs(f.coeffs[0]):.3e})")
    xi = f.grid.freqs.astype(float)
    mult = np.zeros_like(xi, dtype=np.complex128)
    nz = xi != 0
    mult[nz] = 1.0 / (1j * xi[nz])
    out = mult * f.coeffs
    out[0] = 0.0
    return type(f)(f.grid, out, copy=False)


def free_group(t: float, f: _Field):
    """Exact propagator of u_t + H u_xx = 0: multiply by exp(-i t xi |xi|)."""
    xi = f.grid.freqs.astype(float)
    phases = np.exp(-1j * t * xi * np.abs(xi))
    return type(f)(f.grid, phases * f.coeffs, copy=False)


def shift(f: _Field, s: float):
    """Translate: (shift(f, s))(x) = f(x - s)."""
    phases = np.exp(-1j * s * f.grid.freqs.astype(float))
    return type(f)(f.grid, phases * f.coeffs, copy=False)


def reflect(f: _Field):
    """Reflection (reflect(f))(x) = f(-x); needs an empty Nyquist slot."""
    n = f.grid.n_modes
    c = f.coeffs
    scale = np.linalg.norm(c)
    if np.abs(c[n // 2]) > 1e-12 * max(scale, 1e-300):
        raise ValueError("reflect needs the Nyquist slot to be zero")
    rev = (n - np.arange(n)) % n
    return type(f)(f.grid, c[rev], copy=False)


def project(f: _Field, kind: str, cutoff: int | None = None):
    """Frequency projection.

    Pplus keeps xi >= 1, Pminus keeps xi <= -1, PleqZero keeps xi <= 0,
    P0 keeps xi = 0, PgeqN keeps xi >= cutoff, PlowN keeps |xi| <= cutoff,
    QN keeps |xi| > cutoff.  One-sided kinds return ComplexField.
    """
    xi = f.grid.freqs
    if kind == "Pplus":
        mask, symmetric = xi >= 1, False
    elif kind == "Pminus":
        mask, symmetric = xi <= -1, False
    elif kind == "PleqZero":
        mask, symmetric = xi <= 0, False
    elif kind == "P0":
        mask, symmetric = xi == 0, True
    elif kind in ("PgeqN", "PlowN", "QN"):
        if cutoff is None:
            raise ValueError(f"projection {kind} needs a cutoff")
        if kind == "PgeqN":
            mask, symmetric = xi >= cutoff, False
        elif kind == "PlowN":
            mask, symmetric = np.abs(xi) <= cutoff, True
        else:
            mask, symmetric = np.abs(xi) > cutoff, True
    else:
        raise ValueError(f"unknown projection kind {kind!r}; "
                         f"expected one of {PROJECTION_KINDS}")
    cls = type(f) if (symmetric or not f.is_real) else ComplexField
    return cls(f.grid, np.where(mask, f.coeffs, 0.0), copy=False)


def truncate(f: _Field, band: int):
    """Zero all coefficients with |xi| > band (same field type)."""
    mask = np.abs(f.grid.freqs) <= band
    return type(f)(f.grid, np.where(mask, f.coeffs, 0.0), copy=False)


def resample(f: _Field, grid: GridSpec):
    """Move a field to another grid by spectral embedding or truncation."""
    n_old, n_new = f.grid.n_modes, grid.n_modes
    if n_new == n_old:
        return type(f)(f.grid, f.coeffs)
    out = np.zeros(n_new, dtype=np.complex128)
    half = min(n_old, n_new) // 2
    out[: half + 1] = f.coeffs[: half + 1]
    out[n_new - (half - 1):] = f.coeffs[n_old - (half - 1):]
    if n_new < n_old:
        out[half] = 0.0  # drop content at and beyond the new Nyquist
    return type(f)(grid, out, copy=False)


# -- products and exponentials --------------------------------------------

def _padded_values(coeffs: np.ndarray, n: int, m: int) -> np.ndarray:
    big = np.zeros(m, dtype=np.complex128)
    big[: n // 2 + 1] = coeffs[: n // 2 + 1]
    big[m - (n // 2 - 1):] = coeffs[n // 2 + 1:]
    return np.fft.ifft(big) * (m / TWO_PI)


def _values_to_coeffs(vals: np.ndarray, n: int) -> np.ndarray:
    m = vals.shape[0]
    big = np.fft.fft(vals) * (TWO_PI / m)
    out = np.zeros(n, dtype=np.complex128)
    out[: n // 2 + 1] = big[: n // 2 + 1]
    out[n // 2 + 1:] = big[m - (n // 2 - 1):]
    return out


def product_coeffs(cu: np.ndarray, cv: np.ndarray, n: int, cut: int) -> np.ndarray:
    """Raw-array core of product(); exact multiply on a 2n grid, then truncate."""
    m = 2 * n
    vals = _padded_values(cu, n, m) * _padded_values(cv, n, m)
    out = _values_to_coeffs(vals, n)
    out[np.abs(_freqs_cache(n)) > cut] = 0.0
    return out


_FREQS = {}


def _freqs_cache(n: int) -> np.ndarray:
    if n not in _FREQS:
        _FREQS[n] = np.concatenate([np.arange(0, n // 2 + 1),
                                    np.arange(-n // 2 + 1, 0)])
    return _FREQS[n]


def product(f: _Field, g: _Field):
    """Dealiased pointwise product, band-limited to dealias_cut."""
    _require_same_grid(f, g)
    n = f.grid.n_modes
    out = product_coeffs(f.coeffs, g.coeffs, n, f.grid.dealias_cut)
    cls = RealField if (f.is_real and g.is_real) else ComplexField
    return cls(f.grid, out, copy=False)


def exp_gauge(F: RealField, sign: int, band: int | None = None) -> ComplexField:
    """exp(sign * i F / 2), sampled pointwise on a 4n grid, then truncated.

    band defaults to the dealias cut; pass a larger value (up to n/2) to keep
    more of the tail for diagnostics.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = F.grid.n_modes
    m = 4 * n
    vals = np.exp(sign * 0.5j * _padded_values(F.coeffs, n, m).real)
    out = _values_to_coeffs(vals, n)
    cut = F.grid.dealias_cut if band is None else band
    out[np.abs(F.grid.freqs) > cut] = 0.0
    return ComplexField(F.grid, out, copy=False)


def exp_gauge_full(F: RealField, sign: int, pad: int = 4) -> ComplexField:
    """Like exp_gauge but returned on the pad*n evaluation grid, untruncated."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = F.grid.n_modes
    m = pad * n
    vals = np.exp(sign * 0.5j * _padded_values(F.coeffs, n, m).real)
    big = np.fft.fft(vals) * (TWO_PI / m)
    return ComplexField(GridSpec(m), big, copy=False)


# -- snapshot file format --------------------------------------------------

_MAGIC = "BOFIELD v1"


def write_field(f: _Field, path) -> None:
    """Write the binary snapshot: one header line, then n complex128 LE."""
    with open(path, "wb") as fh:
        fh.write(f"{_MAGIC} n_modes={f.grid.n_modes}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(f.coeffs, dtype="<c16").tobytes())


def read_field(path):
    """Read a snapshot; returns RealField when coefficients are Hermitian."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").rstrip("\n")
        parts = header.split()
        if len(parts) != 3 or " ".join(parts[:2]) != _MAGIC \
                or not parts[2].startswith("n_modes="):
            raise ParseError(f"bad snapshot header {header!r}")
        try:
            n = int(parts[2].split("=", 1)[1])
        except ValueError:
            raise ParseError(f"bad n_modes in header {header!r}") from None
        raw = fh.read()
    expected = 16 * n
    if len(raw) != expected:
        raise ParseError(
            f"snapshot payload has {len(raw)} bytes, expected {expected}")
    coeffs = np.frombuffer(raw, dtype="<c16").astype(np.complex128)
    grid = GridSpec(n)
    scale = np.linalg.norm(coeffs)
    if scale == 0 or _hermitian_defect(coeffs) <= 1e-12 * scale:
        return RealField(grid, coeffs)
    return ComplexField(grid, coeffs)
