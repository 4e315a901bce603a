"""Periodic grid, unitary discrete Fourier pair and Fourier multipliers.

The whole line is replaced by the torus [-L/2, L/2) sampled at
``x_j = -L/2 + j*dx``.  Coefficients use the unitary convention

    u_hat(xi_k) = (2*pi)**-0.5 * dx * sum_j u(x_j) exp(-1j*xi_k*x_j)

so that ``sum |u_j|**2 dx == sum |u_hat_k|**2 dxi`` with ``dxi = 2*pi/L``.
Coefficient arrays are stored in numpy FFT order (k = 0, 1, ..., -1);
the unpaired Nyquist mode k = -n/2 is always zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .errors import InputError, OverflowGuardError, RepresentationError

SQRT_2PI = np.sqrt(2.0 * np.pi)
SYMMETRY_TOL = 1e-10

Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, complex, float]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GridSpec:
    n_points: int = 1024
    domain_length: float = 40.0 * np.pi

    def __post_init__(self):
        n = self.n_points
        if int(n) != n or n < 8 or (int(n) & (int(n) - 1)) != 0:
            raise InputError(f"n_points must be a power of two >= 8, got {n}")
        if not (np.isfinite(self.domain_length) and self.domain_length > 0):
            raise InputError(f"domain_length must be positive, got {self.domain_length}")
        object.__setattr__(self, "n_points", int(n))
        object.__setattr__(self, "domain_length", float(self.domain_length))

    @property
    def dx(self) -> float:
        return self.domain_length / self.n_points

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.domain_length

    @cached_property
    def x(self) -> np.ndarray:
        return _frozen(-0.5 * self.domain_length + self.dx * np.arange(self.n_points))

    @cached_property
    def k(self) -> np.ndarray:
        """Integer wavenumbers in FFT order."""
        return _frozen(np.fft.fftfreq(self.n_points, 1.0 / self.n_points).astype(np.int64))

    @cached_property
    def xi(self) -> np.ndarray:
        return _frozen(self.dxi * self.k.astype(float))

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    @property
    def xi_max(self) -> float:
        """Largest |xi| on the grid (the Nyquist frequency)."""
        return np.pi * self.n_points / self.domain_length

    @cached_property
    def _sign(self) -> np.ndarray:
        # exp(i xi_k L/2) = (-1)**k shifts the origin to the grid centre
        return _frozen(np.where(self.k % 2 == 0, 1.0, -1.0))


@dataclass(frozen=True)
class RealField:
    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.shape != (self.grid.n_points,):
            raise InputError(
                f"expected {self.grid.n_points} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise InputError("field samples must be finite")
        object.__setattr__(self, "samples", _frozen(s))

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.samples ** 2) * self.grid.dx))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)


@dataclass(frozen=True)
class SpectralField:
    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n_points,):
            raise InputError(
                f"expected {self.grid.n_points} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid, np.zeros(grid.n_points, dtype=complex))

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2) * self.grid.dxi))

    def symmetry_defect(self) -> float:
        """Max |u_hat(-xi) - conj(u_hat(xi))| relative to max |u_hat|."""
        return _symmetry_defect(self.coeffs)

    def _check_grid(self, other):
        if other.grid != self.grid:
            raise InputError("fields live on different grids")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_grid(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_grid(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs)


def _symmetry_defect(c: np.ndarray) -> float:
    n = c.shape[-1]
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return 0.0
    pos = c[1:n // 2]
    neg = c[n // 2 + 1:][::-1]
    defect = max(
        np.max(np.abs(neg - np.conj(pos))) if pos.size else 0.0,
        abs(c[0].imag),
        abs(c[n // 2]),
    )
    return float(defect / scale)


def forward(u: RealField) -> SpectralField:
    """Sampled real field -> unitary Fourier coefficients."""
    grid = u.grid
    samples = np.asarray(u.samples, dtype=float)
    if not np.all(np.isfinite(samples)):
        raise InputError("field samples must be finite")
    c = np.fft.fft(samples) * (grid.dx / SQRT_2PI) * grid._sign
    c[grid.nyquist_index] = 0.0
    c[0] = c[0].real
    return SpectralField(grid, c)


def inverse(f: SpectralField) -> RealField:
    defect = f.symmetry_defect()
    if defect > SYMMETRY_TOL:
        raise RepresentationError(
            f"coefficients are not conjugate-symmetric (relative defect {defect:.3e})")
    return RealField(f.grid, _to_physical(f.grid, f.coeffs))


def _to_physical(grid: GridSpec, c: np.ndarray) -> np.ndarray:
    """Unchecked inverse transform; returns the real part of the samples."""
    scale = grid.dxi * grid.n_points / SQRT_2PI
    return np.fft.ifft(c * grid._sign).real * scale


def _to_spectral(grid: GridSpec, samples: np.ndarray) -> np.ndarray:
    """Unchecked forward transform of a real sample array."""
    c = np.fft.fft(samples) * (grid.dx / SQRT_2PI) * grid._sign
    c[..., grid.nyquist_index] = 0.0
    return c


def apply_multiplier(f: SpectralField, m: Multiplier) -> SpectralField:
    """Multiply every coefficient by the symbol ``m(xi_k)``.

    ``m`` may be a callable of the frequency array, a precomputed array in
    FFT order, or a scalar.
    """
    grid = f.grid
    symbol = m(grid.xi) if callable(m) else m
    symbol = np.broadcast_to(np.asarray(symbol, dtype=complex), grid.xi.shape)
    if not np.all(np.isfinite(symbol)):
        bad = grid.xi[~np.isfinite(symbol)]
        raise OverflowGuardError(
            f"multiplier is not finite at {bad.size} grid frequencies (e.g. xi={bad[0]:g})")
    c = f.coeffs * symbol
    c[grid.nyquist_index] = 0.0
    return SpectralField(grid, c)


def dealias_mask(grid: GridSpec) -> np.ndarray:
    return np.abs(grid.k) <= grid.n_points // 3


def dealias(f: SpectralField) -> SpectralField:
    """Two-thirds rule: zero every mode with |k| > n/3."""
    return SpectralField(f.grid, np.where(dealias_mask(f.grid), f.coeffs, 0.0))


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    return apply_multiplier(f, (1j * f.grid.xi) ** order)


def sample(grid: GridSpec, func: Callable[[np.ndarray], np.ndarray]) -> RealField:
    """Evaluate ``func`` on the grid points."""
    return RealField(grid, func(grid.x))
