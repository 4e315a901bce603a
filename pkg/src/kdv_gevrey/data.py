"""Initial data on the periodic grid."""

from __future__ import annotations

import numpy as np

from .spectral import GridSpec, RealField


def _wrap(grid: GridSpec, x: np.ndarray) -> np.ndarray:
    """Map positions onto the periodic cell [-L/2, L/2)."""
    L = grid.domain_length
    return (x + 0.5 * L) % L - 0.5 * L


def soliton_profile(grid: GridSpec, kappa: float, t: float = 0.0, x0: float = 0.0) -> np.ndarray:
    """``12 kappa^2 sech^2(kappa (x - x0 - 4 kappa^2 t))`` wrapped onto the torus."""
    xs = _wrap(grid, grid.x - x0 - 4.0 * kappa ** 2 * t)
    return 12.0 * kappa ** 2 / np.cosh(kappa * xs) ** 2


def soliton(grid: GridSpec, kappa: float = 0.5, x0: float = 0.0) -> RealField:
    return RealField(grid, soliton_profile(grid, kappa, 0.0, x0))


def two_soliton(grid: GridSpec, kappas=(0.6, 0.3), positions=None) -> RealField:
    if positions is None:
        L = grid.domain_length
        positions = (-L / 4.0, L / 8.0)
    u = sum(soliton_profile(grid, k, 0.0, x0) for k, x0 in zip(kappas, positions))
    return RealField(grid, u)


def lorentzian(grid: GridSpec, amplitude: float = 1.0) -> RealField:
    """Periodization of ``1/(1+x^2)``.

    Its Fourier coefficients are exactly ``sqrt(pi/2) exp(-|xi_k|)``, so the
    strip of analyticity has half-width 1 just as on the line.
    """
    q = 2.0 * np.pi / grid.domain_length
    u = (np.pi / grid.domain_length) * np.sinh(q) / (np.cosh(q) - np.cos(q * grid.x))
    return RealField(grid, amplitude * u)


def lorentzian_spectrum(xi: np.ndarray) -> np.ndarray:
    return np.sqrt(np.pi / 2.0) * np.exp(-np.abs(xi))


def sech2(grid: GridSpec, amplitude: float = 1.0) -> RealField:
    return RealField(grid, amplitude / np.cosh(grid.x) ** 2)


def gaussian(grid: GridSpec, amplitude: float = 1.0, width: float = 1.0) -> RealField:
    return RealField(grid, amplitude * np.exp(-(grid.x / width) ** 2))


def random_smooth(grid: GridSpec, rng: np.random.Generator, amplitude: float = 0.1,
                  n_bumps: int = 4) -> RealField:
    """Sum of Gaussian bumps scaled so that ``max|u| == amplitude``."""
    L = grid.domain_length
    centres = rng.uniform(-L / 8.0, L / 8.0, n_bumps)
    widths = rng.uniform(1.0, 3.0, n_bumps)
    weights = rng.normal(size=n_bumps)
    u = sum(w * np.exp(-((grid.x - c) / s) ** 2) for c, s, w in zip(centres, widths, weights))
    peak = np.max(np.abs(u))
    return RealField(grid, amplitude * u / peak)


def zero(grid: GridSpec) -> RealField:
    return RealField(grid, np.zeros(grid.n_points))
