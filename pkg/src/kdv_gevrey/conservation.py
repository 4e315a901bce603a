"""Growth of the exponentially weighted L^2 norm along KdV flows.

With ``U = exp(sigma|D|) u`` the weighted field obeys
``U_t + U_xxx + U U_x = F`` where

    F = 1/2 d/dx ( U*U - exp(sigma|D|)(u*u) ),

so ``d/dt ||U||^2 = 2 int U F``.  The Fourier symbol of the bracket is the
gap ``exp(s|a|)exp(s|b|) - exp(s|a+b|)``, which vanishes unless the two
interacting frequencies have opposite signs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bilinear import apply_brho_line
from .errors import FitUndefinedError, InputError, OverflowGuardError
from .gevrey import OVERFLOW_GUARD, GevreyParams, apply_gevrey, check_guard, gevrey_norm
from .solver import SolverConfig, evolve
from .spectral import RealField, SpectralField, _to_physical, _to_spectral, dealias, dealias_mask

NOISE_FLOOR = 1e-14


def symbol_gap(sigma, theta, alpha, beta, guard: float = OVERFLOW_GUARD):
    """Both sides of the exponential symbol inequality.

    Returns ``(lhs, rhs)`` with

        lhs = exp(sigma|alpha|) exp(sigma|beta|) - exp(sigma|alpha+beta|)
        rhs = (2 sigma min(|alpha|,|beta|))**theta exp(sigma|alpha|) exp(sigma|beta|)

    Broadcasts over array arguments.  ``lhs`` is evaluated as
    ``-E*expm1(-sigma*(|a|+|b|-|a+b|))`` which is exactly zero for equal signs.
    """
    sigma, theta, alpha, beta = np.broadcast_arrays(*(np.asarray(v, float) for v in
                                                      (sigma, theta, alpha, beta)))
    if np.any(sigma <= 0):
        raise InputError("sigma must be positive")
    if np.any((theta < 0) | (theta > 1)):
        raise InputError("theta must lie in [0, 1]")
    worst = np.max(sigma * np.maximum(np.abs(alpha), np.abs(beta)), initial=0.0)
    if worst > guard:
        raise OverflowGuardError(f"sigma*|alpha| = {worst:g} exceeds the guard {guard:g}")
    aa, ab = np.abs(alpha), np.abs(beta)
    excess = aa + ab - np.abs(alpha + beta)
    big = np.exp(sigma * (aa + ab))
    lhs = -big * np.expm1(-sigma * excess)
    rhs = (2.0 * sigma * np.minimum(aa, ab)) ** theta * big
    if lhs.ndim == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


def commutator_F(f: SpectralField, sigma: float) -> SpectralField:
    """Spectral ``F = 1/2 d/dx (U^2 - exp(sigma|D|) u^2)`` with two-thirds dealiasing."""
    grid = f.grid
    if sigma == 0:
        return SpectralField.zeros(grid)
    check_guard(sigma, grid)
    mask = dealias_mask(grid)
    u_hat = np.where(mask, f.coeffs, 0.0)
    weight = np.exp(sigma * np.abs(grid.xi))
    U_hat = weight * u_hat
    U = _to_physical(grid, U_hat)
    u = _to_physical(grid, u_hat)
    bracket = _to_spectral(grid, U * U) - weight * _to_spectral(grid, u * u)
    bracket = np.where(mask, bracket, 0.0)
    return SpectralField(grid, 0.5j * grid.xi * bracket)


def commutator_bound(f: SpectralField, sigma: float, rho: float):
    """Return ``(|F_hat|, bound)`` on the grid.

    ``bound = 1/2 (2 sigma)^rho |xi| B_rho(|U_hat|, |U_hat|)`` where ``U_hat``
    is the dealiased ``exp(sigma|xi|) u_hat`` and ``B_rho`` is the direct
    min-weighted convolution.
    """
    grid = f.grid
    F = commutator_F(f, sigma)
    U_abs = np.abs(apply_gevrey(dealias(f), sigma).coeffs)
    conv = apply_brho_line(grid, U_abs, U_abs, rho)
    bound = 0.5 * (2.0 * sigma) ** rho * np.abs(grid.xi) * conv
    return np.abs(F.coeffs), bound


def commutator_bound_violations(f: SpectralField, sigma: float, rho: float,
                                rtol: float = 1e-10) -> int:
    """Count grid frequencies where ``|F_hat|`` exceeds the bound.

    The slack is ``rtol`` relative plus an absolute floor at the level of
    FFT round-off of the two products.
    """
    F_abs, bound = commutator_bound(f, sigma, rho)
    grid = f.grid
    U_abs = np.abs(apply_gevrey(dealias(f), sigma).coeffs)
    # round-off of the FFT products scales with |xi| * sum|U_hat|^2 * dxi
    scale = np.sum(U_abs ** 2) * grid.dxi * grid.xi_max
    atol = 64 * np.finfo(float).eps * np.sqrt(grid.n_points) * scale
    return int(np.sum(F_abs > bound * (1 + rtol) + atol))


@dataclass
class GrowthSeries:
    sigmas: np.ndarray
    growth: np.ndarray          # G(sigma) = sup_t M_sigma(t)^2 - M_sigma(0)^2
    initial_sq: np.ndarray      # M_sigma(0)^2
    slope: float
    intercept: float
    fit_mask: np.ndarray
    delta: float
    momentum_drift: float

    @property
    def constant(self) -> float:
        """``exp(intercept)``: G(sigma) ~ constant * sigma**slope."""
        return float(np.exp(self.intercept))


def gevrey_energy_series(snapshots: Sequence[SpectralField], sigma: float) -> np.ndarray:
    p = GevreyParams(sigma, 0.0)
    return np.array([gevrey_norm(s, p) ** 2 for s in snapshots])


def track_growth(u0: RealField, delta: float, sigma_grid: Sequence[float],
                 cfg: Optional[SolverConfig] = None) -> GrowthSeries:
    """Measure ``G(sigma)`` over [0, delta] and fit ``log G`` against ``log sigma``.

    The flow itself does not depend on sigma, so one run (recorded at every
    step) serves every sigma on the grid.  Points with ``G < 1e-14`` are
    excluded from the fit as round-off.
    """
    sigmas = np.asarray(sigma_grid, dtype=float)
    if np.any(sigmas <= 0):
        raise InputError("sigma grid must be positive")
    check_guard(float(sigmas.max()), u0.grid)
    if cfg is None:
        cfg = SolverConfig(dt=min(1e-3, delta / 10.0), t_end=delta, record_every=1)
    else:
        cfg = SolverConfig(cfg.dt, delta, cfg.dealias_on, 1)
    traj = evolve(u0, cfg)
    growth, initial = [], []
    for sigma in sigmas:
        m_sq = gevrey_energy_series(traj.snapshots, sigma)
        growth.append(m_sq.max() - m_sq[0])
        initial.append(m_sq[0])
    growth = np.array(growth)
    mask = growth >= NOISE_FLOOR
    if mask.sum() < 2:
        raise FitUndefinedError(
            f"only {int(mask.sum())} sigma values have growth above {NOISE_FLOOR:g}")
    slope, intercept = np.polyfit(np.log(sigmas[mask]), np.log(growth[mask]), 1)
    return GrowthSeries(sigmas, growth, np.array(initial), float(slope), float(intercept),
                        mask, float(delta), traj.report.momentum_drift)
