"""Gevrey-Sobolev norms, exponential Fourier weights and the strip-width estimator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, EstimatorUndefinedError, InputError, OverflowGuardError
from .spectral import GridSpec, SpectralField, apply_multiplier

OVERFLOW_GUARD = 300.0


@dataclass(frozen=True)
class GevreyParams:
    sigma: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise InputError(f"sigma must be a finite nonnegative number, got {self.sigma}")
        if not np.isfinite(self.s):
            raise InputError(f"s must be finite, got {self.s}")


def check_guard(sigma: float, grid: GridSpec, guard: float = OVERFLOW_GUARD) -> None:
    """Refuse exponential weights ``exp(sigma*|xi|)`` larger than ``exp(guard)``."""
    exponent = sigma * grid.xi_max
    if exponent > guard:
        raise OverflowGuardError(
            f"sigma*xi_max = {exponent:.6g} exceeds the overflow guard {guard:g} "
            f"(sigma={sigma:g}, xi_max={grid.xi_max:g})")


def gevrey_weight(xi: np.ndarray, p: GevreyParams) -> np.ndarray:
    axi = np.abs(xi)
    return np.exp(p.sigma * axi) * (1.0 + axi) ** p.s


def gevrey_norm(f: SpectralField, p: GevreyParams, guard: float = OVERFLOW_GUARD) -> float:
    """Discrete ``||exp(sigma|xi|) (1+|xi|)^s u_hat||_{L^2_xi}``."""
    check_guard(p.sigma, f.grid, guard)
    w = gevrey_weight(f.grid.xi, p)
    return float(np.sqrt(np.sum((w * np.abs(f.coeffs)) ** 2) * f.grid.dxi))


def apply_gevrey(f: SpectralField, sigma: float, guard: float = OVERFLOW_GUARD) -> SpectralField:
    """Apply ``exp(sigma*|D_x|)``; negative sigma smooths and needs no guard."""
    if sigma > 0:
        check_guard(sigma, f.grid, guard)
    return apply_multiplier(f, np.exp(sigma * np.abs(f.grid.xi)))


def embedding_constant(source: GevreyParams, target: GevreyParams,
                       grid: Optional[GridSpec] = None) -> float:
    """Smallest K with ``||f||_target <= K ||f||_source`` for every field on ``grid``.

    The ratio of the two weights is maximized over the grid frequencies, which
    is exact for the discrete norms.
    """
    if target.sigma >= source.sigma:
        raise DomainError(
            f"embedding needs target sigma < source sigma, got {target.sigma} >= {source.sigma}")
    grid = grid or GridSpec()
    axi = np.abs(grid.xi)
    ratio = np.exp((target.sigma - source.sigma) * axi) * (1.0 + axi) ** (target.s - source.s)
    return float(np.max(ratio))


@dataclass(frozen=True)
class RadiusEstimate:
    sigma_hat: float
    at_cap: bool
    fit_window: tuple
    r_squared: float
    noise_floor_used: float
    n_modes: int
    power: float = 0.0

    def __str__(self):
        if self.at_cap:
            return f">= {self.sigma_hat:g}"
        return f"{self.sigma_hat:.6g}"


def estimate_radius(f: SpectralField, noise_floor_rel: float = 1e-12, xi_lo: float = 2.0,
                    cap: float = 5.0, power_law: bool = True) -> RadiusEstimate:
    """Read the analyticity strip half-width off the exponential decay of |u_hat|.

    Fits ``log|u_hat| = a + p*log|xi| - sigma*|xi|`` by least squares over modes
    above the noise floor with ``|xi| >= xi_lo``.  The ``p*log|xi|`` column
    absorbs algebraic prefactors (pole order, Sobolev weights); pass
    ``power_law=False`` for a plain straight-line fit.
    """
    a = np.abs(f.coeffs)
    peak = a.max()
    if peak == 0.0:
        raise InputError("cannot estimate the radius of a zero field")
    axi = np.abs(f.grid.xi)
    floor = noise_floor_rel * peak
    mask = (a > floor) & (axi >= xi_lo)
    n_modes = int(mask.sum())
    if n_modes < 8:
        raise EstimatorUndefinedError(
            f"only {n_modes} modes above the noise floor with |xi| >= {xi_lo}; need 8")
    xs = axi[mask]
    ys = np.log(a[mask])
    cols = [np.ones_like(xs), xs]
    if power_law:
        cols.append(np.log(xs))
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = ys - design @ coef
    ss_tot = np.sum((ys - ys.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    sigma_hat = -float(coef[1])
    at_cap = sigma_hat > cap
    return RadiusEstimate(
        sigma_hat=cap if at_cap else max(sigma_hat, 0.0),
        at_cap=bool(at_cap),
        fit_window=(float(xs.min()), float(xs.max())),
        r_squared=float(np.clip(r2, 0.0, 1.0)),
        noise_floor_used=float(floor),
        n_modes=n_modes,
        power=float(coef[2]) if power_law else 0.0,
    )
