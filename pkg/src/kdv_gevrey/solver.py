"""Pseudospectral time evolution of u_t + u_xxx + u u_x = 0.

The stiff dispersive part is diagonal in Fourier space, ``d/dt u_hat =
i xi^3 u_hat + N(u_hat)``, and is integrated exactly by the Airy group
``W(t) = exp(i t xi^3)``; the quadratic term is advanced with fourth-order
exponential time differencing (Cox-Matthews / Kassam-Trefethen ETDRK4).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List

import numpy as np

from .errors import InputError, InstabilityError, NoContractionError
from .gevrey import GevreyParams, check_guard, gevrey_weight
from .spectral import (
    SQRT_2PI,
    GridSpec,
    RealField,
    SpectralField,
    _to_physical,
    _to_spectral,
    apply_multiplier,
    dealias_mask,
    forward,
)

log = logging.getLogger(__name__)

RESOLUTION_TOL = 1e-12
# ETDRK4 reduces to classical RK4 on the explicit advection term, whose
# stability interval on the imaginary axis is |z| < 2*sqrt(2)
ADVECTIVE_LIMIT = 2.0 * np.sqrt(2.0)


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    dealias_on: bool = True
    record_every: int = 100

    def __post_init__(self):
        # No upper bound on dt: an oversized step is reported by the solver
        # as an InstabilityError rather than rejected up front.
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InputError(f"dt must be positive and finite, got {self.dt}")
        if not np.isfinite(self.t_end) or self.t_end < 0:
            raise InputError(f"t_end must be finite and nonnegative, got {self.t_end}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise InputError(f"record_every must be a positive integer, got {self.record_every}")


@dataclass(frozen=True)
class ConservationReport:
    mass_drift: float
    momentum_drift: float
    hamiltonian_drift: float


@dataclass
class Trajectory:
    times: List[float]
    snapshots: List[SpectralField]
    report: ConservationReport
    # per-step invariant histories, kept for diagnostics
    step_times: np.ndarray = field(default=None, repr=False)
    mass: np.ndarray = field(default=None, repr=False)
    momentum: np.ndarray = field(default=None, repr=False)
    hamiltonian: np.ndarray = field(default=None, repr=False)

    @property
    def final(self) -> SpectralField:
        return self.snapshots[-1]


# --- linear flow -----------------------------------------------------------

def airy_symbol(xi: np.ndarray, t: float) -> np.ndarray:
    return np.exp(1j * t * xi ** 3)


def free_evolve(f: SpectralField, t: float) -> SpectralField:
    """Apply the Airy group ``W(t)``, symbol ``exp(i t xi^3)``."""
    return apply_multiplier(f, airy_symbol(f.grid.xi, t))


# --- nonlinearity ----------------------------------------------------------

def _nonlinear(grid: GridSpec, c: np.ndarray, dealias_on: bool = True) -> np.ndarray:
    """Spectral ``-(1/2) d/dx (u^2)`` for coefficient arrays (batched on axis 0)."""
    if dealias_on:
        mask = dealias_mask(grid)
        c = np.where(mask, c, 0.0)
    u = _to_physical(grid, c)
    sq = _to_spectral(grid, u * u)
    if dealias_on:
        sq = np.where(mask, sq, 0.0)
    return -0.5j * grid.xi * sq


def nonlinear_rhs(f: SpectralField, dealias_on: bool = True) -> SpectralField:
    return SpectralField(f.grid, _nonlinear(f.grid, f.coeffs, dealias_on))


# --- ETDRK4 ----------------------------------------------------------------

@dataclass(frozen=True)
class _EtdCoefficients:
    E: np.ndarray
    E2: np.ndarray
    Q: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray


@lru_cache(maxsize=16)
def _etd_coefficients(grid: GridSpec, dt: float, n_contour: int = 32) -> _EtdCoefficients:
    lin = 1j * grid.xi ** 3
    hl = dt * lin
    roots = np.exp(2j * np.pi * (np.arange(1, n_contour + 1) - 0.5) / n_contour)
    r = hl[:, None] + roots[None, :]
    er = np.exp(r)
    Q = dt * np.mean((np.exp(r / 2) - 1.0) / r, axis=1)
    f1 = dt * np.mean((-4.0 - r + er * (4.0 - 3.0 * r + r ** 2)) / r ** 3, axis=1)
    f2 = dt * np.mean((2.0 + r + er * (r - 2.0)) / r ** 3, axis=1)
    f3 = dt * np.mean((-4.0 - 3.0 * r - r ** 2 + er * (4.0 - r)) / r ** 3, axis=1)
    return _EtdCoefficients(np.exp(hl), np.exp(hl / 2), Q, f1, f2, f3)


def _etdrk4(grid: GridSpec, c: np.ndarray, dt: float, dealias_on: bool = True) -> np.ndarray:
    k = _etd_coefficients(grid, float(dt))
    N = lambda v: _nonlinear(grid, v, dealias_on)  # noqa: E731
    Nv = N(c)
    a = k.E2 * c + k.Q * Nv
    Na = N(a)
    b = k.E2 * c + k.Q * Na
    Nb = N(b)
    cc = k.E2 * a + k.Q * (2.0 * Nb - Nv)
    Nc = N(cc)
    out = k.E * c + k.f1 * Nv + 2.0 * k.f2 * (Na + Nb) + k.f3 * Nc
    out[grid.nyquist_index] = 0.0
    return out


def step(f: SpectralField, dt: float, t: float = 0.0, dealias_on: bool = True) -> SpectralField:
    """Advance one ETDRK4 step of length ``dt`` (``t`` is used for error reports)."""
    if not dt > 0:
        raise InputError(f"dt must be positive, got {dt}")
    out = _etdrk4(f.grid, f.coeffs, dt, dealias_on)
    if not np.all(np.isfinite(out)):
        raise InstabilityError(f"non-finite solution after step ending at t={t + dt:g}", t + dt)
    return SpectralField(f.grid, out)


# --- invariants ------------------------------------------------------------

def mass(f: SpectralField) -> float:
    return float(SQRT_2PI * f.coeffs[0].real)


def momentum(f: SpectralField) -> float:
    """``int u^2 dx``."""
    return float(np.sum(np.abs(f.coeffs) ** 2) * f.grid.dxi)


def hamiltonian(f: SpectralField) -> float:
    """``int (u_x^2/2 - u^3/6) dx``."""
    grid = f.grid
    kinetic = 0.5 * np.sum(grid.xi ** 2 * np.abs(f.coeffs) ** 2) * grid.dxi
    u = _to_physical(grid, f.coeffs)
    return float(kinetic - np.sum(u ** 3) * grid.dx / 6.0)


def _drift(series: np.ndarray) -> float:
    ref = series[0]
    dev = np.max(np.abs(series - ref))
    return float(dev / abs(ref)) if ref != 0 else float(dev)


def spectral_tail(f: SpectralField) -> float:
    """Largest coefficient outside the two-thirds band, relative to the peak."""
    a = np.abs(f.coeffs)
    peak = a.max()
    if peak == 0:
        return 0.0
    return float(a[~dealias_mask(f.grid)].max() / peak)


def evolve(u0: RealField, cfg: SolverConfig) -> Trajectory:
    """Integrate from ``u0`` to ``cfg.t_end``.

    The step count is ``ceil(t_end/dt)`` and the step is shrunk so that the
    final time is hit exactly.  A step whose advective Courant number
    ``dt * max|u| * max|xi|`` leaves the RK4 stability interval raises
    ``InstabilityError``.  Snapshots are kept every ``record_every``
    steps plus the final state; invariants are tracked at every step.
    """
    f = forward(u0)
    return evolve_spectral(f, cfg)


def evolve_spectral(f: SpectralField, cfg: SolverConfig) -> Trajectory:
    tail = spectral_tail(f)
    if tail > RESOLUTION_TOL:
        raise InputError(f"datum is under-resolved: spectral tail {tail:.2e} > {RESOLUTION_TOL:g}")
    grid = f.grid
    n_steps = int(np.ceil(cfg.t_end / cfg.dt - 1e-9)) if cfg.t_end > 0 else 0
    dt = cfg.t_end / n_steps if n_steps else cfg.dt
    c = np.array(f.coeffs)
    times, snaps = [0.0], [f]
    step_times = np.zeros(n_steps + 1)
    hist = np.zeros((3, n_steps + 1))
    hist[:, 0] = (mass(f), momentum(f), hamiltonian(f))
    xi_top = np.max(np.abs(grid.xi[dealias_mask(grid)])) if cfg.dealias_on else grid.xi_max
    for i in range(1, n_steps + 1):
        t_prev = (i - 1) * dt
        courant = dt * xi_top * np.max(np.abs(_to_physical(grid, c)))
        if courant > ADVECTIVE_LIMIT:
            raise InstabilityError(
                f"advective Courant number {courant:.3g} exceeds {ADVECTIVE_LIMIT:.3g} "
                f"at t={t_prev:g} (dt={dt:g})", t_prev)
        c = _etdrk4(grid, c, dt, cfg.dealias_on)
        if not np.all(np.isfinite(c)):
            raise InstabilityError(f"non-finite solution at t={i * dt:g} (dt={dt:g})", i * dt)
        cur = SpectralField(grid, c)
        step_times[i] = i * dt
        hist[:, i] = (mass(cur), momentum(cur), hamiltonian(cur))
        if not np.all(np.isfinite(hist[:, i])):
            raise InstabilityError(f"invariants overflowed at t={i * dt:g}", i * dt)
        if i % cfg.record_every == 0 or i == n_steps:
            times.append(cfg.t_end if i == n_steps else i * dt)
            snaps.append(cur)
    report = ConservationReport(_drift(hist[0]), _drift(hist[1]), _drift(hist[2]))
    return Trajectory(times, snaps, report, step_times, hist[0], hist[1], hist[2])


# --- Picard iteration on the Duhamel map -----------------------------------

@dataclass
class PicardResult:
    times: np.ndarray
    iterates: List[np.ndarray] = field(repr=False)  # each (n_slices+1, n) coefficient array
    distances: List[float]
    factors: List[float]
    converged: bool
    delta: float
    grid: GridSpec = field(repr=False)

    @property
    def limit(self) -> SpectralField:
        """Last iterate at ``t = delta``."""
        return SpectralField(self.grid, self.iterates[-1][-1])

    def iterate_at(self, n: int, j: int = -1) -> SpectralField:
        return SpectralField(self.grid, self.iterates[n][j])

    @property
    def max_factor(self) -> float:
        return max(self.factors) if self.factors else 0.0


def _sup_gevrey(grid: GridSpec, rows: np.ndarray, weight: np.ndarray) -> float:
    return float(np.sqrt(np.max(np.sum((weight * np.abs(rows)) ** 2, axis=1)) * grid.dxi))


def picard_iterate(u0: RealField, delta: float, p: GevreyParams = GevreyParams(),
                   n_max: int = 50, tol: float = 1e-12, n_slices: int = 64,
                   keep_iterates: bool = True) -> PicardResult:
    """Iterate ``u_n(t) = W(t)u0 - 1/2 int_0^t W(t-t') d/dx (u_{n-1}^2)(t') dt'``.

    Time is sampled on ``n_slices + 1`` uniform points in [0, delta] and the
    Duhamel integral uses the trapezoid rule on those slices.  Iteration stops
    once ``d_n = sup_t ||u_n - u_{n-1}||_{G^{sigma,s}}`` falls below ``tol``
    times ``sup_t ||u_0||_{G^{sigma,s}}``, or after ``n_max`` iterates.
    """
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")
    grid = u0.grid
    check_guard(p.sigma, grid)
    weight = gevrey_weight(grid.xi, p)
    times = np.linspace(0.0, delta, n_slices + 1)
    h = delta / n_slices
    W = np.exp(1j * times[:, None] * grid.xi[None, :] ** 3)
    c0 = forward(u0).coeffs

    current = W * c0[None, :]
    current[:, grid.nyquist_index] = 0.0
    iterates = [current]
    scale = _sup_gevrey(grid, current, weight)
    if scale == 0.0:
        return PicardResult(times, iterates, [], [], True, delta, grid)

    distances: List[float] = []
    factors: List[float] = []
    streak = 0
    converged = False
    for n in range(1, n_max + 1):
        # interaction picture: W(-t') N(u(t')), then cumulative trapezoid
        g = np.conj(W) * _nonlinear(grid, current)
        integral = np.zeros_like(g)
        integral[1:] = np.cumsum(0.5 * h * (g[1:] + g[:-1]), axis=0)
        nxt = W * (c0[None, :] + integral)
        nxt[:, grid.nyquist_index] = 0.0
        if not np.all(np.isfinite(nxt)):
            raise NoContractionError(f"Picard iterates overflowed at n={n} for delta={delta:g}", delta)
        d = _sup_gevrey(grid, nxt - current, weight)
        if distances:
            factor = d / distances[-1] if distances[-1] > 0 else 0.0
            factors.append(factor)
            streak = streak + 1 if factor >= 1.0 else 0
            if streak >= 3:
                raise NoContractionError(
                    f"no contraction for delta={delta:g}: factors {factors[-3:]}", delta)
        distances.append(d)
        current = nxt
        if keep_iterates:
            iterates.append(current)
        else:
            iterates = [current]
        if d <= tol * scale:
            converged = True
            break
    log.debug("picard delta=%g iterations=%d factors=%s", delta, len(distances), factors)
    return PicardResult(times, iterates, distances, factors, converged, delta, grid)


# --- uniqueness diagnostic -------------------------------------------------

@dataclass
class UniquenessDiagnostic:
    times: np.ndarray
    gap: np.ndarray
    bound: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.gap <= self.bound * (1 + 1e-8) + 1e-14))


def _sup_dx(grid: GridSpec, c: np.ndarray) -> float:
    return float(np.max(np.abs(_to_physical(grid, 1j * grid.xi * c))))


def uniqueness_diagnostic(u0: RealField, v0: RealField, cfg: SolverConfig) -> UniquenessDiagnostic:
    """Compare the L^2 gap of two runs with the Gronwall envelope.

    The envelope is ``||w(0)|| exp(int_0^t (||u_x||_inf + ||v_x||_inf) dt')``,
    with the time integral taken by the trapezoid rule over recorded states.
    """
    ru = evolve(u0, cfg)
    rv = evolve(v0, cfg)
    grid = u0.grid
    times = np.array(ru.times)
    gap = np.array([(a - b).l2_norm() for a, b in zip(ru.snapshots, rv.snapshots)])
    rate = np.array([_sup_dx(grid, a.coeffs) + _sup_dx(grid, b.coeffs)
                     for a, b in zip(ru.snapshots, rv.snapshots)])
    integral = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(times) * (rate[1:] + rate[:-1]))])
    return UniquenessDiagnostic(times, gap, gap[0] * np.exp(integral))
