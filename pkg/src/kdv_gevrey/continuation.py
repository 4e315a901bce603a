"""Global continuation of the strip width.

Local existence holds on windows of length ``delta = c0/(1+2 M0)^a`` and on
each window the weighted energy ``M_sigma^2`` grows by at most
``C sigma^rho 2^{3/2} M0^3``.  Choosing ``sigma`` so that ``2T/delta`` such
increments stay below ``M0^2`` keeps ``M_sigma^2 <= 2 M0^2`` up to time T,
which gives ``sigma(T) = min(sigma0, c T^{-1/rho})``.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from .conservation import gevrey_energy_series, track_growth
from .errors import (
    BudgetError,
    CalibrationError,
    EstimatorUndefinedError,
    FitUndefinedError,
    InputError,
    NoContractionError,
    PreconditionError,
)
from .gevrey import GevreyParams, embedding_constant, estimate_radius, gevrey_norm
from .solver import SolverConfig, Trajectory, evolve, picard_iterate
from .spectral import GridSpec, RealField, forward

log = logging.getLogger(__name__)

STEP_BUDGET = 10 ** 9
TWO_32 = 2.0 ** 1.5
TWO_52 = 2.0 ** 2.5


@dataclass(frozen=True)
class ContinuationParams:
    C: float = 1.0
    c0: float = 0.1
    a: float = 4.0
    rho: float = 0.74
    sigma0: float = 0.5
    M0: float = 1.0

    def __post_init__(self):
        if not 0 < self.rho < 0.75:
            raise InputError(f"rho must lie in (0, 3/4), got {self.rho}")
        if not self.a > 1:
            raise InputError(f"a must exceed 1, got {self.a}")
        if not (self.C >= 0 and self.c0 > 0 and self.sigma0 > 0 and self.M0 >= 0):
            raise InputError("C, M0 must be nonnegative and c0, sigma0 positive")
        for name in ("C", "c0", "a", "rho", "sigma0", "M0"):
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"{name} must be finite")


def local_timestep(M: float, p: ContinuationParams) -> float:
    """``c0 / (1 + 2M)^a``."""
    if M < 0:
        raise InputError("M must be nonnegative")
    return p.c0 / (1.0 + 2.0 * M) ** p.a


def smallness_lhs(sigma: float, T: float, p: ContinuationParams) -> float:
    delta = local_timestep(p.M0, p)
    return (2.0 * T / delta) * p.C * sigma ** p.rho * TWO_32 * p.M0


def smallness_ok(sigma: float, T: float, p: ContinuationParams) -> bool:
    """Both ``sigma <= sigma0`` and ``(2T/delta) C sigma^rho 2^{3/2} M0 <= 1``."""
    if not T > 0:
        raise InputError(f"T must be positive, got {T}")
    return bool(sigma <= p.sigma0 and smallness_lhs(sigma, T, p) <= 1.0)


def sigma_constant(p: ContinuationParams) -> float:
    """``c = (c0 / (C 2^{5/2} M0 (1+2M0)^a))^{1/rho}``."""
    return (p.c0 / (p.C * TWO_52 * p.M0 * (1.0 + 2.0 * p.M0) ** p.a)) ** (1.0 / p.rho)


def solve_sigma(T: float, p: ContinuationParams) -> tuple:
    """Return ``(sigma(T), c)`` with ``sigma(T) = min(sigma0, c T^{-1/rho})``.

    Zero data (or ``C == 0``) never shrinks the strip: ``(sigma0, inf)``.
    The result is nudged down by a few ulps if rounding would otherwise
    break the smallness inequality.
    """
    if not T > 0:
        raise InputError(f"T must be positive, got {T}")
    if p.M0 == 0 or p.C == 0:
        return p.sigma0, math.inf
    c = sigma_constant(p)
    sigma = min(p.sigma0, c * T ** (-1.0 / p.rho))
    for _ in range(64):
        if smallness_ok(sigma, T, p):
            break
        sigma = math.nextafter(sigma, 0.0)
    return sigma, c


@dataclass
class Schedule:
    T: float
    delta: float
    n_steps: int
    sigma: float
    c: float
    m0_sq: float
    increment: float

    @property
    def final_m_sq(self) -> float:
        return self.m0_sq + (self.n_steps + 1) * self.increment

    def predicted(self, k) -> np.ndarray:
        """Predicted ``M_k^2 = M0^2 + k * increment``."""
        return self.m0_sq + np.asarray(k) * self.increment

    @property
    def predicted_m_sq(self) -> np.ndarray:
        """The full sequence for ``k = 0..n+1`` (materialized on demand)."""
        return self.predicted(np.arange(self.n_steps + 2))

    @property
    def bound(self) -> float:
        return 2.0 * self.m0_sq


def simulate_induction(T: float, sigma: float, p: ContinuationParams,
                       budget: int = STEP_BUDGET) -> Schedule:
    """Replay the window-by-window energy recursion up to ``k = n+1``.

    ``n`` satisfies ``n delta <= T < (n+1) delta``.  The recursion is affine,
    so the bound ``M_k^2 <= 2 M0^2`` is checked at its last (largest) term.
    """
    if not smallness_ok(sigma, T, p):
        raise PreconditionError(
            f"sigma={sigma:g} violates the smallness condition at T={T:g}")
    delta = local_timestep(p.M0, p)
    # exact rational floor, so that n*delta <= T < (n+1)*delta holds without rounding
    n = math.floor(Fraction(T) / Fraction(delta))
    if n + 1 > budget:
        raise BudgetError(f"{n + 1} windows exceed the step budget {budget}")
    increment = p.C * sigma ** p.rho * TWO_32 * p.M0 ** 3
    _, c = solve_sigma(T, p)
    sched = Schedule(T, delta, n, sigma, c, p.M0 ** 2, increment)
    if sched.final_m_sq > sched.bound * (1 + 1e-12):
        # cannot happen under smallness_ok; kept as an explicit invariant check
        raise PreconditionError(
            f"induction bound broken: {sched.final_m_sq:g} > {sched.bound:g}")
    return sched


@dataclass(frozen=True)
class GeneralSchedule:
    """``T -> min(sigma0/4, kappa T^{-1/rho})`` for a datum in G^{sigma0, s}."""
    kappa: float
    clamp: float
    rho: float
    M_half: float

    def __call__(self, T: float) -> float:
        if not T > 0:
            raise InputError("T must be positive")
        return min(self.clamp, self.kappa * T ** (-1.0 / self.rho))


def general_s_schedule(sigma0: float, s: float, p: ContinuationParams,
                       grid: Optional[GridSpec] = None) -> GeneralSchedule:
    """Reduce index ``s`` to ``s = 0`` through the embedding into G^{sigma0/2, 0}.

    ``p.M0`` is read as ``||u0||_{G^{sigma0, s}}``; the norm at strip
    ``sigma0/2`` is bounded by the embedding constant times it.
    """
    K = embedding_constant(GevreyParams(sigma0, s), GevreyParams(sigma0 / 2.0, 0.0), grid)
    half = replace(p, sigma0=sigma0 / 2.0, M0=K * p.M0)
    if half.M0 == 0 or half.C == 0:
        return GeneralSchedule(math.inf, sigma0 / 4.0, p.rho, half.M0)
    c = sigma_constant(half)
    return GeneralSchedule(c / 2.0, sigma0 / 4.0, p.rho, half.M0)


# --- calibration -----------------------------------------------------------

AMPLITUDES = (0.25, 0.5, 1.0, 2.0, 4.0)
CONTRACTION_TARGET = 0.5
GROWTH_RESOLVED = 1e-12


@dataclass
class CalibrationReport:
    amplitudes: List[float]
    norms: List[float]
    delta_max: List[float]
    a_fit: float
    c0: float
    a: float
    C: float
    growth_slope: Optional[float]
    notes: List[str] = field(default_factory=list)


def _delta_admissible(u0: RealField, delta: float, p: GevreyParams, n_slices: int,
                      resolution_tol: float) -> bool:
    """Picard contracts below the target and its trapezoid limit is resolved.

    Resolution means the limit at ``t = delta`` moves by at most
    ``resolution_tol`` in G^{sigma,s} when the time slices are doubled.
    """
    try:
        coarse = picard_iterate(u0, delta, p, n_slices=n_slices, keep_iterates=False)
    except NoContractionError:
        return False
    if not (coarse.converged and coarse.max_factor < CONTRACTION_TARGET):
        return False
    fine = picard_iterate(u0, delta, p, n_slices=2 * n_slices, keep_iterates=False)
    return gevrey_norm(coarse.limit - fine.limit, p) <= resolution_tol


def calibrate(u0: RealField, p0: ContinuationParams,
              trial_deltas: Sequence[float] = tuple(0.8 * 2.0 ** (-j / 2.0) for j in range(17)),
              amplitudes: Sequence[float] = AMPLITUDES, n_slices: int = 64,
              resolution_tol: float = 2.5e-7, growth_sigmas: Sequence[float] = (0.4, 0.2, 0.1, 0.05),
              ) -> tuple:
    """Fit ``c0, a`` to measured Picard contraction and ``C`` to measured growth.

    For each amplitude ``lam`` the largest trial ``delta`` is found at which
    the iteration for ``lam*u0`` contracts with every factor below 1/2 and
    whose trapezoid limit changes by less than ``resolution_tol`` when the
    slices are doubled.  ``a`` is the log-log slope of those deltas against
    ``1 + 2 M`` (clipped to (1, 8]); ``c0`` is the largest value for which
    ``c0/(1+2M)^a`` stays below every measured threshold.  ``C`` is the
    smallest constant with ``G(sigma) <= C sigma^rho M^3`` on the growth
    grid, never less than the fitted log-log intercept divided by ``M^3``.
    Returns ``(params, report)``.
    """
    grid = u0.grid
    f0 = forward(u0)
    sigma = min(p0.sigma0, 0.3)
    gp = GevreyParams(sigma, 0.0)
    M_base = gevrey_norm(f0, GevreyParams(p0.sigma0, 0.0))
    if M_base == 0.0:
        report = CalibrationReport([], [], [], p0.a, p0.c0, p0.a, p0.C, None,
                                   ["zero datum: constants left at their defaults"])
        return replace(p0, M0=0.0), report

    trials = sorted(trial_deltas, reverse=True)
    norms, thresholds = [], []
    for lam in amplitudes:
        u = RealField(grid, lam * u0.samples)
        M = lam * M_base
        found = None
        for delta in trials:
            if _delta_admissible(u, delta, gp, n_slices, resolution_tol):
                found = delta
                break
        if found is None:
            raise CalibrationError(f"no trial delta contracts for amplitude {lam:g}")
        log.info("calibrate: amplitude %g M=%g delta_max=%g", lam, M, found)
        norms.append(M)
        thresholds.append(found)

    x = np.log1p(2.0 * np.array(norms))
    y = np.log(thresholds)
    a_fit = -np.polyfit(x, y, 1)[0] if len(set(norms)) > 1 else p0.a
    a = float(np.clip(a_fit, 1.0 + 1e-6, 8.0))
    c0 = float(np.min(np.array(thresholds) * (1.0 + 2.0 * np.array(norms)) ** a))
    notes = []
    if a != a_fit:
        notes.append(f"fitted a={a_fit:.4g} clipped to {a:.4g}")

    p1 = replace(p0, c0=c0, a=a, M0=M_base)
    delta = local_timestep(M_base, p1)
    C, slope = p0.C, None
    try:
        series = track_growth(u0, delta, growth_sigmas)
        slope = series.slope
        if np.max(series.growth / series.initial_sq) < GROWTH_RESOLVED:
            raise FitUndefinedError(
                f"relative growth {np.max(series.growth / series.initial_sq):.2e} is round-off")
        m_cubed = np.sqrt(series.initial_sq) ** 3
        ok = series.fit_mask
        envelope = np.max(series.growth[ok] / (series.sigmas[ok] ** p0.rho * m_cubed[ok]))
        C = float(max(envelope, series.constant / M_base ** 3))
    except FitUndefinedError as exc:
        notes.append(f"growth fit unavailable ({exc}); C kept at {p0.C:g}")
    params = replace(p1, C=C)
    report = CalibrationReport(list(amplitudes), norms, thresholds, float(a_fit), c0, a, C,
                               slope, notes)
    return params, report


# --- orchestrated global run -----------------------------------------------

@dataclass
class GlobalRun:
    trajectory: Trajectory
    schedule: Schedule
    times: np.ndarray
    m_sigma_sq: np.ndarray
    bound: float
    radius: List[Optional[float]]
    floor: np.ndarray
    bound_ok: bool
    diagnostics: List[str] = field(default_factory=list)


BOUND_TOL = 0.05


def run_global(u0: RealField, T: float, p: ContinuationParams, cfg: SolverConfig) -> GlobalRun:
    """Evolve to T and compare ``M_sigma(t)^2`` with ``2 M0^2`` at ``sigma = sigma(T)``.

    Violations are reported in ``diagnostics`` rather than raised.  The
    radius series is the decay-rate estimate at each recorded time, next to
    the theoretical floor ``sigma(t)``.
    """
    if not T > 0:
        raise InputError("T must be positive")
    sigma, _ = solve_sigma(T, p)
    schedule = simulate_induction(T, sigma, p)
    traj = evolve(u0, SolverConfig(cfg.dt, T, cfg.dealias_on, cfg.record_every))
    times = np.array(traj.times)
    m_sq = gevrey_energy_series(traj.snapshots, sigma)
    bound = 2.0 * p.M0 ** 2
    diagnostics = []
    bound_ok = bool(np.all(m_sq <= bound * (1 + BOUND_TOL)))
    if not bound_ok:
        worst = float(m_sq.max())
        diagnostics.append(
            f"M_sigma^2 reached {worst:.6g} > 2 M0^2 (1+{BOUND_TOL}) = {bound * (1 + BOUND_TOL):.6g}")
    radius = []
    for snap in traj.snapshots:
        try:
            radius.append(estimate_radius(snap).sigma_hat if np.any(snap.coeffs) else None)
        except EstimatorUndefinedError:
            radius.append(None)
    floor = np.array([solve_sigma(t, p)[0] if t > 0 else p.sigma0 for t in times])
    return GlobalRun(traj, schedule, times, m_sq, bound, radius, floor, bound_ok, diagnostics)
