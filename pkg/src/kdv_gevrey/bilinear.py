"""Discrete Bourgain-space norms, the min-weighted convolution B_rho, bilinear
ratio scans and the low-high frequency counterexample.

Space-time fields live on uniform grids that contain the origin, so the
difference of two grid frequencies is again a grid frequency and every
convolution is a plain direct sum.  The transform constant of the product
rule is dropped throughout: ``(uv)~`` is represented by ``B_0(u, v)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GridMismatchError, InputError, OverflowGuardError, RegionDegeneracyError
from .gevrey import OVERFLOW_GUARD
from .spectral import SQRT_2PI, GridSpec

MAX_AXIS = 256


# --- spatial (1-D) B_rho ---------------------------------------------------

def apply_brho_line(grid: GridSpec, a: np.ndarray, b: np.ndarray, rho: float) -> np.ndarray:
    """``(2pi)^{-1/2} sum_j min(|xi-xi_j|, |xi_j|)^rho a(xi-xi_j) b(xi_j) dxi``.

    Arrays are in FFT order; the sum is non-cyclic (terms whose frequency
    difference leaves the grid are dropped).  With ``rho == 0`` this is the
    Fourier transform of the product of the two fields.
    """
    n = grid.n_points
    A = np.fft.fftshift(a)
    B = np.fft.fftshift(b)
    k = np.arange(n) - n // 2
    support = np.nonzero(B)[0]
    if support.size == 0:
        return np.zeros(n, dtype=np.result_type(a, b))
    kj = k[support]
    diff = k[:, None] - kj[None, :]
    valid = (diff >= -(n // 2)) & (diff < n // 2)
    A_shift = np.where(valid, A[np.clip(diff + n // 2, 0, n - 1)], 0.0)
    weight = np.minimum(np.abs(diff), np.abs(kj)[None, :]) * grid.dxi
    if rho != 0:
        A_shift = A_shift * weight ** rho
    out = A_shift @ B[support] * (grid.dxi / SQRT_2PI)
    return np.fft.ifftshift(out)


# --- space-time fields -----------------------------------------------------

def centered_axis(n: int, spacing: float) -> np.ndarray:
    """Uniform axis ``spacing * (i - n//2)``, which contains 0."""
    return spacing * (np.arange(n) - n // 2)


def _axis_origin(axis: np.ndarray) -> tuple:
    """Return ``(spacing, index of 0)`` or raise if the axis is unusable."""
    if axis.ndim != 1 or axis.size < 2:
        raise GridMismatchError("axes must be one-dimensional with at least two points")
    h = axis[1] - axis[0]
    if not h > 0 or not np.allclose(np.diff(axis), h, rtol=1e-12, atol=0):
        raise GridMismatchError("axes must be uniform and increasing")
    c = int(round(-axis[0] / h))
    if not (0 <= c < axis.size) or abs(axis[c]) > 1e-9 * h:
        raise GridMismatchError("axes must contain the origin")
    return float(h), c


@dataclass(frozen=True)
class SpaceTimeField:
    xi: np.ndarray
    tau: np.ndarray
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        tau = np.asarray(self.tau, dtype=float)
        c = np.asarray(self.coeffs, dtype=complex)
        if xi.size > MAX_AXIS or tau.size > MAX_AXIS:
            raise InputError(f"space-time grids are capped at {MAX_AXIS} points per axis")
        if c.shape != (xi.size, tau.size):
            raise InputError(f"coefficient shape {c.shape} does not match grid "
                             f"({xi.size}, {tau.size})")
        if not np.all(np.isfinite(c)):
            raise InputError("space-time coefficients must be finite")
        for name, arr in (("xi", xi), ("tau", tau), ("coeffs", c)):
            arr = np.array(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dxi(self) -> float:
        return float(self.xi[1] - self.xi[0])

    @property
    def dtau(self) -> float:
        return float(self.tau[1] - self.tau[0])

    def with_coeffs(self, coeffs: np.ndarray) -> "SpaceTimeField":
        return SpaceTimeField(self.xi, self.tau, coeffs)

    def same_grid(self, other: "SpaceTimeField") -> bool:
        return (self.xi.shape == other.xi.shape and self.tau.shape == other.tau.shape
                and np.array_equal(self.xi, other.xi) and np.array_equal(self.tau, other.tau))


@dataclass(frozen=True)
class XsbWeight:
    sigma: float = 0.0
    s: float = 0.0
    b: float = 0.0

    def __call__(self, xi: np.ndarray, tau: np.ndarray, guard: float = OVERFLOW_GUARD) -> np.ndarray:
        XI, TAU = np.meshgrid(xi, tau, indexing="ij")
        axi = np.abs(XI)
        if self.sigma * axi.max(initial=0.0) > guard:
            raise OverflowGuardError(
                f"sigma*max|xi| = {self.sigma * axi.max():g} exceeds the guard {guard:g}")
        return (np.exp(self.sigma * axi) * (1.0 + axi) ** self.s
                * (1.0 + np.abs(TAU - XI ** 3)) ** self.b)


def xsb_norm(u: SpaceTimeField, w: XsbWeight) -> float:
    """Weighted discrete L^2 norm with measure ``dxi*dtau``."""
    weighted = w(u.xi, u.tau) * np.abs(u.coeffs)
    return float(np.sqrt(np.sum(weighted ** 2) * u.dxi * u.dtau))


def apply_Brho(u: SpaceTimeField, v: SpaceTimeField, rho: float) -> SpaceTimeField:
    """``sum min(|xi-xi1|,|xi1|)^rho u(xi-xi1, tau-tau1) v(xi1, tau1) dxi1 dtau1``.

    Direct summation over the shared grid; terms whose shifted frequency
    leaves the grid are dropped.  The tau-convolution for a fixed ``xi1`` is
    a Toeplitz matrix product.
    """
    if not u.same_grid(v):
        raise GridMismatchError("B_rho needs both fields on the same grid")
    if rho < 0:
        raise InputError("rho must be nonnegative")
    hx, cx = _axis_origin(u.xi)
    ht, ct = _axis_origin(u.tau)
    nx, nt = u.coeffs.shape
    # toeplitz index: T[m, j] = v[p, j - m + ct]
    q_index = np.arange(nt)[None, :] - np.arange(nt)[:, None] + ct
    q_valid = (q_index >= 0) & (q_index < nt)
    q_index = np.clip(q_index, 0, nt - 1)
    rows = np.arange(nx)
    out = np.zeros((nx, nt), dtype=complex)
    uc, vc = u.coeffs, v.coeffs
    for p in range(nx):
        vp = vc[p]
        if not np.any(vp):
            continue
        src = rows - p + cx
        ok = (src >= 0) & (src < nx)
        if not np.any(ok):
            continue
        T = np.where(q_valid, vp[q_index], 0.0)
        if rho == 0:
            w = np.ones(nx)
        else:
            w = np.minimum(np.abs(u.xi - u.xi[p]), abs(u.xi[p])) ** rho
        out[ok] += (w[ok, None] * uc[src[ok]]) @ T
    return u.with_coeffs(out * hx * ht)


def kpv_ratio(u: SpaceTimeField, v: SpaceTimeField, s: float, b: float, b_prime: float,
              sigma: float = 0.0) -> float:
    """``||d_x(uv)||_{X^{sigma,s,b'-1}} / (||u||_{X^{sigma,s,b}} ||v||_{X^{sigma,s,b}})``."""
    nu = xsb_norm(u, XsbWeight(sigma, s, b))
    nv = xsb_norm(v, XsbWeight(sigma, s, b))
    if nu == 0 or nv == 0:
        raise InputError("kpv_ratio needs inputs with nonzero norm")
    prod = apply_Brho(u, v, 0.0)
    deriv = prod.with_coeffs(1j * prod.xi[:, None] * prod.coeffs)
    return xsb_norm(deriv, XsbWeight(sigma, s, b_prime - 1.0)) / (nu * nv)


def gevrey_lift(u: SpaceTimeField, sigma: float) -> SpaceTimeField:
    """``exp(sigma|xi|) |u~|``: the data whose plain ratio dominates the weighted one."""
    return u.with_coeffs(np.exp(sigma * np.abs(u.xi))[:, None] * np.abs(u.coeffs))


def random_bump_field(xi: np.ndarray, tau: np.ndarray, rng: np.random.Generator,
                      box: tuple, n_bumps: int = 3, width: tuple = (0.15, 0.3)) -> SpaceTimeField:
    """Sum of complex Gaussian bumps centred in ``[-box[0], box[0]] x [-box[1], box[1]]``.

    Widths are fractions of the box half-widths, so the same draw is the
    same continuum function on any grid.
    """
    XI, TAU = np.meshgrid(xi, tau, indexing="ij")
    c = np.zeros(XI.shape, dtype=complex)
    for _ in range(n_bumps):
        cx, ct = rng.uniform(-box[0], box[0]), rng.uniform(-box[1], box[1])
        wx = rng.uniform(*width) * box[0]
        wt = rng.uniform(*width) * box[1]
        amp = rng.normal() + 1j * rng.normal()
        c += amp * np.exp(-((XI - cx) / wx) ** 2 - ((TAU - ct) / wt) ** 2)
    return SpaceTimeField(xi, tau, c)


@dataclass
class KpvScan:
    ratios: np.ndarray
    max_ratio: float
    gevrey_ratios: Optional[np.ndarray] = None
    dominated_ratios: Optional[np.ndarray] = None


def kpv_scan(n_draws: int, n_xi: int = 64, n_tau: int = 64, extent: tuple = (4.0, 64.0),
             box: tuple = (1.0, 16.0), s: float = 0.0, b: float = 0.6, b_prime: float = 0.7,
             sigma: float = 0.0, seed: int = 0) -> KpvScan:
    """Random-field scan of ``kpv_ratio``.

    ``extent`` is the half-width of the (xi, tau) grid, ``box`` the half-width
    of the region holding the bump centres.  With ``sigma > 0`` the weighted
    ratio of each draw is also recorded together with the plain ratio of its
    lifted data (``gevrey_lift``), which must dominate it.
    """
    xi = centered_axis(n_xi, 2.0 * extent[0] / n_xi)
    tau = centered_axis(n_tau, 2.0 * extent[1] / n_tau)
    rng = np.random.default_rng(seed)
    ratios, gev, dom = [], [], []
    for _ in range(n_draws):
        u = random_bump_field(xi, tau, rng, box)
        v = random_bump_field(xi, tau, rng, box)
        ratios.append(kpv_ratio(u, v, s, b, b_prime))
        if sigma > 0:
            gev.append(kpv_ratio(u, v, s, b, b_prime, sigma))
            dom.append(kpv_ratio(gevrey_lift(u, sigma), gevrey_lift(v, sigma), s, b, b_prime))
    ratios = np.array(ratios)
    return KpvScan(ratios, float(ratios.max()),
                   np.array(gev) if gev else None, np.array(dom) if dom else None)


# --- low-high counterexample ----------------------------------------------

VARIANTS = ("min_symbol", "xi_power", "high_factor_power")
MODULATION_CAP = 50.0


@dataclass(frozen=True)
class CounterexampleSpec:
    N: float
    rho: float
    variant: str = "xi_power"
    n_xi: int = 64
    n_xi1: int = 16
    n_mod: int = 8
    s: float = 0.0
    b: float = 0.6
    b_prime: float = 0.7

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InputError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not self.rho > 0:
            raise InputError(f"rho must be positive, got {self.rho}")
        if min(self.n_xi, self.n_xi1, self.n_mod) < 1:
            raise InputError("quadrature resolutions must be positive")
        if 2.0 / self.n_mod > 0.25:
            raise InputError("modulation axes need cells of width <= 0.25 (n_mod >= 8)")
        if not (self.N >= 8 and 2.0 / self.N ** 2 < self.N / 2.0):
            raise RegionDegeneracyError(
                f"N = {self.N} too small: the low and high frequency regions must separate (N >= 8)")


@dataclass(frozen=True)
class CounterexampleTerms:
    integral: float
    f_norm: float
    g_norm: float
    h_norm: float
    kappa2_min: float
    kappa2_max: float
    g_coverage: float

    @property
    def ratio(self) -> float:
        return self.integral / (self.f_norm * self.g_norm * self.h_norm)


def _midpoints(lo: float, hi: float, n: int) -> tuple:
    h = (hi - lo) / n
    return lo + h * (np.arange(n) + 0.5), h


def counterexample_terms(spec: CounterexampleSpec) -> CounterexampleTerms:
    """Tensorized midpoint quadrature of the duality integral.

    ``f`` and ``h`` are the indicators of the thin slabs around the cubic
    curve at frequencies ``[1/N^2, 2/N^2]`` and ``[N, 2N]``.  Both slabs are
    parameterized by their offsets ``m = tau - xi^3`` so the modulation of
    the difference frequency is evaluated as ``m - m1 + 3 xi xi1 (xi - xi1)``
    without cancellation.  sigma is 0; every frequency is positive.
    """
    N = float(spec.N)
    xi, hx = _midpoints(N, 2 * N, spec.n_xi)
    xi1, hx1 = _midpoints(1.0 / N ** 2, 2.0 / N ** 2, spec.n_xi1)
    m, hm = _midpoints(-1.0, 1.0, spec.n_mod)
    XI, XI1, M, M1 = np.meshgrid(xi, xi1, m, m, indexing="ij", sparse=True)
    eta = XI - XI1
    mod_g = M - M1 + 3.0 * XI * XI1 * eta
    g = ((eta >= N / 2) & (eta <= 2 * N) & (np.abs(mod_g) <= MODULATION_CAP)).astype(float)
    kappa1 = ((1 + XI) / ((1 + eta) * (1 + XI1))) ** spec.s
    kappa2 = ((1 + np.abs(M)) ** (spec.b_prime - 1) * (1 + np.abs(M1)) ** (-spec.b)
              * (1 + np.abs(mod_g)) ** (-spec.b))
    if spec.variant == "xi_power":
        symbol = XI ** spec.rho
    elif spec.variant == "min_symbol":
        symbol = np.minimum(eta, XI1) ** spec.rho
    else:
        symbol = eta ** spec.rho
    integrand = XI * symbol * kappa1 * kappa2 * g
    integral = float(np.sum(np.broadcast_to(integrand, np.broadcast(XI, XI1, M, M1).shape))
                     * hx * hx1 * hm * hm)
    k2 = np.broadcast_to(kappa2, np.broadcast(XI, XI1, M, M1).shape)
    return CounterexampleTerms(
        integral=integral,
        f_norm=np.sqrt(2.0 / N ** 2),
        g_norm=np.sqrt(1.5 * N * 2 * MODULATION_CAP),
        h_norm=np.sqrt(2.0 * N),
        kappa2_min=float(k2.min()),
        kappa2_max=float(k2.max()),
        g_coverage=float(np.broadcast_to(g, k2.shape).mean()),
    )


def counterexample_ratio(spec: CounterexampleSpec) -> float:
    return counterexample_terms(spec).ratio


def growth_law(variant: str, rho: float) -> float:
    """Expected ratio(2N)/ratio(N) for the counterexample family."""
    if variant == "min_symbol":
        return 2.0 ** (-2.0 * rho)
    return 2.0 ** rho
