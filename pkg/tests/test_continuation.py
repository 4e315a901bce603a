"""Strip-width schedule algebra, the induction replay, calibration and the global run."""

import math
from fractions import Fraction

import numpy as np
import pytest

from kdv_gevrey import GevreyParams, RealField, SolverConfig, data, forward
from kdv_gevrey.continuation import (ContinuationParams, calibrate, general_s_schedule,
                                     local_timestep, run_global, sigma_constant, simulate_induction,
                                     smallness_lhs, smallness_ok, solve_sigma)
from kdv_gevrey.errors import BudgetError, CalibrationError, InputError, PreconditionError
from kdv_gevrey.gevrey import embedding_constant, gevrey_norm


def random_params(rng):
    return ContinuationParams(C=10 ** rng.uniform(-2, 1), c0=10 ** rng.uniform(-2, 0),
                              a=rng.uniform(1.1, 6), rho=rng.uniform(0.05, 0.749),
                              sigma0=rng.uniform(0.05, 2), M0=10 ** rng.uniform(-2, 0.5))


class TestParams:
    @pytest.mark.parametrize("kw", [{"rho": 0.9}, {"rho": 0.0}, {"a": 1.0}, {"c0": 0.0},
                                    {"C": -1.0}, {"M0": float("inf")}])
    def test_invalid(self, kw):
        with pytest.raises(InputError):
            ContinuationParams(**kw)

    def test_formulas(self):
        p = ContinuationParams(C=2.0, c0=0.3, a=3.0, rho=0.5, sigma0=1.0, M0=1.5)
        assert local_timestep(1.5, p) == pytest.approx(0.3 / 4 ** 3, rel=1e-15)
        assert sigma_constant(p) == pytest.approx((0.3 / (2 * 2 ** 2.5 * 1.5 * 4 ** 3)) ** 2, rel=1e-14)
        delta = 0.3 / 64
        assert smallness_lhs(0.01, 7.0, p) == pytest.approx(
            2 * 7 / delta * 2 * 0.01 ** 0.5 * 2 ** 1.5 * 1.5, rel=1e-14)


class TestSolveSigma:
    def test_smallness_exact(self, rng):
        for _ in range(100):
            p = random_params(rng)
            T = 10 ** rng.uniform(-1, 3)
            sigma, _ = solve_sigma(T, p)
            assert smallness_ok(sigma, T, p)

    def test_doubling_ratio(self, rng):
        for _ in range(50):
            p = random_params(rng)
            _, c = solve_sigma(1.0, p)
            # pick T deep enough that both sigma(T) and sigma(2T) are unclamped
            T = 2.0 * (c / p.sigma0) ** p.rho
            s1, _ = solve_sigma(T, p)
            s2, _ = solve_sigma(2 * T, p)
            assert s1 < p.sigma0
            assert s2 / s1 == pytest.approx(2 ** (-1 / p.rho), rel=1e-13)

    def test_clamp(self):
        p = ContinuationParams(C=1e-6, c0=1.0, M0=0.1)
        assert solve_sigma(1e-3, p)[0] == p.sigma0

    def test_zero_datum(self):
        p = ContinuationParams(M0=0.0)
        assert solve_sigma(100.0, p) == (p.sigma0, math.inf)

    def test_exponent(self):
        assert 4 / 3 < 1 / 0.74 < 4 / 3 + 0.02

    def test_bad_T(self):
        with pytest.raises(InputError):
            solve_sigma(0.0, ContinuationParams())


class TestInduction:
    def test_fraction_replay(self):
        p = ContinuationParams(C=0.5, c0=0.4, a=2.0, rho=0.5, sigma0=1.0, M0=0.5)
        T = 3.0
        sigma, _ = solve_sigma(T, p)
        sched = simulate_induction(T, sigma, p)
        # exact replay: n = floor(T/delta), M_k^2 = M0^2 + k C sigma^rho 2^{3/2} M0^3
        assert sched.delta == p.c0 / (1 + 2 * p.M0) ** 2
        delta = Fraction(sched.delta)
        n = math.floor(Fraction(T) / delta)
        assert n * delta <= T < (n + 1) * delta
        assert sched.n_steps == n
        inc = Fraction(p.C * sigma ** p.rho * 2 ** 1.5 * p.M0 ** 3)
        m = [Fraction(p.M0) ** 2 + k * inc for k in range(n + 2)]
        assert np.allclose(sched.predicted_m_sq, [float(v) for v in m], rtol=1e-14, atol=0)
        assert all(v <= 2 * Fraction(p.M0) ** 2 for v in m)

    def test_random_sets(self, rng):
        checked = 0
        while checked < 100:
            p = random_params(rng)
            T = 10 ** rng.uniform(-1, 2)
            sigma, _ = solve_sigma(T, p)
            if (T / local_timestep(p.M0, p)) > 1e8:
                continue
            sched = simulate_induction(T, sigma, p)
            assert np.all(sched.predicted_m_sq <= sched.bound * (1 + 1e-12))
            d = Fraction(sched.delta)
            assert sched.n_steps * d <= Fraction(T) < (sched.n_steps + 1) * d
            checked += 1

    def test_precondition(self):
        p = ContinuationParams()
        with pytest.raises(PreconditionError):
            simulate_induction(10.0, p.sigma0, p)

    def test_budget(self):
        p = ContinuationParams()
        sigma, _ = solve_sigma(1e3, p)
        with pytest.raises(BudgetError):
            simulate_induction(1e3, sigma, p, budget=10)


def test_general_s_schedule(grid):
    p = ContinuationParams(M0=1.0)
    sched = general_s_schedule(1.0, 2.0, p, grid)
    K = embedding_constant(GevreyParams(1.0, 2.0), GevreyParams(0.5, 0.0), grid)
    assert sched.M_half == pytest.approx(K)
    assert sched(1e-9) == 0.25
    assert sched(1e6) < sched(1e5) < 0.25


class TestCalibrate:
    def test_zero_datum(self, grid):
        p, report = calibrate(data.zero(grid), ContinuationParams())
        assert p.M0 == 0
        assert report.notes

    def test_small_ladder(self, grid):
        u0 = RealField(grid, 0.25 * data.soliton(grid).samples)
        p, report = calibrate(u0, ContinuationParams(), amplitudes=(0.25, 0.5, 1.0),
                              trial_deltas=[0.4 * 2 ** (-j / 2) for j in range(10)])
        assert 1 < p.a <= 8
        assert p.M0 == pytest.approx(gevrey_norm(forward(u0), GevreyParams(0.5, 0.0)))
        # c0 keeps every measured threshold above the model timestep
        for M, d in zip(report.norms, report.delta_max):
            assert local_timestep(M, p) <= d * (1 + 1e-12)
        assert p.C > 0

    def test_failure(self, grid):
        u0 = RealField(grid, 4 * data.soliton(grid).samples)
        with pytest.raises(CalibrationError) as info:
            calibrate(u0, ContinuationParams(), amplitudes=(4.0,), trial_deltas=[2.0])
        assert info.value.exit_code == 4


def test_run_global_soliton(grid):
    u0 = data.soliton(grid)
    M0 = gevrey_norm(forward(u0), GevreyParams(0.5, 0.0))
    p = ContinuationParams(M0=M0)
    run = run_global(u0, 1.0, p, SolverConfig(dt=1e-3, record_every=250))
    assert run.bound_ok and not run.diagnostics
    assert run.bound == pytest.approx(2 * M0 ** 2)
    assert len(run.radius) == len(run.times) == 5
    assert all(r == pytest.approx(np.pi, rel=1e-3) for r in run.radius)
    assert np.all(run.floor <= p.sigma0)
