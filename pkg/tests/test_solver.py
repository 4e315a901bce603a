"""ETDRK4 evolution, invariants, Picard iteration and the uniqueness envelope."""

import numpy as np
import pytest

from kdv_gevrey import GevreyParams, RealField, SolverConfig, evolve, forward, inverse
from kdv_gevrey import data
from kdv_gevrey.errors import InputError, InstabilityError, NoContractionError
from kdv_gevrey.gevrey import gevrey_norm
from kdv_gevrey.solver import (free_evolve, hamiltonian, mass, momentum, nonlinear_rhs,
                               picard_iterate, step, uniqueness_diagnostic)
from kdv_gevrey.spectral import sample


def airy_quadrature(x, t):
    """Line solution of u_t + u_xxx = 0 from exp(-x^2), by brute-force quadrature."""
    xi = np.linspace(-16.0, 16.0, 64001)
    spec = np.exp(-xi ** 2 / 4) / np.sqrt(2)
    phase = np.exp(1j * (np.outer(x, xi) + t * xi ** 3))
    integrand = phase * spec
    h = xi[1] - xi[0]
    vals = h * (integrand.sum(axis=1) - 0.5 * (integrand[:, 0] + integrand[:, -1]))
    return (vals / np.sqrt(2 * np.pi)).real


class TestLinear:
    def test_airy_against_quadrature(self, grid):
        u0 = sample(grid, lambda x: np.exp(-x ** 2))
        t = 0.5
        got = inverse(free_evolve(forward(u0), t)).samples
        window = np.abs(grid.x) < 10
        # the slowly decaying left tail of the line solution wraps around the torus
        L = grid.domain_length
        exact = sum(airy_quadrature(grid.x[window] + m * L, t) for m in (-1, 0, 1))
        assert np.max(np.abs(got[window] - exact)) < 1e-12

    def test_group_property(self, grid, rng):
        f = forward(data.sech2(grid))
        a = free_evolve(free_evolve(f, 0.3), 0.4)
        b = free_evolve(f, 0.7)
        assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-13

    def test_nonlinear_term(self, grid):
        # -(1/2)(u^2)_x for u = exp(-x^2) is 2x exp(-2x^2)
        u = sample(grid, lambda x: np.exp(-x ** 2))
        got = inverse(nonlinear_rhs(forward(u))).samples
        assert np.max(np.abs(got - 2 * grid.x * np.exp(-2 * grid.x ** 2))) < 1e-12


    def test_nonlinear_single_mode(self, grid):
        # -(1/2)(cos^2(kx))_x = (k/2) sin(2kx)
        k = 40 * grid.dxi
        u = sample(grid, lambda x: np.cos(k * x))
        got = inverse(nonlinear_rhs(forward(u))).samples
        assert np.max(np.abs(got - 0.5 * k * np.sin(2 * k * grid.x))) < 1e-12


class TestInvariants:
    def test_soliton_values(self, grid):
        # mass 24k, momentum 192k^3, hamiltonian -230.4 k^5
        k = 0.5
        f = forward(data.soliton(grid, k))
        assert mass(f) == pytest.approx(24 * k, rel=1e-13)
        assert momentum(f) == pytest.approx(192 * k ** 3, rel=1e-13)
        assert hamiltonian(f) == pytest.approx(-230.4 * k ** 5, rel=1e-12)


class TestEvolve:
    def test_config_validation(self):
        with pytest.raises(InputError):
            SolverConfig(dt=0)
        with pytest.raises(InputError):
            SolverConfig(t_end=-1)

    def test_soliton_short(self, grid):
        k = 0.5
        traj = evolve(data.soliton(grid, k), SolverConfig(dt=1e-3, t_end=1.0, record_every=250))
        assert traj.times == pytest.approx([0, 0.25, 0.5, 0.75, 1.0])
        exact = data.soliton_profile(grid, k, 1.0)
        err = np.linalg.norm(inverse(traj.final).samples - exact) / np.linalg.norm(exact)
        assert err < 1e-9
        assert traj.report.mass_drift < 1e-13
        assert traj.report.momentum_drift < 1e-12
        assert traj.report.hamiltonian_drift < 1e-11

    def test_final_time_hit_exactly(self, grid):
        traj = evolve(data.soliton(grid), SolverConfig(dt=0.03, t_end=0.1, record_every=100))
        assert traj.times[-1] == pytest.approx(0.1, abs=1e-15)
        assert len(traj.step_times) == 5

    def test_fourth_order(self, grid):
        u0 = data.soliton(grid, 0.5)
        finals = [evolve(u0, SolverConfig(dt, 1.0, record_every=10 ** 6)).final
                  for dt in (0.0125, 0.00625, 0.003125)]
        e1 = (finals[0] - finals[1]).l2_norm()
        e2 = (finals[1] - finals[2]).l2_norm()
        assert np.log2(e1 / e2) == pytest.approx(4.0, abs=0.1)

    def test_zero_stays_zero(self, grid):
        traj = evolve(data.zero(grid), SolverConfig(dt=0.01, t_end=0.1, record_every=2))
        assert all(not np.any(s.coeffs) for s in traj.snapshots)
        assert traj.report.momentum_drift == 0

    def test_two_soliton_invariants(self, grid):
        traj = evolve(data.two_soliton(grid), SolverConfig(dt=2e-3, t_end=2.0, record_every=500))
        assert traj.report.mass_drift < 1e-12
        assert traj.report.momentum_drift < 1e-10
        assert traj.report.hamiltonian_drift < 1e-8

    def test_large_step_is_instability(self, grid):
        with pytest.raises(InstabilityError) as info:
            evolve(data.soliton(grid), SolverConfig(dt=1.0, t_end=10.0))
        assert info.value.exit_code == 3

    def test_single_step_nonfinite(self, grid):
        f = forward(data.soliton(grid)) * 1e200
        with pytest.raises(InstabilityError), np.errstate(all="ignore"):
            step(f, 0.1)

    def test_under_resolved_datum(self, grid, rng):
        with pytest.raises(InputError):
            evolve(RealField(grid, rng.normal(size=grid.n_points)), SolverConfig(0.01, 0.01))


class TestPicard:
    def test_contracts_and_matches_evolve(self, grid):
        u0 = data.soliton(grid, 0.5)
        delta = 0.01
        res = picard_iterate(u0, delta, GevreyParams(0.3, 0.0))
        assert res.converged
        assert res.max_factor < 0.05
        ref = evolve(u0, SolverConfig(dt=delta / 10, t_end=delta, record_every=10 ** 6)).final
        p = GevreyParams(0.3, 0.0)
        assert gevrey_norm(res.limit - ref, p) / gevrey_norm(ref, p) < 1e-7

    def test_first_iterate_is_free_flow(self, grid):
        u0 = data.sech2(grid)
        res = picard_iterate(u0, 0.05, n_max=2)
        free = free_evolve(forward(u0), 0.05)
        assert np.max(np.abs(res.iterate_at(0).coeffs - free.coeffs)) < 1e-15

    def test_zero_datum(self, grid):
        res = picard_iterate(data.zero(grid), 0.1)
        assert res.converged and res.distances == []

    def test_no_contraction(self, grid):
        u0 = RealField(grid, 4 * data.soliton(grid).samples)
        with pytest.raises(NoContractionError) as info:
            picard_iterate(u0, 1.0, GevreyParams(0.3, 0.0), keep_iterates=False)
        assert info.value.delta == 1.0

    def test_bad_delta(self, grid):
        with pytest.raises(InputError):
            picard_iterate(data.soliton(grid), 0.0)


def test_uniqueness_envelope(grid, rng):
    u0 = data.soliton(grid, 0.5)
    v0 = RealField(grid, u0.samples + 1e-3 * data.gaussian(grid, 1.0, 2.0).samples)
    diag = uniqueness_diagnostic(u0, v0, SolverConfig(dt=2e-3, t_end=1.0, record_every=50))
    assert diag.holds
    assert diag.gap[0] > 0
