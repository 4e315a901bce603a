"""Unitary transform pair, multipliers and dealiasing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kdv_gevrey import GridSpec, RealField, SpectralField, forward, inverse
from kdv_gevrey.errors import InputError, OverflowGuardError, RepresentationError
from kdv_gevrey.spectral import apply_multiplier, dealias, dealias_mask, derivative, sample

from conftest import smooth_coeffs


class TestGrid:
    def test_defaults(self, grid):
        assert grid.n_points == 1024
        assert grid.domain_length == pytest.approx(40 * np.pi)
        assert grid.dxi == pytest.approx(0.05)
        assert grid.x[0] == pytest.approx(-20 * np.pi)
        assert grid.xi_max == pytest.approx(25.6)

    @pytest.mark.parametrize("n", [0, 4, 100, 1000])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(InputError):
            GridSpec(n)

    def test_rejects_bad_length(self):
        with pytest.raises(InputError):
            GridSpec(64, -1.0)

    def test_arrays_read_only(self, grid):
        with pytest.raises(ValueError):
            grid.xi[0] = 1.0


class TestTransform:
    def test_gaussian_closed_form(self, grid):
        # exp(-x^2) has transform 2^{-1/2} exp(-xi^2/4) in the unitary convention
        u = sample(grid, lambda x: np.exp(-x ** 2))
        c = forward(u).coeffs
        exact = np.exp(-grid.xi ** 2 / 4) / np.sqrt(2)
        exact[grid.nyquist_index] = 0
        assert np.max(np.abs(c - exact)) < 1e-14

    def test_shifted_gaussian_phase(self, grid):
        u = sample(grid, lambda x: np.exp(-(x - 1.5) ** 2))
        exact = np.exp(-grid.xi ** 2 / 4 - 1.5j * grid.xi) / np.sqrt(2)
        exact[grid.nyquist_index] = 0
        assert np.max(np.abs(forward(u).coeffs - exact)) < 1e-14

    def test_parseval(self, grid, rng):
        f = SpectralField(grid, smooth_coeffs(grid, rng))
        u = inverse(f)
        assert u.l2_norm() == pytest.approx(f.l2_norm(), rel=1e-13)

    def test_round_trip(self, grid, rng):
        f = SpectralField(grid, smooth_coeffs(grid, rng))
        back = forward(inverse(f))
        assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-14

    def test_nyquist_zeroed(self, grid):
        u = RealField(grid, np.cos(np.pi * np.arange(grid.n_points)))
        assert forward(u).coeffs[grid.nyquist_index] == 0

    def test_inverse_rejects_non_real(self, grid):
        c = np.zeros(grid.n_points, dtype=complex)
        c[3] = 1.0
        with pytest.raises(RepresentationError):
            inverse(SpectralField(grid, c))

    def test_nonfinite_samples(self, grid):
        s = np.zeros(grid.n_points)
        s[5] = np.nan
        with pytest.raises(InputError):
            RealField(grid, s)

    def test_shape_checked(self, grid):
        with pytest.raises(InputError):
            SpectralField(grid, np.zeros(10))

    def test_zero_field(self, grid):
        z = SpectralField.zeros(grid)
        assert z.symmetry_defect() == 0
        assert np.all(inverse(z).samples == 0)

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, 16, elements=st.floats(-1e3, 1e3)))
    def test_forward_inverse_idempotent(self, samples):
        g = GridSpec(16, 10.0)
        f = forward(RealField(g, samples))
        again = forward(inverse(f))
        assert np.allclose(again.coeffs, f.coeffs, atol=1e-9 * (1 + np.abs(samples).max()))


class TestOperators:
    def test_derivative_of_gaussian(self, grid):
        u = sample(grid, lambda x: np.exp(-x ** 2))
        du = inverse(derivative(forward(u))).samples
        assert np.max(np.abs(du + 2 * grid.x * np.exp(-grid.x ** 2))) < 1e-12

    def test_third_derivative(self, grid):
        u = sample(grid, lambda x: np.exp(-x ** 2))
        d3 = inverse(derivative(forward(u), 3)).samples
        x = grid.x
        exact = (-8 * x ** 3 + 12 * x) * np.exp(-x ** 2)
        # xi^3 amplifies round-off by about xi_max^3
        assert np.max(np.abs(d3 - exact)) < 1e-10

    def test_multiplier_forms_agree(self, grid, rng):
        f = SpectralField(grid, smooth_coeffs(grid, rng))
        a = apply_multiplier(f, lambda xi: np.exp(-xi ** 2))
        b = apply_multiplier(f, np.exp(-grid.xi ** 2))
        assert np.array_equal(a.coeffs, b.coeffs)
        assert np.array_equal(apply_multiplier(f, 2.0).coeffs, (2 * f).coeffs)

    def test_multiplier_overflow(self, grid, rng):
        f = SpectralField(grid, smooth_coeffs(grid, rng))
        with pytest.raises(OverflowGuardError), np.errstate(over="ignore"):
            apply_multiplier(f, lambda xi: np.exp(1000 * np.abs(xi)))

    def test_dealias(self, grid, rng):
        c = rng.normal(size=grid.n_points) + 0j
        d = dealias(SpectralField(grid, c)).coeffs
        keep = np.abs(grid.k) <= grid.n_points // 3
        assert np.array_equal(keep, dealias_mask(grid))
        assert np.all(d[~keep] == 0)
        assert np.array_equal(d[keep], c[keep])

    def test_field_arithmetic(self, grid, rng):
        f = SpectralField(grid, smooth_coeffs(grid, rng))
        g = SpectralField(grid, smooth_coeffs(grid, rng))
        assert np.allclose((f + g - g).coeffs, f.coeffs)
        assert np.array_equal((-f).coeffs, -f.coeffs)
        with pytest.raises(InputError):
            f + SpectralField.zeros(GridSpec(64))
