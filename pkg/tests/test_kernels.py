"""Kernel catalog: multiplier sampling, classification, convolution, normalization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from nlgp.grid import Field, make_grid
from nlgp.kernels import (
    BERLOFF_REFERENCE,
    BesselYukawa,
    CustomMultiplier,
    Delta,
    Dipolar,
    Kind,
    LaguerreGaussian,
    Multiplier,
    NotNormalizableError,
    Scaled,
    SoftCore,
    classify,
    convolve,
    normalize_physical,
    quadratic_form,
    radial_fourier_transform,
    sample_multiplier,
    zero_frequency_value,
)

from conftest import random_complex

G1 = make_grid(1, [64], [20.0])
G2 = make_grid(2, [16, 16], [10.0, 12.0])
G3 = make_grid(3, [16, 16, 16], [10.0, 10.0, 10.0])


def negate_index(grid, values):
    """values[-k mod n] on every axis."""
    out = values
    for ax in range(grid.dim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def spectral_sum(grid, mult_values, f):
    return float(np.sum(mult_values * np.abs(grid.fft(f)) ** 2) / grid.volume)


def laguerre_closed_form(m, dim, ksq):
    q = ksq / 4.0
    return np.pi ** (dim / 2) * np.exp(-q) * sum(q**k / math.factorial(k) for k in range(m + 1))


def berloff_reference_closed_form(ksq):
    # A=1, alpha=1, beta=-3, gamma=1 in 3-D
    q = ksq / 4.0
    return np.pi**1.5 * np.exp(-q) * (q**2 - 2 * q + 0.25)


ALL_SPECS = [
    (Delta(), [G1, G2, G3]),
    (BesselYukawa(0.3), [G1, G2, G3]),
    (SoftCore(1.2), [G1, G2, G3]),
    (Dipolar(1.0, 0.1), [G3]),
    (LaguerreGaussian(2), [G1, G2, G3]),
    (BERLOFF_REFERENCE, [G3]),
]


class TestSampling:
    def test_delta_all_ones(self):
        for g in (G1, G2, G3):
            assert np.all(sample_multiplier(Delta(), g).values == 1.0)

    def test_yukawa_closed_form(self):
        m = sample_multiplier(BesselYukawa(0.5), G2)
        np.testing.assert_allclose(m.values, 1 / (1 + 0.25 * G2.ksq), rtol=1e-15)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_softcore_against_quadrature(self, dim):
        # independent oracle: transform of the indicator of the ball of radius a
        a = 1.3
        g = {1: G1, 2: G2, 3: G3}[dim]
        m = sample_multiplier(SoftCore(a), g)
        kappa = np.sqrt(g.ksq).ravel()
        idx = np.unique(np.round(kappa, 12), return_index=True)[1][:12]
        for i in idx:
            kp = kappa[i]
            if dim == 1:
                ref = integrate.quad(lambda x: np.cos(kp * x), -a, a)[0]
            elif dim == 2:
                ref = 2 * np.pi * integrate.quad(lambda r: special.j0(kp * r) * r, 0, a)[0]
            else:
                ref = 4 * np.pi * integrate.quad(lambda r: np.sinc(kp * r / np.pi) * r * r, 0, a)[0]
            assert m.values.ravel()[i] == pytest.approx(ref, rel=1e-9, abs=1e-12)

    def test_softcore_zero_frequency_values(self):
        assert sample_multiplier(SoftCore(1.0), G1).zero_value == 2.0
        assert sample_multiplier(SoftCore(1.0), G2).zero_value == pytest.approx(np.pi)
        assert sample_multiplier(SoftCore(1.0), G3).zero_value == pytest.approx(4 * np.pi / 3)

    def test_dipolar_min(self):
        m = sample_multiplier(Dipolar(1.0, 0.1), G3)
        assert m.min_value == pytest.approx(1 - 4 * np.pi / 3 * 0.1, rel=1e-14)
        assert m.min_value == pytest.approx(0.5811, abs=1e-4)
        # brute-force oracle over the lattice
        kx, ky, kz = G3.k
        ksq = kx**2 + ky**2 + kz**2
        brute = min(
            1.0 if s == 0 else 1 + 0.1 * 4 * np.pi / 3 * (3 * z**2 / s - 1)
            for s, z in zip(ksq.ravel(), kz.ravel())
        )
        assert m.min_value == pytest.approx(brute, rel=1e-14)
        assert m.zero_value == 1.0

    @pytest.mark.parametrize("m_order", [0, 1, 2, 3])
    @pytest.mark.parametrize("g", [G1, G2, G3], ids=["1d", "2d", "3d"])
    def test_laguerre_against_closed_form(self, m_order, g):
        m = sample_multiplier(LaguerreGaussian(m_order), g)
        ref = laguerre_closed_form(m_order, g.dim, g.ksq)
        np.testing.assert_allclose(m.values, ref, rtol=1e-8, atol=1e-12)

    def test_berloff_against_closed_form(self):
        m = sample_multiplier(BERLOFF_REFERENCE, G3)
        np.testing.assert_allclose(m.values, berloff_reference_closed_form(G3.ksq), rtol=1e-8, atol=1e-12)

    def test_radial_transform_gaussian(self):
        # exp(-r^2) -> pi^{N/2} exp(-k^2/4)
        for dim in (1, 2, 3):
            for kp in (0.0, 0.7, 3.0):
                val = radial_fourier_transform(lambda r: np.exp(-r * r), kp, dim, 12.0)
                assert val == pytest.approx(np.pi ** (dim / 2) * np.exp(-kp**2 / 4), rel=1e-9)

    @pytest.mark.parametrize("spec", [Dipolar(1.0, 0.1), BERLOFF_REFERENCE])
    def test_three_d_only(self, spec):
        with pytest.raises(ValueError, match="3-D"):
            sample_multiplier(spec, G2)

    @pytest.mark.parametrize(
        "factory", [lambda: BesselYukawa(0.0), lambda: SoftCore(-1.0), lambda: LaguerreGaussian(-1)]
    )
    def test_parameter_validation(self, factory):
        with pytest.raises(ValueError):
            factory()

    def test_custom_multiplier(self):
        spec = CustomMultiplier(lambda kappa: np.exp(-kappa), radial=True)
        m = sample_multiplier(spec, G1)
        np.testing.assert_allclose(m.values, np.exp(-np.abs(G1.wavenumbers[0])))

    def test_values_read_only(self):
        m = sample_multiplier(BesselYukawa(0.2), G1)
        with pytest.raises(ValueError):
            m.values[0] = 3.0

    @pytest.mark.parametrize("spec, grids", ALL_SPECS, ids=lambda s: type(s).__name__ if not isinstance(s, list) else "")
    def test_even_and_real(self, spec, grids):
        for g in grids:
            m = sample_multiplier(spec, g)
            assert m.values.dtype == np.float64
            assert np.array_equal(m.values, negate_index(g, m.values))
            assert m.max_abs == pytest.approx(np.abs(m.values).max())


class TestClassification:
    def test_delta_coercive_everywhere(self, any_grid):
        c = classify(sample_multiplier(Delta(), any_grid))
        assert c.kind is Kind.COERCIVE and c.sigma_min == 1.0

    def test_dipolar_coercive(self):
        c = classify(sample_multiplier(Dipolar(1.0, 0.1), G3))
        assert c.kind is Kind.COERCIVE
        assert c.sigma_min == pytest.approx(0.5811, abs=1e-4)

    def test_dipolar_indefinite(self):
        c = classify(sample_multiplier(Dipolar(0.3, 0.1), G3))
        assert c.kind is Kind.INDEFINITE
        assert c.min_value < 0
        assert c.sigma_min is None

    def test_dipolar_border_is_semidefinite(self):
        c = classify(sample_multiplier(Dipolar(4 * np.pi / 3 * 0.1, 0.1), G3))
        assert c.kind is Kind.POSITIVE_SEMIDEFINITE

    @pytest.mark.parametrize("m_order", [0, 1, 2, 3])
    def test_laguerre_nonnegative(self, m_order):
        for g in (G1, G2, G3):
            m = sample_multiplier(LaguerreGaussian(m_order), g)
            assert m.min_value >= -1e-10
            assert classify(m).kind is not Kind.INDEFINITE

    def test_berloff_reference_indefinite(self):
        c = classify(sample_multiplier(BERLOFF_REFERENCE, G3))
        assert c.kind is Kind.INDEFINITE
        assert c.min_value < -1.0

    def test_tolerance_band(self):
        for v, kind in [(2e-12, Kind.COERCIVE), (5e-13, Kind.POSITIVE_SEMIDEFINITE), (-5e-13, Kind.POSITIVE_SEMIDEFINITE), (-2e-12, Kind.INDEFINITE)]:
            vals = np.ones(G1.shape)
            vals[5] = v
            assert classify(Multiplier.from_values(G1, vals)).kind is kind

    def test_str(self):
        assert str(classify(sample_multiplier(Delta(), G1))).startswith("Coercive")


class TestConvolution:
    def test_delta_identity(self, any_grid, rng):
        f = random_complex(any_grid, rng)
        out = convolve(sample_multiplier(Delta(), any_grid), Field(any_grid, f)).values
        np.testing.assert_allclose(out, f, atol=1e-12 * np.abs(f).max())

    def test_constant_multiplier(self, rng):
        f = random_complex(G2, rng)
        m = Multiplier.from_values(G2, np.full(G2.shape, 2.5))
        np.testing.assert_allclose(convolve(m, Field(G2, f)).values, 2.5 * f, atol=1e-12)

    def test_yukawa_eigenfunction(self):
        g = make_grid(1, [64], [2 * np.pi])
        e = np.exp(1j * g.axes[0])
        out = convolve(sample_multiplier(BesselYukawa(0.4), g), Field(g, e)).values
        np.testing.assert_allclose(out, e / (1 + 0.16), atol=1e-13)

    def test_real_in_real_out(self, rng):
        f = rng.standard_normal(G3.shape)
        out = convolve(sample_multiplier(Dipolar(1.0, 0.2), G3), Field(G3, f)).values
        assert np.isrealobj(out)
        raw = G3.apply_multiplier(sample_multiplier(Dipolar(1.0, 0.2), G3).values, f)
        assert np.abs(raw.imag).max() <= 1e-10

    def test_grid_mismatch(self):
        with pytest.raises(ValueError, match="different grids"):
            convolve(sample_multiplier(Delta(), G1), Field(G2, np.zeros(G2.shape)))


class TestQuadraticForm:
    def test_delta_is_squared_norm(self, rng):
        f = rng.standard_normal(G2.shape)
        assert quadratic_form(sample_multiplier(Delta(), G2), f) == pytest.approx(G2.l2(f) ** 2, rel=1e-12)

    @pytest.mark.parametrize("spec, grids", ALL_SPECS[:5], ids=["delta", "yukawa", "softcore", "dipolar", "laguerre"])
    def test_matches_spectral_sum(self, spec, grids, rng):
        for g in grids:
            mult = sample_multiplier(spec, g)
            for _ in range(5):
                f = rng.standard_normal(g.shape)
                phys = quadratic_form(mult, Field(g, f))
                spec_val = spectral_sum(g, mult.values, f)
                assert abs(phys - spec_val) <= 1e-10 * max(abs(spec_val), np.sum(np.abs(mult.values) * np.abs(g.fft(f)) ** 2) / g.volume)

    def test_coercive_lower_bound(self, rng):
        for spec in (BesselYukawa(0.3), Dipolar(1.0, 0.1)):
            mult = sample_multiplier(spec, G3)
            sigma = classify(mult).sigma_min
            for _ in range(5):
                f = rng.standard_normal(G3.shape)
                assert quadratic_form(mult, f) >= sigma * G3.l2(f) ** 2 - 1e-10

    def test_minimizing_mode(self):
        mult = sample_multiplier(BERLOFF_REFERENCE, G3)
        idx = np.unravel_index(np.argmin(mult.values), G3.shape)
        phase = sum(k[idx] * x for k, x in zip(G3.k, G3.x))
        f = np.cos(phase)
        assert quadratic_form(mult, f) == pytest.approx(mult.min_value * G3.l2(f) ** 2, rel=1e-10)

    def test_complex_input_rejected(self):
        with pytest.raises(ValueError, match="real"):
            quadratic_form(sample_multiplier(Delta(), G1), np.ones(G1.shape) * 1j)


class TestNormalization:
    def test_delta(self):
        spec, lam2 = normalize_physical(Delta())
        assert spec == Delta() and lam2 == 1.0

    def test_softcore_3d(self):
        spec, lam2 = normalize_physical(SoftCore(1.0), G3)
        assert lam2 == pytest.approx(3 / (4 * np.pi), rel=1e-14)
        assert sample_multiplier(spec, G3).zero_value == pytest.approx(1.0, rel=1e-14)

    def test_dipolar(self):
        spec, lam2 = normalize_physical(Dipolar(2.0, 0.1))
        assert lam2 == 0.5
        assert isinstance(spec, Scaled)
        assert sample_multiplier(spec, G3).zero_value == pytest.approx(1.0)

    def test_not_normalizable(self):
        with pytest.raises(NotNormalizableError):
            normalize_physical(Dipolar(-1.0, 0.1))

    def test_zero_frequency_needs_grid_for_quadrature_kernels(self):
        with pytest.raises(ValueError, match="grid"):
            zero_frequency_value(LaguerreGaussian(1))
        assert zero_frequency_value(LaguerreGaussian(1), G3) == pytest.approx(np.pi**1.5 * 1, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(
    eps=st.floats(0.01, 3.0),
    a=st.floats(0.1, 3.0),
    seed=st.integers(0, 2**31 - 1),
)
def test_quadratic_form_property(eps, a, seed):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(G2.shape)
    for spec in (BesselYukawa(eps), SoftCore(a)):
        mult = sample_multiplier(spec, G2)
        phys = quadratic_form(mult, f)
        scale = np.sum(np.abs(mult.values) * np.abs(G2.fft(f)) ** 2) / G2.volume
        assert abs(phys - spectral_sum(G2, mult.values, f)) <= 1e-10 * scale


@settings(max_examples=25, deadline=None)
@given(alpha1=st.floats(-2.0, 3.0), alpha2=st.floats(0.0, 1.0))
def test_dipolar_coercive_iff_strict_condition(alpha1, alpha2):
    # the lattice contains both xi_3 = 0 and purely axial directions, so the
    # sampled extremes are exactly alpha1 - c*alpha2 and alpha1 + 2c*alpha2
    c = 4 * np.pi / 3
    kind = classify(sample_multiplier(Dipolar(alpha1, alpha2), G3)).kind
    lowest = min(alpha1 - c * alpha2, alpha1)
    if lowest > 1e-9:
        assert kind is Kind.COERCIVE
    elif lowest < -1e-9:
        assert kind is Kind.INDEFINITE
