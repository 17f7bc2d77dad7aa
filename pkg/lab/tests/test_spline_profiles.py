"""Tests for profiles, exact B-splines, the semigroup and Duhamel helpers."""

import math

import numpy as np
import pytest
from scipy.integrate import quad, trapezoid

from lab.src.errors import ArgumentError
from lab.src.spline_profiles import (
    SpectralProfile,
    attenuation,
    bspline_bounds_check,
    convolve_indicators,
    duhamel_E,
    duhamel_exponential,
    indicator_piece,
    indicator_profile,
    pair_profile,
    semigroup_apply,
)


class TestIndicators:
    """Tests for indicator pieces and profiles."""

    def test_indicator_values(self):
        """chi_c is one on [c - 1, c + 1] and zero elsewhere."""
        profile = SpectralProfile((indicator_piece(5, 2.0),))
        values = profile(np.array([3.9, 4.0, 5.0, 6.0, 6.1]))
        assert np.allclose(values, [0.0, 2.0, 2.0, 2.0, 0.0])

    def test_pair_profile_is_hermitian(self):
        """P_A is symmetric under xi -> -xi."""
        assert pair_profile(7, 0.5).is_hermitian()

    def test_one_sided_profile_is_not_hermitian(self):
        """A single bump has no mirror image."""
        assert not indicator_profile([(7, 1.0)]).is_hermitian()

    def test_local_evaluation_near_huge_anchor(self):
        """Local coordinates keep resolution at frequencies near 2^56."""
        anchor = 2**56
        profile = SpectralProfile((indicator_piece(anchor),))
        values = profile.evaluate_local(anchor, np.array([-1.0, 0.5, 1.0, 1.25]))
        assert np.allclose(values, [1.0, 1.0, 1.0, 0.0])


class TestConvolveIndicators:
    """Tests for the exact convolution of indicators."""

    def test_triangle(self):
        """chi_0 * chi_0 is the triangle max(2 - |xi|, 0)."""
        b = convolve_indicators((0, 0))
        xi = np.linspace(-3, 3, 61)
        assert np.allclose(b(xi), np.maximum(2 - np.abs(xi), 0.0), atol=1e-12)

    def test_peak_values(self):
        """Peak value 3 for three centred bumps, and a shifted example."""
        peak = convolve_indicators((0, 0, 0))(np.array([0.0]))[0]
        assert peak == pytest.approx(3.0)
        b = convolve_indicators((5, -2, 4))
        assert b.support == (4, 10)
        assert b(np.array([7.0]))[0] == pytest.approx(3.0)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_integral_is_power_of_two(self, n):
        """The integral over the support equals 2^n."""
        assert convolve_indicators([3] * n).integral() == pytest.approx(2.0**n)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_against_direct_convolution(self, n):
        """b_n(x) = int_{-1}^{1} b_(n-1)(x - y) dy to 1e-6 on a grid."""
        inner = convolve_indicators([0] * (n - 1))
        outer = convolve_indicators([0] * n)
        for x in np.linspace(-n - 0.5, n + 0.5, 41):
            breaks = [x - v for v in inner.knots if -1 < x - v < 1]
            value, _ = quad(
                lambda y: inner.local(np.array([x - y]))[0],
                -1.0,
                1.0,
                points=breaks or None,
                epsabs=1e-12,
            )
            assert abs(outer.local(np.array([x]))[0] - value) <= 1e-6

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_envelope_bounds(self, n):
        """chi(xi - S) <= b <= 2^n chi((xi - S)/n) on the grid."""
        assert bspline_bounds_check(convolve_indicators([2] * n)).passed

    def test_empty_centres_rejected(self):
        """At least one centre is needed."""
        with pytest.raises(ArgumentError):
            convolve_indicators(())


class TestSemigroup:
    """Tests for semigroup_apply and attenuation."""

    def test_attenuation_underflow(self):
        """Exponents above 700 map to exact zeros."""
        assert attenuation(1.0, np.array([200.0]))[0] == 0.0
        assert attenuation(0.0, np.array([200.0]))[0] == 1.0

    def test_multiplier(self):
        """exp(-t Lambda) multiplies by exp(-2 pi t |xi|)."""
        profile = semigroup_apply(pair_profile(5), 0.01)
        xi = np.array([4.5, -5.5])
        assert np.allclose(profile(xi), np.exp(-2 * math.pi * 0.01 * np.abs(xi)))

    def test_composition(self):
        """exp(-s Lambda) exp(-t Lambda) = exp(-(s + t) Lambda)."""
        base = pair_profile(9)
        once = semigroup_apply(base, 0.03)
        twice = semigroup_apply(semigroup_apply(base, 0.01), 0.02)
        xi = np.linspace(8, 10, 11)
        assert np.allclose(once(xi), twice(xi), rtol=1e-14)

    def test_contraction(self, rng):
        """The semigroup never increases pointwise magnitude."""
        for _ in range(20):
            centers = rng.integers(3, 200, size=3)
            weights = rng.uniform(-2, 2, size=3)
            profile = indicator_profile(list(zip(centers.tolist(), weights)))
            xi = rng.uniform(1, 201, size=50)
            after = semigroup_apply(profile, float(rng.uniform(0, 0.1)))
            assert np.all(np.abs(after(xi)) <= np.abs(profile(xi)) + 1e-15)

    def test_flags_underflowed_pieces(self):
        """Pieces that vanish on their whole support are flagged."""
        profile = semigroup_apply(pair_profile(10**6), 1.0)
        assert profile.underflowed == 2
        assert not profile.live_pieces

    def test_negative_time(self):
        """Negative times are rejected."""
        with pytest.raises(ArgumentError):
            semigroup_apply(pair_profile(5), -1.0)


class TestDuhamel:
    """Tests for the Duhamel helpers."""

    def test_exponential_closed_form(self):
        """Closed form agrees with quadrature, including a == b."""
        t = 0.3
        tau = np.linspace(0, t, 20001)
        for a, b in [(2.0, 5.0), (5.0, 2.0), (3.0, 3.0)]:
            integrand = np.exp(-2 * math.pi * (t - tau) * a - 2 * math.pi * tau * b)
            expected = trapezoid(integrand, tau)
            assert duhamel_exponential(a, b, t) == pytest.approx(expected, rel=1e-7)

    def test_duhamel_of_constant_forcing(self):
        """E(1)(xi) = (1 - exp(-2 pi t |xi|)) / (2 pi |xi|)."""
        E = duhamel_E(lambda xi, tau: np.ones((xi.size, tau.size)), 0.2)
        xi = np.array([1.0, 3.0])
        expected = -np.expm1(-2 * math.pi * 0.2 * xi) / (2 * math.pi * xi)
        assert np.allclose(E(xi), expected, rtol=1e-12)

    def test_duhamel_of_exponential_forcing(self):
        """E(exp(-2 pi tau b)) matches its closed form, including |xi| == b."""
        t, b = 0.2, 2.0
        E = duhamel_E(lambda xi, tau: np.exp(-2 * math.pi * b * tau)[None, :], t)
        a = np.array([1.0, 3.0, 7.5])
        expected = (np.exp(-2 * math.pi * a * t) - np.exp(-2 * math.pi * b * t)) / (
            2 * math.pi * (b - a)
        )
        assert np.allclose(E(a), expected, rtol=1e-10, atol=0)
        assert np.allclose(E(a), duhamel_exponential(a, b, t), rtol=1e-10, atol=0)
        degenerate = E(np.array([b]))[0]
        expected = t * math.exp(-2 * math.pi * b * t)
        assert degenerate == pytest.approx(expected, rel=1e-10)

    def test_invalid_window(self):
        """The window must satisfy 0 <= t_start <= t."""
        with pytest.raises(ArgumentError):
            duhamel_E(lambda xi, tau: xi, 0.1, t_start=0.2)
