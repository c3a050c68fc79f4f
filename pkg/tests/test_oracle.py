import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import spherical_jn

from orbexp.oracle import (QuadratureError, QuadratureSpec, _fd_weights, cartesian_derivative, convolution_3d,
                           one_center_integral, radial_norm_squared, radial_quadrature, richardson_derivative,
                           sphere_quadrature, spherical_bessel_transform, two_center_integral)

rng = np.random.default_rng(42)


def slater_overlap(R):
    # integral of exp(-|r-a|) exp(-|r-b|) over R^3 with |a-b| = R
    return math.pi * math.exp(-R) * (1 + R + R * R / 3)


class TestQuadratureSpec:
    def test_defaults(self):
        s = QuadratureSpec()
        assert s.scheme == "adaptive_gk" and s.abs_tol > 0

    @pytest.mark.parametrize("kw", [{"abs_tol": 0.0}, {"rel_tol": -1.0}, {"scheme": "simpson"}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            QuadratureSpec(**kw)


class TestRadial:
    @given(st.integers(-1, 4), st.floats(0.3, 4.0))
    @settings(max_examples=30, deadline=None)
    def test_gamma_integrals(self, k, a):
        exact = math.gamma(k + 3) / a ** (k + 3)
        assert radial_quadrature(lambda r: np.exp(-a * r), k) == pytest.approx(exact, rel=1e-10)

    def test_gauss_laguerre_scheme(self):
        spec = QuadratureSpec(scheme="gauss_laguerre", scale=2.0, nodes=60)
        assert radial_quadrature(lambda r: np.exp(-2 * r) * r, 0, spec) == pytest.approx(6 / 16, rel=1e-13)

    def test_complex_integrand(self):
        z = 1 + 1j
        val = radial_quadrature(lambda r: np.exp(-z * r), 0)
        assert val == pytest.approx(2 / z ** 3, rel=1e-10)

    def test_singular_origin_raises(self):
        with pytest.raises(QuadratureError):
            radial_quadrature(lambda r: r ** -3.0, 0)

    def test_norm_infinite_for_non_integrable(self):
        assert math.isinf(radial_norm_squared(lambda r: np.exp(-r) / r ** 1.5, 0))
        assert radial_norm_squared(lambda r: np.exp(-r), 0) == pytest.approx(0.25, rel=1e-12)


class TestSphere:
    def test_constant(self):
        assert sphere_quadrature(lambda t, p: np.ones_like(t)) == pytest.approx(4 * math.pi, rel=1e-14)

    @pytest.mark.parametrize("power,exact", [(2, 4 * math.pi / 3), (4, 4 * math.pi / 5), (10, 4 * math.pi / 11)])
    def test_cos_powers(self, power, exact):
        assert sphere_quadrature(lambda t, p: np.cos(t) ** power, 16) == pytest.approx(exact, rel=1e-13)

    def test_odd_azimuthal_vanishes(self):
        assert abs(sphere_quadrature(lambda t, p: np.sin(t) ** 3 * np.cos(3 * p))) < 1e-14

    def test_degree_warning(self):
        with pytest.warns(UserWarning):
            sphere_quadrature(lambda t, p: np.ones_like(t), 402)


class TestMultiCenter:
    @pytest.mark.parametrize("center", [(0, 0, 0), (0.4, -1.0, 2.0)])
    def test_one_center(self, center):
        c = np.array(center)
        F = lambda p: np.exp(-np.linalg.norm(p - c, axis=-1))
        assert one_center_integral(F, c, decay=1.0) == pytest.approx(8 * math.pi, rel=1e-12)

    @pytest.mark.parametrize("R", [0.5, 1.7, 4.0])
    def test_two_center_slater(self, R):
        a = rng.normal(size=3)
        d = rng.normal(size=3)
        b = a + R * d / np.linalg.norm(d)
        F = lambda p: np.exp(-np.linalg.norm(p - a, axis=-1) - np.linalg.norm(p - b, axis=-1))
        assert two_center_integral(F, a, b) == pytest.approx(slater_overlap(R), rel=1e-10)

    def test_coincident_centers(self):
        F = lambda p: np.exp(-2 * np.linalg.norm(p, axis=-1))
        assert two_center_integral(F, np.zeros(3), np.zeros(3)) == pytest.approx(math.pi, rel=1e-12)

    def test_convolution(self):
        f = lambda p: np.exp(-np.linalg.norm(p, axis=-1))
        r = np.array([0.3, -0.9, 1.1])
        assert convolution_3d(f, f, r) == pytest.approx(slater_overlap(np.linalg.norm(r)), rel=1e-10)


class TestBesselTransform:
    @given(st.floats(0.05, 8.0))
    @settings(max_examples=20, deadline=None)
    def test_exponential_s_wave(self, p):
        exact = math.sqrt(2 / math.pi) * 2 / (1 + p * p) ** 2
        assert spherical_bessel_transform(lambda r: np.exp(-r), 0, p) == pytest.approx(exact, rel=1e-9)

    def test_p_wave_against_quad(self):
        f = lambda r: r * np.exp(-1.3 * r)
        for p in (0.4, 2.0, 5.0):
            ref = integrate.quad(lambda r: f(r) * spherical_jn(1, p * r) * r * r, 0, 80, limit=800,
                                 epsabs=1e-14, epsrel=1e-13)[0]
            assert spherical_bessel_transform(f, 1, p) == pytest.approx(math.sqrt(2 / math.pi) * ref, rel=1e-9)

    def test_zero_momentum(self):
        assert spherical_bessel_transform(lambda r: np.exp(-r), 1, 0.0) == 0.0
        assert spherical_bessel_transform(lambda r: np.exp(-r), 0, 0.0) == pytest.approx(
            2 * math.sqrt(2 / math.pi), rel=1e-12)

    def test_slow_oscillatory_tail(self):
        # 1/(1+r^2)^2 decays algebraically; the tail needs the extrapolated interval sums
        f = lambda r: 1 / (1 + r * r) ** 2
        p = 1.0
        exact = math.sqrt(2 / math.pi) * math.pi / 4 * math.exp(-p)
        assert spherical_bessel_transform(f, 0, p) == pytest.approx(exact, rel=1e-7)


class TestFiniteDifferences:
    def test_three_point_weights(self):
        np.testing.assert_allclose(_fd_weights(1, 1), [-0.5, 0, 0.5], atol=1e-15)
        np.testing.assert_allclose(_fd_weights(2, 1), [1, -2, 1], atol=1e-14)

    def test_mixed_exponential(self):
        f = lambda p: np.exp(p[..., 0] + 2 * p[..., 1] - 0.5 * p[..., 2])
        x = np.array([0.1, -0.2, 0.3])
        val = cartesian_derivative(f, x, (1, 2, 1))
        # total order 4 at h=0.02: rounding floor is about eps / h^4
        assert val == pytest.approx(4 * -0.5 * f(x), rel=1e-8)

    def test_polynomial_exact(self):
        f = lambda p: p[..., 0] * p[..., 1] * p[..., 2] ** 2
        assert cartesian_derivative(f, rng.normal(size=3), (1, 1, 2)) == pytest.approx(2.0, abs=1e-8)

    def test_richardson(self):
        assert richardson_derivative(math.sin, 0.3) == pytest.approx(math.cos(0.3), rel=1e-12)
        assert richardson_derivative(math.sin, 0.3, order=2) == pytest.approx(-math.sin(0.3), rel=1e-9)
        with pytest.raises(ValueError):
            richardson_derivative(math.sin, 0.3, order=3)
