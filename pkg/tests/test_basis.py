import math

import numpy as np
import pytest
from scipy import integrate
from hypothesis import given, settings, strategies as st

from orbexp import oracle
from orbexp.basis import (BasisSpec, QuantumIndex, WeightSpec, eval, eval_radial, fourier_bfun_radial, gram_matrix,
                          radial_laplacian, sobolev_gram_sturmian)

rng = np.random.default_rng(42)

NATURAL = [("lambda", 0), ("guseinov", -1), ("guseinov", 0), ("guseinov", 1), ("guseinov", 2), ("oscillator", 0)]


class TestEvaluation:
    def test_guseinov_k0_is_lambda(self):
        for _ in range(20):
            ell = int(rng.integers(0, 4))
            n = int(rng.integers(ell + 1, 9))
            r = float(rng.uniform(0, 15))
            beta = float(rng.uniform(0.5, 2))
            a = eval_radial(BasisSpec("guseinov", beta, 0), QuantumIndex(n, ell), r)
            b = eval_radial(BasisSpec("lambda", beta), QuantumIndex(n, ell), r)
            assert a == pytest.approx(b, rel=1e-12, abs=1e-300)

    def test_yukawa_bfunction(self):
        beta = 1.3
        r = np.array([0.1, 0.7, 2.0, 5.0])
        val = eval_radial(BasisSpec("bfun", beta), QuantumIndex(0, 0), r) / math.sqrt(4 * math.pi)
        np.testing.assert_allclose(math.sqrt(4 * math.pi) * beta * val, np.exp(-beta * r) / r, rtol=1e-13)

    def test_stf_1s(self):
        r = np.linspace(0, 6, 9)
        np.testing.assert_allclose(eval_radial(BasisSpec("stf", 1.7), QuantumIndex(1, 0), r), np.exp(-1.7 * r),
                                   rtol=1e-15)

    def test_stf_singular_origin(self):
        with pytest.raises(ValueError):
            eval_radial(BasisSpec("stf", 1.0), QuantumIndex(0.5, 0), 0.0)
        assert np.isfinite(eval_radial(BasisSpec("stf", 1.0), QuantumIndex(0.5, 0), 0.3))

    def test_lambda_origin_value(self):
        beta = 0.8
        v = eval(BasisSpec("lambda", beta), QuantumIndex(1, 0, 0), np.zeros(3))
        assert v == pytest.approx((2 * beta) ** 1.5 * math.sqrt(0.5) / math.sqrt(4 * math.pi), rel=1e-14)

    def test_oscillator_ground_state(self):
        beta = 1.2
        r = np.linspace(0, 4, 11)
        f = eval_radial(BasisSpec("oscillator", beta), QuantumIndex(1, 0), r)
        np.testing.assert_allclose(f / f[0], np.exp(-(beta * r) ** 2 / 2), rtol=1e-14)
        norm = oracle.radial_norm_squared(lambda x: eval_radial(BasisSpec("oscillator", beta), QuantumIndex(1, 0), x))
        assert norm == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n,ell", [(1, 0), (2, 0), (3, 0), (3, 1), (4, 2), (6, 1)])
    def test_hydrogenic_node_count(self, n, ell):
        Z = 1.0
        spec = BasisSpec("sturmian", Z / n)
        r = np.linspace(1e-3, 60 * n, 20000)
        f = eval_radial(spec, QuantumIndex(n, ell), r)
        f = f[np.abs(f) > 1e-14 * np.abs(f).max()]
        assert int(np.sum(np.sign(f[1:]) != np.sign(f[:-1]))) == n - ell - 1

    def test_hydrogenic_energy_equation(self):
        # Sturmian with beta = Z/n solves the hydrogen radial equation, E = -Z^2/(2 n^2)
        Z, n, ell = 1.0, 3, 1
        spec = BasisSpec("sturmian", Z / n)
        f = lambda r: eval_radial(spec, QuantumIndex(n, ell), r)
        for r in (0.7, 2.5, 9.0):
            h = -0.5 * radial_laplacian(f, ell, r) - Z / r * f(r)
            assert h == pytest.approx(-Z ** 2 / (2 * n ** 2) * f(r), abs=1e-7)

    @pytest.mark.parametrize("family,k", NATURAL + [("sturmian", 0), ("bfun", 0), ("stf", 0)])
    def test_scaling_covariance(self, family, k):
        ell = 1
        n = 3
        pts = rng.normal(size=(8, 3))
        ratios = []
        for p in pts:
            a = eval(BasisSpec(family, 1.7, k), QuantumIndex(n, ell, 1), p)
            b = eval(BasisSpec(family, 1.0, k), QuantumIndex(n, ell, 1), 1.7 * p)
            ratios.append(a / b)
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-11)

    def test_full_function_factorisation(self):
        spec = BasisSpec("guseinov", 0.9, 1)
        pts = rng.normal(size=(10, 3))
        r = np.linalg.norm(pts, axis=1)
        th, ph = np.arccos(pts[:, 2] / r), np.arctan2(pts[:, 1], pts[:, 0])
        from orbexp.special import AngularIndex, spherical_harmonic
        q = QuantumIndex(4, 2, -1)
        np.testing.assert_allclose(eval(spec, q, pts),
                                   eval_radial(spec, q, r) * spherical_harmonic(AngularIndex(2, -1), th, ph),
                                   rtol=1e-12)

    def test_invalid_indices(self):
        with pytest.raises(ValueError):
            eval_radial(BasisSpec("lambda"), QuantumIndex(1, 1), 1.0)
        with pytest.raises(ValueError):
            BasisSpec("guseinov", 1.0, -2)
        with pytest.raises(ValueError):
            BasisSpec("lambda", -1.0)
        with pytest.raises(ValueError):
            eval_radial(BasisSpec("lambda"), QuantumIndex(2, 0), -1.0)


class TestOrthonormality:
    @pytest.mark.parametrize("family,k", NATURAL)
    @pytest.mark.parametrize("ell", range(4))
    def test_identity(self, family, k, ell):
        spec = BasisSpec(family, 1.3, k)
        G = gram_matrix(spec, WeightSpec.natural(spec), 6, ell)
        np.testing.assert_allclose(G, np.eye(6 - ell), atol=1e-10)

    @pytest.mark.parametrize("ell", range(4))
    def test_sturmian_inverse_r(self, ell):
        beta = 0.7
        G = gram_matrix(BasisSpec("sturmian", beta), WeightSpec(-1), 6, ell)
        ns = np.arange(ell + 1, 7)
        np.testing.assert_allclose(G, np.diag(beta / ns), atol=1e-10)

    def test_adaptive_quadrature_route_agrees(self):
        spec = BasisSpec("guseinov", 1.1, 2)
        quad = oracle.QuadratureSpec(scheme="adaptive_gk", scale=1.1)
        G = gram_matrix(spec, WeightSpec(2), 4, 1, quad=quad)
        np.testing.assert_allclose(G, np.eye(3), atol=1e-9)

    def test_mismatched_weight_is_not_identity(self):
        G = gram_matrix(BasisSpec("guseinov", 1.0, 2), WeightSpec(0), 4, 0)
        assert np.max(np.abs(G - np.eye(4))) > 1e-2


class TestSobolev:
    def test_identity(self):
        for ell in range(4):
            S = sobolev_gram_sturmian(1.4, 6, ell)
            np.testing.assert_allclose(S, np.eye(6 - ell), atol=1e-10)

    def test_off_diagonal(self):
        S = sobolev_gram_sturmian(0.9, 4, 0)
        assert abs(S[1, 2]) <= 1e-10

    def test_weight_spec_dispatch(self):
        spec = BasisSpec("sturmian", 1.1)
        np.testing.assert_allclose(gram_matrix(spec, WeightSpec(sobolev_eta=1.1), 4, 1), np.eye(3), atol=1e-10)
        with pytest.raises(ValueError):
            gram_matrix(BasisSpec("lambda"), WeightSpec(sobolev_eta=1.0), 3, 0)

    def test_differential_equation(self):
        # the reduction rests on Laplacian Psi_n = (beta^2 - 2 beta n / r) Psi_n
        beta = 1.1
        for n, ell in [(1, 0), (3, 0), (4, 2)]:
            f = lambda r: eval_radial(BasisSpec("sturmian", beta), QuantumIndex(n, ell), r)
            for r in (0.5, 1.9, 4.0):
                assert radial_laplacian(f, ell, r) == pytest.approx((beta ** 2 - 2 * beta * n / r) * f(r), abs=1e-7)

    def test_diagonal_consistency(self):
        # diagonal = (n / beta) * (beta / n) from the 1/r Gram matrix
        beta = 0.6
        G = gram_matrix(BasisSpec("sturmian", beta), WeightSpec(-1), 5, 0)
        ns = np.arange(1, 6)
        np.testing.assert_allclose(np.diag(G) * ns / beta, 1.0, atol=1e-12)

    def test_direct_quadrature_route(self):
        # independent route: apply (beta^2 - Laplacian)/(2 beta^2) by finite differences, integrate adaptively
        beta, ell = 1.0, 0
        spec = BasisSpec("sturmian", beta)
        for n, n2 in [(1, 1), (2, 3), (2, 2)]:
            f = lambda r: eval_radial(spec, QuantumIndex(n, ell), r)
            g = lambda r: eval_radial(spec, QuantumIndex(n2, ell), r)

            def integrand(r):
                r = np.atleast_1d(r)
                lap = np.array([radial_laplacian(g, ell, float(x)) for x in r])
                return f(r) * (beta ** 2 * g(r) - lap) / (2 * beta ** 2)
            val = integrate.quad(lambda r: float(integrand(r)[0]) * r * r, 0.02, 80.0, limit=400, epsabs=1e-12)[0]
            head = integrate.quad(lambda r: f(r) * g(r) * n2 / beta * r, 0.0, 0.02, epsabs=1e-14)[0]
            assert val + head == pytest.approx(float(n == n2), abs=1e-6)


class TestFourier:
    @given(st.sampled_from([(1, 0), (2, 0), (1, 1), (2, 2), (3, 1)]), st.floats(0.05, 6.0))
    @settings(max_examples=25, deadline=None)
    def test_spherical_bessel_transform(self, nl, p):
        n, ell = nl
        alpha = 1.3
        f = lambda r: eval_radial(BasisSpec("bfun", alpha), QuantumIndex(n, ell), r)
        got = oracle.spherical_bessel_transform(f, ell, p)
        assert got == pytest.approx(fourier_bfun_radial(n, ell, alpha, p), rel=1e-7, abs=1e-12)
