"""Basis function families split into radial factor times Y_l^m.

Families: Slater-type functions (real principal index), Lambda functions,
Coulomb Sturmians, Guseinov functions with weight order k, B functions and
isotropic oscillator functions. ``eval_radial`` returns f such that the full
function is f(r) Y_l^m(theta, phi); solid-harmonic arguments like Y(2 beta r)
contribute their (2 beta r)^l to f.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import oracle
from .special import (AngularIndex, laguerre, reduced_bessel, reduced_bessel_poly,
                      regular_solid_harmonic)

FAMILIES = ("stf", "lambda", "sturmian", "guseinov", "bfun", "oscillator")
LAGUERRE_FAMILIES = ("lambda", "sturmian", "guseinov", "oscillator")


@dataclass(frozen=True)
class QuantumIndex:
    n: float
    ell: int
    m: int = 0

    def __post_init__(self):
        if self.ell < 0 or abs(self.m) > self.ell:
            raise ValueError(f"invalid angular part ({self.ell}, {self.m})")


@dataclass(frozen=True)
class BasisSpec:
    family: str
    beta: float = 1.0
    k: float = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.family == "guseinov" and self.k < -1:
            raise ValueError("Guseinov weight order must satisfy k >= -1")


@dataclass(frozen=True)
class WeightSpec:
    """Inner-product weight r^k, or the Sobolev form when ``sobolev_eta`` is set."""
    k: float = 0
    sobolev_eta: Optional[float] = None

    @classmethod
    def natural(cls, spec: BasisSpec) -> "WeightSpec":
        if spec.family == "guseinov":
            return cls(spec.k)
        if spec.family == "sturmian":
            return cls(-1)
        return cls(0)


def _check_index(spec: BasisSpec, q: QuantumIndex):
    if spec.family in LAGUERRE_FAMILIES:
        if int(q.n) != q.n or q.n < q.ell + 1:
            raise ValueError(f"{spec.family} needs integer n >= l+1, got n={q.n}, l={q.ell}")
    elif spec.family == "bfun":
        if int(q.n) != q.n or q.n + q.ell < 0:
            raise ValueError(f"B function needs integer n with n + l >= 0, got n={q.n}, l={q.ell}")


def norm_constant(spec: BasisSpec, n: int, ell: int) -> float:
    """Normalization prefactor multiplying exp * Laguerre * (c r)^l."""
    b = spec.beta
    nr = n - ell - 1
    if spec.family == "lambda":
        return (2 * b) ** 1.5 * math.exp(0.5 * (math.lgamma(nr + 1) - math.lgamma(n + ell + 2)))
    if spec.family == "sturmian":
        return (2 * b) ** 1.5 * math.exp(0.5 * (math.lgamma(nr + 1) - math.lgamma(n + ell + 1))) / math.sqrt(2 * n)
    if spec.family == "guseinov":
        k = spec.k
        return math.exp(0.5 * ((k + 3) * math.log(2 * b) + math.lgamma(nr + 1) - math.lgamma(n + ell + k + 2)))
    if spec.family == "oscillator":
        return b ** 1.5 * math.exp(0.5 * (math.log(2.0) + math.lgamma(nr + 1) - math.lgamma(n + 0.5)))
    if spec.family == "bfun":
        return math.exp(-((n + ell) * math.log(2.0) + math.lgamma(n + ell + 1)))
    return 1.0


def _solid_scale(spec: BasisSpec) -> float:
    # c in the (c r)^l carried by the solid-harmonic argument
    if spec.family in ("lambda", "sturmian", "guseinov"):
        return 2 * spec.beta
    return spec.beta


def radial_core(spec: BasisSpec, q: QuantumIndex, r):
    """Radial factor with the (c r)^l of the solid harmonic removed."""
    _check_index(spec, q)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    b = spec.beta
    n, ell = q.n, q.ell
    fam = spec.family
    if fam == "stf":
        p = n - ell - 1
        if p < 0 and np.any(r == 0):
            raise ValueError("Slater-type function with N - L - 1 < 0 is singular at r = 0")
        return np.power(b * r, p) * np.exp(-b * r)
    n = int(n)
    if fam in ("lambda", "sturmian", "guseinov"):
        alpha = {"lambda": 2 * ell + 2, "sturmian": 2 * ell + 1, "guseinov": 2 * ell + spec.k + 2}[fam]
        return norm_constant(spec, n, ell) * np.exp(-b * r) * laguerre(n - ell - 1, alpha, 2 * b * r)
    if fam == "oscillator":
        x = (b * r) ** 2
        return norm_constant(spec, n, ell) * np.exp(-x / 2) * laguerre(n - ell - 1, ell + 0.5, x)
    # B functions
    z = b * r
    if n >= 1:
        return norm_constant(spec, n, ell) * reduced_bessel_poly(n - 1, z)
    if np.any(z == 0):
        raise ValueError("B function with n <= 0 is singular at r = 0 once the harmonic factor is removed")
    return norm_constant(spec, n, ell) * reduced_bessel(n - 0.5, z)


def _origin_power(spec: BasisSpec, q: QuantumIndex) -> float:
    # leading power of the full radial factor at r = 0, for the B functions with n <= 0
    return 2 * q.n - 1 + q.ell


def eval_radial(spec: BasisSpec, q: QuantumIndex, r):
    """Radial factor f_{nl}(r); the full function is f_{nl}(r) Y_l^m."""
    r = np.asarray(r, dtype=float)
    c = _solid_scale(spec)
    if spec.family == "bfun" and q.n < 1:
        p = _origin_power(spec, q)
        at0 = r == 0
        if np.any(at0) and p < 0:
            raise ValueError("B function singular at r = 0")
        rs = np.where(at0, 1.0, r)
        out = radial_core(spec, q, rs) * (c * rs) ** q.ell
        if np.any(at0):
            lim = norm_constant(spec, int(q.n), q.ell) * reduced_bessel_poly(-int(q.n), 0.0) if p == 0 else 0.0
            out = np.where(at0, lim, out)
    else:
        out = radial_core(spec, q, r) * (c * r) ** q.ell
    return out if out.ndim else float(out)


def eval(spec: BasisSpec, q: QuantumIndex, r_vec):
    """Full basis function at Cartesian points (..., 3)."""
    r_vec = np.asarray(r_vec, dtype=float)
    r = np.linalg.norm(r_vec, axis=-1)
    c = _solid_scale(spec)
    solid = regular_solid_harmonic(AngularIndex(q.ell, q.m), c * r_vec)
    if spec.family == "bfun" and q.n < 1:
        at0 = r == 0
        if np.any(at0) and _origin_power(spec, q) <= 0:
            raise ValueError("B function is singular or direction-dependent at r = 0")
        core = radial_core(spec, q, np.where(at0, 1.0, r))
        return np.where(at0, 0.0, core * solid)
    return radial_core(spec, q, r) * solid


def default_quadrature(spec: BasisSpec, q_n=None) -> oracle.QuadratureSpec:
    """Gauss-Laguerre at the product decay rate where it is exact, adaptive otherwise."""
    exact = spec.family in ("lambda", "sturmian", "guseinov", "bfun") or \
        (spec.family == "stf" and q_n is not None and float(q_n).is_integer())
    if exact:
        return oracle.QuadratureSpec(scheme="gauss_laguerre", scale=2 * spec.beta, nodes=200)
    return oracle.QuadratureSpec(scheme="adaptive_gk", scale=spec.beta)


def gram_matrix(spec: BasisSpec, weight: WeightSpec, n_max: int, ell: int, m: int = 0,
                quad: Optional[oracle.QuadratureSpec] = None) -> np.ndarray:
    """Weighted radial inner products over n = l+1..n_max at fixed (l, m)."""
    if weight.sobolev_eta is not None:
        if spec.family != "sturmian":
            raise ValueError("the Sobolev form is provided for Sturmians only")
        return sobolev_gram_sturmian(spec.beta, n_max, ell)
    ns = list(range(ell + 1, n_max + 1))
    quad = quad or default_quadrature(spec, 1)
    funcs = [lambda r, n=n: eval_radial(spec, QuantumIndex(n, ell, m), r) for n in ns]
    G = np.empty((len(ns), len(ns)))
    if quad.scheme == "gauss_laguerre":
        x, w = oracle._laguerre_nodes(quad.nodes)
        r = x / quad.scale
        F = np.array([f(r) for f in funcs])
        W = w / quad.scale * r ** (weight.k + 2)
        return (F * W) @ F.T
    for i, fi in enumerate(funcs):
        for j in range(i, len(funcs)):
            fj = funcs[j]
            G[i, j] = G[j, i] = oracle.radial_quadrature(lambda r: fi(r) * fj(r), weight.k, quad)
    return G


def sobolev_gram_sturmian(beta: float, n_max: int, ell: int) -> np.ndarray:
    """<Psi_n | (beta^2 - Laplacian) / (2 beta^2) | Psi_n'> with eta = beta.

    Sturmians obey Laplacian Psi_n = (beta^2 - 2 beta n / r) Psi_n, so the
    operator acts on Psi_n' as (n'/(beta r)); what remains is the 1/r Gram matrix.
    """
    spec = BasisSpec("sturmian", beta)
    G = gram_matrix(spec, WeightSpec(-1), n_max, ell)
    ns = np.arange(ell + 1, n_max + 1)
    return G * (ns[None, :] / beta)


def radial_laplacian(f, ell: int, r: float, h: float = 1e-3) -> float:
    """Radial part of the Laplacian of f(r) Y_l^m: f'' + 2 f'/r - l(l+1) f / r^2 (finite differences)."""
    d1 = oracle.richardson_derivative(f, r, 1, h0=h * 8)
    d2 = oracle.richardson_derivative(f, r, 2, h0=h * 8)
    return d2 + 2 * d1 / r - ell * (ell + 1) * f(r) / r ** 2


def fourier_bfun_radial(n: int, ell: int, alpha: float, p):
    """Closed-form radial momentum factor of a B function (the (-i)^l Y_l^m(p) factor removed)."""
    p = np.asarray(p, dtype=float)
    return math.sqrt(2 / math.pi) * alpha ** (2 * n + ell - 1) * p ** ell / (alpha ** 2 + p ** 2) ** (n + ell + 1)
