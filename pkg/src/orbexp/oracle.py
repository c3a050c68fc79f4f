"""Independent numerical ground truth.

Weighted radial quadrature, sphere quadrature, two-center integrals in prolate
spheroidal coordinates (which remove the cusps at both centers), spherical
Bessel transforms and high-order Cartesian finite differences.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import roots_laguerre, roots_legendre, spherical_jn

from .accel import wynn_epsilon


class QuadratureError(RuntimeError):
    """Raised when a quadrature fails to reach its tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = "adaptive_gk"        # or "gauss_laguerre"
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_refinements: int = 400
    scale: float = 1.0                 # decay rate for gauss_laguerre
    nodes: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.scheme not in ("adaptive_gk", "gauss_laguerre"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def _laguerre_nodes(n: int):
    x, w = roots_laguerre(n)
    with np.errstate(divide="ignore"):
        lw = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)) + x, -np.inf)
    keep = np.isfinite(lw)
    return x[keep], np.exp(lw[keep])


@lru_cache(maxsize=None)
def _legendre_nodes(n: int):
    return roots_legendre(n)


def _singular_at_origin(h: Callable, eps=(1e-8, 1e-10, 1e-12)) -> bool:
    # h(r) is integrable at 0 only if r*h(r) -> 0; a non-decreasing r*h(r) flags divergence
    vals = []
    for r in eps:
        with np.errstate(all="ignore"):
            v = abs(float(np.real(h(r)))) * r
        vals.append(v)
    if not all(np.isfinite(vals)):
        return True
    return vals[-1] > 1e-6 and vals[-1] >= 0.9 * vals[0]


def radial_quadrature(f: Callable, weight_exponent: float = 0, spec: QuadratureSpec = DEFAULT_SPEC):
    """Integral of f(r) r^(weight_exponent + 2) over [0, inf).

    The extra r^2 is the volume element of the radial measure.
    """
    p = weight_exponent + 2

    def h(r):
        return f(r) * np.power(r, p)

    if spec.scheme == "gauss_laguerre":
        x, wx = _laguerre_nodes(spec.nodes)
        r = x / spec.scale
        return np.sum(wx * h(r)) / spec.scale

    if _singular_at_origin(h):
        raise QuadratureError("integrand is not integrable at the origin")
    c = spec.scale
    pts = [0.0, 1.0 / c, 4.0 / c, 16.0 / c, 64.0 / c]
    total = 0.0
    err = 0.0
    is_complex = np.iscomplexobj(h(np.array([1.0 / c])))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(pts[:-1], pts[1:]):
            v, e = integrate.quad(lambda r: float(np.real(h(r))), a, b, epsabs=spec.abs_tol / 8,
                                  epsrel=spec.rel_tol / 8, limit=spec.max_refinements,
                                  complex_func=False) if not is_complex else _cquad(h, a, b, spec)
            total += v
            err += e
        v, e = integrate.quad(lambda r: float(np.real(h(r))), pts[-1], np.inf, epsabs=spec.abs_tol / 8,
                              epsrel=spec.rel_tol / 8, limit=spec.max_refinements) if not is_complex \
            else _cquad(h, pts[-1], np.inf, spec)
        total += v
        err += e
    if err > max(spec.abs_tol, spec.rel_tol * abs(total)) * 100:
        raise QuadratureError(f"radial quadrature error estimate {err:.3e} above tolerance")
    return total


def _cquad(h, a, b, spec):
    re, e1 = integrate.quad(lambda r: float(np.real(h(r))), a, b, epsabs=spec.abs_tol / 8,
                            epsrel=spec.rel_tol / 8, limit=spec.max_refinements)
    im, e2 = integrate.quad(lambda r: float(np.imag(h(r))), a, b, epsabs=spec.abs_tol / 8,
                            epsrel=spec.rel_tol / 8, limit=spec.max_refinements)
    return re + 1j * im, e1 + e2


def radial_norm_squared(f: Callable, weight_exponent: float = 0, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """||f||^2 under r^k r^2 dr; infinite when the integrand diverges at the origin."""
    g = lambda r: np.abs(f(r)) ** 2
    try:
        return float(radial_quadrature(g, weight_exponent, spec))
    except QuadratureError:
        return math.inf


def sphere_grid(degree: int):
    """Product Gauss-Legendre x trapezoid grid exact for spherical polynomials of the given degree."""
    n_t = degree // 2 + 1
    n_p = degree + 1
    ct, wt = _legendre_nodes(n_t)
    theta = np.arccos(ct)
    phi = 2 * np.pi * np.arange(n_p) / n_p
    T, P = np.meshgrid(theta, phi, indexing="ij")
    W = np.outer(wt, np.full(n_p, 2 * np.pi / n_p))
    return T, P, W


def sphere_quadrature(g: Callable, degree: int = 32):
    """Integral of g(theta, phi) over the unit sphere."""
    if degree > 400:
        warnings.warn("sphere quadrature degree exceeds the supported range")
    T, P, W = sphere_grid(degree)
    return np.sum(W * g(T, P))


def unit_vectors(T, P) -> np.ndarray:
    return np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)


def _frame(axis: np.ndarray):
    e3 = axis / np.linalg.norm(axis)
    trial = np.array([1.0, 0.0, 0.0]) if abs(e3[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - e3 * np.dot(trial, e3)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e3, e1)
    return e1, e2, e3


def two_center_integral(F: Callable, center_a, center_b, decay: float = 2.0,
                        n_xi: int = 90, n_eta: int = 64, n_phi: int = 24):
    """Integral of F over R^3 in prolate spheroidal coordinates with foci a and b.

    F takes an array of points (..., 3). ``decay`` is the combined exponential
    rate of the integrand, used to scale the Gauss-Laguerre rule in xi.
    """
    a = np.asarray(center_a, dtype=float)
    b = np.asarray(center_b, dtype=float)
    R = float(np.linalg.norm(b - a))
    if R == 0.0:
        return one_center_integral(F, a, decay)
    e1, e2, e3 = _frame(b - a)
    mid = 0.5 * (a + b)
    s = decay * R / 2
    u, wu = _laguerre_nodes(n_xi)
    xi = 1.0 + u / s
    wxi = wu / s
    eta, weta = _legendre_nodes(n_eta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    XI, ETA, PHI = np.meshgrid(xi, eta, phi, indexing="ij")
    rho = (R / 2) * np.sqrt((XI ** 2 - 1) * (1 - ETA ** 2))
    zc = -(R / 2) * XI * ETA       # eta = +1 at focus a, -1 at focus b
    pts = (mid + rho[..., None] * (np.cos(PHI)[..., None] * e1 + np.sin(PHI)[..., None] * e2)
           + zc[..., None] * e3)
    jac = (R / 2) ** 3 * (XI ** 2 - ETA ** 2)
    W = wxi[:, None, None] * weta[None, :, None] * (2 * np.pi / n_phi) * jac
    return np.sum(W * F(pts))


def one_center_integral(F: Callable, center=(0.0, 0.0, 0.0), decay: float = 2.0,
                        n_r: int = 120, degree: int = 40):
    """Integral of F over R^3, Gauss-Laguerre radially and product rule on the sphere."""
    c = np.asarray(center, dtype=float)
    u, wu = _laguerre_nodes(n_r)
    r = u / decay
    wr = wu / decay * r ** 2
    T, P, W = sphere_grid(degree)
    n = unit_vectors(T, P)
    pts = c + r[:, None, None, None] * n[None]
    return np.sum(wr[:, None, None] * W[None] * F(pts))


def convolution_3d(f: Callable, g: Callable, r_sample, decay: float = 2.0, **kw):
    """(f * g)(r) = integral f(r - r') g(r') d^3 r'.

    The integrand has cusps at r' = 0 and r' = r; spheroidal coordinates with
    foci there make it smooth.
    """
    r = np.asarray(r_sample, dtype=float)
    F = lambda p: f(r - p) * g(p)
    return two_center_integral(F, np.zeros(3), r, decay=decay, **kw)


def spherical_bessel_transform(f_radial: Callable, ell: int, p: float, spec: QuadratureSpec = DEFAULT_SPEC,
                               max_intervals: int = 4000):
    """sqrt(2/pi) * integral f(r) j_l(p r) r^2 dr.

    The half-line is split near the zeros of j_l and the interval sums are
    extrapolated with the epsilon algorithm.
    """
    if p == 0.0:
        if ell > 0:
            return 0.0
        return math.sqrt(2 / math.pi) * radial_quadrature(f_radial, 0, spec)
    h = lambda r: f_radial(r) * spherical_jn(ell, p * r) * r * r
    step = math.pi / p
    first = (ell / 2 + 1) * step
    x, w = _legendre_nodes(48)

    def piece(a, b):
        rr = 0.5 * (b - a) * x + 0.5 * (b + a)
        return 0.5 * (b - a) * np.sum(w * h(rr))

    # the first interval may hold a steep origin region; refine it adaptively
    partial = [integrate.quad(h, 0.0, first, epsabs=spec.abs_tol / 10, epsrel=spec.rel_tol / 10, limit=200)[0]]
    a = first
    quiet = 0
    for _ in range(max_intervals):
        v = piece(a, a + step)
        partial.append(partial[-1] + v)
        a += step
        quiet = quiet + 1 if abs(v) < 1e-17 * max(abs(partial[-1]), 1e-300) else 0
        if quiet >= 3:
            break
    s = np.array(partial)
    if quiet >= 3:
        val = s[-1]
    else:
        val = wynn_epsilon(s[-15:])[1]
    return math.sqrt(2 / math.pi) * val


@lru_cache(maxsize=None)
def _fd_weights(order: int, half_width: int) -> np.ndarray:
    # central stencil on -M..M: sum_j w_j j^q = order! delta_{q,order}
    j = np.arange(-half_width, half_width + 1, dtype=float)
    V = np.vander(j, increasing=True).T
    rhs = np.zeros(len(j))
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def cartesian_derivative(f: Callable, point, orders: Sequence[int], h: float = 0.02, half_width: int = 6):
    """Mixed partial derivative d^a/dx^a d^b/dy^b d^c/dz^c of f at point.

    Tensor product of high-order central stencils; f takes arrays of points (..., 3).
    """
    p0 = np.asarray(point, dtype=float)
    grids = []
    weights = []
    for axis, k in enumerate(orders):
        if k == 0:
            grids.append(np.array([0.0]))
            weights.append(np.array([1.0]))
        else:
            grids.append(np.arange(-half_width, half_width + 1) * h)
            weights.append(_fd_weights(k, half_width) / h ** k)
    G = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1)
    W = np.einsum("i,j,k->ijk", *weights)
    return np.sum(W * f(p0 + G))


def richardson_derivative(g: Callable, x: float, order: int = 1, h0: float = 0.1, levels: int = 6) -> float:
    """Derivative of a scalar function by central differences with Richardson extrapolation."""
    table = []
    for i in range(levels):
        h = h0 / 2 ** i
        if order == 1:
            d = (g(x + h) - g(x - h)) / (2 * h)
        elif order == 2:
            d = (g(x + h) - 2 * g(x) + g(x - h)) / h ** 2
        else:
            raise ValueError("order must be 1 or 2")
        row = [d]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (4 ** j - 1))
        table.append(row)
    return table[-1][-1]
