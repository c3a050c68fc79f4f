"""Spherical tensor gradient operator Y_l^m(nabla).

Radial functions are handled as finite sums c r^p exp(-a r - b r^2), on which
D = (1/r) d/dr acts in closed form; arbitrary callables fall back to finite
differences in s = r^2, where D = 2 d/ds. Angular results are returned as
sums of weight * g(r) * Y_l^m(r/r) with surface harmonics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from . import oracle
from .basis import BasisSpec, QuantumIndex, eval
from .special import (AngularIndex, _solid_terms, delta_ell, gaunt, gaunt_series, ylm_cartesian)
from .transforms import CoeffTensor


class RadialFunctionHandle:
    """A radial function with access to (1/r d/dr)^j."""

    def __call__(self, r):
        raise NotImplementedError

    def D(self, j: int = 1) -> "RadialFunctionHandle":
        raise NotImplementedError

    def times_power(self, s: float) -> "RadialFunctionHandle":
        return _Product(self, s)


class ExpPoly(RadialFunctionHandle):
    """sum of c r^p exp(-a r - b r^2), keyed by (p, a, b)."""

    def __init__(self, terms: Dict[Tuple[float, float, float], complex]):
        self.terms = {k: v for k, v in terms.items() if v != 0}

    @classmethod
    def monomial(cls, p: float, a: float = 0.0, b: float = 0.0, c: complex = 1.0) -> "ExpPoly":
        return cls({(float(p), float(a), float(b)): c})

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r, dtype=complex if any(isinstance(c, complex) for c in self.terms.values()) else float)
        for (p, a, b), c in self.terms.items():
            out = out + c * r ** p * np.exp(-a * r - b * r * r)
        return out

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0.0) + v
        return ExpPoly(t)

    def scale(self, c) -> "ExpPoly":
        return ExpPoly({k: c * v for k, v in self.terms.items()})

    def times_power(self, s: float) -> "ExpPoly":
        return ExpPoly({(p + s, a, b): c for (p, a, b), c in self.terms.items()})

    def _D1(self) -> "ExpPoly":
        # (1/r) d/dr r^p e^{-a r - b r^2} = (p r^{p-2} - a r^{p-1} - 2 b r^p) e^{...}
        t: Dict[Tuple[float, float, float], complex] = {}
        for (p, a, b), c in self.terms.items():
            for key, v in (((p - 2, a, b), p * c), ((p - 1, a, b), -a * c), ((p, a, b), -2 * b * c)):
                if v != 0:
                    t[key] = t.get(key, 0.0) + v
        return ExpPoly(t)

    def D(self, j: int = 1) -> "ExpPoly":
        if j < 0:
            raise ValueError("negative derivative order")
        out = self
        for _ in range(j):
            out = out._D1()
        return out


class FiniteDifferenceRadial(RadialFunctionHandle):
    """Callable radial function; D^j by a central stencil in s = r^2 (oracle use)."""

    def __init__(self, f: Callable, h: float = 0.01, half_width: int = 6, order: int = 0):
        self.f, self.h, self.half_width, self.order = f, h, half_width, order

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.order == 0:
            return self.f(r)
        w = oracle._fd_weights(self.order, self.half_width) / self.h ** self.order
        offs = np.arange(-self.half_width, self.half_width + 1) * self.h
        s = r[..., None] ** 2 + offs
        if np.any(s <= 0):
            raise ValueError("finite-difference stencil crosses the origin; use a smaller step")
        return 2 ** self.order * np.sum(w * self.f(np.sqrt(s)), axis=-1)

    def D(self, j: int = 1) -> "FiniteDifferenceRadial":
        return FiniteDifferenceRadial(self.f, self.h, self.half_width, self.order + j)


class _Product(RadialFunctionHandle):
    def __init__(self, base: RadialFunctionHandle, s: float):
        self.base, self.s = base, s

    def __call__(self, r):
        return np.asarray(r, dtype=float) ** self.s * self.base(r)

    def D(self, j: int = 1):
        raise ValueError("derivatives of r^s * f need an analytic handle (ExpPoly)")


def as_handle(f) -> RadialFunctionHandle:
    return f if isinstance(f, RadialFunctionHandle) else FiniteDifferenceRadial(f)


def bfun_radial(n: int, ell: int, beta: float) -> ExpPoly:
    """Radial factor f of B_{n,l}^m(beta) = f(r) Y_l^m as an ExpPoly (any integer n with n + l >= 0)."""
    from .basis import norm_constant
    if n + ell < 0:
        raise ValueError("B function needs n + l >= 0")
    norm = norm_constant(BasisSpec("bfun", beta), n, ell)
    # k_{m+1/2}(z) = e^{-z} sum_j (m+j)!/(j!(m-j)! 2^j) z^{m-j}; k_{-nu} = z^{-2 nu} k_nu
    m = n - 1 if n >= 1 else -n
    shift = 0 if n >= 1 else -2 * m - 1
    terms = {}
    for j in range(m + 1):
        c = math.factorial(m + j) / (math.factorial(j) * math.factorial(m - j) * 2 ** j)
        p = m - j + shift + ell
        terms[(float(p), float(beta), 0.0)] = norm * c * beta ** p
    return ExpPoly(terms)


# ---------------------------------------------------------------------------
# results

@dataclass
class TensorDerivativeResult:
    """sum over terms of weight * radial(r) * Y_l^m(r/r)."""
    terms: List[Tuple[AngularIndex, float, RadialFunctionHandle]]
    notes: Dict[str, object] = field(default_factory=dict)

    def evaluate(self, r_vec) -> np.ndarray:
        r_vec = np.asarray(r_vec, dtype=float)
        r = np.linalg.norm(r_vec, axis=-1)
        total = np.zeros(r.shape, dtype=complex)
        for a, w, g in self.terms:
            total = total + w * g(r) * ylm_cartesian(a, r_vec)
        return total

    @property
    def indices(self) -> List[AngularIndex]:
        return [a for a, _, _ in self.terms]


def stgo_on_radial(ell: int, m: int, phi) -> TensorDerivativeResult:
    """Y_l^m(nabla) phi(r) = [(1/r d/dr)^l phi] Y_l^m(r) (solid harmonic), returned with r^l moved into the radial factor."""
    AngularIndex(ell, m)
    h = as_handle(phi).D(ell)
    g = h.times_power(ell)
    return TensorDerivativeResult([(AngularIndex(ell, m), 1.0, g)], {"solid_radial": h})


def stgo_linearize(l1: int, m1: int, l2: int, m2: int) -> List[Tuple[int, float, int]]:
    """(l, <l m1+m2|l1 m1|l2 m2>, Delta l) with Y_l1(nabla) Y_l2(nabla) = sum G nabla^{2 Delta l} Y_l(nabla)."""
    AngularIndex(l1, m1)
    AngularIndex(l2, m2)
    return [(ell, g, delta_ell(l1, l2, ell)[0]) for ell, g in gaunt_series(l1, m1, l2, m2) if g != 0]


def gamma_radial(form: int, f, l1: int, l2: int, ell: int) -> RadialFunctionHandle:
    """gamma_{l1 l2}^l(r) of Y_l1^m1(nabla)[f(r) Y_l2^m2] = sum_l G gamma(r) Y_l^{m1+m2} by one of six equivalent forms.

    Forms 4 and 5 need l2 >= l and l >= l2 respectively.
    """
    if form not in range(1, 7):
        raise ValueError("form must be 1..6")
    dl, dl1, dl2, sigma = delta_ell(l1, l2, ell)
    f = f if isinstance(f, ExpPoly) else None
    if f is None:
        raise ValueError("gamma forms need an analytic radial handle (ExpPoly)")
    if form == 1:
        base = f.times_power(-l2)
        out = ExpPoly({})
        for q in range(dl + 1):
            c = _poch(-dl, q) * _poch(-sigma - 0.5, q) / math.factorial(q) * 2 ** q
            if c:
                out = out + base.D(l1 - q).times_power(l1 + l2 - 2 * q).scale(c)
        return out
    if form == 2:
        return f.times_power(-l2).D(dl2).times_power(l1 + l2 + ell + 1).D(dl).times_power(-ell - 1)
    if form == 3:
        return f.times_power(l2 + 1).D(dl).times_power(l1 - l2 - ell - 1).D(dl2).times_power(ell)
    if form == 4:
        if l2 < ell:
            raise ValueError("form 4 needs l2 >= l")
        return (f.times_power(l2 + 1).D(l2 - ell).times_power(-2 * ell - 1).D(dl2)
                .times_power(l1 - l2 + 3 * ell + 1).D(dl2).times_power(-ell - 1))
    if form == 5:
        if ell < l2:
            raise ValueError("form 5 needs l >= l2")
        return (f.times_power(-l2).D(ell - l2).times_power(2 * ell + 1).D(dl)
                .times_power(l1 + l2 - 3 * ell - 1).D(dl).times_power(ell))
    out = ExpPoly({})
    base = f.times_power(l2 + 1)
    for s in range(dl2 + 1):
        c = _poch(-dl2, s) * _poch(dl1 + 0.5, s) / math.factorial(s) * 2 ** s
        if c:
            out = out + base.D(l1 - s).times_power(l1 - l2 - 2 * s - 1).scale(c)
    return out


def _poch(a: float, n: int) -> float:
    out = 1.0
    for j in range(n):
        out *= a + j
    return out


def stgo_apply(l1: int, m1: int, f, l2: int, m2: int, form: int = 1) -> TensorDerivativeResult:
    """Y_l1^m1(nabla) [f(r) Y_l2^m2(r/r)] through the gamma functions."""
    terms = []
    for ell, g, _ in stgo_linearize(l1, m1, l2, m2):
        terms.append((AngularIndex(ell, m1 + m2), g, gamma_radial(form, f, l1, l2, ell)))
    return TensorDerivativeResult(terms)


# ---------------------------------------------------------------------------
# B functions

def stgo_on_bfun(l1: int, m1: int, n2: int, l2: int, m2: int, beta: float = 1.0) -> CoeffTensor:
    """Y_l1^m1(nabla) B_{n2 l2}^{m2}(beta, r) as a finite B sum keyed by (n, l, m)."""
    out: Dict[Tuple[int, int, int], float] = {}
    for ell, g, dl in stgo_linearize(l1, m1, l2, m2):
        for t in range(dl + 1):
            key = (n2 + l2 - ell - t, ell, m1 + m2)
            out[key] = out.get(key, 0.0) + (-beta) ** l1 * g * (-1) ** t * math.comb(dl, t)
    return CoeffTensor(out, ("stgo", (l1, m1), (n2, l2, m2)), BasisSpec("bfun", beta), m=m1 + m2)


def laplacian_power_on_bfun(nu: int, n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """nabla^{2 nu} / beta^{2 nu} B_{n,l} = sum_t (-1)^t C(nu, t) B_{n-t,l}."""
    if nu < 0:
        raise ValueError("need nu >= 0")
    if n - nu < 1:
        raise ValueError("n - nu < 1 reaches distributional B functions, which are not modeled")
    out = {n - t: (-1) ** t * math.comb(nu, t) for t in range(nu + 1)}
    return CoeffTensor(out, ("laplacian", nu), BasisSpec("bfun", beta), ell)


def bsum_eval3(t: CoeffTensor, r_vec) -> np.ndarray:
    """Evaluate a B sum keyed by (n, l, m) at Cartesian points."""
    spec = t.target
    total = 0.0
    for (n, ell, m), c in t.items():
        total = total + c * eval(spec, QuantumIndex(n, ell, m), r_vec)
    return total


# ---------------------------------------------------------------------------
# Cartesian polynomials

@lru_cache(maxsize=None)
def solid_harmonic_monomials(ell: int, m: int) -> Dict[Tuple[int, int, int], complex]:
    """Coefficients of x^a y^b z^c in r^l Y_l^m."""
    am = abs(m)
    out: Dict[Tuple[int, int, int], complex] = {}
    for c, p1, p2, p3 in _solid_terms(ell, am):
        # (-x - i y)^p1 (x - i y)^p2 z^p3
        for a1 in range(p1 + 1):
            c1 = math.comb(p1, a1) * (-1) ** a1 * (-1j) ** (p1 - a1)
            for a2 in range(p2 + 1):
                c2 = math.comb(p2, a2) * (-1j) ** (p2 - a2)
                key = (a1 + a2, p1 - a1 + p2 - a2, p3)
                out[key] = out.get(key, 0.0) + c * c1 * c2
    if m < 0:
        out = {k: (-1) ** am * np.conj(v) for k, v in out.items()}
    return {k: v for k, v in out.items() if abs(v) > 1e-15}


def stgo_cartesian(ell: int, m: int, F: Callable, point, h: float = 0.02, half_width: int = 6) -> complex:
    """Y_l^m(nabla) F at a point by finite-difference Cartesian derivatives (oracle)."""
    return sum(c * oracle.cartesian_derivative(F, point, k, h=h, half_width=half_width)
               for k, c in solid_harmonic_monomials(ell, m).items())


def monomial_tensor_decomposition(u: int, v: int, w: int, degree: int = 24) -> List[Tuple[int, AngularIndex, complex]]:
    """x^u y^v z^w = sum C r^{2 nu} Y_lambda^mu(r) (solid harmonics), by projection on the unit sphere."""
    n = u + v + w
    if min(u, v, w) < 0:
        raise ValueError("exponents must be nonnegative")
    if n > 6:
        raise ValueError("supported total degree is at most 6")
    T, P, W = oracle.sphere_grid(degree)
    nvec = oracle.unit_vectors(T, P)
    mono = nvec[..., 0] ** u * nvec[..., 1] ** v * nvec[..., 2] ** w
    out = []
    for lam in range(n % 2, n + 1, 2):
        nu = (n - lam) // 2
        for mu in range(-lam, lam + 1):
            a = AngularIndex(lam, mu)
            c = np.sum(W * mono * np.conj(ylm_cartesian(a, nvec)))
            if abs(c) > 1e-13:
                out.append((nu, a, complex(c)))
    return out


def evaluate_monomial_decomposition(terms, r_vec) -> np.ndarray:
    from .special import regular_solid_harmonic
    r_vec = np.asarray(r_vec, dtype=float)
    r2 = np.sum(r_vec ** 2, axis=-1)
    return sum(c * r2 ** nu * regular_solid_harmonic(a, r_vec) for nu, a, c in terms)


def hobson_coulomb(ell: int, m: int) -> TensorDerivativeResult:
    """((-1)^l / (2l-1)!!) Y_l^m(nabla) (1/r), which should be the irregular solid harmonic."""
    from .special import double_factorial
    res = stgo_on_radial(ell, m, ExpPoly.monomial(-1))
    c = (-1) ** ell / double_factorial(2 * ell - 1)
    return TensorDerivativeResult([(a, c * w, g) for a, w, g in res.terms])


def helmholtz_harmonic(ell: int, m: int, beta: float) -> TensorDerivativeResult:
    """(4 pi)^{1/2} (-beta)^{-l} Y_l^m(nabla) B_00^0(beta, r), through the Yukawa radial form."""
    yuk = bfun_radial(0, 0, beta).scale(1 / math.sqrt(4 * math.pi))  # B_00^0 = k_{-1/2}(beta r) Y_0^0
    res = stgo_on_radial(ell, m, yuk)
    c = math.sqrt(4 * math.pi) * (-beta) ** (-ell)
    return TensorDerivativeResult([(a, c * w, g) for a, w, g in res.terms])


def coulomb_limit_of_helmholtz(ell: int, m: int, r_vec, betas: Sequence[float] = (1.0, 0.1, 0.01)) -> complex:
    """beta^{l+1} B_{-l,l}^m(beta, r) / (2l-1)!! extrapolated polynomially to beta = 0.

    The limit is the irregular solid harmonic r^{-l-1} Y_l^m. The leading
    correction is linear in beta for l = 0 and quadratic for l >= 1, so the
    extrapolation variable is beta or beta^2 accordingly.
    """
    from .addition import _neville
    from .special import double_factorial
    ys = [b ** (ell + 1) * complex(eval(BasisSpec("bfun", b), QuantumIndex(-ell, ell, m), r_vec))
          / double_factorial(2 * ell - 1) for b in betas]
    h = [b if ell == 0 else b * b for b in betas]
    re = _neville(h, [y.real for y in ys])
    im = _neville(h, [y.imag for y in ys])
    return complex(re, im)
