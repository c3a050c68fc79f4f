"""Scalar special functions and angular-momentum algebra.

Laguerre polynomials, reduced Bessel functions of half-integral order,
spherical and solid harmonics (Condon-Shortley phase) and Gaunt coefficients.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import lpmv

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class AngularIndex:
    ell: int
    m: int

    def __post_init__(self):
        if self.ell < 0 or abs(self.m) > self.ell:
            raise ValueError(f"invalid angular index ({self.ell}, {self.m})")


@dataclass(frozen=True)
class HalfOrder:
    """Bessel order stored as twice its value, so nu = twice_nu / 2."""
    twice_nu: int

    @property
    def nu(self) -> float:
        return self.twice_nu / 2.0


# ---------------------------------------------------------------------------
# factorial-type helpers

def lgamma_signed(x: float) -> Tuple[float, int]:
    """log|Gamma(x)| and sign(Gamma(x)). Raises at the poles."""
    if x <= 0 and float(x).is_integer():
        raise ValueError(f"Gamma pole at {x}")
    sgn = 1
    if x < 0:
        # sign alternates between consecutive negative poles
        sgn = -1 if int(math.floor(x)) % 2 else 1
    return math.lgamma(x), sgn


def gamma_ratio(a: float, b: float) -> float:
    """Gamma(a)/Gamma(b) through log-gamma differences."""
    la, sa = lgamma_signed(a)
    lb, sb = lgamma_signed(b)
    return sa * sb * math.exp(la - lb)


def pochhammer(a: float, n: int) -> float:
    """Rising factorial (a)_n for integer n; negative n gives 1/((a-1)(a-2)...(a+n))."""
    out = 1.0
    if n >= 0:
        for j in range(n):
            out *= a + j
    else:
        for j in range(1, -n + 1):
            out /= a - j
    return out


def binom(a: float, k: int) -> float:
    """Generalized binomial coefficient C(a, k) for integer k >= 0."""
    if k < 0:
        return 0.0
    return pochhammer(a - k + 1, k) / math.factorial(k)


def double_factorial(n: int) -> int:
    """n!! with (-1)!! = 0!! = 1."""
    out = 1
    for j in range(n, 0, -2):
        out *= j
    return out


# ---------------------------------------------------------------------------
# Laguerre polynomials

def laguerre(n: int, alpha: float, x):
    """Generalized Laguerre polynomial L_n^(alpha)(x) by upward recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if n == 0:
        return p0 if p0.ndim else float(p0)
    p1 = alpha + 1.0 - x
    for j in range(1, n):
        p0, p1 = p1, ((2 * j + alpha + 1.0 - x) * p1 - (j + alpha) * p0) / (j + 1)
    return p1 if p1.ndim else float(p1)


def laguerre_explicit(n: int, alpha: float, x):
    """Explicit alternating sum for L_n^(alpha); a reference for small n."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for nu in range(n + 1):
        total = total + (-1) ** nu * binom(n + alpha, n - nu) * x ** nu / math.factorial(nu)
    return total if total.ndim else float(total)


def laguerre_table(n_max: int, alpha: float, x) -> np.ndarray:
    """All L_0..L_{n_max} at x, shape (n_max+1, *x.shape)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = alpha + 1.0 - x
    for j in range(1, n_max):
        out[j + 1] = ((2 * j + alpha + 1.0 - x) * out[j] - (j + alpha) * out[j - 1]) / (j + 1)
    return out


# ---------------------------------------------------------------------------
# reduced Bessel functions

def reduced_bessel(order, z):
    """Reduced Bessel function k_nu(z) = sqrt(2/pi) z^nu K_nu(z), half-integral nu.

    ``order`` is a HalfOrder or a float nu. Uses the upward recurrence
    k_{nu+1} = 2 nu k_nu + z^2 k_{nu-1} from k_{-1/2} = e^{-z}/z, k_{1/2} = e^{-z},
    and k_{-nu} = z^{-2nu} k_nu for negative orders.
    """
    twice = order.twice_nu if isinstance(order, HalfOrder) else int(round(2 * order))
    if twice % 2 == 0:
        raise ValueError("only half-integral orders are supported")
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("reduced Bessel function requires z > 0")
    if twice < 0:
        return z ** (twice * 1.0) * reduced_bessel(HalfOrder(-twice), z)
    n = (twice - 1) // 2          # nu = n + 1/2
    e = np.exp(-z)
    km, k = e / z, e
    nu = 0.5
    for _ in range(n):
        km, k = k, 2.0 * nu * k + z * z * km
        nu += 1.0
    return k if k.ndim else float(k)


def reduced_bessel_poly(m: int, z):
    """k_{m+1/2}(z) = e^{-z} sum_j (m+j)!/(j!(m-j)!) 2^{-j} z^{m-j}, finite at z = 0."""
    z = np.asarray(z, dtype=float)
    total = np.zeros_like(z)
    for j in range(m + 1):
        c = math.factorial(m + j) / (math.factorial(j) * math.factorial(m - j) * 2 ** j)
        total = total + c * z ** (m - j)
    out = np.exp(-z) * total
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# spherical and solid harmonics

def _norm_lm(ell: int, am: int) -> float:
    return math.sqrt((2 * ell + 1) / FOUR_PI * math.exp(math.lgamma(ell - am + 1) - math.lgamma(ell + am + 1)))


def spherical_harmonic(a: AngularIndex, theta, phi):
    """Y_l^m(theta, phi) with the Condon-Shortley phase."""
    ell, m = a.ell, a.m
    am = abs(m)
    # scipy's lpmv carries (-1)^m already; strip it and apply the phase explicitly
    p = lpmv(am, ell, np.cos(theta)) * (-1) ** am
    val = _norm_lm(ell, am) * p * np.exp(1j * am * np.asarray(phi))
    if m > 0:
        val = (-1) ** m * val
    elif m < 0:
        val = np.conj(val)
    return val


def _cart(r_vec):
    r = np.asarray(r_vec, dtype=float)
    return r[..., 0], r[..., 1], r[..., 2]


@lru_cache(maxsize=None)
def _solid_terms(ell: int, m: int):
    # m >= 0: (coefficient, power of (-x-iy), power of (x-iy), power of z)
    pref = math.sqrt((2 * ell + 1) / FOUR_PI * math.factorial(ell + m) * math.factorial(ell - m))
    terms = []
    for k in range((ell - m) // 2 + 1):
        c = pref / (2 ** (m + 2 * k) * math.factorial(m + k) * math.factorial(k) * math.factorial(ell - m - 2 * k))
        terms.append((c, m + k, k, ell - m - 2 * k))
    return tuple(terms)


def regular_solid_harmonic(a: AngularIndex, r_vec):
    """r^l Y_l^m evaluated as a homogeneous polynomial in x, y, z."""
    x, y, z = _cart(r_vec)
    am = abs(a.m)
    up = -x - 1j * y
    dn = x - 1j * y
    val = 0.0
    for c, p1, p2, p3 in _solid_terms(a.ell, am):
        val = val + c * up ** p1 * dn ** p2 * z ** p3
    val = np.asarray(val, dtype=complex) + 0.0 * x
    if a.m < 0:
        val = (-1) ** am * np.conj(val)
    return val if val.ndim else complex(val)


def irregular_solid_harmonic(a: AngularIndex, r_vec):
    """r^{-l-1} Y_l^m, singular at the origin."""
    x, y, z = _cart(r_vec)
    r2 = x * x + y * y + z * z
    if np.any(r2 == 0):
        raise ValueError("irregular solid harmonic is singular at r = 0")
    return regular_solid_harmonic(a, r_vec) / r2 ** (a.ell + 0.5)


def ylm_cartesian(a: AngularIndex, r_vec):
    """Y_l^m of the direction of r_vec."""
    x, y, z = _cart(r_vec)
    r = np.sqrt(x * x + y * y + z * z)
    return regular_solid_harmonic(a, r_vec) / r ** a.ell


# ---------------------------------------------------------------------------
# Clebsch-Gordan and Gaunt coefficients

@lru_cache(maxsize=None)
def clebsch_gordan(j1: int, m1: int, j2: int, m2: int, j: int, m: int) -> float:
    """<j1 m1 j2 m2 | j m> for integer angular momenta (Racah formula in exact rationals)."""
    if m1 + m2 != m or j < abs(j1 - j2) or j > j1 + j2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m) > j:
        return 0.0
    f = math.factorial
    num = (2 * j + 1) * f(j1 + j2 - j) * f(j1 - j2 + j) * f(-j1 + j2 + j) * f(j1 + m1) * f(j1 - m1) \
        * f(j2 + m2) * f(j2 - m2) * f(j + m) * f(j - m)
    den = f(j1 + j2 + j + 1)
    kmin = max(0, j2 - j - m1, j1 + m2 - j)
    kmax = min(j1 + j2 - j, j1 - m1, j2 + m2)
    acc = Fraction(0)
    for k in range(kmin, kmax + 1):
        d = f(k) * f(j1 + j2 - j - k) * f(j1 - m1 - k) * f(j2 + m2 - k) * f(j - j2 + m1 + k) * f(j - j1 - m2 + k)
        acc += Fraction((-1) ** k, d)
    if acc == 0:
        return 0.0
    return math.copysign(math.sqrt(float(acc * acc * Fraction(num, den))), float(acc))


def gaunt_limits(ell1: int, m1: int, ell2: int, m2: int) -> Tuple[int, int, int]:
    """Summation limits (l_min, l_max, 2) of the Gaunt linearization."""
    ell_max = ell1 + ell2
    lam = max(abs(ell1 - ell2), abs(m1 + m2))
    ell_min = lam if (ell_max + lam) % 2 == 0 else lam + 1
    return ell_min, ell_max, 2


def delta_ell(ell1: int, ell2: int, ell: int) -> Tuple[int, int, int, int]:
    """Half sums (Dl, Dl1, Dl2, sigma) of a coupling triple."""
    vals = (ell1 + ell2 - ell, ell - ell1 + ell2, ell + ell1 - ell2, ell1 + ell2 + ell)
    if any(v < 0 or v % 2 for v in vals):
        raise ValueError(f"invalid coupling triple ({ell1}, {ell2}, {ell})")
    return tuple(v // 2 for v in vals)


def _gaunt_raw(l3, m3, l2, m2, l1, m1) -> float:
    if m3 != m1 + m2 or (l1 + l2 + l3) % 2:
        return 0.0
    if l3 < abs(l1 - l2) or l3 > l1 + l2:
        return 0.0
    pref = math.sqrt((2 * l1 + 1) * (2 * l2 + 1) / (FOUR_PI * (2 * l3 + 1)))
    return pref * clebsch_gordan(l1, 0, l2, 0, l3, 0) * clebsch_gordan(l1, m1, l2, m2, l3, m3)


class GauntTable:
    """Memoized Gaunt coefficients <l3 m3|l2 m2|l1 m1> = int Y3* Y2 Y1 dOmega."""

    def __init__(self):
        self._cache: dict = {}
        self._lock = threading.Lock()

    def __call__(self, l3, m3, l2, m2, l1, m1) -> float:
        # exchange symmetry of the two right-hand factors
        a, b = sorted(((l1, m1), (l2, m2)))
        key = (l3, m3) + a + b
        val = self._cache.get(key)
        if val is None:
            val = _gaunt_raw(l3, m3, l2, m2, l1, m1)
            with self._lock:
                self._cache[key] = val
        return val

    def __len__(self):
        return len(self._cache)


GAUNT = GauntTable()


def gaunt(l3: int, m3: int, l2: int, m2: int, l1: int, m1: int) -> float:
    """Real Gaunt coefficient <l3 m3|l2 m2|l1 m1>."""
    for ell, m in ((l3, m3), (l2, m2), (l1, m1)):
        if ell < 0 or abs(m) > ell:
            raise ValueError(f"invalid angular index ({ell}, {m})")
    return GAUNT(l3, m3, l2, m2, l1, m1)


def gaunt_series(ell1: int, m1: int, ell2: int, m2: int):
    """(l, <l m1+m2|l1 m1|l2 m2>) over the Gaunt-limited range."""
    lo, hi, _ = gaunt_limits(ell1, m1, ell2, m2)
    return [(ell, gaunt(ell, m1 + m2, ell1, m1, ell2, m2)) for ell in range(lo, hi + 1, 2)]
