"""Radial Laguerre series: power and exponential-power expansions, Parseval
diagnostics, and probes that separate pointwise from mean convergence.

Laguerre series here are over L_n^(alpha)(x) in the Hilbert space with weight
e^{-x} x^alpha on [0, inf); h_n = Gamma(n+alpha+1)/n! is the squared norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import oracle
from .basis import BasisSpec, WeightSpec
from .reports import ConvergenceReport, ratio_verdict
from .special import gamma_ratio, laguerre_table
from .transforms import CoeffTensor

__all__ = [
    "RadialSeriesSpec", "ConvergenceReport", "power_laguerre_coeffs", "expo_power_laguerre_coeffs",
    "laguerre_norm_sq", "laguerre_partial_sums", "weighted_norm_errors", "guseinov_exp_coeffs",
    "guseinov_exp_tensor", "residual_norm", "parseval_check", "inverse_power_divergence_probe", "rearrangement_probe",
    "truncate_converged",
]


@dataclass(frozen=True)
class RadialSeriesSpec:
    """Target x^mu e^{u x} expanded over L_n^(alpha), n = 0..n_max."""
    mu: float
    alpha: float = 0.0
    n_max: int = 20
    u: float = 0.0

    def __post_init__(self):
        if self.alpha <= -1:
            raise ValueError("Laguerre superscript must exceed -1")
        if self.mu + self.alpha <= -1:
            raise ValueError(f"x^mu against x^alpha e^-x needs mu + alpha > -1 (got {self.mu + self.alpha})")
        if self.n_max < 0:
            raise ValueError("n_max must be nonnegative")

    def target(self, x):
        x = np.asarray(x, dtype=float)
        return x ** self.mu * np.exp(self.u * x)


def _laguerre_target(alpha):
    return ("laguerre", alpha)


def laguerre_norm_sq(n: int, alpha: float) -> float:
    return math.exp(math.lgamma(n + alpha + 1) - math.lgamma(n + 1))


def power_laguerre_coeffs(spec: RadialSeriesSpec) -> CoeffTensor:
    """x^mu = sum_n c_n L_n^(alpha)(x); finite for integer mu >= 0."""
    if spec.u != 0:
        raise ValueError("power_laguerre_coeffs needs u = 0; use expo_power_laguerre_coeffs")
    mu, a = spec.mu, spec.alpha
    pref = gamma_ratio(mu + a + 1, a + 1)
    out = {}
    c = pref
    for n in range(spec.n_max + 1):
        if n:
            c *= (n - 1 - mu) / (a + n)
        out[n] = c
    return CoeffTensor(out, ("power", mu), _laguerre_target(a), notes={"mu": mu})


def _hyp2f1_terms(n: int, b: float, c: float, z: float):
    terms = [1.0]
    t = 1.0
    for j in range(n):
        t *= (j - n) * (b + j) / ((c + j) * (j + 1)) * z
        terms.append(t)
    return terms


def _hyp2f1_terminating(n: int, b: float, c: float, z: float) -> float:
    """2F1(-n, b; c; z) as a finite sum with error-free accumulation.

    For z < 1 the Pfaff form (1-z)^n 2F1(-n, c-b; c; z/(z-1)) is also summed and
    the variant with the smaller ratio sum|terms| / |sum| wins; the direct sum
    alternates with terms of size ~ (1+z)^n when z approaches 1/2.
    """
    terms = _hyp2f1_terms(n, b, c, z)
    val = math.fsum(terms)
    if z >= 1 or n == 0:
        return val
    cond = math.fsum(abs(t) for t in terms) / max(abs(val), 1e-300)
    alt = _hyp2f1_terms(n, c - b, c, z / (z - 1))
    alt_val = math.fsum(alt)
    alt_cond = math.fsum(abs(t) for t in alt) / max(abs(alt_val), 1e-300)
    if alt_cond < cond:
        return (1 - z) ** n * alt_val
    return val


def expo_power_laguerre_coeffs(spec: RadialSeriesSpec) -> CoeffTensor:
    """x^mu e^{u x} = sum_n c_n L_n^(alpha)(x), u < 1/2."""
    mu, a, u = spec.mu, spec.alpha, spec.u
    if u >= 0.5:
        raise ValueError("x^mu e^{u x} leaves the weighted L2 space for u >= 1/2")
    b = a + mu + 1
    pref = (1 - u) ** (-b) * gamma_ratio(b, a + 1)
    z = 1.0 / (1 - u)
    out = {n: pref * _hyp2f1_terminating(n, b, a + 1, z) for n in range(spec.n_max + 1)}
    return CoeffTensor(out, ("expo_power", mu, u), _laguerre_target(a), notes={"mu": mu, "u": u})


def laguerre_partial_sums(coeffs: CoeffTensor, x: float) -> Tuple[np.ndarray, np.ndarray]:
    """(terms, partial sums) of a Laguerre series at a single point."""
    alpha = coeffs.target[1]
    keys = coeffs.keys()
    L = laguerre_table(max(keys), alpha, float(x))
    terms = np.array([coeffs[n] * L[n] for n in keys])
    return terms, np.cumsum(terms)


def truncate_converged(coeffs: CoeffTensor, x: float, rel: float = 1e-14) -> int:
    """Order after which three consecutive terms are below rel * |sum|; the last order otherwise."""
    terms, s = laguerre_partial_sums(coeffs, x)
    run = 0
    for i, (t, si) in enumerate(zip(terms, s)):
        run = run + 1 if abs(t) < rel * abs(si) else 0
        if run == 3:
            return coeffs.keys()[i]
    return coeffs.keys()[-1]


def _weighted_norm_sq(f: Callable, alpha: float) -> float:
    # integral of e^{-x} x^alpha f(x)^2 over [0, inf); inf when it diverges
    def g(x):
        return np.exp(-x) * np.asarray(f(x)) ** 2
    quad = oracle.QuadratureSpec(scheme="adaptive_gk", scale=1.0)
    try:
        return oracle.radial_quadrature(g, alpha - 2, quad)
    except oracle.QuadratureError:
        return math.inf


def weighted_norm_errors(coeffs: CoeffTensor, f: Callable, norm_sq: Optional[float] = None):
    """Truncation errors ||f - f_N|| in L2 with weight e^{-x} x^alpha for each N.

    Uses ||f - f_N||^2 = ||f||^2 - sum_{n<=N} c_n^2 h_n (orthogonal projection);
    infinite when f is not square integrable.
    """
    alpha = coeffs.target[1]
    if norm_sq is None:
        norm_sq = _weighted_norm_sq(f, alpha)
    acc = 0.0
    out = []
    for n in coeffs.keys():
        acc += abs(coeffs[n]) ** 2 * laguerre_norm_sq(n, alpha)
        out.append(math.sqrt(max(norm_sq - acc, 0.0)) if math.isfinite(norm_sq) else math.inf)
    return out


def residual_norm(coeffs: CoeffTensor, f: Callable, n: Optional[int] = None) -> float:
    """||f - f_n|| by direct quadrature of the residual, free of the Parseval subtraction floor."""
    alpha = coeffs.target[1]
    keys = [j for j in coeffs.keys() if n is None or j <= n]

    def resid(x):
        x = np.asarray(x, dtype=float)
        L = laguerre_table(keys[-1], alpha, x)
        return np.asarray(f(x)) - sum(coeffs[j] * L[j] for j in keys)
    return math.sqrt(_weighted_norm_sq(resid, alpha))


def guseinov_exp_coeffs(k: float, x: float, beta: float, n: int, ell: int = 0, m: int = 0) -> float:
    """Coefficient of the Guseinov function (k, n, l, m) in e^{-x beta r} Y_0^0.

    Radial convention: e^{-x beta r} = sum_n E_n R_n0(r), with R the normalized
    Guseinov radial factor at the same beta.
    """
    if x <= 0 or n < 1:
        raise ValueError("need x > 0 and n >= 1")
    if ell != 0 or m != 0:
        return 0.0
    if x == 1:
        return float(math.exp(0.5 * (math.lgamma(k + 3) - (k + 3) * math.log(2 * beta)))) if n == 1 else 0.0
    logmag = (k + 3) * math.log(2 / (x + 1)) + 0.5 * (math.lgamma(n + k + 2) - (k + 3) * math.log(2 * beta)
                                                       - math.lgamma(n))
    q = (x - 1) / (x + 1)
    return math.exp(logmag) * q ** (n - 1)


def guseinov_exp_tensor(k: float, x: float, beta: float, n_max: int) -> CoeffTensor:
    out = {n: guseinov_exp_coeffs(k, x, beta, n) for n in range(1, n_max + 1)}
    return CoeffTensor(out, ("exp", x), BasisSpec("guseinov", beta, k), ell=0, m=0, notes={"x": x})


def parseval_check(coeffs: CoeffTensor, f: Callable, weight: WeightSpec) -> Tuple[float, float, float]:
    """(||f||^2, sum |c|^2, gap) for an orthonormal radial family under r^k.

    f is the radial factor. The norm is infinite when f leaves the space, and
    then the gap is infinite too.
    """
    spec = coeffs.target
    if not isinstance(spec, BasisSpec):
        raise ValueError("parseval_check needs a basis-set target")
    lhs = oracle.radial_norm_squared(f, weight.k, oracle.QuadratureSpec(scheme="adaptive_gk", scale=spec.beta))
    rhs = math.fsum(abs(c) ** 2 for c in coeffs.entries.values())
    return lhs, rhs, (abs(lhs - rhs) if math.isfinite(lhs) else math.inf)


def inverse_power_divergence_probe(x: float, n_max: int, alpha: float = 1.0) -> ConvergenceReport:
    """Laguerre series of 1/x at a point next to its weighted-L2 error.

    For alpha <= 1 the function 1/x is not square integrable against
    e^{-x} x^alpha, so the norm errors are reported as infinite.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    spec = RadialSeriesSpec(mu=-1.0, alpha=alpha, n_max=n_max)
    coeffs = power_laguerre_coeffs(spec)
    terms, s = laguerre_partial_sums(coeffs, x)
    # ||1/x||^2 = Gamma(alpha - 1) for alpha > 1
    norm_sq = math.gamma(alpha - 1) if alpha > 1 else math.inf
    nerr = weighted_norm_errors(coeffs, spec.target, norm_sq)
    growing = bool(np.all(np.diff(s) > 0)) and abs(s[-1]) > 10 * abs(s[0])
    verdict = "diverging" if growing else ratio_verdict(list(terms))
    return ConvergenceReport(orders=list(range(n_max + 1)), partial_sums=list(s),
                             partial_errors=[abs(v - 1 / x) for v in s], norm_errors=nerr,
                             verdict=verdict, meta={"x": x, "alpha": alpha, "mu": -1.0,
                                                    "reference": 1 / x})


def rearrangement_probe(mu: float, k: int, n_max: int) -> ConvergenceReport:
    """Partial sums of 1F0(k - mu; 1) = sum_m (k - mu)_m / m!.

    The partial sum through m = M is (k - mu + 1)_M / M!. The limit is
    infinite for k > mu, zero for k < mu, and 1 when k = mu.
    """
    a = k - mu
    terms = [1.0]
    for m in range(1, n_max + 1):
        terms.append(terms[-1] * (a + m - 1) / m)
    s = np.cumsum(terms)
    if a > 0:
        verdict, limit = "diverging", math.inf
    elif a == 0:
        verdict, limit = "terminating", 1.0
    elif float(a).is_integer():
        verdict, limit = "terminating", 0.0
    else:
        verdict, limit = "converging", 0.0
    errors = [abs(v - limit) for v in s] if math.isfinite(limit) else None
    return ConvergenceReport(orders=list(range(n_max + 1)), partial_sums=list(s), partial_errors=errors,
                             verdict=verdict, heuristic=False,
                             meta={"mu": mu, "k": k, "limit": limit, "terms": terms})
