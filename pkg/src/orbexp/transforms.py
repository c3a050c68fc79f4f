"""Finite inter-basis coefficient formulas.

Each generator returns a CoeffTensor whose entries are keyed by the principal
index of the target functions (same l and m as the source). All factorial and
Pochhammer ratios go through log-gamma or short exact products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, Iterable, Optional

import numpy as np

from .basis import BasisSpec, QuantumIndex, eval_radial
from .special import (double_factorial, gamma_ratio, laguerre, pochhammer, reduced_bessel_poly)


@dataclass
class CoeffTensor:
    """Sparse coefficient map. ``target`` is a BasisSpec or a scalar-family label tuple.

    Scalar labels: ("laguerre", alpha) over L_n^(alpha)(x); ("exp_laguerre", alpha)
    over e^{-z} L_m^(alpha)(2z); ("rbf",) over k_{nu+1/2}(z).
    """
    entries: Dict[Hashable, complex]
    source: Any
    target: Any
    ell: Optional[int] = None
    m: int = 0
    notes: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.entries.get(key, 0.0)

    def __len__(self):
        return len(self.entries)

    def keys(self):
        return sorted(self.entries)

    def items(self):
        return sorted(self.entries.items())

    def nonzero(self, tol: float = 0.0):
        return {k: v for k, v in self.entries.items() if abs(v) > tol}

    def scaled(self, c) -> "CoeffTensor":
        return CoeffTensor({k: c * v for k, v in self.entries.items()}, self.source, self.target,
                           self.ell, self.m, dict(self.notes))

    def basis_value(self, key, x):
        t = self.target
        if isinstance(t, BasisSpec):
            return eval_radial(t, QuantumIndex(key, self.ell, self.m), x)
        kind = t[0]
        if kind == "laguerre":
            return laguerre(key, t[1], x)
        if kind == "exp_laguerre":
            return np.exp(-np.asarray(x)) * laguerre(key, t[1], 2 * np.asarray(x))
        if kind == "rbf":
            return reduced_bessel_poly(key, x)
        raise ValueError(f"cannot evaluate target {t!r}")

    def evaluate(self, x):
        """Sum of coefficient times target function (radial factor for basis targets)."""
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for key, c in self.items():
            total = total + c * self.basis_value(key, x)
        return total


def compose(first: CoeffTensor, second_of: callable) -> CoeffTensor:
    """Substitute each target function of ``first`` by the tensor second_of(key)."""
    out: Dict[Hashable, float] = {}
    target = None
    for key, c in first.items():
        t = second_of(key)
        target = t.target
        for k2, c2 in t.items():
            out[k2] = out.get(k2, 0.0) + c * c2
    return CoeffTensor(out, first.source, target, first.ell, first.m)


def transform_matrix(gen, indices: Iterable[int], out_indices: Iterable[int]) -> np.ndarray:
    """Matrix M[i, j] = coefficient of out_indices[j] in gen(indices[i])."""
    indices = list(indices)
    out_indices = list(out_indices)
    M = np.zeros((len(indices), len(out_indices)))
    for i, n in enumerate(indices):
        t = gen(n)
        for j, nn in enumerate(out_indices):
            M[i, j] = t[nn]
    return M


def _sqrt_fact_ratio(a: float, b: float) -> float:
    # sqrt(a! / b!) through log-gamma
    return math.exp(0.5 * (math.lgamma(a + 1) - math.lgamma(b + 1)))


def _check(n, ell):
    if int(n) != n or n < ell + 1 or ell < 0:
        raise ValueError(f"need integer n >= l + 1, got n={n}, l={ell}")


# ---------------------------------------------------------------------------
# Lambda functions and B functions

def lambda_to_bfun(n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """Lambda_{n,l} as a sum over B_{nu+1,l}, nu = 0..n-l-1."""
    _check(n, ell)
    pref = (2 * beta) ** 1.5 * 2 ** ell * (2 * n + 1) / double_factorial(2 * ell + 3) \
        * _sqrt_fact_ratio(n + ell + 1, n - ell - 1)
    out = {}
    for nu in range(n - ell):
        c = pochhammer(-n + ell + 1, nu) * pochhammer(n + ell + 2, nu) / (math.factorial(nu) * pochhammer(ell + 2.5, nu))
        out[nu + 1] = pref * c
    return CoeffTensor(out, BasisSpec("lambda", beta), BasisSpec("bfun", beta), ell)


def bfun_to_lambda(n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """B_{n,l} as a sum over Lambda_{nu+l+1,l}, nu = 0..n-1."""
    if n < 1:
        raise ValueError("need n >= 1")
    pref = (2 * beta) ** -1.5 * pochhammer(n + 2 * ell + 3, n - 1) / (2.0 ** (2 * n + 2 * ell - 1) * math.factorial(n + ell))
    out = {}
    for nu in range(n):
        c = pochhammer(1 - n, nu) / pochhammer(n + 2 * ell + 3, nu) * _sqrt_fact_ratio(nu + 2 * ell + 2, nu)
        out[nu + ell + 1] = pref * c
    return CoeffTensor(out, BasisSpec("bfun", beta), BasisSpec("lambda", beta), ell)


def stf_to_lambda(n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """Integer-index Slater-type function chi_{n,l} over Lambda_{nu+l+1,l}."""
    _check(n, ell)
    pref = (2 * beta) ** -1.5 * pochhammer(2 * ell + 3, n - ell - 1) / 2.0 ** (n - 1)
    out = {}
    for nu in range(n - ell):
        c = pochhammer(-n + ell + 1, nu) / pochhammer(2 * ell + 3, nu) * _sqrt_fact_ratio(nu + 2 * ell + 2, nu)
        out[nu + ell + 1] = pref * c
    return CoeffTensor(out, BasisSpec("stf", beta), BasisSpec("lambda", beta), ell)


def stf_to_bfun(n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """Integer-index Slater-type function chi_{n,l} over B_{n-l-sigma,l}."""
    _check(n, ell)
    out = {}
    sigma = 0
    while True:
        c = pochhammer(-(n - ell - 1) / 2, sigma) * pochhammer(-(n - ell) / 2, sigma)
        if c == 0 or n - ell - sigma < 1:
            break
        out[n - ell - sigma] = 2.0 ** n * (-1) ** sigma * c / math.factorial(sigma) * math.factorial(n - sigma)
        sigma += 1
    return CoeffTensor(out, BasisSpec("stf", beta), BasisSpec("bfun", beta), ell)


# ---------------------------------------------------------------------------
# Laguerre polynomials and reduced Bessel functions

def laguerre_superscript_shift(n: int, beta_sup: float, alpha_sup: float) -> CoeffTensor:
    """L_n^(beta) = sum_m (beta - alpha)_m / m! L_{n-m}^(alpha)."""
    out = {}
    for m in range(n + 1):
        c = pochhammer(beta_sup - alpha_sup, m) / math.factorial(m)
        if c != 0:
            out[n - m] = c
    return CoeffTensor(out, ("laguerre", beta_sup), ("laguerre", alpha_sup))


def rbf_to_laguerre(n: int, alpha: float) -> CoeffTensor:
    """k_{n+1/2}(z) over e^{-z} L_m^(alpha)(2z), m = 0..n."""
    if alpha <= -1:
        raise ValueError("need alpha > -1")
    pref = math.factorial(n) / 2.0 ** n
    out = {}
    for m in range(n + 1):
        out[m] = pref * (-1) ** m * _gen_binom(2 * n + alpha + 1, n - m)
    return CoeffTensor(out, ("rbf",), ("exp_laguerre", alpha))


def _gen_binom(a: float, k: int) -> float:
    return pochhammer(a - k + 1, k) / math.factorial(k)


def laguerre_inverse_expand(n: int, alpha: float) -> CoeffTensor:
    """e^{-z} L_n^(alpha)(2z) over k_{nu+1/2}(z), nu = 0..n."""
    out = {}
    for nu in range(n + 1):
        c = (2 * n + alpha + 1) * (-2.0) ** nu * gamma_ratio(n + alpha + nu + 1, alpha + 2 * nu + 2) \
            / (math.factorial(nu) * math.factorial(n - nu))
        out[nu] = c
    return CoeffTensor(out, ("exp_laguerre", alpha), ("rbf",))


# ---------------------------------------------------------------------------
# Guseinov functions

def lambda_to_guseinov(k: int, n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """Lambda_{n,l} over kPsi_{n-nu,l}.

    For k >= 0 the superscript-shift sum stops at nu = min(n-l-1, k); for k = -1
    (-k)_nu = nu! never vanishes and the sum runs to nu = n-l-1. The ratio of
    normalization constants puts (n+l+2)_{k-nu} under the root in the numerator.
    """
    _check(n, ell)
    if k < -1:
        raise ValueError("need k >= -1")
    top = n - ell - 1 if k < 0 else min(n - ell - 1, k)
    out = {}
    for nu in range(top + 1):
        # (n-l-nu)_nu (n+l+2)_{k-nu} as a Gamma ratio so that k - nu < 0 is allowed
        ratio = pochhammer(n - ell - nu, nu) * gamma_ratio(n + ell + k - nu + 2, n + ell + 2)
        out[n - nu] = (2 * beta) ** (-k / 2) * math.sqrt(ratio) * pochhammer(-k, nu) / math.factorial(nu)
    return CoeffTensor(out, BasisSpec("lambda", beta), BasisSpec("guseinov", beta, k), ell)


def guseinov_to_lambda(k: int, n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """kPsi_{n,l} over Lambda_{n-nu,l}, nu = 0..n-l-1."""
    _check(n, ell)
    if k < -1:
        raise ValueError("need k >= -1")
    out = {}
    for nu in range(n - ell):
        c = pochhammer(k, nu)
        if c == 0:
            continue
        ratio = pochhammer(n - ell - nu, nu) * gamma_ratio(n + ell - nu + 2, n + ell + k + 2)
        out[n - nu] = (2 * beta) ** (k / 2) * math.sqrt(ratio) * c / math.factorial(nu)
    return CoeffTensor(out, BasisSpec("guseinov", beta, k), BasisSpec("lambda", beta), ell)


def guseinov_to_bfun(k: int, n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """kPsi_{n,l} over B_{nu+1,l}, nu = 0..n-l-1."""
    _check(n, ell)
    lpref = 0.5 * ((k + 3) * math.log(beta) + math.lgamma(n + ell + k + 2) - (k + 1) * math.log(2.0)
                   - math.lgamma(n - ell))
    pref = math.exp(lpref) * (2 * n + k + 1) * math.sqrt(math.pi) * math.factorial(ell + 1) \
        / (math.gamma(ell + 2 + k / 2) * math.gamma(ell + (k + 5) / 2))
    out = {}
    for nu in range(n - ell):
        c = pochhammer(-n + ell + 1, nu) * pochhammer(n + ell + k + 2, nu) * pochhammer(ell + 2, nu) \
            / (math.factorial(nu) * pochhammer(ell + 2 + k / 2, nu) * pochhammer(ell + (k + 5) / 2, nu))
        out[nu + 1] = pref * c
    return CoeffTensor(out, BasisSpec("guseinov", beta, k), BasisSpec("bfun", beta), ell)


def bfun_to_guseinov(k: int, n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """B_{n,l} over kPsi_{nu+l+1,l}, nu = 0..n-1."""
    if n < 1:
        raise ValueError("need n >= 1")
    pref = pochhammer(n + 2 * ell + k + 3, n - 1) / (2.0 ** (2 * n + 2 * ell - 1) * math.factorial(n + ell))
    out = {}
    for nu in range(n):
        root = math.exp(0.5 * (math.lgamma(nu + 2 * ell + k + 3) - (k + 3) * math.log(2 * beta) - math.lgamma(nu + 1)))
        out[nu + ell + 1] = pref * pochhammer(1 - n, nu) / pochhammer(n + 2 * ell + k + 3, nu) * root
    return CoeffTensor(out, BasisSpec("bfun", beta), BasisSpec("guseinov", beta, k), ell)


def guseinov_to_stf(k: int, n: int, ell: int, gamma: float = 1.0) -> CoeffTensor:
    """kPsi_{n,l}(gamma) over integer-index Slater-type chi_{nu+l+1,l}(gamma)."""
    _check(n, ell)
    root = math.exp(0.5 * ((k + 3) * math.log(2 * gamma) + math.lgamma(n + ell + k + 2) - math.lgamma(n - ell)))
    out = {}
    for nu in range(n - ell):
        c = pochhammer(-n + ell + 1, nu) * 2.0 ** nu / (math.gamma(2 * ell + k + nu + 3) * math.factorial(nu))
        out[nu + ell + 1] = 2.0 ** ell * root * c
    return CoeffTensor(out, BasisSpec("guseinov", gamma, k), BasisSpec("stf", gamma), ell)


def power_times_bfun(s: int, n: int, ell: int, beta: float = 1.0) -> CoeffTensor:
    """r^s B_{n,l} over B_{n+s-sigma,l}, for integer s >= -1.

    Obtained from z^s k_{n-1/2}(z) as a sum of k_{n+s-sigma-1/2}(z); converting
    both sides to B functions leaves (n+l+1)_{s-sigma} as a multiplier.
    """
    if s < -1:
        raise ValueError("need s >= -1")
    if n < 1:
        raise ValueError("need n >= 1")
    out = {}
    sigma = 0
    while True:
        c = pochhammer(-s / 2, sigma) * pochhammer(-n - (s - 1) / 2, sigma)
        if c == 0:
            break
        out[n + s - sigma] = (2 / beta) ** s * (-1) ** sigma * c * pochhammer(n + ell + 1, s - sigma) / math.factorial(sigma)
        sigma += 1
    return CoeffTensor(out, ("r^s", s, BasisSpec("bfun", beta)), BasisSpec("bfun", beta), ell)


# ---------------------------------------------------------------------------
# fallback and checks

def projection_coeffs(f, target: BasisSpec, ell: int, n_values: Iterable[int], weight_k: float = 0.0) -> CoeffTensor:
    """Coefficients of a radial function in an orthonormal family by weighted projection."""
    from .oracle import radial_quadrature
    from .basis import default_quadrature
    quad = default_quadrature(target)
    out = {}
    for n in n_values:
        g = lambda r, n=n: eval_radial(target, QuantumIndex(n, ell), r) * f(r)
        out[n] = radial_quadrature(g, weight_k, quad)
    return CoeffTensor(out, "projection", target, ell)


def reconstruction_error(tensor: CoeffTensor, reference, radii, pointwise: bool = False) -> float:
    """Deviation of the reconstruction from reference(radii).

    By default relative to max |reference| over the grid; ``pointwise`` divides
    each deviation by the local value instead, which is ill-conditioned where the
    target is tiny compared with the individual terms (near r = 0 or near nodes).
    """
    radii = np.asarray(radii, dtype=float)
    ref = np.asarray(reference(radii))
    got = tensor.evaluate(radii)
    if pointwise:
        return float(np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)))
    return float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))


def _source_reference(source, n: int, ell: Optional[int]):
    if isinstance(source, BasisSpec):
        return lambda r: eval_radial(source, QuantumIndex(n, ell), r)
    kind = source[0]
    if kind == "laguerre":
        return lambda x: laguerre(n, source[1], x)
    if kind == "rbf":
        return lambda z: reduced_bessel_poly(n, z)
    if kind == "exp_laguerre":
        return lambda z: np.exp(-np.asarray(z)) * laguerre(n, source[1], 2 * np.asarray(z))
    raise ValueError(f"no reference for source {source!r}")


def transform_suite(n_max: int = 6, ell_max: int = 3, beta: float = 1.0, ks=(-1, 0, 1, 2), radii=None):
    """Reconstruction errors of every finite transform over n <= n_max, l <= ell_max.

    Returns rows (name, n, l, error) with the sup-relative metric of
    reconstruction_error. Radii default to 20 log-spaced points in [1e-3, 30] / beta.
    """
    if radii is None:
        radii = np.logspace(-3, math.log10(30.0), 20) / beta
    radii = np.asarray(radii, dtype=float)
    rows = []

    def run(name, t, n, ell, scale=1.0):
        ref = _source_reference(t.source, n, ell)
        rows.append((name, n, ell, reconstruction_error(t, ref, radii * scale)))

    for ell in range(ell_max + 1):
        for n in range(ell + 1, n_max + 1):
            run("lambda_to_bfun", lambda_to_bfun(n, ell, beta), n, ell)
            run("stf_to_lambda", stf_to_lambda(n, ell, beta), n, ell)
            run("stf_to_bfun", stf_to_bfun(n, ell, beta), n, ell)
            for k in ks:
                run(f"lambda_to_guseinov[k={k}]", lambda_to_guseinov(k, n, ell, beta), n, ell)
                run(f"guseinov_to_lambda[k={k}]", guseinov_to_lambda(k, n, ell, beta), n, ell)
                run(f"guseinov_to_bfun[k={k}]", guseinov_to_bfun(k, n, ell, beta), n, ell)
                run(f"guseinov_to_stf[k={k}]", guseinov_to_stf(k, n, ell, 2 * beta), n, ell)
        for n in range(1, n_max + 1):
            run("bfun_to_lambda", bfun_to_lambda(n, ell, beta), n, ell)
            for k in ks:
                run(f"bfun_to_guseinov[k={k}]", bfun_to_guseinov(k, n, ell, beta), n, ell)
    for n in range(n_max + 1):
        for a in (0.0, 0.5, 2.0):
            run(f"laguerre_shift[{a + 1.5}->{a}]", laguerre_superscript_shift(n, a + 1.5, a), n, None, beta)
            run(f"rbf_to_laguerre[alpha={a}]", rbf_to_laguerre(n, a), n, None, beta)
            run(f"laguerre_inverse[alpha={a}]", laguerre_inverse_expand(n, a), n, None, beta)
    return rows


def round_trip_suite(n_max: int = 6, ell_max: int = 3, beta: float = 1.0, ks=(-1, 0, 1, 2)):
    """Largest deviation from the identity of composed forward/backward transform matrices."""
    rows = []
    for ell in range(ell_max + 1):
        lam = list(range(ell + 1, n_max + 1))
        bidx = list(range(1, n_max - ell + 1))
        A = transform_matrix(lambda n: lambda_to_bfun(n, ell, beta), lam, bidx)
        B = transform_matrix(lambda n: bfun_to_lambda(n, ell, beta), bidx, lam)
        rows.append(("lambda->bfun->lambda", ell, float(np.max(np.abs(A @ B - np.eye(len(lam)))))))
        for k in ks:
            C = transform_matrix(lambda n: lambda_to_guseinov(k, n, ell, beta), lam, lam)
            D = transform_matrix(lambda n: guseinov_to_lambda(k, n, ell, beta), lam, lam)
            rows.append((f"lambda->guseinov[k={k}]->lambda", ell, float(np.max(np.abs(C @ D - np.eye(len(lam)))))))
            E = transform_matrix(lambda n: guseinov_to_bfun(k, n, ell, beta), lam, bidx)
            F = transform_matrix(lambda n: bfun_to_guseinov(k, n, ell, beta), bidx, lam)
            rows.append((f"guseinov[k={k}]->bfun->guseinov", ell, float(np.max(np.abs(E @ F - np.eye(len(lam)))))))
    return rows
