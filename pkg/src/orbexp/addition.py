"""One-range addition machinery built on the B-function convolution theorem,
the Laplace expansion as a two-range oracle, and the one-range Coulomb
expansion in Guseinov functions.

Coefficient maps over B functions are plain dicts (n, l, m) -> coefficient at
a common scaling beta ("B sums"); full functions are f(r) Y_l^m throughout.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from . import oracle
from .accel import accelerate_report
from .basis import BasisSpec, QuantumIndex, WeightSpec, eval, eval_radial
from .expansions import rearrangement_probe
from .reports import ConvergenceReport, fmt
from .special import (AngularIndex, delta_ell, double_factorial, gamma_ratio, gaunt_series, irregular_solid_harmonic,
                      pochhammer, regular_solid_harmonic)
from .transforms import (CoeffTensor, bfun_to_lambda, guseinov_to_bfun, lambda_to_bfun, power_times_bfun,
                         stf_to_bfun)

Key = Tuple[int, int, int]
BSum = Dict[Key, complex]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ORBEXP_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# B sums

def bfun_convolution(n1: int, l1: int, m1: int, n2: int, l2: int, m2: int, beta: float = 1.0) -> CoeffTensor:
    """(B1 * B2)(r) = integral B_{n1 l1}^{m1}(r - r') B_{n2 l2}^{m2}(r') d^3 r' as a finite B sum."""
    out: BSum = {}
    m = m1 + m2
    for ell, g in gaunt_series(l1, m1, l2, m2):
        if g == 0:
            continue
        dl = delta_ell(l1, l2, ell)[0]
        for t in range(dl + 1):
            key = (n1 + n2 + l1 + l2 - ell - t + 1, ell, m)
            out[key] = out.get(key, 0.0) + 4 * math.pi / beta ** 3 * g * (-1) ** t * math.comb(dl, t)
    return CoeffTensor(out, ("convolution", (n1, l1, m1), (n2, l2, m2)), BasisSpec("bfun", beta), m=m)


def _radial_to_bsum(t: CoeffTensor, ell: int, m: int, scale: complex = 1.0) -> BSum:
    return {(n, ell, m): scale * c for n, c in t.items() if c != 0}


def as_bsum(spec: BasisSpec, q: QuantumIndex) -> BSum:
    """Finite B-function representation at the same beta; ValueError when none exists."""
    n, ell, m, b = q.n, q.ell, q.m, spec.beta
    fam = spec.family
    if fam == "bfun":
        return {(int(n), ell, m): 1.0}
    if fam == "lambda":
        return _radial_to_bsum(lambda_to_bfun(int(n), ell, b), ell, m)
    if fam == "guseinov":
        if not float(spec.k).is_integer():
            raise ValueError("finite B sums need integer Guseinov order")
        return _radial_to_bsum(guseinov_to_bfun(int(spec.k), int(n), ell, b), ell, m)
    if fam == "sturmian":
        # Sturmian = sqrt(beta/n) * Guseinov(k=-1) at equal beta
        return _radial_to_bsum(guseinov_to_bfun(-1, int(n), ell, b), ell, m, math.sqrt(b / n))
    if fam == "stf" and float(n).is_integer() and n >= ell + 1:
        return _radial_to_bsum(stf_to_bfun(int(n), ell, b), ell, m)
    raise ValueError(f"{fam} (n={n}) has no finite B-function representation")


def bsum_add(a: BSum, b: BSum, cb: complex = 1.0) -> BSum:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + cb * v
    return out


def bsum_conjugate(d: BSum) -> BSum:
    """Complex conjugate function: (B_{n l}^m)* = (-1)^m B_{n l}^{-m}."""
    return {(n, ell, -m): (-1) ** m * np.conj(c) for (n, ell, m), c in d.items()}


def bsum_reflect(d: BSum) -> BSum:
    """f(-r): parity (-1)^l."""
    return {(n, ell, m): (-1) ** ell * c for (n, ell, m), c in d.items()}


def bsum_times_power(d: BSum, s: int, beta: float) -> BSum:
    """r^s f(r) for integer s >= -1."""
    if s == 0:
        return dict(d)
    out: BSum = {}
    for (n, ell, m), c in d.items():
        for nn, cc in power_times_bfun(s, n, ell, beta).items():
            out[(nn, ell, m)] = out.get((nn, ell, m), 0.0) + c * cc
    return out


def bsum_convolve(a: BSum, b: BSum, beta: float) -> BSum:
    out: BSum = {}
    for (n1, l1, m1), c1 in a.items():
        for (n2, l2, m2), c2 in b.items():
            for key, c in bfun_convolution(n1, l1, m1, n2, l2, m2, beta).items():
                out[key] = out.get(key, 0.0) + c1 * c2 * c
    return out


def bsum_eval(d: BSum, beta: float, r_vec) -> np.ndarray:
    spec = BasisSpec("bfun", beta)
    r_vec = np.asarray(r_vec, dtype=float)
    total = np.zeros(r_vec.shape[:-1], dtype=complex)
    for (n, ell, m), c in sorted(d.items()):
        total = total + c * eval(spec, QuantumIndex(n, ell, m), r_vec)
    return total


def bsum_to_lambda(d: BSum, beta: float) -> Dict[Key, complex]:
    out: Dict[Key, complex] = {}
    for (n, ell, m), c in d.items():
        for nn, cc in bfun_to_lambda(n, ell, beta).items():
            out[(nn, ell, m)] = out.get((nn, ell, m), 0.0) + c * cc
    return out


# ---------------------------------------------------------------------------
# overlaps

@dataclass(frozen=True)
class OverlapRequest:
    bra: Tuple[BasisSpec, QuantumIndex]
    ket: Tuple[BasisSpec, QuantumIndex]
    shift: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    weight: WeightSpec = WeightSpec(0)
    sign: int = -1        # ket evaluated at r + sign * r'

    def __post_init__(self):
        if not np.all(np.isfinite(self.shift)):
            raise ValueError("shift must be finite")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


def _analytic_overlap(req: OverlapRequest) -> complex:
    (sb, qb), (sk, qk) = req.bra, req.ket
    beta = sb.beta
    k = req.weight.k
    if sk.beta != beta or req.weight.sobolev_eta is not None or not float(k).is_integer() or k < -1:
        raise ValueError("no analytic route")
    h = bsum_times_power(bsum_conjugate(as_bsum(sb, qb)), int(k), beta)
    g = as_bsum(sk, qk)
    # integral h(r) g(r - r') d^3r = (g(-.) * h)(r'); a plus sign flips the shift
    shift = np.asarray(req.shift, dtype=float) * (-req.sign)
    conv = bsum_convolve(bsum_reflect(g), h, beta)
    return complex(bsum_eval(conv, beta, shift))


def _quadrature_overlap(req: OverlapRequest, **kw) -> complex:
    (sb, qb), (sk, qk) = req.bra, req.ket
    k = req.weight.k
    shift = np.asarray(req.shift, dtype=float)
    c = -req.sign * shift        # ket centre

    def F(p):
        r = np.linalg.norm(p, axis=-1)
        w = np.where(r > 0, r, 1.0) ** k
        return np.conj(eval(sb, qb, p)) * w * eval(sk, qk, p - c)
    decay = sb.beta + sk.beta
    if sb.family == "oscillator" or sk.family == "oscillator":
        decay = max(decay, 1.0)
    return complex(oracle.two_center_integral(F, np.zeros(3), c, decay=decay, **kw))


def overlap(req: OverlapRequest, route: str = "auto", **kw) -> complex:
    """<bra(r)| r^k |ket(r +/- r')> over all space.

    route: "analytic" (B-function convolution, equal beta only), "quadrature",
    or "auto" (analytic when available).
    """
    if route not in ("auto", "analytic", "quadrature"):
        raise ValueError(f"unknown route {route!r}")
    if route in ("auto", "analytic"):
        try:
            return _analytic_overlap(req)
        except ValueError:
            if route == "analytic":
                raise
    return _quadrature_overlap(req, **kw)


# ---------------------------------------------------------------------------
# symmetric one-range theorem for Lambda functions

@dataclass
class AdditionCoeffs:
    """T[(n1,l1,m1), (n2,l2,m2)] with f(r - r') = sum T Lambda_1(r) Lambda_2(r')."""
    entries: Dict[Tuple[Key, Key], complex]
    beta: float
    n_max: int
    target: Tuple[int, int, int]

    def __getitem__(self, key):
        return self.entries.get(key, 0.0)

    def evaluate(self, r_vec, rp_vec) -> np.ndarray:
        spec = BasisSpec("lambda", self.beta)
        r_vec = np.asarray(r_vec, dtype=float)
        rp_vec = np.asarray(rp_vec, dtype=float)
        cache_r: Dict[Key, np.ndarray] = {}
        cache_p: Dict[Key, np.ndarray] = {}
        total = np.zeros(np.broadcast_shapes(r_vec.shape[:-1], rp_vec.shape[:-1]), dtype=complex)
        for (a, b), c in sorted(self.entries.items()):
            if a not in cache_r:
                cache_r[a] = eval(spec, QuantumIndex(*a), r_vec)
            if b not in cache_p:
                cache_p[b] = eval(spec, QuantumIndex(*b), rp_vec)
            total = total + c * cache_r[a] * cache_p[b]
        return total

    def grid_l2_error(self, rp_vec, n_r: int = 40, degree: int = 16) -> float:
        """L2 norm over r of the truncation error at fixed r' (Gauss-Laguerre x sphere grid)."""
        rp_vec = np.asarray(rp_vec, dtype=float)
        x, w = oracle._laguerre_nodes(n_r)
        rr = x / (2 * self.beta)
        wr = w / (2 * self.beta) * rr ** 2  # scaled weights: e^x already folded in
        T, P, W = oracle.sphere_grid(degree)
        grid = rr[:, None, None, None] * oracle.unit_vectors(T, P)[None]
        ref = eval(BasisSpec("lambda", self.beta), QuantumIndex(*self.target), grid - rp_vec)
        err = np.abs(self.evaluate(grid, rp_vec) - ref) ** 2
        return math.sqrt(float(np.sum(wr[:, None, None] * W[None] * err)))


def _q(x) -> Fraction:
    return Fraction(x)


def _poch_q(a: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for j in range(n):
        out *= a + j
    return out


@lru_cache(maxsize=None)
def _lambda_bfun_q(n: int, ell: int) -> Tuple[Fraction, ...]:
    # rational part of the Lambda -> B coefficients (B_{nu+1,l}, nu = 0..n-l-1)
    return tuple(_poch_q(_q(-n + ell + 1), nu) * _poch_q(_q(n + ell + 2), nu)
                 / (math.factorial(nu) * _poch_q(Fraction(2 * ell + 5, 2), nu)) for nu in range(n - ell))


def _lambda_bfun_scale(n: int, ell: int, beta: float) -> float:
    return (2 * beta) ** 1.5 * 2 ** ell * (2 * n + 1) / double_factorial(2 * ell + 3) \
        * math.exp(0.5 * (math.lgamma(n + ell + 2) - math.lgamma(n - ell)))


@lru_cache(maxsize=None)
def _bfun_lambda_q(n: int, ell: int) -> Tuple[Fraction, ...]:
    # rational part of the B_{n,l} -> Lambda_{nu+l+1,l} coefficients, sqrt((nu+2l+2)!/nu!) split off
    head = _poch_q(_q(n + 2 * ell + 3), n - 1) / (Fraction(2) ** (2 * n + 2 * ell - 1) * math.factorial(n + ell))
    return tuple(head * _poch_q(_q(1 - n), nu) / _poch_q(_q(n + 2 * ell + 3), nu) for nu in range(n))


@lru_cache(maxsize=None)
def _radial_channel(N: int, L: int, n1: int, l1: int, l2: int) -> Dict[int, Fraction]:
    """Exact radial sums of Lambda_{NL} * Lambda_{n1 l1} projected on channel l2, keyed by n2."""
    dl = delta_ell(L, l1, l2)[0]
    out: Dict[int, Fraction] = {}
    for nu, a in enumerate(_lambda_bfun_q(N, L)):
        for mu, b in enumerate(_lambda_bfun_q(n1, l1)):
            ab = a * b
            for t in range(dl + 1):
                nb = (nu + 1) + (mu + 1) + L + l1 - l2 - t + 1
                w = ab * (-1) ** t * math.comb(dl, t)
                for nu2, q in enumerate(_bfun_lambda_q(nb, l2)):
                    key = nu2 + l2 + 1
                    out[key] = out.get(key, Fraction(0)) + w * q
    return out


def symmetric_coeffs_lambda(N: int, L: int, n_max: int, beta: float = 1.0, M: int = 0) -> AdditionCoeffs:
    """One-range addition theorem of Lambda_{N L}^M(beta, r - r') over Lambda(r) x Lambda(r').

    The overlap of Lambda_1 with the shifted function is a finite B sum in r'
    (convolution theorem), re-expanded exactly in Lambda(r'). Only the r index
    n1 <= n_max is truncated. The radial sums run in exact rationals: the
    Lambda -> B coefficients grow like 4^n n! and alternate in sign, so a
    floating-point sum loses all digits near n = 20.
    """
    if int(N) != N or N < L + 1 or abs(M) > L:
        raise ValueError("need integer N >= L + 1 and |M| <= L")
    N = int(N)
    entries: Dict[Tuple[Key, Key], complex] = {}
    for n1 in range(1, n_max + 1):
        for l1 in range(n1):
            outer = 4 * math.pi / beta ** 3 * _lambda_bfun_scale(N, L, beta) * _lambda_bfun_scale(n1, l1, beta) \
                * (2 * beta) ** -1.5
            for m1 in range(-l1, l1 + 1):
                # C(r') = int Lambda_1*(r) f(r - r') d^3r = (-1)^L (f * Lambda_1*)(r'), Lambda_1* = (-1)^m1 Lambda^{-m1}
                sign = (-1) ** (L + m1)
                for l2, g in gaunt_series(L, M, l1, -m1):
                    if g == 0:
                        continue
                    for n2, R in _radial_channel(N, L, n1, l1, l2).items():
                        if R == 0:
                            continue
                        nu2 = n2 - l2 - 1
                        c = sign * outer * g * float(R) * math.exp(0.5 * (math.lgamma(nu2 + 2 * l2 + 3)
                                                                          - math.lgamma(nu2 + 1)))
                        entries[((n1, l1, m1), (n2, l2, M - m1))] = c
    return AdditionCoeffs(entries, beta, n_max, (N, L, M))


# ---------------------------------------------------------------------------
# Guseinov-type unsymmetrical coefficients and the one-center probe

def guseinov_unsym_coeffs(N: float, L: int, M: int, k: int, gamma: float, beta: float, shift,
                          n_max: int, sign: int = 1, **kw) -> Dict[Key, complex]:
    """X_{n l m} = <kPsi_{n l m}(gamma)| r^k |chi_{N L M}(beta, r + sign r')> for n <= n_max."""
    shift = np.asarray(shift, dtype=float)
    bra_spec = BasisSpec("guseinov", gamma, k)
    chi = BasisSpec("stf", beta)
    out: Dict[Key, complex] = {}
    if np.linalg.norm(shift) == 0:
        # one-center: only l = L, m = M survive; radial quadrature
        quad = oracle.QuadratureSpec(scheme="adaptive_gk", scale=gamma + beta)
        for n in range(L + 1, n_max + 1):
            g = lambda r, n=n: eval_radial(bra_spec, QuantumIndex(n, L), r) * eval_radial(chi, QuantumIndex(N, L), r)
            out[(n, L, M)] = oracle.radial_quadrature(g, k, quad)
        return out
    for n in range(1, n_max + 1):
        for ell in range(n):
            for m in range(-ell, ell + 1):
                req = OverlapRequest((bra_spec, QuantumIndex(n, ell, m)), (chi, QuantumIndex(N, L, M)),
                                     tuple(shift), WeightSpec(k), sign)
                out[(n, ell, m)] = _quadrature_overlap(req, **kw)
    return out


def one_center_nonexistence_probe(N: float, k: int, n_max: int, L: int = 0, j_max: int = 4) -> ConvergenceReport:
    """Rearranged one-center limit (gamma = beta, r' = 0) of the STF theorem.

    It reduces to x^mu over L_n^(alpha) with mu = N - L - 1, alpha = 2L + k + 2,
    rearranged into powers x^j whose coefficients carry 1F0(j - mu; 1). The
    reported partial sums are sum_j |P_j S_j(M)| over j <= j_max, where P_j is
    the power prefactor and S_j(M) the inner partial sum through order M.
    """
    mu = N - L - 1
    alpha = 2 * L + k + 2
    pref = gamma_ratio(mu + alpha + 1, alpha + 1)
    P = [pref * (-1) ** j * pochhammer(-mu, j) / (pochhammer(alpha + 1, j) * math.factorial(j))
         for j in range(j_max + 1)]
    inner = [rearrangement_probe(mu, j, n_max) for j in range(j_max + 1)]
    s = [math.fsum(abs(P[j] * inner[j].partial_sums[M]) for j in range(j_max + 1)) for M in range(n_max + 1)]
    active = [j for j in range(j_max + 1) if P[j] != 0]
    verdicts = {j: inner[j].verdict for j in active}
    verdict = "diverging" if any(v == "diverging" for v in verdicts.values()) else (
        "terminating" if all(v == "terminating" for v in verdicts.values()) else "converging")
    # power-series coefficients of the rearranged form (finite only when terminating)
    limits = [P[j] * inner[j].meta["limit"] if P[j] != 0 else 0.0 for j in range(j_max + 1)]
    return ConvergenceReport(orders=list(range(n_max + 1)), partial_sums=s, verdict=verdict, heuristic=False,
                             meta={"N": N, "L": L, "k": k, "mu": mu, "alpha": alpha,
                                   "inner_verdicts": verdicts, "power_coefficients": limits})


# ---------------------------------------------------------------------------
# Laplace expansion

def laplace_coulomb(r_vec, rp_vec, L_max: int) -> Tuple[float, np.ndarray]:
    """1/|r - r'| by the two-range Laplace expansion through lambda = L_max.

    Returns (value, partial sums over lambda = 0..L_max).
    """
    r_vec = np.asarray(r_vec, dtype=float)
    rp_vec = np.asarray(rp_vec, dtype=float)
    r, rp = np.linalg.norm(r_vec), np.linalg.norm(rp_vec)
    if r == rp:
        raise ValueError("Laplace expansion is not convergent for |r| = |r'|")
    small, large = (r_vec, rp_vec) if r < rp else (rp_vec, r_vec)
    partial = []
    total = 0.0
    for lam in range(L_max + 1):
        term = 0.0
        for mu in range(-lam, lam + 1):
            a = AngularIndex(lam, mu)
            term += np.conj(regular_solid_harmonic(a, small)) * irregular_solid_harmonic(a, large)
        total += (4 * math.pi / (2 * lam + 1) * term).real
        partial.append(total)
    partial = np.array(partial)
    return float(partial[-1]), partial


# ---------------------------------------------------------------------------
# Coulomb expansion in Guseinov functions

@dataclass
class GammaTensor:
    """Gamma[(n,l,m,n',l',m')] = int int Psi_nlm*(r) r^k r'^k Psi_n'l'm'(r') / |r - r'|."""
    entries: Dict[Tuple[int, int, int, int, int, int], float]
    k: float
    beta: float
    n_max: int
    ell_max: int
    meta: Dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.entries.get(key, 0.0)

    def block(self, ell: int, m: int = 0) -> np.ndarray:
        ns = range(ell + 1, self.n_max + 1)
        return np.array([[self[(n, ell, m, n2, ell, m)] for n2 in ns] for n in ns])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("n", "l", "m", "n'", "l'", "m'", "value"))
            for key in sorted(self.entries):
                w.writerow((*key, fmt(self.entries[key])))
        sidecar = os.path.splitext(str(path))[0] + ".json"
        with open(sidecar, "w") as fh:
            json.dump({"k": self.k, "beta": self.beta, "n_max": self.n_max, "ell_max": self.ell_max,
                       **self.meta}, fh, indent=2, sort_keys=True, default=str)

    @classmethod
    def from_csv(cls, path) -> "GammaTensor":
        sidecar = os.path.splitext(str(path))[0] + ".json"
        with open(sidecar) as fh:
            info = json.load(fh)
        entries = {}
        with open(path) as fh:
            for row in csv.DictReader(fh):
                key = tuple(int(row[c]) for c in ("n", "l", "m", "n'", "l'", "m'"))
                entries[key] = float(row["value"])
        meta = {k: v for k, v in info.items() if k not in ("k", "beta", "n_max", "ell_max")}
        return cls(entries, info["k"], info["beta"], info["n_max"], info["ell_max"], meta)


def coulomb_radial_block(k: float, beta: float, n_max: int, ell: int, n_r: int = 0, n_t: int = 64) -> np.ndarray:
    """4 pi/(2l+1) int int F_n(r) F_n'(r') r_<^l / r_>^(l+1) dr dr', F_n = R_n r^(k+2).

    Written as I(f, g) + I(g, f), I(f, g) = int_0^inf dr F_f(r) int_0^1 dt F_g(r t) t^l,
    with Gauss-Laguerre in r at the rate beta (1 + t) and Gauss-Legendre in t.
    """
    spec = BasisSpec("guseinov", beta, k)
    ns = list(range(ell + 1, n_max + 1))
    n_r = n_r or max(60, 2 * n_max + int(abs(k)) + 40)
    x, wx = oracle._laguerre_nodes(n_r)
    t, wt = oracle._legendre_nodes(n_t)
    t = 0.5 * (t + 1)
    wt = 0.5 * wt
    I = np.zeros((len(ns), len(ns)))
    for tj, wj in zip(t, wt):
        s = beta * (1 + tj)
        r = x / s
        w = wx / s
        Fr = np.array([eval_radial(spec, QuantumIndex(n, ell), r) for n in ns]) * r ** (k + 2)
        Frt = np.array([eval_radial(spec, QuantumIndex(n, ell), r * tj) for n in ns]) * (r * tj) ** (k + 2)
        I += wj * tj ** ell * (Fr * w) @ Frt.T
    return 4 * math.pi / (2 * ell + 1) * (I + I.T)


def coulomb_gamma(k: float, beta: float, n_max: int, ell_max: int = 3, **kw) -> GammaTensor:
    """Gamma tensor for l <= min(ell_max, n_max - 1); zero unless l = l' and m = m'."""
    if k < -1:
        raise ValueError("need k >= -1")
    ells = list(range(min(ell_max, n_max - 1) + 1))
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        blocks = list(ex.map(lambda ell: coulomb_radial_block(k, beta, n_max, ell, **kw), ells))
    entries = {}
    for ell, B in zip(ells, blocks):
        ns = range(ell + 1, n_max + 1)
        for m in range(-ell, ell + 1):
            for i, n in enumerate(ns):
                for j, n2 in enumerate(ns):
                    entries[(n, ell, m, n2, ell, m)] = float(B[i, j])
    return GammaTensor(entries, k, beta, n_max, ell_max, {"quadrature": "gauss_laguerre x gauss_legendre"})


def density_coeffs(rho: Callable, k: float, beta: float, n_max: int) -> Dict[Key, float]:
    """F_n = int rho(r) Psi_n00(r) d^3r for a spherical density (unweighted, as the expansion needs)."""
    spec = BasisSpec("guseinov", beta, k)
    quad = oracle.QuadratureSpec(scheme="adaptive_gk", scale=beta)
    out = {}
    for n in range(1, n_max + 1):
        g = lambda r, n=n: rho(r) * eval_radial(spec, QuantumIndex(n, 0), r)
        out[(n, 0, 0)] = math.sqrt(4 * math.pi) * oracle.radial_quadrature(g, 0, quad)
    return out


def _as_keyed(c) -> Dict[Key, complex]:
    if isinstance(c, CoeffTensor):
        return {(key if isinstance(key, tuple) else (key, c.ell, c.m)): v for key, v in c.entries.items()}
    return dict(c)


def coulomb_energy_series(f_coeffs, g_coeffs, gamma: GammaTensor, limit: Optional[float] = None,
                          accel: Optional[str] = None) -> ConvergenceReport:
    """Partial sums of sum Gamma F G, shells of constant n + n' and ties by (l, m).

    Order s covers every pair with n + n' <= s + 1, so order 1 is the (1, 1) term.
    """
    F, G = _as_keyed(f_coeffs), _as_keyed(g_coeffs)
    by_shell: Dict[int, List[Tuple]] = {}
    for (n, ell, m, n2, l2, m2), v in gamma.entries.items():
        a, b = (n, ell, m), (n2, l2, m2)
        if a in F and b in G:
            by_shell.setdefault(n + n2, []).append(((ell, m, n, n2), v * F[a] * G[b]))
    if not by_shell:
        raise ValueError("no overlap between coefficient sets and Gamma tensor")
    shells = range(2, max(by_shell) + 1)
    terms = [math.fsum(v for _, v in sorted(by_shell.get(s, []))) if by_shell.get(s) else 0.0 for s in shells]
    s = list(np.cumsum(terms))
    orders = [sh - 1 for sh in shells]
    if accel:
        rep = accelerate_report(s, accel, terms, orders, limit)
    else:
        rep = ConvergenceReport(orders=orders, partial_sums=s,
                                partial_errors=[abs(v - limit) for v in s] if limit is not None else None)
    rep.verdict = "converging"
    rep.meta.update({"k": gamma.k, "beta": gamma.beta, "order": "shells n+n', ties (l, m)",
                     "limit": limit, "terms": terms})
    return rep


def slater_1s_density(zeta: float) -> Callable:
    return lambda r: zeta ** 3 / math.pi * np.exp(-2 * zeta * np.asarray(r))


def coulomb_self_energy_study(zeta: float = 1.0, k: float = 0, beta: Optional[float] = None, shells: int = 20,
                              accel: Optional[str] = None) -> ConvergenceReport:
    """1s self-energy 5 zeta / 8 through the one-range Coulomb expansion."""
    beta = beta if beta is not None else zeta
    n_max = shells
    gamma = coulomb_gamma(k, beta, n_max, ell_max=0)
    F = density_coeffs(slater_1s_density(zeta), k, beta, n_max)
    rep = coulomb_energy_series(F, F, gamma, limit=5 * zeta / 8, accel=accel)
    keep = [i for i, o in enumerate(rep.orders) if o <= shells]
    return ConvergenceReport(orders=[rep.orders[i] for i in keep], partial_sums=[rep.partial_sums[i] for i in keep],
                             partial_errors=[rep.partial_errors[i] for i in keep],
                             accelerated=[rep.accelerated[i] for i in keep] if rep.accelerated else None,
                             accel_method=rep.accel_method, verdict=rep.verdict,
                             meta={**rep.meta, "zeta": zeta, "shells": shells,
                                   "terms": rep.meta["terms"][:len(keep)]})


def gamma_diagonal_growth(k: float, beta: float, n_max: int) -> np.ndarray:
    """Running sums of Gamma_{n00}^{n00}; unbounded growth signals 1/|r - r'| outside the space."""
    return np.cumsum(np.diag(coulomb_radial_block(k, beta, n_max, 0)))


def yukawa_energy_s(rho_f: Callable, rho_g: Callable, screen: float, decay: float) -> float:
    """int int f(r) g(r') exp(-b |r - r'|)/|r - r'| for spherical densities (b = 0 is Coulomb).

    The angular average of the kernel is sinh(b r_<) e^{-b r_>} / (b r_< r_>).
    """
    def kern(rs, rl):
        if screen == 0:
            return 1.0 / rl
        return -np.expm1(-2 * screen * rs) / 2 * np.exp(-screen * (rl - rs)) / (screen * rs * rl)

    def inner(r):
        a = integrate.quad(lambda rp: rho_g(rp) * rp ** 2 * kern(rp, r), 0, r, epsabs=1e-15, epsrel=1e-13,
                           limit=200)[0]
        b = integrate.quad(lambda rp: rho_g(rp) * rp ** 2 * kern(r, rp), r, np.inf, epsabs=1e-15, epsrel=1e-13,
                           limit=200)[0]
        return a + b
    val = integrate.quad(lambda r: rho_f(r) * r ** 2 * inner(r), 0, np.inf, epsabs=1e-15, epsrel=1e-13,
                         limit=200, points=None)[0]
    return (4 * math.pi) ** 2 * val


def _neville(h: Sequence[float], y: Sequence[float]) -> float:
    """Polynomial extrapolation to h = 0 (Richardson with unknown coefficients)."""
    p = list(y)
    n = len(h)
    for j in range(1, n):
        for i in range(n - j):
            p[i] = (-h[i + j] * p[i] + h[i] * p[i + 1]) / (h[i] - h[i + j])
    return p[0]


def _rational_extrapolation(h: Sequence[float], y: Sequence[float]) -> float:
    """Bulirsch-Stoer rational extrapolation to h = 0."""
    n = len(h)
    older = [0.0] * n
    prev = list(y)
    for k in range(1, n):
        cur = []
        for i in range(n - k):
            d = prev[i + 1] - prev[i]
            back = prev[i + 1] - older[i + 1]
            den = (h[i] / h[i + k]) * (1 - d / back) - 1 if back != 0 else h[i] / h[i + k] - 1
            cur.append(prev[i + 1] + d / den)
        older, prev = prev, cur
    return prev[0]


EXTRAPOLATIONS = {"polynomial": _neville, "rational": _rational_extrapolation}


def yukawa_vs_coulomb_limit(beta_screen: Sequence[float], zeta: float = 1.0,
                            method: str = "rational") -> ConvergenceReport:
    """Yukawa energies of two 1s densities for decreasing screening, extrapolated to zero screening.

    The accelerated column holds the extrapolation from the first i+1 screening values.
    """
    if method not in EXTRAPOLATIONS:
        raise ValueError(f"unknown extrapolation {method!r}")
    rho = slater_1s_density(zeta)
    vals = [yukawa_energy_s(rho, rho, b, 2 * zeta) for b in beta_screen]
    ext = EXTRAPOLATIONS[method]
    extrap = [None, None] + [ext(beta_screen[:i + 1], vals[:i + 1]) for i in range(2, len(vals))]
    limit = 5 * zeta / 8
    return ConvergenceReport(orders=list(range(len(vals))), partial_sums=vals,
                             partial_errors=[abs(v - limit) for v in vals], accelerated=extrap,
                             accel_method=f"{method}_extrapolation", verdict="converging",
                             meta={"beta_screen": list(beta_screen), "zeta": zeta, "coulomb": limit})
