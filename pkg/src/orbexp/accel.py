"""Nonlinear sequence transformations: Wynn epsilon, Levin u/t, Brezinski theta."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .reports import ConvergenceReport

TINY = 1e-300
REL_TINY = 64 * np.finfo(float).eps


@dataclass
class PartialSumSequence:
    s: np.ndarray
    terms: Optional[np.ndarray] = None

    def __post_init__(self):
        self.s = np.asarray(self.s)
        if self.terms is not None:
            self.terms = np.asarray(self.terms)
            if len(self.terms) != len(self.s):
                raise ValueError("terms and partial sums differ in length")

    @classmethod
    def from_terms(cls, terms) -> "PartialSumSequence":
        terms = np.asarray(terms)
        return cls(np.cumsum(terms), terms)

    def __len__(self):
        return len(self.s)

    def get_terms(self) -> np.ndarray:
        if self.terms is not None:
            return self.terms
        return np.diff(self.s, prepend=0)


def _as_seq(seq) -> PartialSumSequence:
    return seq if isinstance(seq, PartialSumSequence) else PartialSumSequence(seq)


def wynn_epsilon(seq) -> Tuple[List[np.ndarray], complex, bool]:
    """Wynn's epsilon algorithm.

    Returns (even columns eps_0, eps_2, ..., best estimate, breakdown flag). The
    best estimate is the last entry of the deepest even column.
    """
    s = _as_seq(seq).s
    if len(s) < 3:
        raise ValueError("need at least three partial sums")
    dtype = complex if np.iscomplexobj(s) else float
    prev = np.zeros(len(s) + 1, dtype=dtype)       # eps_{-1}
    cur = np.array(s, dtype=dtype)                  # eps_0
    even = [cur.copy()]
    breakdown = False
    k = 0
    while len(cur) > 1:
        diff = cur[1:] - cur[:-1]
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            nxt = prev[1:len(cur)] + 1.0 / diff
        # differences at rounding level relative to the entries are treated as zero
        scale = np.maximum(np.abs(cur[1:]), np.abs(cur[:-1]))
        bad = (np.abs(diff) <= np.maximum(TINY, REL_TINY * scale)) | ~np.isfinite(nxt)
        if np.any(bad):
            # drop the diagonals through the last singular entry, keep the later ones
            breakdown = True
            j = int(np.nonzero(bad)[0][-1])
            if j == len(nxt) - 1:
                break
            prev, cur = cur[j + 1:], nxt[j + 1:]
        else:
            prev, cur = cur, nxt
        k += 1
        if k % 2 == 0:
            even.append(cur.copy())
    best = even[-1][-1]
    return even, best, breakdown


def _levin(seq, variant: str, beta: float = 1.0, start: int = 0) -> complex:
    seq = _as_seq(seq)
    s = seq.s[start:]
    a = seq.get_terms()[start:]
    if len(s) < 2:
        raise ValueError("need at least two partial sums")
    n = np.arange(len(s)) + start
    if variant == "u":
        omega = (beta + n) * a
    elif variant == "t":
        omega = a
    else:
        raise ValueError(f"unknown Levin variant {variant!r}")
    if np.any(omega == 0):
        # an exactly vanishing term means the stream has already stopped changing
        zero = int(np.argmax(omega == 0))
        if np.all(a[zero:] == 0):
            return s[zero]
        raise ZeroDivisionError("Levin breakdown: zero remainder estimate")
    k = len(s) - 1
    num = 0.0
    den = 0.0
    for j in range(k + 1):
        c = (-1) ** j * math.comb(k, j) * ((beta + n[0] + j) / (beta + n[0] + k)) ** (k - 1)
        num = num + c * s[j] / omega[j]
        den = den + c / omega[j]
    return num / den


def levin_u(seq, beta: float = 1.0) -> complex:
    return _levin(seq, "u", beta)


def levin_t(seq, beta: float = 1.0) -> complex:
    return _levin(seq, "t", beta)


def brezinski_theta(seq) -> complex:
    """Brezinski's theta algorithm, best estimate from the deepest even column."""
    s = np.asarray(_as_seq(seq).s, dtype=float)
    if len(s) < 3:
        raise ValueError("need at least three partial sums")
    prev = np.zeros(len(s) + 1)
    cur = s.copy()
    best = cur[-1]
    k = 0
    cols = [prev, cur]
    while True:
        a, b = cols[-2], cols[-1]
        if k % 2 == 0:
            if len(b) < 2:
                break
            d = b[1:] - b[:-1]
            if np.any(np.abs(d) < TINY):
                break
            nxt = a[1:len(b)] + 1.0 / d
        else:
            if len(b) < 3:
                break
            da = a[2:len(b) + 1] - a[1:len(b)]
            db1, db0 = b[2:] - b[1:-1], b[1:-1] - b[:-2]
            dd = db1 - db0
            if np.any(np.abs(dd) < TINY):
                break
            nxt = a[1:len(b) - 1] + da[: len(b) - 2] * db1 / dd
            best = nxt[-1]
        cols.append(nxt)
        k += 1
    return best


TRANSFORMS = {
    "epsilon": lambda seq: wynn_epsilon(seq)[1],
    "levin_u": levin_u,
    "levin_t": levin_t,
    "theta": brezinski_theta,
}


def accelerate_report(partial_sums: Sequence, method: str = "epsilon", terms: Optional[Sequence] = None,
                      orders: Optional[Sequence[int]] = None, limit: Optional[float] = None,
                      min_len: int = 3) -> ConvergenceReport:
    """Attach transformed estimates to a partial-sum stream.

    The estimate at position i uses the prefix s_0..s_i only. Breakdowns leave
    the entry empty rather than propagating non-finite values.
    """
    if method not in TRANSFORMS:
        raise ValueError(f"unknown transformation {method!r}")
    s = np.asarray(partial_sums)
    a = np.asarray(terms) if terms is not None else None
    orders = list(orders) if orders is not None else list(range(len(s)))
    acc: List[Optional[float]] = []
    for i in range(len(s)):
        if i + 1 < min_len:
            acc.append(None)
            continue
        seq = PartialSumSequence(s[: i + 1], None if a is None else a[: i + 1])
        try:
            val = TRANSFORMS[method](seq)
        except (ZeroDivisionError, FloatingPointError, ValueError):
            val = None
        if val is not None and not np.isfinite(val):
            val = None
        acc.append(val)
    errors = [abs(v - limit) for v in s] if limit is not None else None
    return ConvergenceReport(orders=orders, partial_sums=list(s), partial_errors=errors,
                             accelerated=acc, accel_method=method, verdict="converging",
                             meta={"limit": limit})
