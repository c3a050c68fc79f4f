"""Convergence reports shared by the series studies and the CLI."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

VERDICTS = ("converging", "diverging", "stagnant", "terminating")
CSV_COLUMNS = ("order", "partial_sum", "partial_error", "norm_error",
               "accel_method", "accel_order", "accel_value")


def fmt(x) -> str:
    """Round-trippable 17-significant-digit scientific notation."""
    if x is None:
        return ""
    if isinstance(x, complex):
        x = x.real if x.imag == 0 else x
    if isinstance(x, complex):
        return f"{x.real:.16e}{x.imag:+.16e}j"
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    return f"{x:.16e}"


@dataclass
class ConvergenceReport:
    orders: List[int]
    partial_sums: List[float]
    partial_errors: Optional[List[float]] = None
    norm_errors: Optional[List[float]] = None
    accelerated: Optional[List[Optional[float]]] = None
    accel_method: str = ""
    verdict: str = "stagnant"
    heuristic: bool = True
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.orders)
        for name in ("partial_sums", "partial_errors", "norm_errors", "accelerated"):
            seq = getattr(self, name)
            if seq is not None and len(seq) != n:
                raise ValueError(f"{name} has length {len(seq)}, expected {n}")
        if self.verdict not in VERDICTS and not self.verdict.startswith("summed"):
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def final(self) -> float:
        return self.partial_sums[-1]

    @property
    def best(self) -> float:
        if self.accelerated:
            finite = [v for v in self.accelerated if v is not None and math.isfinite(abs(v))]
            if finite:
                return finite[-1]
        return self.final

    def rows(self):
        for i, order in enumerate(self.orders):
            acc = self.accelerated[i] if self.accelerated else None
            yield (
                str(order),
                fmt(self.partial_sums[i]),
                fmt(self.partial_errors[i]) if self.partial_errors else "",
                fmt(self.norm_errors[i]) if self.norm_errors else "",
                self.accel_method if acc is not None else "",
                str(order) if acc is not None else "",
                fmt(acc),
            )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            w.writerows(self.rows())

    def summary(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "verdict_is_heuristic": self.heuristic,
            "n_orders": len(self.orders),
            "final_partial_sum": fmt(self.final),
            "best_estimate": fmt(self.best),
            "accel_method": self.accel_method,
            "meta": self.meta,
        }

    def to_json(self, path, extra: Optional[dict] = None) -> None:
        data = self.summary()
        if extra:
            data.update(extra)
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True, default=str)


def ratio_verdict(terms, window: int = 10, tol: float = 0.01) -> str:
    """Ratio test over the last ``window`` terms (a labeled heuristic)."""
    tail = [abs(t) for t in terms[-(window + 1):]]
    if len(tail) < 3:
        return "stagnant"
    if all(t == 0 for t in tail):
        return "terminating"
    ratios = [b / a for a, b in zip(tail[:-1], tail[1:]) if a > 0]
    if not ratios:
        return "stagnant"
    mean = sum(ratios) / len(ratios)
    if mean < 1 - tol:
        return "converging"
    if mean > 1 + tol:
        return "diverging"
    return "stagnant"
