"""Batch front end: ``orbexp <study> [options]`` writes <study>.csv and <study>.json.

Exit codes: 0 success, 1 configuration error, 2 a study missed its
convergence tolerance (the partial report is still written).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .reports import fmt

STUDIES = ("orthonormality", "transforms", "expand", "addition", "coulomb", "diverge", "accelerate")

# key -> (type, default); None defaults are filled per study
PARAMS: Dict[str, Tuple[Callable, Any]] = {
    "family": (str, "lambda"),
    "k": (float, 0.0),
    "beta": (float, None),
    "n_max": (int, None),
    "ell_max": (int, 3),
    "x": (float, 1e-3),
    "mu": (float, -1.0),
    "alpha": (float, None),
    "u": (float, 0.0),
    "zeta": (float, 1.0),
    "shells": (int, 20),
    "N": (float, 1.0),
    "L": (int, 0),
    "probe": (str, "inverse_power"),
    "series": (str, "ln2"),
    "method": (str, "epsilon"),
    "accel": (str, ""),
    "tol": (float, None),
    "seed": (int, 42),
}

DEFAULT_TOL = {
    "orthonormality": 1e-10,
    "transforms": 1e-10,
    "expand": math.inf,
    "addition": math.inf,
    "coulomb": 1e-4,
    "diverge": math.inf,
    "accelerate": None,
}
SERIES_TOL = {"ln2": 1e-6, "geometric": 1e-12, "coulomb": 1e-4}
# Levin variants are held to a tighter bound on ln2
LEVIN_TOL = {"ln2": 1e-9}


class ConfigError(ValueError):
    pass


@dataclass
class StudyConfig:
    study: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    output_path: Path = Path(".")

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ConfigError(f"unknown study {self.study!r}")
        unknown = set(self.parameters) - set(PARAMS)
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
        typed = {}
        for key, (typ, default) in PARAMS.items():
            raw = self.parameters.get(key, default)
            if raw is None:
                typed[key] = None
                continue
            try:
                typed[key] = typ(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        if typed["tol"] is None:
            typed["tol"] = DEFAULT_TOL[self.study]
        if typed["beta"] is not None and typed["beta"] <= 0:
            raise ConfigError("beta must be positive")
        self.parameters = typed

    @property
    def beta(self) -> float:
        return self.parameters["beta"] if self.parameters["beta"] is not None else 1.0

    def __getitem__(self, key):
        return self.parameters[key]


@dataclass
class StudyResult:
    header: List[str]
    rows: List[List[Any]]
    summary: Dict[str, Any]
    converged: bool = True
    tolerance: Optional[float] = None


def read_config_file(path) -> Dict[str, str]:
    """key = value lines; '#' starts a comment."""
    out: Dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------------------
# studies

def _orthonormality(cfg: StudyConfig) -> StudyResult:
    from .basis import BasisSpec, WeightSpec, gram_matrix, sobolev_gram_sturmian
    fam = cfg["family"]
    n_max = cfg["n_max"] or 6
    spec = BasisSpec(fam, cfg.beta, cfg["k"])
    weight = WeightSpec.natural(spec)
    rows, worst = [], 0.0
    for ell in range(min(cfg["ell_max"], n_max - 1) + 1):
        G = gram_matrix(spec, weight, n_max, ell)
        ns = np.arange(ell + 1, n_max + 1)
        expect = np.diag(cfg.beta / ns) if fam == "sturmian" else np.eye(len(ns))
        D = np.abs(G - expect)
        off = float(np.max(D - np.diag(np.diag(D)))) if len(ns) > 1 else 0.0
        diag = float(np.max(np.diag(D)))
        row = [n_max, ell, "natural", off, diag]
        rows.append(row)
        worst = max(worst, off, diag)
        if fam == "sturmian":
            S = sobolev_gram_sturmian(cfg.beta, n_max, ell)
            e = float(np.max(np.abs(S - np.eye(len(ns)))))
            rows.append([n_max, ell, "sobolev", e, e])
            worst = max(worst, e)
    return StudyResult(["order", "ell", "inner_product", "max_offdiag_error", "max_diag_error"], rows,
                       {"family": fam, "weight_k": weight.k, "max_error": worst}, worst <= cfg["tol"])


def _transforms(cfg: StudyConfig) -> StudyResult:
    from .transforms import round_trip_suite, transform_suite
    n_max = cfg["n_max"] or 6
    rows = [[n, name, "" if ell is None else ell, err]
            for name, n, ell, err in transform_suite(n_max, cfg["ell_max"], cfg.beta)]
    rows += [[n_max, name, ell, err] for name, ell, err in round_trip_suite(n_max, cfg["ell_max"], cfg.beta)]
    worst = max(r[3] for r in rows)
    return StudyResult(["order", "transform", "ell", "error"], rows,
                       {"max_error": worst, "metric": "max|got-ref| / max|ref| over the radius grid"},
                       worst <= cfg["tol"])


def _report_result(rep, extra: Optional[dict] = None, converged: bool = True) -> StudyResult:
    from .reports import CSV_COLUMNS
    rows = [list(r) for r in rep.rows()]
    summary = rep.summary()
    summary["meta"] = {k: v for k, v in summary["meta"].items() if k != "terms"}
    if extra:
        summary.update(extra)
    return StudyResult(list(CSV_COLUMNS), rows, summary, converged)


def _expand(cfg: StudyConfig) -> StudyResult:
    from .expansions import (RadialSeriesSpec, expo_power_laguerre_coeffs, inverse_power_divergence_probe,
                             laguerre_partial_sums, power_laguerre_coeffs)
    from .reports import ConvergenceReport, ratio_verdict
    n_max = cfg["n_max"] if cfg["n_max"] is not None else 200
    mu, u, x = cfg["mu"], cfg["u"], cfg["x"]
    alpha = cfg["alpha"] if cfg["alpha"] is not None else (1.0 if mu <= -1 else 0.0)
    try:
        spec = RadialSeriesSpec(mu=mu, alpha=alpha, n_max=n_max, u=u)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if mu == -1 and u == 0:
        rep = inverse_power_divergence_probe(x, n_max, alpha)
    else:
        coeffs = power_laguerre_coeffs(spec) if u == 0 else expo_power_laguerre_coeffs(spec)
        terms, s = laguerre_partial_sums(coeffs, x)
        ref = float(spec.target(x))
        growing = bool(np.all(np.diff(s) > 0)) and abs(s[-1]) > 10 * abs(s[0])
        rep = ConvergenceReport(orders=list(range(n_max + 1)), partial_sums=list(s),
                                partial_errors=[abs(v - ref) for v in s],
                                verdict="diverging" if growing else ratio_verdict(list(terms)),
                                meta={"x": x, "mu": mu, "u": u, "alpha": alpha, "reference": ref})
    return _report_result(rep, {"alpha": alpha})


def _addition(cfg: StudyConfig) -> StudyResult:
    from .addition import symmetric_coeffs_lambda
    N, L = int(cfg["N"]), cfg["L"]
    top = cfg["n_max"] or 16
    shift = np.array([0.0, 0.0, 0.5 / cfg.beta])
    rows, errs = [], []
    n = max(2, top // 2)
    for n_max in (n, top):
        T = symmetric_coeffs_lambda(N, L, n_max, cfg.beta)
        e = T.grid_l2_error(shift)
        errs.append(e)
        rows.append([n_max, len(T.entries), e])
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    return StudyResult(["order", "n_terms", "grid_l2_error"], rows,
                       {"target": [N, L, 0], "shift": shift.tolist(), "strictly_decreasing": decreasing},
                       decreasing)


def _coulomb(cfg: StudyConfig) -> StudyResult:
    from .addition import coulomb_self_energy_study
    rep = coulomb_self_energy_study(cfg["zeta"], cfg["k"], cfg["beta"],
                                    cfg["shells"], accel=cfg["accel"] or None)
    err = abs(rep.best - 5 * cfg["zeta"] / 8)
    return _report_result(rep, {"final_error": err, "reference": 5 * cfg["zeta"] / 8}, err <= cfg["tol"])


def _diverge(cfg: StudyConfig) -> StudyResult:
    from .addition import one_center_nonexistence_probe
    from .expansions import inverse_power_divergence_probe, rearrangement_probe
    probe = cfg["probe"]
    if probe == "inverse_power":
        rep = inverse_power_divergence_probe(cfg["x"], cfg["n_max"] or 200, cfg["alpha"] or 1.0)
    elif probe == "rearrangement":
        rep = rearrangement_probe(cfg["mu"], int(cfg["k"]), cfg["n_max"] or 50)
    elif probe == "one_center":
        rep = one_center_nonexistence_probe(cfg["N"], int(cfg["k"]), cfg["n_max"] or 30, cfg["L"])
    else:
        raise ConfigError(f"unknown probe {probe!r}")
    return _report_result(rep, {"probe": probe})


def _accelerate(cfg: StudyConfig) -> StudyResult:
    from .accel import accelerate_report
    n = cfg["n_max"] or 10
    series = cfg["series"]
    if series == "ln2":
        terms = [(-1) ** j / (j + 1) for j in range(n)]
        limit = math.log(2)
    elif series == "geometric":
        terms = [0.5 ** j for j in range(n)]
        limit = 2.0
    elif series == "coulomb":
        from .addition import coulomb_self_energy_study
        rep = coulomb_self_energy_study(cfg["zeta"], cfg["k"], shells=n)
        terms, limit = rep.meta["terms"], 5 * cfg["zeta"] / 8
    else:
        raise ConfigError(f"unknown series {series!r}")
    method = cfg["method"]
    if method not in ("epsilon", "levin_u", "levin_t", "theta"):
        raise ConfigError(f"unknown method {method!r}")
    rep = accelerate_report(np.cumsum(terms), method, terms, limit=limit)
    err = abs(rep.best - limit)
    tol = cfg["tol"]
    if tol is None:
        tol = LEVIN_TOL.get(series, SERIES_TOL[series]) if method.startswith("levin") else SERIES_TOL[series]
    res = _report_result(rep, {"series": series, "final_error": err}, err <= tol)
    res.tolerance = tol
    return res


RUNNERS = {
    "orthonormality": _orthonormality,
    "transforms": _transforms,
    "expand": _expand,
    "addition": _addition,
    "coulomb": _coulomb,
    "diverge": _diverge,
    "accelerate": _accelerate,
}


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def write_outputs(cfg: StudyConfig, res: StudyResult, status: int) -> Tuple[Path, Path]:
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / f"{cfg.study}.csv", out / f"{cfg.study}.json"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(res.header)
        for row in res.rows:
            w.writerow([_cell(v) for v in row])
    sidecar = {
        "study": cfg.study,
        "config": cfg.parameters,
        "tolerance": res.tolerance if res.tolerance is not None else cfg["tol"],
        "version": __version__,
        "exit_code": status,
        "converged": bool(res.converged),
        "summary": res.summary,
        "csv_columns": res.header,
    }
    with open(json_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True, default=_json_default)
    return csv_path, json_path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    return str(o)


def run_study(cfg: StudyConfig) -> int:
    res = RUNNERS[cfg.study](cfg)
    status = 0 if res.converged else 2
    write_outputs(cfg, res, status)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orbexp", description="Run expansion studies and write CSV/JSON reports.")
    p.add_argument("study", choices=STUDIES)
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--output", "-o", default=".", help="output directory")
    p.add_argument("--threads", type=int, help="sets ORBEXP_THREADS")
    for key, (typ, default) in PARAMS.items():
        flag = "--" + key.replace("_", "-")
        p.add_argument(flag, dest=key, type=str, default=None,
                       help=f"{typ.__name__}" + (f", default {default}" if default not in (None, "") else ""))
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        params: Dict[str, Any] = {}
        if args.config:
            params.update(read_config_file(args.config))
        params.update({k: getattr(args, k) for k in PARAMS if getattr(args, k) is not None})
        if args.threads is not None:
            os.environ["ORBEXP_THREADS"] = str(args.threads)
        cfg = StudyConfig(args.study, params, Path(args.output))
        return run_study(cfg)
    except (ConfigError, OSError) as exc:
        print(f"orbexp: configuration error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"orbexp: invalid parameters: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
