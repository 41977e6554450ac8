"""Command-line front end: single analyses, dependence and dimension sweeps,
digit tables and the validation suite.

Every command reads an optional JSON config, applies flag overrides, and
writes CSV/JSON artifacts into ``--out``.  Artifact content depends only on
the config and seed; wall-clock timings go to a ``timing.json`` sidecar.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import copulas, marginals as marginal_mod
from .copulas import CopulaSpec
from .marginals import LogMarginal, Uniform01
from .metrics import (
    benford_digit_probs,
    build_report,
    chi_square_digits,
    chi_square_digits_error,
    chi_square_grid,
    digit_probs_from_pdf,
    l1_copula_norm,
)
from .presets import PAIRING_LABELS, SWEEP_ALPHAS, pairing
from .sampler import digit_counts, sample_products, supports
from .validation import run_suite
from .wrapped import CertificateError, digit_probs_direct, make_window, wrapped_pdf_grid

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_CONFIG, EXIT_CERTIFICATE, EXIT_VALIDATION = 0, 2, 3, 4
N_MAX = 5
N_MAX_QMC = 7
QMC_ONLY_QUAD_TOL = 1e-6

_KNOWN_KEYS = {
    "copula", "marginals", "marginal", "pairing", "pairings", "families", "alphas", "n_values",
    "base", "grid", "tol", "seed", "window", "quadrature", "qmc_log2", "samples", "qmc_only",
    "corrupt_clayton", "oracle_samples", "threads",
}


class ConfigError(ValueError):
    """Invalid configuration; the message carries the source line and field."""


# -- configuration ---------------------------------------------------------------------------


@dataclass
class AnalysisConfig:
    command: str
    copula: CopulaSpec | None = None
    marginals: list[LogMarginal] = field(default_factory=list)
    base: int = 10
    grid: int | None = None
    tol: float = 1e-12
    seed: int = 0
    window: dict | None = None
    quadrature: str = "auto"
    qmc_log2: int = 15
    samples: int = 1_000_000
    families: list[str] = field(default_factory=list)
    alphas: dict[str, list[float]] = field(default_factory=dict)
    pairings: list[str] = field(default_factory=list)
    n_values: list[int] = field(default_factory=list)
    marginal: LogMarginal | None = None
    qmc_only: bool = False
    corrupt_clayton: bool = False
    oracle_samples: int = 200_000
    threads: int = 1

    def grid_for(self, n: int) -> int:
        if self.grid is not None:
            return self.grid
        return 12 if n == 2 else 9

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"command": self.command, "base": self.base, "tol": self.tol, "seed": self.seed}
        if self.copula is not None:
            out["copula"] = self.copula.to_config()
        if self.marginals:
            out["marginals"] = [m.to_config() for m in self.marginals]
        if self.grid is not None:
            out["grid"] = self.grid
        if self.window is not None:
            out["window"] = self.window
        out["quadrature"] = self.quadrature
        out["qmc_log2"] = self.qmc_log2
        return out


def _line_of(text: str, key: str) -> int | None:
    match = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return None if match is None else text.count("\n", 0, match.start()) + 1


class _Fields:
    """Field access that turns bad values into located :class:`ConfigError` messages."""

    def __init__(self, raw: dict, text: str, source: str):
        self.raw, self.text, self.source = raw, text, source

    def fail(self, key: str, message: str):
        line = _line_of(self.text, key)
        where = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{where}: field '{key}': {message}")

    def get(self, key: str, convert: Callable, default=None, check: Callable | None = None, rule: str = ""):
        if key not in self.raw:
            return default
        try:
            value = convert(self.raw[key])
        except (TypeError, ValueError, KeyError) as exc:
            self.fail(key, str(exc) or f"invalid value {self.raw[key]!r}")
        if check is not None and not check(value):
            self.fail(key, f"{rule}, got {self.raw[key]!r}")
        return value


def _as_int(value) -> int:
    if isinstance(value, bool) or not float(value).is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _as_bool(value) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"expected true or false, got {value!r}")
    return value


def _as_list(value) -> list:
    if not isinstance(value, list):
        raise ValueError(f"expected a list, got {value!r}")
    return value


def read_config(path: str | None) -> tuple[dict, str, str]:
    if path is None:
        return {}, "", "<defaults>"
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: config must be a JSON object")
    return raw, text, path


def parse_config(command: str, raw: dict, text: str = "", source: str = "<config>") -> AnalysisConfig:
    f = _Fields(raw, text, source)
    for key in raw:
        if key not in _KNOWN_KEYS:
            f.fail(key, f"unknown field; expected one of {sorted(_KNOWN_KEYS)}")
    cfg = AnalysisConfig(command)
    cfg.base = f.get("base", _as_int, 10, lambda b: b >= 2, "base must be an integer >= 2")
    cfg.grid = f.get("grid", _as_int, None, lambda m: m >= 2, "grid size must be >= 2")
    cfg.tol = f.get("tol", float, 1e-12, lambda t: 0 < t <= 0.1, "tol must lie in (0, 0.1]")
    cfg.seed = f.get("seed", _as_int, 0, lambda s: 0 <= s < 1 << 64, "seed must be an unsigned 64-bit integer")
    cfg.quadrature = f.get("quadrature", str, "auto", lambda q: q in ("auto", "adaptive", "qmc"), "quadrature must be auto, adaptive or qmc")
    cfg.qmc_log2 = f.get("qmc_log2", _as_int, 15, lambda q: 4 <= q <= 24, "qmc_log2 must lie in [4, 24]")
    cfg.samples = f.get("samples", _as_int, 1_000_000, lambda c: c >= 0, "samples must be >= 0")
    cfg.qmc_only = f.get("qmc_only", _as_bool, False)
    cfg.corrupt_clayton = f.get("corrupt_clayton", _as_bool, False)
    cfg.oracle_samples = f.get("oracle_samples", _as_int, 200_000, lambda c: c >= 1000, "oracle_samples must be >= 1000")
    cfg.threads = f.get("threads", _as_int, 1, lambda t: t >= 1, "threads must be >= 1")

    def one_marginal(spec) -> LogMarginal:
        return marginal_mod.from_config(spec, cfg.base)

    cfg.copula = f.get("copula", copulas.from_config)
    if "marginals" in raw and "pairing" in raw:
        f.fail("pairing", "give either 'marginals' or 'pairing', not both")
    cfg.marginals = f.get("marginals", lambda v: [one_marginal(m) for m in _as_list(v)], [])
    label = f.get("pairing", lambda v: pairing(str(v), cfg.base))
    if label is not None:
        cfg.marginals = list(label)
    cfg.marginal = f.get("marginal", one_marginal)
    cfg.window = f.get("window", _parse_window)

    if command in ("analyze", "digit-table"):
        if cfg.copula is None:
            f.fail("copula", f"'{command}' needs a copula")
        if not cfg.marginals:
            f.fail("marginals", f"'{command}' needs marginals (or a pairing label)")
        if len(cfg.marginals) != cfg.copula.n:
            f.fail("marginals", f"copula has dimension {cfg.copula.n} but {len(cfg.marginals)} marginals were given")
    if command == "sweep-alpha":
        cfg.families = f.get(
            "families",
            lambda v: [str(x) for x in _as_list(v)],
            [cfg.copula.family] if cfg.copula is not None else list(SWEEP_ALPHAS),
            lambda fams: all(x in SWEEP_ALPHAS for x in fams) and len(fams) > 0,
            f"families must be a non-empty subset of {list(SWEEP_ALPHAS)}",
        )
        cfg.alphas = f.get("alphas", lambda v: _parse_alphas(v, cfg.families), {fam: list(SWEEP_ALPHAS[fam]) for fam in cfg.families})
        cfg.pairings = f.get(
            "pairings",
            lambda v: [str(x).upper() for x in _as_list(v)],
            list(PAIRING_LABELS),
            lambda ps: len(ps) > 0 and all(p in PAIRING_LABELS for p in ps),
            f"pairings must be a non-empty subset of {list(PAIRING_LABELS)}",
        )
    if command == "sweep-n":
        if cfg.copula is None:
            cfg.copula = CopulaSpec("gumbel_barnett", 2, 0.1)
        if cfg.marginal is None:
            cfg.marginal = marginal_mod.Normal(base=cfg.base)
        cap = N_MAX_QMC if cfg.qmc_only else N_MAX
        cfg.n_values = f.get("n_values", lambda v: [_as_int(x) for x in _as_list(v)], [2, 3, 4, 5])
        if not cfg.n_values:
            f.fail("n_values", "empty n list")
        for n in cfg.n_values:
            if not 2 <= n <= cap:
                f.fail("n_values", f"dimension {n} outside [2, {cap}]" + ("" if cfg.qmc_only else " (set qmc_only for up to 7)"))
    return cfg


def _parse_window(value) -> dict:
    if not isinstance(value, dict):
        raise ValueError("window must be an object with 'a', 'b' and optional 'k'")
    out: dict[str, Any] = {}
    for key in ("a", "b"):
        if key in value:
            out[key] = [float(x) for x in _as_list(value[key])]
    if "k" in value:
        k = [_as_int(x) for x in _as_list(value["k"])]
        if len(k) != 2 or k[0] >= k[1]:
            raise ValueError("window 'k' must be [c1, c2] with c1 < c2")
        out["k"] = k
    if "last" in value:
        last = [float(x) for x in _as_list(value["last"])]
        if len(last) != 2:
            raise ValueError("window 'last' must be [lo, hi]")
        out["last"] = last
    return out


def _parse_alphas(value, families) -> dict[str, list[float]]:
    if isinstance(value, list):
        if len(families) != 1:
            raise ValueError("a plain alpha list needs exactly one family; use an object keyed by family")
        return {families[0]: [float(x) for x in value]}
    if isinstance(value, dict):
        return {fam: [float(x) for x in _as_list(value.get(fam, SWEEP_ALPHAS[fam]))] for fam in families}
    raise ValueError("alphas must be a list or an object keyed by family")


def apply_overrides(cfg: AnalysisConfig, args: argparse.Namespace) -> AnalysisConfig:
    if args.seed is not None:
        if not 0 <= args.seed < 1 << 64:
            raise ConfigError(f"--seed: must be an unsigned 64-bit integer, got {args.seed}")
        cfg.seed = args.seed
    if args.tol is not None:
        if not 0 < args.tol <= 0.1:
            raise ConfigError(f"--tol: must lie in (0, 0.1], got {args.tol}")
        cfg.tol = args.tol
    if args.grid is not None:
        if args.grid < 2:
            raise ConfigError(f"--grid: must be >= 2, got {args.grid}")
        cfg.grid = args.grid
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError(f"--threads: must be >= 1, got {args.threads}")
        cfg.threads = args.threads
    return cfg


# -- serialization ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % float(value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _json_ready(value):
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_json_ready(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float("%.12g" % value)
    return value


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_json_ready(payload), indent=2) + "\n")


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


# -- analyses --------------------------------------------------------------------------------


def _window_for(cfg: AnalysisConfig, copula: CopulaSpec, marginals: Sequence[LogMarginal]):
    if not cfg.window:
        return make_window(copula, marginals, cfg.tol)
    w = cfg.window
    k = w.get("k")
    last = w.get("last")
    return make_window(
        copula,
        marginals,
        cfg.tol,
        a=w.get("a"),
        b=w.get("b"),
        k_range=None if k is None else (k[0], k[1]),
        last=None if last is None else (last[0], last[1]),
    )


def analyze_case(cfg: AnalysisConfig, copula: CopulaSpec, marginals: Sequence[LogMarginal], grid: int) -> dict:
    """Density grid, independent reference, direct digits and the full report for one case."""
    kw = dict(mode=cfg.quadrature, qmc_log2=cfg.qmc_log2, seed=cfg.seed)
    window = _window_for(cfg, copula, marginals)
    est = wrapped_pdf_grid(copula, marginals, m=grid, tol=cfg.tol, window=window, **kw)
    indep = CopulaSpec("independence", copula.n)
    ref = wrapped_pdf_grid(indep, marginals, m=grid, tol=cfg.tol, window=_window_for(cfg, indep, marginals), **kw)
    probs, prob_err = digit_probs_direct(copula, marginals, cfg.base, cfg.tol, window=window, **kw)
    norm = l1_copula_norm(copula, seed=cfg.seed)
    report = build_report(
        est,
        norm,
        reference=ref,
        benford_marginal=any(isinstance(m, Uniform01) for m in marginals),
        base=cfg.base,
        digit_probs=probs,
    )
    total, ok = est.check_normalization()
    return {
        "estimate": est,
        "reference": ref,
        "report": report,
        "norm": norm,
        "digit_errors": prob_err,
        "grid_digit_probs": digit_probs_from_pdf(est, cfg.base),
        "normalization": {
            "integral": total,
            "tol_total": est.tol_total,
            "grid_allowance": est.grid_allowance,
            "max_quad_err": float(np.max(est.quad_err)),
            "ok": ok,
        },
    }


def cmd_analyze(cfg: AnalysisConfig, out: Path) -> int:
    start = time.perf_counter()
    res = analyze_case(cfg, cfg.copula, cfg.marginals, cfg.grid_for(cfg.copula.n))
    est, report = res["estimate"], res["report"]
    write_csv(out / "pdf_grid.csv", ["s", "pdf", "quad_err"], zip(est.s_grid, est.values, est.quad_err))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "window": est.window.to_dict(),
        "err_bound": est.window.err_bound,
        "mode": est.mode,
        "converged": bool(np.all(est.converged)),
        "normalization": res["normalization"],
        "l1_copula_norm_method": res["norm"].method,
        "digit_prob_errors": res["digit_errors"],
        "grid_digit_probs": res["grid_digit_probs"],
        **report.to_dict(),
    }
    write_json(out / "report.json", payload)
    write_json(out / "timing.json", {"command": "analyze", "seconds": time.perf_counter() - start})
    if not res["normalization"]["ok"]:
        print(f"normalization check failed: {res['normalization']}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


SWEEP_ALPHA_COLUMNS = (
    "family", "alpha", "pairing", "chi2_grid", "chi2_grid_per_dof", "chi2_grid_reject_fixed",
    "chi2_digit", "chi2_digit_p", "l1_distance", "l1_w_distance", "l1_copula_norm", "tol_total",
    "grid_min", "grid_max", "normalization_ok", "converged",
)


def _sweep_alpha_row(job) -> tuple[list, float]:
    cfg, family, alpha, label = job
    start = time.perf_counter()
    copula = CopulaSpec(family, 2, alpha)
    res = analyze_case(cfg, copula, pairing(label, cfg.base), cfg.grid_for(2))
    rep, est = res["report"], res["estimate"]
    row = [
        family, alpha, label, rep.chi2_grid.statistic, rep.chi2_grid.per_dof, rep.chi2_grid.reject_fixed,
        rep.chi2_digit.statistic, rep.chi2_digit.p_value, rep.l1_distance, rep.l1_w_distance,
        rep.l1_copula_norm, rep.tol_total, float(np.min(est.values)), float(np.max(est.values)),
        res["normalization"]["ok"], bool(np.all(est.converged)),
    ]
    return row, time.perf_counter() - start


def _run_jobs(func, jobs, threads: int) -> list:
    if threads <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, jobs))


def sweep_alpha_jobs(cfg: AnalysisConfig) -> list:
    jobs = []
    for family in cfg.families:
        for alpha in cfg.alphas[family]:
            try:
                CopulaSpec(family, 2, alpha)
            except ValueError as exc:
                _warn(f"skipping {family} alpha={alpha}: {exc}")
                continue
            for label in cfg.pairings:
                jobs.append((cfg, family, alpha, label))
    return jobs


def cmd_sweep_alpha(cfg: AnalysisConfig, out: Path) -> int:
    start = time.perf_counter()
    results = _run_jobs(_sweep_alpha_row, sweep_alpha_jobs(cfg), cfg.threads)
    rows = [r for r, _ in results]
    write_csv(out / "sweep.csv", SWEEP_ALPHA_COLUMNS, rows)
    write_json(
        out / "timing.json",
        {
            "command": "sweep-alpha",
            "seconds": time.perf_counter() - start,
            "rows": [{"family": r[0], "alpha": r[1], "pairing": r[2], "seconds": t} for r, t in results],
        },
    )
    bad = [r for r in rows if not r[14]]
    if bad:
        print(f"normalization check failed for {len(bad)} rows", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


SWEEP_N_COLUMNS = (
    "n", "family", "alpha", "chi2_digit", "chi2_digit_err", "chi2_digit_p", "chi2_digit_reject_fixed",
    "chi2_grid", "mode", "converged", "normalization_ok",
)


def _sweep_n_row(job) -> tuple[list, float]:
    cfg, n = job
    start = time.perf_counter()
    copula = CopulaSpec(cfg.copula.family, n, cfg.copula.alpha)
    margs = [cfg.marginal] * n
    mode = "qmc" if cfg.qmc_only else cfg.quadrature
    kw = dict(mode=mode, qmc_log2=cfg.qmc_log2, seed=cfg.seed)
    if cfg.qmc_only:
        kw["quad_tol"] = QMC_ONLY_QUAD_TOL
    window = _window_for(cfg, copula, margs)
    est = wrapped_pdf_grid(copula, margs, m=cfg.grid_for(n), tol=cfg.tol, window=window, **kw)
    probs, errs = digit_probs_direct(copula, margs, cfg.base, cfg.tol, window=window, **kw)
    chi = chi_square_digits(probs, cfg.base)
    row = [
        n, copula.family, copula.alpha, chi.statistic, chi_square_digits_error(probs, errs, cfg.base),
        chi.p_value, chi.reject_fixed, chi_square_grid(est).statistic, est.mode,
        bool(np.all(est.converged)), est.check_normalization()[1],
    ]
    return row, time.perf_counter() - start


def cmd_sweep_n(cfg: AnalysisConfig, out: Path) -> int:
    start = time.perf_counter()
    jobs = []
    for n in cfg.n_values:
        try:
            CopulaSpec(cfg.copula.family, n, cfg.copula.alpha)
        except ValueError as exc:
            _warn(f"skipping n={n}: {exc}")
            continue
        jobs.append((cfg, n))
    results = _run_jobs(_sweep_n_row, jobs, cfg.threads)
    rows = [r for r, _ in results]
    write_csv(out / "sweep_n.csv", SWEEP_N_COLUMNS, rows)
    write_json(
        out / "timing.json",
        {
            "command": "sweep-n",
            "seconds": time.perf_counter() - start,
            "rows": [{"n": r[0], "seconds": t} for r, t in results],
        },
    )
    if any(not r[10] for r in rows):
        print("normalization check failed", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


DIGIT_COLUMNS = ("d", "benford_prob", "model_prob", "model_err", "grid_prob", "empirical_prob", "abs_diff")


def cmd_digit_table(cfg: AnalysisConfig, out: Path) -> int:
    start = time.perf_counter()
    copula, margs = cfg.copula, cfg.marginals
    kw = dict(mode=cfg.quadrature, qmc_log2=cfg.qmc_log2, seed=cfg.seed)
    window = _window_for(cfg, copula, margs)
    probs, errs = digit_probs_direct(copula, margs, cfg.base, cfg.tol, window=window, **kw)
    est = wrapped_pdf_grid(copula, margs, m=cfg.grid_for(copula.n), tol=cfg.tol, window=window, **kw)
    grid_probs = digit_probs_from_pdf(est, cfg.base)
    empirical = [None] * (cfg.base - 1)
    excluded = None
    if supports(copula) and cfg.samples > 0:
        wrapped, excluded = sample_products(copula, margs, cfg.samples, cfg.seed)
        counts = digit_counts(wrapped, cfg.base)
        empirical = list(counts / max(counts.sum(), 1))
    elif cfg.samples > 0:
        _warn(f"no sampler for {copula.family} with n={copula.n}; empirical column left empty")
    benford = benford_digit_probs(cfg.base)
    rows = [
        [d, benford[d - 1], probs[d - 1], errs[d - 1], grid_probs[d - 1], empirical[d - 1], abs(probs[d - 1] - benford[d - 1])]
        for d in range(1, cfg.base)
    ]
    write_csv(out / "digits.csv", DIGIT_COLUMNS, rows)
    write_json(
        out / "timing.json",
        {"command": "digit-table", "seconds": time.perf_counter() - start, "excluded_samples": excluded},
    )
    return EXIT_OK


def cmd_validate(cfg: AnalysisConfig, out: Path) -> int:
    start = time.perf_counter()
    checks = run_suite(corrupt_clayton=cfg.corrupt_clayton, seed=cfg.seed, oracle_samples=cfg.oracle_samples)
    passed = all(c.passed for c in checks)
    write_json(
        out / "validation.json",
        {"schema_version": SCHEMA_VERSION, "passed": passed, "checks": [c.to_dict() for c in checks]},
    )
    write_json(out / "timing.json", {"command": "validate", "seconds": time.perf_counter() - start})
    for c in checks:
        if not c.passed:
            print(f"FAIL {c.name}: measured {c.measured:.6g}, limit {c.limit:.6g} {c.detail}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_VALIDATION


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep-alpha": cmd_sweep_alpha,
    "sweep-n": cmd_sweep_n,
    "digit-table": cmd_digit_table,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="copula-benford", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON analysis config")
    parser.add_argument("--out", default=".", help="output directory (created if missing)")
    parser.add_argument("--seed", type=int, help="unsigned 64-bit seed for QMC scrambles and sampling")
    parser.add_argument("--tol", type=float, help="truncation tolerance in (0, 0.1]")
    parser.add_argument("--grid", type=int, help="number of s grid points")
    parser.add_argument("--threads", type=int, help="worker processes for sweep rows")
    parser.add_argument("--corrupt-clayton", action="store_true", help="validate: use the Clayton CDF without its outer power")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw, text, source = read_config(args.config)
        cfg = apply_overrides(parse_config(args.command, raw, text, source), args)
        if args.corrupt_clayton:
            cfg.corrupt_clayton = True
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CertificateError as exc:
        print(f"certificate error: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE


if __name__ == "__main__":
    sys.exit(main())
