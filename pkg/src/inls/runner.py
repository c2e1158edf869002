"""Orchestration: run a configuration, persist results, and judge them.

A run directory holds

    config.json      echo of the validated configuration
    series.csv       one row per sample
    manifest.json    hash, version, timings and outcome
    fields/t_<t>.bin checkpoint fields (binary field format)
    final.bin        field at t_final
    scatter.json     Cauchy defects, when two or more checkpoints are set
    state_estimate.bin

Exit codes: 0 success, 1 configuration error, 2 guarded numerical error.
"""
from __future__ import annotations

import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, dump_config, load_config
from .errors import (InlsError, NumericalGuard, ParseError, SchemaError, TailTooFat, ValidationError,
                     WindowTooShort)
from .exponents import INF, admissible_p, alpha_thresholds, as_exponent, fmt_exponent
from .grid import ComplexField, gaussian_data, read_field, sample_weight, write_field
from .observables import (TimeSeries, decay_fit, g_decay_fit, pc_variation, pseudoconformal_residual,
                          q_label, read_series_csv, series_strichartz_norm, virial_residual,
                          write_series_csv)
from .scattering import cauchy_defect
from .solver import SolverState, evolve

EXIT_OK, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2
OUTPUT_ROOT_ENV = "INLS_OUTPUT_ROOT"


@dataclass
class Tolerances:
    """Pass/fail thresholds used by ``run_report``."""

    virial_rel: float = 1e-3
    virial_window: tuple = (0.2, 2.0)
    pc_rel: float = 1e-3
    pc_horizon: float = 2.0
    decay_rel: float = 0.15
    decay_mass_abs: float = 0.02
    decay_window: tuple = (2.0, math.inf)
    gdecay_slack: float = 0.2
    scatter_ratio: float = 0.5


def resolve_run_dir(cfg: RunConfig, output_dir=None, use_env: bool = True) -> Path:
    """Run directory: explicit argument, else the configured one, else runs/<hash prefix>.

    When INLS_OUTPUT_ROOT is set, relative directories are placed under it and
    absolute ones are re-rooted there by their final component.
    """
    base = output_dir if output_dir is not None else (cfg.output_dir or f"runs/{cfg.config_hash()[:12]}")
    base = Path(base)
    root = os.environ.get(OUTPUT_ROOT_ENV) if use_env else None
    if root:
        base = Path(root) / (base.name if base.is_absolute() else base)
    return base


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def _time_tag(t: float) -> str:
    return format(t, ".6g").replace("-", "m")


@dataclass
class RunResult:
    exit_code: int
    run_dir: Path | None
    manifest: dict
    series: TimeSeries | None = None


def run_simulate(cfg: RunConfig, output_dir=None, use_env: bool = True, observer=None) -> RunResult:
    """Run one configuration and write its directory.

    ``observer``, if given, is also called with (t, field) at every sample.
    """
    run_dir = resolve_run_dir(cfg, output_dir, use_env)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(dump_config(cfg))
    manifest = {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "code_version": f"inls {__version__}",
        "numpy": np.__version__,
        "python": platform.python_version(),
        "start_time": _now(),
    }
    t0 = time.perf_counter()
    samples: list = []
    snapshots: dict[float, ComplexField] = {}
    series = None
    try:
        grid = cfg.grid
        try:
            u0 = gaussian_data(grid, cfg.initial.A, cfg.initial.sigma, cfg.initial.center, cfg.initial.phase)
        except TailTooFat as exc:
            raise ValidationError(str(exc), "initial data decays at the box edge") from exc
        weight = sample_weight(grid, cfg.params.b, cfg.origin)
        state = SolverState(0.0, u0, cfg.params, weight, cfg.dt, cfg.fft_precision)
        wanted = list(cfg.checkpoints)
        extra = observer
        final: list = []

        def observer(t: float, f: ComplexField) -> None:
            for c in wanted:
                if abs(t - c) <= 1e-9 * max(1.0, c):
                    snapshots[c] = f.copy()
            final[:] = [f]
            if extra is not None:
                extra(t, f)

        evolve(state, cfg.t_final, cfg.sample_every, cfg.q_list, cfg.guards, observer, sink=samples)
        series = TimeSeries(cfg.params, samples)
        write_series_csv(run_dir / "series.csv", series, cfg.q_list)
        write_field(run_dir / "final.bin", final[0])
        if snapshots:
            (run_dir / "fields").mkdir(exist_ok=True)
            for c, f in snapshots.items():
                write_field(run_dir / "fields" / f"t_{_time_tag(c)}.bin", f)
        if len(cfg.checkpoints) >= 2:
            rep = cauchy_defect(snapshots, cfg.checkpoints, horizon=cfg.t_final)
            rep.write(run_dir / "scatter.json", run_dir / "state_estimate.bin")
        manifest["outcome"] = {"status": "ok"}
        code = EXIT_OK
    except NumericalGuard as exc:
        manifest["outcome"] = {"status": "guarded", "error": type(exc).__name__, "message": str(exc)}
        code = EXIT_GUARD
        if samples:
            write_series_csv(run_dir / "series.csv", TimeSeries(cfg.params, samples), cfg.q_list)
    except (ValidationError, ParseError) as exc:
        manifest["outcome"] = {"status": "config_error", "error": type(exc).__name__, "message": str(exc)}
        code = EXIT_CONFIG
    manifest["end_time"] = _now()
    manifest["elapsed_seconds"] = round(time.perf_counter() - t0, 3)
    manifest["samples"] = len(samples)
    manifest["exit_code"] = code
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return RunResult(code, run_dir, manifest, series)


def simulate_path(config_path, output_dir=None, use_env: bool = True) -> RunResult:
    """Load and run; configuration problems become exit code 1 with a manifest if possible."""
    try:
        cfg = load_config(config_path)
    except (ParseError, ValidationError) as exc:
        manifest = {"outcome": {"status": "config_error", "error": type(exc).__name__, "message": str(exc)},
                    "exit_code": EXIT_CONFIG}
        return RunResult(EXIT_CONFIG, None, manifest)
    return run_simulate(cfg, output_dir, use_env)


# ----------------------------------------------------------------- reports

REPORT_KINDS = ("virial", "pseudoconformal", "decay", "gdecay", "scatter", "strichartz")


def load_run(run_dir) -> tuple[RunConfig, TimeSeries]:
    run_dir = Path(run_dir)
    cfg_path, csv_path = run_dir / "config.json", run_dir / "series.csv"
    for p in (cfg_path, csv_path):
        if not p.is_file():
            raise SchemaError(f"{run_dir} has no {p.name}")
    try:
        cfg = load_config(cfg_path)
    except (ParseError, ValidationError) as exc:
        raise SchemaError(f"{cfg_path}: {exc}") from exc
    series = read_series_csv(csv_path, cfg.params)
    return cfg, series


def _clip(window, series: TimeSeries) -> tuple[float, float]:
    a, b = window
    return float(a), float(min(b, series.t[-1]))


def run_report(run_dir, kind: str, tol: Tolerances | None = None, **opts) -> dict:
    if kind not in REPORT_KINDS:
        raise ValueError(f"kind must be one of {REPORT_KINDS}")
    tol = tol or Tolerances()
    cfg, series = load_run(run_dir)
    p = cfg.params
    lo, _ = alpha_thresholds(p)
    out: dict = {"kind": kind, "run_dir": str(run_dir), "config_hash": cfg.config_hash()}
    if p.mu != -1 and kind != "scatter":
        out["note"] = "the identities and rates checked here are stated for the defocusing sign"

    if kind == "virial":
        a, b = _clip(opts.get("window", tol.virial_window), series)
        res = virial_residual(series)
        m = res.max_relative(a, b)
        out.update(window=[a, b], max_relative_residual=m, tolerance=tol.virial_rel,
                   passed=bool(m < tol.virial_rel))

    elif kind == "pseudoconformal":
        horizon = min(opts.get("horizon", tol.pc_horizon), series.t[-1])
        res = pseudoconformal_residual(series)
        m = res.max_relative(0.0, horizon)
        variation = pc_variation(series, horizon)
        critical = p.alpha == lo
        conserved = bool(critical and variation < tol.pc_rel)
        out.update(horizon=horizon, max_relative_residual=m, relative_variation=variation,
                   mass_critical=critical, conserved=conserved, tolerance=tol.pc_rel,
                   passed=bool(m < tol.pc_rel and (conserved or not critical)))

    elif kind == "decay":
        a, b = _clip(opts.get("window", tol.decay_window), series)
        qs = [as_exponent(q) for q in opts.get("q", cfg.q_list)]
        fits, ok = [], True
        for q in qs:
            f = decay_fit(series, q, (a, b))
            if f.target == 0:
                good = abs(f.slope) <= tol.decay_mass_abs
                rule = f"|slope| <= {tol.decay_mass_abs}"
            elif p.alpha >= lo:
                good = abs(f.slope - f.target) <= tol.decay_rel * abs(f.target)
                rule = f"within {tol.decay_rel:.0%} of target"
            else:
                good = f.slope <= f.target + tol.gdecay_slack
                rule = f"slope <= target + {tol.gdecay_slack}"
            ok &= good
            fits.append({"q": q_label(q), "slope": f.slope, "stderr": f.stderr, "target": f.target,
                         "samples": f.samples, "rule": rule, "passed": bool(good)})
        out.update(window=[a, b], fits=fits, passed=bool(ok))

    elif kind == "gdecay":
        a, b = _clip(opts.get("window", tol.decay_window), series)
        f = g_decay_fit(series, (a, b))
        good = f.slope <= f.target + tol.gdecay_slack
        out.update(window=[a, b], slope=f.slope, target=f.target, grad_v_slope=f.grad_v_slope,
                   grad_v_target=f.grad_v_target, slack=tol.gdecay_slack, passed=bool(good))

    elif kind == "scatter":
        run_dir = Path(run_dir)
        fields = {}
        for c in cfg.checkpoints:
            fp = run_dir / "fields" / f"t_{_time_tag(c)}.bin"
            if not fp.is_file():
                raise SchemaError(f"missing checkpoint field {fp.name}")
            fields[c] = read_field(fp)
        if len(fields) < 2:
            raise SchemaError("the run has fewer than two checkpoints")
        rep = cauchy_defect(fields, cfg.checkpoints, horizon=cfg.t_final)
        h1, sg = rep.consecutive("h1"), rep.consecutive("sigma")
        dec = lambda v: all(y < x for x, y in zip(v, v[1:]))  # noqa: E731
        ratio = h1[-1] / h1[0] if h1[0] > 0 else 0.0
        out.update(checkpoints=rep.checkpoints, consecutive_h1=h1, consecutive_sigma=sg,
                   h1_decreasing=dec(h1), sigma_decreasing=dec(sg), final_to_first_ratio=ratio,
                   passed=bool(dec(h1) and dec(sg) and ratio < tol.scatter_ratio))

    elif kind == "strichartz":
        T = series.t[-1]
        windows = []
        k = 1
        while 2 * k <= T + 1e-9:
            windows.append((float(k), float(2 * k)))
            k *= 2
        if not windows:
            raise WindowTooShort(f"horizon {T} holds no dyadic window [k, 2k] with k >= 1")
        norms, ok = [], True
        for q in opts.get("q", cfg.q_list):
            q = as_exponent(q)
            pexp = admissible_p(p.d, q)
            vals = [series_strichartz_norm(series, pexp, q, w) for w in windows]
            finite = all(math.isfinite(v) for v in vals)
            # the (inf, 2) norm is sqrt(mass), constant by design
            decreasing = True if q == 2 else all(y < x for x, y in zip(vals[1:], vals[2:]))
            ok &= finite and decreasing
            norms.append({"p": q_label(pexp), "q": q_label(q), "windows": [list(w) for w in windows],
                          "norms": vals, "finite": finite, "decreasing_from_t2": decreasing})
        out.update(pairs=norms, passed=bool(ok and norms))
    return out


# ------------------------------------------------------------------- sweep

def _sweep_one(args) -> dict:
    path, run_dir = args
    res = simulate_path(path, run_dir, use_env=False)
    return {"config": str(path), "run_dir": str(res.run_dir) if res.run_dir else None,
            "exit_code": res.exit_code, "outcome": res.manifest.get("outcome")}


def sweep(config_dir, jobs: int = 1, output_root=None) -> list[dict]:
    """Run every *.json in a directory, one worker per evolution.

    Each run writes to <root>/<config stem>, where root is ``output_root``,
    else INLS_OUTPUT_ROOT, else <config_dir>/runs.
    """
    config_dir = Path(config_dir)
    configs = sorted(config_dir.glob("*.json"))
    if output_root is None:
        output_root = Path(os.environ.get(OUTPUT_ROOT_ENV) or config_dir / "runs")
    output_root = Path(output_root)
    jobs_args = [(str(c), str((output_root / c.stem).resolve())) for c in configs]
    if jobs <= 1 or len(jobs_args) <= 1:
        return [_sweep_one(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_sweep_one, jobs_args))
