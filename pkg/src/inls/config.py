"""Run configuration: flat JSON documents, validation and canonical hashing.

A document looks like::

    {"d": 1, "b": "1/2", "alpha": 3, "mu": -1,
     "L": 256, "n": 4096, "dt": 0.001, "t_final": 8,
     "sample_every": 10, "q_list": [2, 4, "inf"], "checkpoints": [2, 4, 8],
     "initial": {"A": 1, "sigma": 1, "center": 0, "phase": 0},
     "guards": {"boundary_tol": 0.1, "spectral_tol": 0.01, "overflow_factor": 1e6},
     "origin": "lattice", "fft_precision": "extended", "output_dir": "runs/c1"}

Only d, b, alpha, L, n, dt and t_final are required.  Rationals (b, alpha,
q) are integers, decimals or "num/den" strings.  The grid may also be given
as "grid": {"L": ..., "n": ...}.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import BadSize, ParseError, ValidationError
from .exponents import INF, Exponent, ProblemParams, as_exponent, as_rational, q_in_decay_range
from .grid import ORIGIN_MODES, Grid
from .solver import FFT_PRECISIONS, GuardConfig

DEFAULT_Q_LIST = (Fraction(2), Fraction(4), INF)
DEFAULT_SAMPLE_EVERY = 10
TIME_TOL = 1e-9

_TOP_KEYS = {"d", "b", "alpha", "mu", "L", "n", "grid", "dt", "t_final", "sample_every", "initial",
             "q_list", "checkpoints", "output_dir", "origin", "fft_precision", "guards"}
_INITIAL_KEYS = {"A", "sigma", "center", "phase"}
_GUARD_KEYS = {"boundary_tol", "spectral_tol", "overflow_factor", "enabled"}


@dataclass(frozen=True)
class GaussianSpec:
    """A exp(-|x - c|^2 / (2 sigma^2)) exp(i p . x); c and p are scalars or d-vectors."""

    A: float = 1.0
    sigma: float = 1.0
    center: Any = 0.0
    phase: Any = 0.0

    def to_dict(self) -> dict:
        return {"A": self.A, "sigma": self.sigma, "center": self.center, "phase": self.phase}


@dataclass(frozen=True)
class RunConfig:
    params: ProblemParams
    L: float
    n: int
    dt: float
    t_final: float
    sample_every: int = DEFAULT_SAMPLE_EVERY
    initial: GaussianSpec = dc_field(default_factory=GaussianSpec)
    q_list: tuple = DEFAULT_Q_LIST
    checkpoints: tuple = ()
    output_dir: str = ""
    origin: str = "lattice"
    fft_precision: str = "extended"
    guards: GuardConfig = dc_field(default_factory=GuardConfig)

    @property
    def grid(self) -> Grid:
        return Grid(self.params.d, self.L, self.n)

    @property
    def sample_interval(self) -> float:
        return self.dt * self.sample_every

    def to_dict(self, include_output: bool = True) -> dict:
        p = self.params
        doc = {
            "d": p.d, "b": _rat_out(p.b), "alpha": _rat_out(p.alpha), "mu": p.mu,
            "L": self.L, "n": self.n, "dt": self.dt, "t_final": self.t_final,
            "sample_every": self.sample_every,
            "initial": self.initial.to_dict(),
            "q_list": [_exp_out(q) for q in self.q_list],
            "checkpoints": list(self.checkpoints),
            "origin": self.origin,
            "fft_precision": self.fft_precision,
            "guards": self.guards.to_dict(),
        }
        if include_output:
            doc["output_dir"] = self.output_dir
        return doc

    def canonical_json(self) -> str:
        """Sorted keys, no whitespace; the output directory is not part of the identity."""
        return json.dumps(self.to_dict(include_output=False), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _rat_out(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _exp_out(q: Exponent):
    return "inf" if q == INF else _rat_out(Fraction(q))


# ------------------------------------------------------------------ parsing

def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


class _Reader:
    def __init__(self, doc: dict, text: str):
        self.doc = doc
        self.text = text

    def fail(self, key: str, message: str) -> ParseError:
        return ParseError(message, line=_line_of(self.text, key.split(".")[-1]), field=key)

    def number(self, obj: dict, key: str, path: str, default=None, integer=False):
        if key not in obj:
            if default is None:
                raise ParseError("missing required field", line=None, field=path)
            return default
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.fail(path, f"expected a number, got {type(v).__name__}")
        if integer:
            if isinstance(v, float):
                if not v.is_integer():
                    raise self.fail(path, "expected an integer")
                v = int(v)
            return v
        return float(v)

    def rational(self, obj: dict, key: str, path: str, default=None) -> Fraction:
        if key not in obj:
            if default is None:
                raise ParseError("missing required field", field=path)
            return default
        try:
            return as_rational(obj[key])
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise self.fail(path, f"not a rational: {obj[key]!r}") from exc

    def exponent(self, v, path: str) -> Exponent:
        try:
            return as_exponent(v)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise self.fail(path, f"not an exponent: {v!r}") from exc

    def vector(self, obj: dict, key: str, path: str, d: int):
        v = obj.get(key, 0.0)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return float(v)
        if isinstance(v, list) and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
            if len(v) != d:
                raise self.fail(path, f"expected {d} components, got {len(v)}")
            return tuple(float(c) for c in v)
        raise self.fail(path, "expected a number or a list of numbers")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object", line=1)
    return config_from_dict(doc, text)


def config_from_dict(doc: dict, text: str = "") -> RunConfig:
    r = _Reader(doc, text)
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        k = sorted(unknown)[0]
        raise r.fail(k, "unknown field")

    d = r.number(doc, "d", "d", integer=True)
    b = r.rational(doc, "b", "b")
    alpha = r.rational(doc, "alpha", "alpha")
    mu = r.number(doc, "mu", "mu", default=-1, integer=True)

    if "grid" in doc:
        g = doc["grid"]
        if not isinstance(g, dict) or set(g) - {"L", "n"}:
            raise r.fail("grid", 'expected {"L": ..., "n": ...}')
        if "L" in doc or "n" in doc:
            raise r.fail("grid", "grid given twice")
        L = r.number(g, "L", "grid.L")
        n = r.number(g, "n", "grid.n", integer=True)
    else:
        L = r.number(doc, "L", "L")
        n = r.number(doc, "n", "n", integer=True)

    dt = r.number(doc, "dt", "dt")
    t_final = r.number(doc, "t_final", "t_final")
    sample_every = r.number(doc, "sample_every", "sample_every", default=DEFAULT_SAMPLE_EVERY, integer=True)

    ini = doc.get("initial", {})
    if not isinstance(ini, dict):
        raise r.fail("initial", "expected an object")
    if set(ini) - _INITIAL_KEYS:
        raise r.fail("initial." + sorted(set(ini) - _INITIAL_KEYS)[0], "unknown field")
    initial = GaussianSpec(
        A=r.number(ini, "A", "initial.A", default=1.0),
        sigma=r.number(ini, "sigma", "initial.sigma", default=1.0),
        center=r.vector(ini, "center", "initial.center", d if isinstance(d, int) else 1),
        phase=r.vector(ini, "phase", "initial.phase", d if isinstance(d, int) else 1),
    )

    q_raw = doc.get("q_list", list(DEFAULT_Q_LIST))
    if not isinstance(q_raw, list):
        raise r.fail("q_list", "expected a list")
    q_list = tuple(r.exponent(q, "q_list") for q in q_raw) if "q_list" in doc else DEFAULT_Q_LIST

    cp_raw = doc.get("checkpoints", [])
    if not isinstance(cp_raw, list) or not all(isinstance(c, (int, float)) and not isinstance(c, bool)
                                               for c in cp_raw):
        raise r.fail("checkpoints", "expected a list of numbers")
    checkpoints = tuple(float(c) for c in cp_raw)

    out = doc.get("output_dir", "")
    if not isinstance(out, str):
        raise r.fail("output_dir", "expected a string")
    origin = doc.get("origin", "lattice")
    fftp = doc.get("fft_precision", "extended")

    gd = doc.get("guards", {})
    if not isinstance(gd, dict):
        raise r.fail("guards", "expected an object")
    if set(gd) - _GUARD_KEYS:
        raise r.fail("guards." + sorted(set(gd) - _GUARD_KEYS)[0], "unknown field")
    enabled = gd.get("enabled", True)
    if not isinstance(enabled, bool):
        raise r.fail("guards.enabled", "expected true or false")
    default_guards = GuardConfig()
    guards = GuardConfig(
        boundary_tol=r.number(gd, "boundary_tol", "guards.boundary_tol", default=default_guards.boundary_tol),
        spectral_tol=r.number(gd, "spectral_tol", "guards.spectral_tol", default=default_guards.spectral_tol),
        overflow_factor=r.number(gd, "overflow_factor", "guards.overflow_factor",
                                 default=default_guards.overflow_factor),
        enabled=enabled,
    )

    try:
        params = ProblemParams(d, b, alpha, mu)
    except ValueError as exc:
        raise ValidationError(str(exc), invariant=_param_invariant(str(exc))) from exc

    cfg = RunConfig(params=params, L=L, n=n, dt=dt, t_final=t_final, sample_every=sample_every,
                    initial=initial, q_list=q_list, checkpoints=checkpoints, output_dir=out,
                    origin=origin, fft_precision=fftp, guards=guards)
    validate(cfg)
    return cfg


def _param_invariant(msg: str) -> str:
    if "b=" in msg or "min(2, d)" in msg:
        return "0 < b < min(2, d)"
    if "alpha" in msg:
        return "alpha > 0"
    if "mu" in msg:
        return "mu in {-1, 0, 1}"
    return "1 <= d <= 6"


def validate(cfg: RunConfig) -> None:
    """Raise ValidationError naming the first violated invariant."""
    p = cfg.params
    if p.d not in (1, 2, 3):
        raise ValidationError(f"simulations run in d = 1, 2, 3 only (got d = {p.d})", "grid dimension in 1..3")
    try:
        Grid(p.d, cfg.L, cfg.n)
    except BadSize as exc:
        raise ValidationError(str(exc), "n a power of two >= 8 and L > 0") from exc
    if not (cfg.dt > 0 and math.isfinite(cfg.dt)):
        raise ValidationError(f"dt must be positive, got {cfg.dt}", "dt > 0")
    if not (cfg.t_final > 0 and math.isfinite(cfg.t_final)):
        raise ValidationError(f"t_final must be positive, got {cfg.t_final}", "t_final > 0")
    if cfg.sample_every < 1:
        raise ValidationError("sample_every must be at least 1", "sample_every >= 1")
    if not cfg.initial.sigma > 0:
        raise ValidationError("initial.sigma must be positive", "sigma > 0")
    if not cfg.q_list:
        raise ValidationError("q_list is empty", "q_list nonempty")
    if len(set(cfg.q_list)) != len(cfg.q_list):
        raise ValidationError("q_list has duplicates", "q_list distinct")
    for q in cfg.q_list:
        if not q_in_decay_range(p.d, q):
            rng = "[2, inf]" if p.d == 1 else "[2, inf)" if p.d == 2 else f"[2, {2 * p.d}/{p.d - 2}]"
            raise ValidationError(f"q = {_exp_out(q)} outside {rng} for d = {p.d}", "q in decay range")
    cps = cfg.checkpoints
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValidationError("checkpoints must be strictly increasing", "checkpoints increasing")
    h = cfg.sample_interval
    for c in cps:
        if not 0 <= c <= cfg.t_final + TIME_TOL:
            raise ValidationError(f"checkpoint {c} outside [0, t_final]", "checkpoints within horizon")
        if abs(c / h - round(c / h)) > 1e-6:
            raise ValidationError(f"checkpoint {c} is not a multiple of the sampling interval {h}",
                                  "checkpoints on sampling grid")
    if cfg.origin not in ORIGIN_MODES:
        raise ValidationError(f"origin must be one of {ORIGIN_MODES}", "origin mode")
    if cfg.fft_precision not in FFT_PRECISIONS:
        raise ValidationError(f"fft_precision must be one of {FFT_PRECISIONS}", "fft precision")
    g = cfg.guards
    if not (g.boundary_tol > 0 and g.spectral_tol > 0 and g.overflow_factor > 1):
        raise ValidationError("guard thresholds must be positive (overflow_factor > 1)", "guard thresholds")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, str(path))


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2) + "\n"
